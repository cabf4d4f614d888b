#include "jkoflow/presets.hpp"

#include <cmath>

namespace jkoflow {

namespace {

// smooth two-sided sigmoid (1 + tanh(s))/2
double sigmoid(double s) { return 0.5 * (1.0 + std::tanh(s)); }
double sigmoid_prime(double s) {
    const double c = std::cosh(s);
    return 0.5 / (c * c);
}

GridDensity normalized(const GridSpec& grid, std::vector<double> values) {
    double mass = 0.0;
    for (double v : values) mass += v;
    mass *= grid.dx;
    if (!(mass > 0.0)) throw InvariantError("initial datum: zero mass on the grid");
    for (auto& v : values) v /= mass;
    return GridDensity(grid, std::move(values));
}

// 5-point Gauss-Legendre cell averages of a pointwise profile
GridDensity cell_averaged(const GridSpec& grid, const std::function<double(double)>& f) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    std::vector<double> values(grid.cells, 0.0);
    for (std::size_t i = 0; i < grid.cells; ++i) {
        const double c = grid.center(i);
        double s = 0.0;
        for (int q = 0; q < 5; ++q) s += gw[q] * f(c + 0.5 * grid.dx * gx[q]);
        values[i] = 0.5 * s;
    }
    return normalized(grid, std::move(values));
}

} // namespace

ConvectionCoefficient make_b_preset(const ProblemConfig& problem) {
    const double A = problem.b_amplitude;
    if (problem.b_preset == "zero") {
        ConvectionCoefficient cc;
        cc.name = "zero";
        cc.b = [](double) { return 0.0; };
        cc.b_prime = [](double) { return 0.0; };
        cc.l1_norm_bound = 0.0;
        cc.lipschitz_bound = 0.0;
        return cc;
    }
    if (problem.b_preset == "gaussian") {
        ConvectionCoefficient cc;
        cc.name = "gaussian";
        cc.b = [A](double y) { return A * std::exp(-y * y); };
        cc.b_prime = [A](double y) { return -2.0 * y * A * std::exp(-y * y); };
        cc.l1_norm_bound = std::abs(A) * std::sqrt(std::acos(-1.0)) * (1.0 + 1e-12);
        // sup |b'| = A sqrt(2) e^(-1/2) < A; sup |b| = A
        cc.lipschitz_bound = std::abs(A) * (1.0 + 1e-12);
        return cc;
    }
    if (problem.b_preset == "smoothed_indicator") {
        constexpr double w = 0.02;
        ConvectionCoefficient cc;
        cc.name = "smoothed_indicator";
        cc.b = [A](double y) { return A * sigmoid(y / w) * sigmoid((1.0 - y) / w); };
        cc.b_prime = [A](double y) {
            return A / w *
                   (sigmoid_prime(y / w) * sigmoid((1.0 - y) / w) -
                    sigmoid(y / w) * sigmoid_prime((1.0 - y) / w));
        };
        cc.l1_norm_bound = std::abs(A) * (1.0 + 4.0 * w);
        cc.lipschitz_bound = std::abs(A) * std::max(1.0, 0.5 / w) * (1.0 + 1e-12);
        return cc;
    }
    throw ConfigError("make_b_preset: unknown preset '" + problem.b_preset + "'");
}

double barenblatt_support_radius(double m, double t) {
    const double alpha = 1.0 / (m + 1.0);
    const double kappa = (m - 1.0) / (2.0 * m * (m + 1.0));
    // unit-mass constant via the Beta function
    const double p = 1.0 / (m - 1.0);
    const double C = std::pow(std::sqrt(kappa) / std::beta(p + 1.0, 0.5), 1.0 / (p + 0.5));
    return std::sqrt(C / kappa) * std::pow(t, alpha);
}

double barenblatt_value(double m, double t, double y) {
    if (!(m > 1.0) || !(t > 0.0)) throw InvariantError("barenblatt_value: need m > 1, t > 0");
    const double alpha = 1.0 / (m + 1.0);
    const double kappa = (m - 1.0) / (2.0 * m * (m + 1.0));
    const double p = 1.0 / (m - 1.0);
    const double C = std::pow(std::sqrt(kappa) / std::beta(p + 1.0, 0.5), 1.0 / (p + 0.5));
    const double ta = std::pow(t, -alpha);
    const double arg = C - kappa * y * y * ta * ta;
    return arg > 0.0 ? ta * std::pow(arg, p) : 0.0;
}

GridDensity barenblatt_density(double m, double t, const GridSpec& grid) {
    return cell_averaged(grid, [m, t](double y) { return barenblatt_value(m, t, y); });
}

GridDensity make_initial(const InitialConfig& initial, double m, const GridSpec& y_grid) {
    if (initial.preset == "barenblatt") return barenblatt_density(m, initial.t0, y_grid);
    if (initial.preset == "uniform") {
        if (!(initial.hi > initial.lo))
            throw ConfigError("initial uniform: need hi > lo");
        return cell_averaged(y_grid, [&](double y) {
            return (y >= initial.lo && y <= initial.hi) ? 1.0 : 0.0;
        });
    }
    if (initial.preset == "double_bump") {
        return cell_averaged(y_grid, [&](double y) {
            auto bump = [](double s) {
                const double d = 1.0 - s * s;
                return d > 0.0 ? std::exp(-1.0 / d) : 0.0;
            };
            return bump((y - initial.c1) / initial.w1) +
                   initial.weight2 * bump((y - initial.c2) / initial.w2);
        });
    }
    if (initial.preset == "riemann_smoothed") {
        // two plateaus joined by a smoothed step, cut off by a wide bump
        return cell_averaged(y_grid, [&](double y) {
            const double s = sigmoid(y / initial.step_width);
            const double level = initial.h_left + (initial.h_right - initial.h_left) * s;
            const double d = 1.0 - square(y / initial.support);
            const double window = d > 0.0 ? std::exp(1.0 - 1.0 / d) : 0.0;
            return level * window;
        });
    }
    throw ConfigError("make_initial: unknown preset '" + initial.preset + "'");
}

} // namespace jkoflow
