#include "jkoflow/transform.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace jkoflow {

namespace {

// aligned grid with x = 0 on a node: returns (x0, count, index_of_zero)
struct AlignedGrid {
    double x0;
    std::size_t count;
    std::size_t zero;
};

AlignedGrid align_grid(double lo, double hi, double step) {
    if (!(lo < 0.0) || !(hi > 0.0))
        throw InvariantError("tabulation window must contain 0 in its interior");
    const auto n_lo = static_cast<std::size_t>(std::ceil(-lo / step - 1e-12));
    const auto n_hi = static_cast<std::size_t>(std::ceil(hi / step - 1e-12));
    return {-static_cast<double>(n_lo) * step, n_lo + n_hi + 1, n_lo};
}

} // namespace

void ConvectionCoefficient::validate(double y_lo, double y_hi, int samples) const {
    const double slack = 1e-9 + 1e-9 * lipschitz_bound;
    for (int i = 0; i < samples; ++i) {
        const double y = y_lo + (y_hi - y_lo) * i / (samples - 1);
        const double by = b(y);
        const double bpy = b_prime(y);
        if (!std::isfinite(by) || !std::isfinite(bpy))
            throw InvariantError("ConvectionCoefficient '" + name + "': non-finite value at y = " +
                                 std::to_string(y));
        if (std::abs(by) > lipschitz_bound + slack)
            throw InvariantError("ConvectionCoefficient '" + name + "': |b| exceeds bound at y = " +
                                 std::to_string(y));
        if (std::abs(bpy) > lipschitz_bound + slack)
            throw InvariantError("ConvectionCoefficient '" + name +
                                 "': |b'| exceeds bound at y = " + std::to_string(y));
    }
    const double l1 = simpson([this](double y) { return std::abs(b(y)); }, y_lo, y_hi, 4 * samples);
    if (l1 > l1_norm_bound + 1e-6 * (1.0 + l1_norm_bound))
        throw InvariantError("ConvectionCoefficient '" + name + "': integral of |b| (" +
                             std::to_string(l1) + ") exceeds certified bound");
}

bool TransformedCoefficients::is_identity() const {
    return alpha.max_value() - alpha.min_value() == 0.0 && alpha.min_value() == 1.0;
}

TabulatedFunction alpha_from_b(const ConvectionCoefficient& cc, double m, double alpha0,
                               double y_lo, double y_hi, double step) {
    if (!(m > 1.0)) throw InvariantError("alpha_from_b: need m > 1");
    if (!(alpha0 > 0.0)) throw InvariantError("alpha_from_b: need alpha0 > 0");
    const AlignedGrid g = align_grid(y_lo, y_hi, step);

    // cumulative integral of b outward from the zero node, Simpson per interval
    std::vector<double> integral(g.count, 0.0);
    auto piece = [&](double a, double b2) { return simpson(cc.b, a, b2, 4); };
    for (std::size_t i = g.zero; i + 1 < g.count; ++i) {
        const double ya = g.x0 + step * static_cast<double>(i);
        integral[i + 1] = integral[i] + piece(ya, ya + step);
    }
    for (std::size_t i = g.zero; i > 0; --i) {
        const double ya = g.x0 + step * static_cast<double>(i);
        integral[i - 1] = integral[i] - piece(ya - step, ya);
    }

    const double c = (m - 1.0) / (2.0 * m);
    std::vector<double> alpha(g.count);
    for (std::size_t i = 0; i < g.count; ++i) {
        alpha[i] = alpha0 * std::exp(-c * integral[i]);
        if (!std::isfinite(alpha[i]) || !(alpha[i] > 0.0))
            throw Error("alpha_from_b: quadrature produced unusable alpha at node " +
                        std::to_string(i));
    }
    return TabulatedFunction(g.x0, step, std::move(alpha));
}

TabulatedFunction solve_T(const TabulatedFunction& alpha, double x_lo, double x_hi, double step) {
    if (!(alpha.min_value() > 0.0))
        throw InvariantError("solve_T: alpha must be bounded below by a positive constant");
    const AlignedGrid g = align_grid(x_lo, x_hi, step);
    std::vector<double> T(g.count, 0.0);

    auto rk4 = [&](double t, double h) {
        const double k1 = alpha(t);
        const double k2 = alpha(t + 0.5 * h * k1);
        const double k3 = alpha(t + 0.5 * h * k2);
        const double k4 = alpha(t + h * k3);
        return t + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    try {
        double t = 0.0;
        for (std::size_t i = g.zero; i + 1 < g.count; ++i) {
            t = rk4(t, step);
            T[i + 1] = t;
        }
        t = 0.0;
        for (std::size_t i = g.zero; i > 0; --i) {
            t = rk4(t, -step);
            T[i - 1] = t;
        }
    } catch (const RangeError&) {
        throw RangeError("solve_T: tabulated alpha window exhausted; widen the alpha window");
    }
    return TabulatedFunction(g.x0, step, std::move(T));
}

TabulatedFunction a_from_alpha(const TabulatedFunction& alpha, const TabulatedFunction& T,
                               double m) {
    if (!(m > 1.0)) throw InvariantError("a_from_alpha: need m > 1");
    std::vector<double> a(T.size());
    for (std::size_t i = 0; i < T.size(); ++i)
        a[i] = m / (m - 1.0) * std::pow(alpha(T.value(i)), -(m + 1.0));
    return TabulatedFunction(T.x_min(), T.step(), std::move(a));
}

TabulatedFunction T_from_a(const TabulatedFunction& a, double m) {
    if (!(m > 1.0)) throw InvariantError("T_from_a: need m > 1");
    if (!(a.min_value() > 0.0)) throw InvariantError("T_from_a: a must be positive");
    const double z = -a.x_min() / a.step();
    const auto zero = static_cast<std::size_t>(std::llround(z));
    if (std::abs(z - static_cast<double>(zero)) > 1e-9 || zero >= a.size())
        throw InvariantError("T_from_a: grid of a must contain x = 0 as a node");

    auto integrand = [&](double x) {
        return std::pow((m - 1.0) / m * a(x), -1.0 / (m + 1.0));
    };
    std::vector<double> T(a.size(), 0.0);
    const double h = a.step();
    for (std::size_t i = zero; i + 1 < a.size(); ++i) {
        const double xa = a.node(i);
        T[i + 1] = T[i] + h / 6.0 * (integrand(xa) + 4.0 * integrand(xa + 0.5 * h) +
                                     integrand(xa + h));
    }
    for (std::size_t i = zero; i > 0; --i) {
        const double xa = a.node(i);
        T[i - 1] = T[i] - h / 6.0 * (integrand(xa - h) + 4.0 * integrand(xa - 0.5 * h) +
                                     integrand(xa));
    }
    return TabulatedFunction(a.x_min(), h, std::move(T));
}

TabulatedFunction b_from_a(const TabulatedFunction& a, const TabulatedFunction& T, double m,
                           double y_step) {
    if (!(m > 1.0)) throw InvariantError("b_from_a: need m > 1");
    // (log a)' at nodes by centered differences, then cubic between nodes
    std::vector<double> dloga(a.size());
    const double h = a.step();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t j = std::clamp<std::size_t>(i, 1, a.size() - 2);
        dloga[i] = (std::log(a.value(j + 1)) - std::log(a.value(j - 1))) / (2.0 * h);
    }
    const TabulatedFunction dloga_tab(a.x_min(), h, std::move(dloga));

    // b(T(x)) = 2m/(m^2-1) (log a)'(x) / T'(x); the division by
    // T'(x) = [(m-1)/m a(x)]^(-1/(m+1)) makes the reconstruction exact for the
    // weights produced by a_from_alpha (differentiate a = m/(m-1) (alpha o T)^-(m+1)
    // and use T' = alpha o T). T' is taken from a so that the recovery uses a alone.
    const double prefactor = 2.0 * m / (m * m - 1.0);
    // stay a stencil away from the ends of T so the inversion is well posed
    const double y_lo = T.value(2);
    const double y_hi = T.value(T.size() - 3);
    const auto count =
        static_cast<std::size_t>(std::floor((y_hi - y_lo) / y_step)) + 1;
    std::vector<double> b(std::max<std::size_t>(count, 4));
    for (std::size_t j = 0; j < b.size(); ++j) {
        const double y = y_lo + y_step * static_cast<double>(j);
        const double x = invert_monotone(T, std::min(y, y_hi));
        const double t_prime = std::pow((m - 1.0) / m * a(x), -1.0 / (m + 1.0));
        b[j] = prefactor * dloga_tab(x) / t_prime;
    }
    return TabulatedFunction(y_lo, y_step, std::move(b));
}

TransformedCoefficients build_transform(const ConvectionCoefficient& cc, double m, double alpha0,
                                        double x_lo, double x_hi, double step) {
    // worst-case |T(x)| <= alpha_max |x|, with alpha_max from the certified L1 bound
    const double alpha_max = alpha0 * std::exp((m - 1.0) / (2.0 * m) * cc.l1_norm_bound);
    const double reach = alpha_max * std::max(std::abs(x_lo), std::abs(x_hi)) + 1.0;
    cc.validate(-reach, reach);

    TabulatedFunction alpha = alpha_from_b(cc, m, alpha0, -reach, reach, step);
    TabulatedFunction T = solve_T(alpha, x_lo, x_hi, step);
    TabulatedFunction a = a_from_alpha(alpha, T, m);

    TransformedCoefficients tc{m, alpha0, std::move(alpha), std::move(T), std::move(a)};
    tc.a_lower = tc.a.min_value();
    tc.a_upper = tc.a.max_value();
    tc.a_second_derivative_sup = tc.a.max_second_derivative();
    if (!(tc.a_lower > 0.0))
        throw Error("build_transform: a is not bounded below by a positive constant (a1)");
    return tc;
}

namespace {

// Cell averages on `grid` of the measure whose CDF at a target edge e equals
// source.cdf(edge_map(e)). Mass outside the window is clamped into the
// boundary cells; report carries the boundary mass.
GridDensity cdf_resample(const GridDensity& source, const GridSpec& grid,
                         const std::function<double(double)>& edge_map,
                         ConversionReport* report) {
    std::vector<double> values(grid.cells, 0.0);
    double prev = source.cdf(edge_map(grid.edge(0)));
    const double below = prev;
    double total = 0.0;
    for (std::size_t k = 0; k < grid.cells; ++k) {
        const double next = source.cdf(edge_map(grid.edge(k + 1)));
        double cellmass = std::max(0.0, next - prev);
        if (k == 0) cellmass += below;
        if (k + 1 == grid.cells) cellmass += std::max(0.0, 1.0 - next);
        values[k] = cellmass;
        total += cellmass;
        prev = next;
    }
    const double boundary = values.front() + (grid.cells > 1 ? values.back() : 0.0);
    for (auto& v : values) v /= total * grid.dx;
    if (report) {
        report->atoms = false;
        report->boundary_mass = boundary / total;
        report->window_overflow = report->boundary_mass > 1e-8;
    }
    return GridDensity(grid, std::move(values));
}

} // namespace

GridDensity rescale(const GridDensity& u, const TransformedCoefficients& tc,
                    const GridSpec& x_grid, ConversionReport* report) {
    if (!tc.T.contains(x_grid.edge(0)) || !tc.T.contains(x_grid.x_max()))
        throw RangeError("rescale: x-grid exceeds the tabulated window of T");
    return cdf_resample(u, x_grid, [&](double x) { return tc.T(x); }, report);
}

GridDensity inverse_rescale(const GridDensity& rho, const TransformedCoefficients& tc,
                            const GridSpec& y_grid, ConversionReport* report) {
    const double y_min = tc.T.value(0);
    const double y_max = tc.T.value(tc.T.size() - 1);
    return cdf_resample(rho, y_grid,
                        [&](double y) {
                            if (y <= y_min) return tc.T.x_min();
                            if (y >= y_max) return tc.T.x_max();
                            return tc.T_inverse(y);
                        },
                        report);
}

Quantile map_quantile(const Quantile& q, const TabulatedFunction& T) {
    std::vector<double> v(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) v[i] = T(q.value(i));
    return Quantile(std::move(v));
}

} // namespace jkoflow
