#include "jkoflow/refsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jkoflow {

double cfl_dt_limit(double sup_u, double dy, double m, double nu, double sup_abs_b,
                    double cfl_safety) {
    const double dmax = m * std::pow(std::max(sup_u, 0.0), m - 1.0);
    double limit = dy * dy / (2.0 * (dmax + nu));
    const double bmax = sup_abs_b * dmax;
    if (bmax > 0.0) limit = std::min(limit, dy / bmax);
    if (!std::isfinite(limit)) limit = std::numeric_limits<double>::max();
    return cfl_safety * limit;
}

void fv_step_kernel(std::span<const double> u, std::span<double> out, double dy, double dt,
                    double m, double nu, std::span<const double> b_iface) {
    const std::size_t n = u.size();
    static thread_local std::vector<double> um;
    um.resize(n);
    for (std::size_t i = 0; i < n; ++i) um[i] = std::pow(u[i], m);

    // flux at interface i (between cells i-1 and i); zero at both ends
    auto flux = [&](std::size_t i) -> double {
        if (i == 0 || i == n) return 0.0;
        const double diff = (um[i] - um[i - 1] + nu * (u[i] - u[i - 1])) / dy;
        const double b = b_iface[i];
        const double drift = b * (b > 0.0 ? um[i] : um[i - 1]);
        return diff + drift;
    };

    double left = flux(0);
    for (std::size_t i = 0; i < n; ++i) {
        const double right = flux(i + 1);
        out[i] = u[i] + dt / dy * (right - left);
        left = right;
    }
}

namespace {

std::vector<double> interface_b(const FvProblem& prob, const GridSpec& g) {
    std::vector<double> b(g.cells + 1);
    for (std::size_t i = 0; i <= g.cells; ++i) b[i] = prob.b(g.edge(i));
    return b;
}

double sup_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

std::vector<double> sanitize(std::vector<double> v) {
    for (auto& x : v) {
        if (x < 0.0) {
            if (x < -1e-12) throw Error("refsolver: update produced a negative cell value");
            x = 0.0;
        }
    }
    return v;
}

} // namespace

GridDensity fv_step(const GridDensity& u, const FvProblem& prob, const FvConfig& cfg) {
    if (u.grid().cells != cfg.y_grid.cells || u.grid().dx != cfg.y_grid.dx)
        throw InvariantError("fv_step: density grid does not match config grid");
    const std::vector<double> b = interface_b(prob, u.grid());
    const double limit = cfl_dt_limit(u.sup(), u.dx(), prob.m, cfg.nu, sup_abs(b),
                                      cfg.cfl_safety);
    if (cfg.dt > limit)
        throw CflError("fv_step: dt = " + std::to_string(cfg.dt) +
                           " violates the stability restriction; use dt <= " +
                           std::to_string(limit),
                       limit);
    std::vector<double> out(u.cells());
    fv_step_kernel(u.values(), out, u.dx(), cfg.dt, prob.m, cfg.nu, b);
    return GridDensity(u.grid(), sanitize(std::move(out)));
}

GridDensity SpaceTimeField::density(std::size_t j) const {
    std::vector<double> v = values.at(j);
    const double mass = std::accumulate(v.begin(), v.end(), 0.0) * grid.dx;
    for (auto& x : v) x = std::max(x, 0.0) / mass;
    return GridDensity(grid, std::move(v));
}

double SpaceTimeField::sup() const {
    double s = 0.0;
    for (const auto& row : values) s = std::max(s, sup_abs(row));
    return s;
}

double SpaceTimeField::dt_snapshot() const {
    if (times.size() < 2) throw Error("SpaceTimeField: need at least two snapshots");
    const double dt = times[1] - times[0];
    for (std::size_t j = 1; j + 1 < times.size(); ++j)
        if (std::abs(times[j + 1] - times[j] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw Error("SpaceTimeField: snapshot times are not uniformly spaced");
    return dt;
}

SpaceTimeField fv_run(const GridDensity& u0, const FvProblem& prob, const FvConfig& cfg,
                      std::span<const double> snapshot_times) {
    if (u0.grid().cells != cfg.y_grid.cells)
        throw InvariantError("fv_run: initial datum grid does not match config grid");
    const std::vector<double> b = interface_b(prob, u0.grid());
    const double b_sup = sup_abs(b);
    const double dy = u0.dx();

    SpaceTimeField field;
    field.grid = u0.grid();
    std::vector<double> u(u0.values().begin(), u0.values().end());
    std::vector<double> next(u.size());

    double t = 0.0;
    auto snap = [&](double time) {
        field.times.push_back(time);
        field.values.push_back(u);
    };
    for (double target : snapshot_times) {
        if (target < t - 1e-12) throw InvariantError("fv_run: snapshot times must be increasing");
        while (t < target - 1e-12) {
            double dt = std::min(cfg.dt, cfl_dt_limit(sup_abs(u), dy, prob.m, cfg.nu, b_sup,
                                                      cfg.cfl_safety));
            dt = std::min(dt, target - t);
            fv_step_kernel(u, next, dy, dt, prob.m, cfg.nu, b);
            u.swap(next);
            t += dt;
        }
        t = target;
        snap(t);
    }
    // validate nonnegativity once per run
    for (auto& row : field.values)
        for (auto& x : row) {
            if (x < -1e-12) throw Error("fv_run: negative cell value; CFL safety too large");
            x = std::max(x, 0.0);
        }
    return field;
}

double l1_distance(const GridDensity& u, const GridDensity& v) {
    const auto& gu = u.grid();
    const auto& gv = v.grid();
    if (gu.cells != gv.cells || std::abs(gu.dx - gv.dx) > 1e-12 * gu.dx ||
        std::abs(gu.x_min - gv.x_min) > 1e-9 * std::max(1.0, std::abs(gu.x_min)))
        throw InvariantError("l1_distance: grids do not match");
    double s = 0.0;
    for (std::size_t i = 0; i < gu.cells; ++i) s += std::abs(u.value(i) - v.value(i));
    return s * gu.dx;
}

} // namespace jkoflow
