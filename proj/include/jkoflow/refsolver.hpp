#pragma once

#include <functional>
#include <span>
#include <vector>

#include "jkoflow/measure1d.hpp"

namespace jkoflow {

/// One instance of the physical equation: nonlinearity exponent and drift.
struct FvProblem {
    double m = 2.0;
    std::function<double(double)> b = [](double) { return 0.0; };
    std::function<double(double)> b_prime = [](double) { return 0.0; };
};

struct FvConfig {
    GridSpec y_grid;
    double dt = 1e-4;          // upper bound; runs re-evaluate the CFL limit per step
    double nu = 0.0;           // artificial viscosity
    double t_end = 0.5;
    double cfl_safety = 0.45;  // in (0,1); <= 0.5 keeps the combined update monotone
};

/// dt violates the parabolic/convective stability restriction.
class CflError : public Error {
public:
    CflError(const std::string& msg, double recommended)
        : Error(msg), recommended_dt(recommended) {}
    double recommended_dt;
};

/// cfl_safety * min( dy^2 / 2(D_max + nu), dy / B_max ) with
/// D_max = m (sup u)^(m-1), B_max = sup|b| m (sup u)^(m-1).
double cfl_dt_limit(double sup_u, double dy, double m, double nu, double sup_abs_b,
                    double cfl_safety);

/// Explicit conservative update: central second differences for (u^m)_yy and
/// nu u_yy, drift flux b u^m upwinded on the sign of b at each interface,
/// zero-flux ends. b_iface holds b at the cells+1 cell edges.
void fv_step_kernel(std::span<const double> u, std::span<double> out, double dy, double dt,
                    double m, double nu, std::span<const double> b_iface);

/// Single validated step on a unit-mass density; throws CflError with the
/// recommended dt when cfg.dt violates the restriction for the current sup u.
GridDensity fv_step(const GridDensity& u, const FvProblem& prob, const FvConfig& cfg);

/// Space-time samples of a solution on a fixed grid at (uniformly spaced)
/// snapshot times; shared between the reference solver and the entropy check.
struct SpaceTimeField {
    GridSpec grid;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // values[j][i] at times[j], cell i

    GridDensity density(std::size_t j) const;
    double sup() const;
    /// snapshot spacing; throws unless times are uniform within 1e-9
    double dt_snapshot() const;
};

/// March to each requested snapshot time with dt = min(cfg.dt, CFL limit),
/// clamping steps so snapshot times are hit exactly.
SpaceTimeField fv_run(const GridDensity& u0, const FvProblem& prob, const FvConfig& cfg,
                      std::span<const double> snapshot_times);

double l1_distance(const GridDensity& u, const GridDensity& v);

} // namespace jkoflow
