#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jkoflow/energy.hpp"
#include "jkoflow/measure1d.hpp"

namespace jkoflow {

struct JkoConfig {
    double tau = 1e-3;            // time step
    std::size_t n_quantiles = 400;  // >= 8
    double t_end = 0.5;
    double inner_tol = 1e-9;      // first-order optimality on the step objective
    int inner_max_iter = 120;
};

// Discrete functionals evaluated directly on the quantile representation.
// The n-1 interior increments carry weight 1/n each (midpoint quadrature of
// the omega-integral); densities on increments are rho_j = 1/(n dG_j).

/// (1/n) sum_j H(midpoint_j, n dG_j); +inf sentinel when any increment <= 0.
double discrete_potential(const Quantile& g, const EnergyFunctional& ef);
/// Boltzmann entropy: -(1/n) sum_j log(n dG_j).
double discrete_entropy(const Quantile& g);
/// Second moment: (1/n) sum_i G_i^2.
double discrete_second_moment(const Quantile& g);
/// int rho^m = (1/n) sum_j (n dG_j)^(1-m).
double discrete_lm_norm(const Quantile& g, double m);
/// int [d/dx (rho^(m/2))]^2 from increment-density differences.
double discrete_h1_rho_m_half(const Quantile& g, double m);

/// Penalized step objective (1/2tau) W2(G, G_prev)^2 + discrete_potential(G).
double step_objective(const Quantile& g, const Quantile& g_prev, double tau,
                      const EnergyFunctional& ef);

struct StepResult {
    Quantile state;
    double objective = 0.0;
    double grad_norm = 0.0;  // _inf norm of the objective gradient at `state`
    int iterations = 0;
    bool converged = false;
};

/// Minimize the step objective from the warm start G_prev.
///
/// Damped quasi-second-order descent: the objective couples only neighbouring
/// quantile values, so its Hessian is tridiagonal; each iteration solves the
/// (Levenberg-regularized) tridiagonal Newton system and backtracks along the
/// direction, rejecting any iterate with a nonpositive increment. H's
/// xi^(1-m) barrier keeps finite-objective iterates strictly monotone.
StepResult jko_step(const Quantile& g_prev, const JkoConfig& cfg, const EnergyFunctional& ef);

struct StepDiagnostics {
    double w2_to_prev = 0.0;
    double potential = 0.0;
    double entropy = 0.0;
    double second_moment = 0.0;
    double h1_seminorm_rho_m_half = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

/// Time-indexed JKO states with piecewise-constant-in-time interpretation:
/// states[n] holds at t in ((n-1) tau, n tau].
struct Trajectory {
    double tau = 0.0;
    std::vector<Quantile> states;
    std::vector<StepDiagnostics> per_step;  // aligned with states; [0] has w2 = 0
    std::optional<std::string> aborted;     // failure note; states up to failure kept

    double time(std::size_t n) const { return tau * static_cast<double>(n); }
    std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
};

Trajectory run_jko(const Quantile& start, const JkoConfig& cfg, const EnergyFunctional& ef);
Trajectory run_jko(const GridDensity& rho0, const JkoConfig& cfg, const EnergyFunctional& ef);

struct EstimateCheck {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // worst slack (negative = violated)
    std::string detail;
};

struct DiagnosticsReport {
    std::vector<EstimateCheck> checks;
    bool all_pass = true;
};

/// A-posteriori verification of the discrete energy estimates along a run:
/// monotone potential, square-summability of the W2 increments, second-moment
/// growth, entropy/dissipation balance, the Hoelder-in-time bound at snapshot
/// times, and the weighted maximum principle on reconstructed densities.
/// Violations are reported per estimate, not fatal.
DiagnosticsReport diagnostics_check(const Trajectory& traj, const EnergyFunctional& ef);

void write_trajectory(const Trajectory& traj, const std::string& directory);

} // namespace jkoflow
