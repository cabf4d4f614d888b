#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "jkoflow/jko.hpp"
#include "jkoflow/presets.hpp"
#include "oracles.hpp"

using namespace jkoflow;

namespace {

EnergyFunctional pme_energy(double window = 10.0) {
    // b = 0, alpha0 = 1: a = m/(m-1) = 2 for m = 2
    return EnergyFunctional::with_constant_a(2.0, 2.0, -window, window, 1e-2);
}

Quantile barenblatt_quantile(double t, std::size_t n, std::size_t grid_cells = 4000) {
    const double r = barenblatt_support_radius(2.0, t) * 1.02;
    const GridSpec g{-r, 2.0 * r / static_cast<double>(grid_cells), grid_cells};
    return to_quantile(barenblatt_density(2.0, t, g), n);
}

} // namespace

TEST_CASE("step_objective: hand-evaluated two-point formula") {
    const EnergyFunctional ef = pme_energy();
    const Quantile g({0.0, 1.0});
    // transport term zero; single increment dG = 1, xi = n dG = 2,
    // H = a xi^(1-m)/m = 2 * (1/2) / 2 = 0.5, objective = H / n = 0.25
    CHECK(step_objective(g, g, 0.1, ef) == doctest::Approx(0.25).epsilon(1e-15));

    // shifted outer points: transport (1/(2 tau n)) * 0.02, H-part with dG = 1.2
    const Quantile g2({-0.1, 1.1});
    const double tau = 0.5;
    const double transport = (0.01 + 0.01) / (2.0 * tau * 2.0);
    const double hpart = 0.5 * (2.0 * std::pow(2.4, -1.0) / 2.0);
    CHECK(step_objective(g2, g, tau, ef) == doctest::Approx(transport + hpart).epsilon(1e-15));
}

TEST_CASE("step_objective: G = G_prev reduces to the discrete potential") {
    const EnergyFunctional ef = pme_energy();
    const Quantile g = barenblatt_quantile(0.1, 64);
    CHECK(step_objective(g, g, 1e-3, ef) == doctest::Approx(discrete_potential(g, ef)));
    // tau -> infinity: transport term washes out
    const Quantile shifted = shift(g, 0.25);
    CHECK(step_objective(shifted, g, 1e12, ef) ==
          doctest::Approx(discrete_potential(g, ef)).epsilon(1e-9));
}

TEST_CASE("step_objective: infeasible iterates get the +inf sentinel") {
    const EnergyFunctional ef = pme_energy();
    const Quantile flat({0.0, 0.5, 0.5, 1.0});
    const Quantile ok({0.0, 0.4, 0.6, 1.0});
    CHECK(std::isinf(step_objective(flat, ok, 0.1, ef)));
    CHECK(std::isinf(discrete_potential(flat, ef)));
}

TEST_CASE("jko_step: energy decrease, canonical estimate, first-order optimality") {
    const EnergyFunctional ef = pme_energy();
    JkoConfig cfg;
    cfg.tau = 1e-3;
    cfg.inner_tol = 1e-10;
    const Quantile g0 = barenblatt_quantile(0.1, 200);
    const StepResult r = jko_step(g0, cfg, ef);
    REQUIRE(r.converged);
    CHECK(r.grad_norm <= cfg.inner_tol);

    const double f0 = discrete_potential(g0, ef);
    const double f1 = discrete_potential(r.state, ef);
    CHECK(f1 <= f0);

    const double w2 = wasserstein2(r.state, g0);
    CHECK(w2 * w2 <= 2.0 * cfg.tau * (f0 - f1) * (1.0 + 1e-9) + 1e-18);
}

TEST_CASE("jko_step: reflection symmetry of the source-type profile is preserved") {
    const EnergyFunctional ef = pme_energy();
    JkoConfig cfg;
    cfg.tau = 1e-4;
    cfg.inner_tol = 1e-11;
    const Quantile g0 = barenblatt_quantile(0.1, 128);
    const StepResult r = jko_step(g0, cfg, ef);
    REQUIRE(r.converged);
    const std::size_t n = r.state.size();
    // outward symmetric motion: antisymmetric quantile, and support must grow
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(r.state.value(i) + r.state.value(n - 1 - i)) < 1e-8);
    CHECK(r.state.value(n - 1) > g0.value(n - 1));
    CHECK(r.state.value(0) < g0.value(0));
}

TEST_CASE("run_jko: mass, monotone states, diagnostics populated") {
    const EnergyFunctional ef = pme_energy();
    JkoConfig cfg;
    cfg.tau = 1e-3;
    cfg.t_end = 0.02;
    cfg.n_quantiles = 100;
    const Trajectory traj = run_jko(barenblatt_quantile(0.1, 100), cfg, ef);
    REQUIRE(!traj.aborted);
    REQUIRE(traj.states.size() == 21);
    REQUIRE(traj.per_step.size() == 21);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const GridDensity d = to_density(traj.states[k], GridSpec{-2.0, 0.004, 1000});
        CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::isfinite(traj.per_step[k].potential));
        CHECK(std::isfinite(traj.per_step[k].entropy));
        CHECK(std::isfinite(traj.per_step[k].h1_seminorm_rho_m_half));
    }
    CHECK(traj.per_step[0].w2_to_prev == 0.0);
}

TEST_CASE("run_jko: tau-halving consistency in W2") {
    const EnergyFunctional ef = pme_energy();
    const Quantile g0 = barenblatt_quantile(0.1, 100);
    JkoConfig coarse;
    coarse.tau = 2e-3;
    coarse.t_end = 0.04;
    coarse.n_quantiles = 100;
    JkoConfig fine = coarse;
    fine.tau = 1e-3;
    const Trajectory tc = run_jko(g0, coarse, ef);
    const Trajectory tf = run_jko(g0, fine, ef);
    REQUIRE(!tc.aborted);
    REQUIRE(!tf.aborted);
    const double f0 = discrete_potential(g0, ef);
    double worst = 0.0;
    for (std::size_t k = 0; k < tc.states.size(); ++k)
        worst = std::max(worst, wasserstein2(tc.states[k], tf.states[2 * k]));
    // consistency at the Hoelder-1/2 scale in tau
    CHECK(worst <= 3.0 * std::sqrt(2.0 * f0) * std::sqrt(coarse.tau));
}

TEST_CASE("diagnostics_check: single-state trajectory passes trivially") {
    const EnergyFunctional ef = pme_energy();
    Trajectory traj;
    traj.tau = 1e-3;
    const Quantile g = barenblatt_quantile(0.2, 64);
    traj.states.push_back(g);
    StepDiagnostics d;
    d.potential = discrete_potential(g, ef);
    d.entropy = discrete_entropy(g);
    d.second_moment = discrete_second_moment(g);
    d.h1_seminorm_rho_m_half = discrete_h1_rho_m_half(g, 2.0);
    traj.per_step.push_back(d);
    const DiagnosticsReport rep = diagnostics_check(traj, ef);
    CHECK(rep.all_pass);
}

TEST_CASE("diagnostics_check: porous-medium run satisfies every estimate") {
    const EnergyFunctional ef = pme_energy();
    JkoConfig cfg;
    cfg.tau = 1e-3;
    cfg.t_end = 0.05;
    cfg.n_quantiles = 150;
    const Trajectory traj = run_jko(barenblatt_quantile(0.1, 150), cfg, ef);
    REQUIRE(!traj.aborted);
    const DiagnosticsReport rep = diagnostics_check(traj, ef);
    for (const auto& c : rep.checks) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.pass);
    }
    // constant weight: the growth term of the entropy/dissipation estimate
    // vanishes (sup a_xx = 0), so the balance is pure dissipation
    CHECK(ef.a_second_derivative_sup == 0.0);
}

TEST_CASE("discrete functionals match their grid counterparts on smooth states") {
    const EnergyFunctional ef = pme_energy();
    const Quantile g = barenblatt_quantile(0.2, 800);
    const GridSpec grid{-2.0, 0.002, 2000};
    const GridDensity d = to_density(g, grid);
    CHECK(discrete_potential(g, ef) == doctest::Approx(potential(d, ef)).epsilon(1e-2));
    CHECK(discrete_second_moment(g) == doctest::Approx(second_moment(d)).epsilon(1e-2));
    // entropy: s log s -> 0 cells make the grid value slightly differ; loose
    CHECK(discrete_entropy(g) == doctest::Approx(boltzmann_entropy(d)).epsilon(5e-2));
}

TEST_CASE("trajectory serialization") {
    const EnergyFunctional ef = pme_energy();
    JkoConfig cfg;
    cfg.tau = 1e-3;
    cfg.t_end = 0.003;
    cfg.n_quantiles = 32;
    const Trajectory traj = run_jko(barenblatt_quantile(0.1, 32), cfg, ef);
    write_trajectory(traj, "jko_traj_test_out");
    std::ifstream meta("jko_traj_test_out/meta.csv");
    REQUIRE(meta.good());
    std::string line;
    std::size_t states = 0;
    while (std::getline(meta, line))
        if (!line.empty() && line[0] != '#') ++states;
    CHECK(states == traj.states.size());
    std::ifstream s0("jko_traj_test_out/state_000000.csv");
    const Quantile q0 = read_quantile_csv(s0);
    CHECK(q0.size() == 32);
    for (std::size_t i = 0; i < 32; ++i) CHECK(q0.value(i) == traj.states[0].value(i));
}
