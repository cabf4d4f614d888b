#include "jkoflow/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "jkoflow/pipeline.hpp"

namespace jkoflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

ExperimentConfig barenblatt_config() {
    ExperimentConfig cfg;
    cfg.problem.m = 2.0;
    cfg.problem.b_preset = "zero";
    cfg.problem.alpha0 = 1.0;
    cfg.problem.x_lo = -3.0;
    cfg.problem.x_hi = 3.0;
    cfg.problem.tab_step = 1e-3;
    cfg.initial.preset = "barenblatt";
    cfg.initial.t0 = 0.1;
    cfg.jko.tau = 1e-3;
    cfg.jko.n_quantiles = 400;
    cfg.jko.t_end = 0.4;
    cfg.fv.y_lo = -2.5;
    cfg.fv.y_hi = 2.5;
    cfg.fv.cells = 1000;
    cfg.checks.compare_times = {0.2, 0.4};
    return cfg;
}

ExperimentConfig crossval_config() {
    ExperimentConfig cfg;
    cfg.problem.m = 2.0;
    cfg.problem.b_preset = "gaussian";
    cfg.problem.b_amplitude = 0.5;
    cfg.problem.alpha0 = 1.0;
    cfg.problem.x_lo = -4.8;
    cfg.problem.x_hi = 4.8;
    cfg.problem.tab_step = 1e-3;
    cfg.initial.preset = "riemann_smoothed";
    cfg.jko.tau = 1e-3;
    cfg.jko.n_quantiles = 400;
    cfg.jko.t_end = 0.5;
    cfg.fv.y_lo = -4.0;
    cfg.fv.y_hi = 4.0;
    cfg.fv.cells = 1600;
    cfg.checks.compare_times = {0.1, 0.3, 0.5};
    return cfg;
}

std::vector<double> snapshot_grid(double t_end, double dt) {
    const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
    std::vector<double> t(n + 1);
    for (std::size_t j = 0; j <= n; ++j) t[j] = dt * static_cast<double>(j);
    t.back() = t_end;
    return t;
}

double max_l1_at_compare_times(const Trajectory& traj, const ProblemSetup& setup,
                               std::span<const double> times, const SpaceTimeField& fv) {
    SpaceTimeField jf = jko_to_field(traj, setup.transform, setup.y_grid, times);
    double worst = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
        std::size_t idx = 0;
        while (idx < fv.times.size() && std::abs(fv.times[idx] - times[j]) > 1e-9) ++idx;
        if (idx == fv.times.size())
            throw Error("acceptance: compare time missing from FV snapshots");
        worst = std::max(worst, l1_distance(jf.density(j), fv.density(idx)));
    }
    return worst;
}

struct BarenblattArtifacts {
    ProblemSetup setup;
    Trajectory base;
    Trajectory fine;
    double err_base = 0.0;
    double err_fine = 0.0;
};

struct CrossvalArtifacts {
    ProblemSetup setup;
    Trajectory jko;
    SpaceTimeField fv;
    std::vector<double> snap_times;
    double max_l1 = 0.0;
};

struct Context {
    int jobs = 1;
    std::string out_dir;
    std::optional<BarenblattArtifacts> bb;
    std::optional<CrossvalArtifacts> cv;

    const BarenblattArtifacts& barenblatt() {
        if (!bb) {
            ExperimentConfig cfg = barenblatt_config();
            ProblemSetup setup = build_problem(cfg);
            Trajectory base = run_jko(setup.rho0, cfg.jko, setup.energy);
            JkoConfig fine_cfg = cfg.jko;
            fine_cfg.tau = 5e-4;
            fine_cfg.n_quantiles = 800;
            Trajectory fine = run_jko(setup.rho0, fine_cfg, setup.energy);
            const GridDensity oracle =
                barenblatt_density(cfg.problem.m, cfg.initial.t0 + cfg.jko.t_end, setup.y_grid);
            auto final_err = [&](const Trajectory& t) {
                const Quantile g_y = map_quantile(t.states.back(), setup.transform.T);
                return l1_distance(to_density(g_y, setup.y_grid), oracle);
            };
            const double eb = final_err(base);
            const double ef = final_err(fine);
            bb.emplace(BarenblattArtifacts{std::move(setup), std::move(base), std::move(fine), eb,
                                           ef});
        }
        return *bb;
    }

    const CrossvalArtifacts& crossval() {
        if (!cv) {
            ExperimentConfig cfg = crossval_config();
            ProblemSetup setup = build_problem(cfg);
            Trajectory jko = run_jko(setup.rho0, cfg.jko, setup.energy);
            if (jko.aborted) throw Error("acceptance: cross-validation JKO aborted: " + *jko.aborted);
            std::vector<double> snaps = snapshot_grid(cfg.jko.t_end, 0.005);
            FvConfig fvc{setup.y_grid, 1e-4, 0.0, cfg.jko.t_end, 0.45};
            SpaceTimeField fv = fv_run(setup.u0, setup.fv_problem(), fvc, snaps);
            const double worst =
                max_l1_at_compare_times(jko, setup, cfg.checks.compare_times, fv);
            cv.emplace(CrossvalArtifacts{std::move(setup), std::move(jko), std::move(fv),
                                         std::move(snaps), worst});
        }
        return *cv;
    }
};

const EstimateCheck& find_check(const DiagnosticsReport& rep, const std::string& name) {
    for (const auto& c : rep.checks)
        if (c.name == name) return c;
    throw Error("acceptance: diagnostics check '" + name + "' missing");
}

// ---- criterion 1: source-type closed-form benchmark --------------------

// Central-difference residual of the closed form in d_t u = (u^m)_yy,
// sampled strictly inside the support.
double closed_form_pde_residual(double m, double h) {
    double worst = 0.0;
    for (double t : {0.2, 0.3, 0.4}) {
        const double radius = barenblatt_support_radius(m, t);
        for (int i = -8; i <= 8; ++i) {
            const double y = 0.75 * radius * static_cast<double>(i) / 8.0;
            const double dt_u =
                (barenblatt_value(m, t + h, y) - barenblatt_value(m, t - h, y)) / (2.0 * h);
            const double dyy_um = (std::pow(barenblatt_value(m, t, y + h), m) -
                                   2.0 * std::pow(barenblatt_value(m, t, y), m) +
                                   std::pow(barenblatt_value(m, t, y - h), m)) /
                                  (h * h);
            worst = std::max(worst, std::abs(dt_u - dyy_um));
        }
    }
    return worst;
}

CriterionResult criterion1(Context& ctx) {
    const auto t0 = Clock::now();
    // validate the oracle before using it
    const double r1 = closed_form_pde_residual(2.0, 2e-3);
    const double r2 = closed_form_pde_residual(2.0, 1e-3);
    const bool oracle_ok = r2 < 1e-4 && r1 / r2 > 3.0;

    const auto& bb = ctx.barenblatt();
    const bool pass = oracle_ok && bb.err_base <= 5e-2 && bb.err_fine < bb.err_base;
    const double secs = seconds_since(t0);
    return {1, criterion_name(1), pass && secs <= 120.0,
            fmt("oracle residual O(h^2): %.3g -> %.3g (ratio %.2f); L1 error %.4g <= 0.05; "
                "refined %.4g < base",
                r1, r2, r1 / r2, bb.err_base, bb.err_fine),
            secs};
}

// ---- criterion 2: cross-validation against the monotone reference ------

CriterionResult criterion2(Context& ctx) {
    const auto t0 = Clock::now();
    const auto& cv = ctx.crossval();

    // joint refinement: halve tau and dy, double n
    ExperimentConfig cfg = crossval_config();
    cfg.jko.tau = 5e-4;
    cfg.jko.n_quantiles = 800;
    cfg.fv.cells = 3200;
    ProblemSetup setup = build_problem(cfg);
    Trajectory jko = run_jko(setup.rho0, cfg.jko, setup.energy);
    FvConfig fvc{setup.y_grid, 1e-4, 0.0, cfg.jko.t_end, 0.45};
    SpaceTimeField fv = fv_run(setup.u0, setup.fv_problem(), fvc, cfg.checks.compare_times);
    const double refined = max_l1_at_compare_times(jko, setup, cfg.checks.compare_times, fv);

    const bool pass = cv.max_l1 <= 5e-2 && refined < cv.max_l1;
    const double secs = seconds_since(t0);
    return {2, criterion_name(2), pass && secs <= 300.0,
            fmt("max L1(jko, fv) = %.4g <= 0.05 at t in {0.1, 0.3, 0.5}; joint refinement: %.4g",
                cv.max_l1, refined),
            secs};
}

// ---- criterion 3: exact discrete energy estimates -----------------------

CriterionResult criterion3(Context& ctx) {
    const auto& bb = ctx.barenblatt();
    const auto& cv = ctx.crossval();
    const auto t0 = Clock::now();
    const DiagnosticsReport d1 = diagnostics_check(bb.base, bb.setup.energy);
    const DiagnosticsReport d2 = diagnostics_check(cv.jko, cv.setup.energy);
    const auto& m1 = find_check(d1, "energy-monotone");
    const auto& s1 = find_check(d1, "w2-square-summability");
    const auto& m2 = find_check(d2, "energy-monotone");
    const auto& s2 = find_check(d2, "w2-square-summability");
    const bool pass = m1.pass && s1.pass && m2.pass && s2.pass;
    return {3, criterion_name(3), pass,
            fmt("benchmark run: %s / %s; cross-validation run: %s / %s", m1.detail.c_str(),
                s1.detail.c_str(), m2.detail.c_str(), s2.detail.c_str()),
            seconds_since(t0)};
}

// ---- criterion 4: Hoelder-in-time bound ---------------------------------

CriterionResult criterion4(Context& ctx) {
    const auto& cv = ctx.crossval();
    const auto t0 = Clock::now();
    const DiagnosticsReport d = diagnostics_check(cv.jko, cv.setup.energy);
    const auto& c = find_check(d, "hoelder-bound");
    return {4, criterion_name(4), c.pass, c.detail, seconds_since(t0)};
}

// ---- criterion 5: entropy inequality sweeps -----------------------------

CriterionResult criterion5(Context& ctx) {
    const auto& cv = ctx.crossval();
    const auto t0 = Clock::now();
    const auto bank = make_test_bank(8, 0.0, 0.5, cv.setup.y_grid.x_min,
                                     cv.setup.y_grid.x_max(), 12345);

    const auto k_fv = default_k_grid(cv.fv, 16);
    const auto eps_fv = default_eps_sequence(cv.fv, 2.0);
    const EntropyReport rep_fv =
        entropy_sweep(cv.fv, cv.setup.fv_problem(), k_fv, bank, eps_fv, ctx.jobs);

    const SpaceTimeField jf =
        jko_to_field(cv.jko, cv.setup.transform, cv.setup.y_grid, cv.snap_times);
    const auto k_jko = default_k_grid(jf, 16);
    const auto eps_jko = default_eps_sequence(jf, 2.0);
    const EntropyReport rep_jko =
        entropy_sweep(jf, cv.setup.fv_problem(), k_jko, bank, eps_jko, ctx.jobs);

    if (!ctx.out_dir.empty()) {
        std::ofstream f1(std::filesystem::path(ctx.out_dir) / "acceptance_entropy_fv.csv");
        rep_fv.write_csv(f1);
        std::ofstream f2(std::filesystem::path(ctx.out_dir) / "acceptance_entropy_jko.csv");
        rep_jko.write_csv(f2);
    }
    const double tol_fv = 5e-3 * rep_fv.lhs_scale;
    const double tol_jko = 5e-3 * rep_jko.lhs_scale;
    const bool pass = rep_fv.min_residual >= -tol_fv && rep_jko.min_residual >= -tol_jko;
    const double secs = seconds_since(t0);
    return {5, criterion_name(5), pass && secs <= 120.0,
            fmt("fv: min residual %.4g >= %.4g; jko: %.4g >= %.4g (16 levels x 8 tests)",
                rep_fv.min_residual, -tol_fv, rep_jko.min_residual, -tol_jko),
            secs};
}

// ---- criterion 6: weighted maximum principle ----------------------------

CriterionResult criterion6(Context& ctx) {
    const auto& bb = ctx.barenblatt();
    const auto& cv = ctx.crossval();
    const auto t0 = Clock::now();
    const DiagnosticsReport rep1 = diagnostics_check(bb.base, bb.setup.energy);
    const DiagnosticsReport rep2 = diagnostics_check(cv.jko, cv.setup.energy);
    const auto& j1 = find_check(rep1, "maximum-principle");
    const auto& j2 = find_check(rep2, "maximum-principle");

    // reference solution of criterion 2, transformed state by state
    const EnergyFunctional& ef = cv.setup.energy;
    const double expo = 1.0 / (ef.m - 1.0);
    double kbound = 0.0;
    const GridDensity& rho0 = cv.setup.rho0;
    for (std::size_t i = 0; i < rho0.cells(); ++i)
        kbound = std::max(kbound,
                          rho0.value(i) * std::pow(ef.a(rho0.grid().center(i)), expo));
    double worst = 1e300;
    for (std::size_t j = 0; j < cv.fv.times.size(); ++j) {
        const GridDensity rho = rescale(cv.fv.density(j), cv.setup.transform, cv.setup.x_grid);
        for (std::size_t i = 0; i < rho.cells(); ++i) {
            const double cap =
                kbound * std::pow(ef.a(rho.grid().center(i)), -expo) + 1e-3;
            worst = std::min(worst, cap - rho.value(i));
        }
    }
    const bool pass = j1.pass && j2.pass && worst >= 0.0;
    return {6, criterion_name(6), pass,
            fmt("jko runs: %s | %s; fv rescaled margin %.4g (tol 1e-3)", j1.detail.c_str(),
                j2.detail.c_str(), worst),
            seconds_since(t0)};
}

// ---- criterion 7: L1 quasi-stability ------------------------------------

CriterionResult criterion7(Context& ctx) {
    (void)ctx;
    const auto t0 = Clock::now();
    ExperimentConfig cfg = crossval_config();
    cfg.fv.cells = 800;  // dy = 1e-2 keeps the paired runs cheap

    auto paired_l1 = [&](const std::string& b_preset, std::vector<double>& times,
                         std::vector<double>& dists, double& c_bound) {
        cfg.problem.b_preset = b_preset;
        ProblemSetup setup = build_problem(cfg);
        InitialConfig other;
        other.preset = "double_bump";
        const GridDensity v0 = make_initial(other, cfg.problem.m, setup.y_grid);
        const std::vector<double> snaps = snapshot_grid(0.5, 0.05);
        FvConfig fvc{setup.y_grid, 1e-4, 0.0, 0.5, 0.45};
        const SpaceTimeField fu = fv_run(setup.u0, setup.fv_problem(), fvc, snaps);
        const SpaceTimeField fw = fv_run(v0, setup.fv_problem(), fvc, snaps);
        times = snaps;
        dists.clear();
        double sup_u = std::max(fu.sup(), fw.sup());
        double sup_b = 0.0, sup_bp = 0.0;
        for (std::size_t i = 0; i < setup.y_grid.cells; ++i) {
            sup_b = std::max(sup_b, std::abs(setup.b.b(setup.y_grid.center(i))));
            sup_bp = std::max(sup_bp, std::abs(setup.b.b_prime(setup.y_grid.center(i))));
        }
        c_bound = cfg.problem.m * std::pow(sup_u, cfg.problem.m - 1.0) * (2.0 * sup_bp + sup_b);
        for (std::size_t j = 0; j < snaps.size(); ++j)
            dists.push_back(l1_distance(fu.density(j), fw.density(j)));
    };

    std::vector<double> times, dists;
    double C = 0.0;
    paired_l1("gaussian", times, dists, C);
    double worst_gronwall = 1e300;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = i + 1; j < times.size(); ++j) {
            const double dt = times[j] - times[i];
            const double bound = dists[i] * (1.0 + C * dt * std::exp(C * dt));
            worst_gronwall = std::min(worst_gronwall, bound * (1.0 + 1e-3) - dists[j]);
        }

    std::vector<double> times0, dists0;
    double C0 = 0.0;
    paired_l1("zero", times0, dists0, C0);
    double worst_contract = 1e300;
    for (std::size_t j = 1; j < dists0.size(); ++j)
        worst_contract = std::min(worst_contract, dists0[j - 1] * (1.0 + 1e-3) - dists0[j]);

    const bool pass = worst_gronwall >= 0.0 && worst_contract >= 0.0;
    return {7, criterion_name(7), pass,
            fmt("gronwall margin %.4g with C = %.4g; b = 0 contraction margin %.4g",
                worst_gronwall, C, worst_contract),
            seconds_since(t0)};
}

// ---- criterion 8: convexity certificate ---------------------------------

CriterionResult criterion8(Context& ctx) {
    const auto t0 = Clock::now();
    const ConvexityGrid grid{-6.0, 6.0, 64, 1e-3, 10.0, 64};

    const EnergyFunctional constant = EnergyFunctional::with_constant_a(2.0, 2.0, -6.5, 6.5, 1e-3);
    const ConvexityCertificate c1 = check_kappa_convexity(constant, grid);

    const EnergyFunctional wavy = EnergyFunctional::from_tabulated(
        2.0, TabulatedFunction::sample([](double x) { return 2.0 + std::sin(x); }, -6.5, 6.5,
                                       1e-3));
    const ConvexityCertificate c2 = check_kappa_convexity(wavy, grid);
    const ConvexityCertificate c2_repeat = check_kappa_convexity(wavy, grid);

    if (!ctx.out_dir.empty()) {
        std::ofstream os(std::filesystem::path(ctx.out_dir) / "acceptance_convexity.csv");
        c2.write_csv(os);
        std::ofstream vf(std::filesystem::path(ctx.out_dir) / "acceptance_convexity_verdict.txt");
        vf << c1.verdict << "\n" << c2.verdict << "\n";
    }

    const bool const_ok = c1.kappa.has_value() && std::abs(*c1.kappa) <= 1e-12;
    const bool wavy_ok = !c2.kappa.has_value() && c2.witness.has_value() &&
                         std::sin(c2.witness->first) > 0.0;  // a'' = -sin < 0 there
    const bool deterministic =
        c2.verdict == c2_repeat.verdict && c2.witness == c2_repeat.witness;
    const double secs = seconds_since(t0);
    return {8, criterion_name(8), const_ok && wavy_ok && deterministic && secs <= 10.0,
            fmt("constant a: kappa = %.3g; a = 2+sin x: %s", c1.kappa.value_or(-1.0),
                c2.verdict.c_str()),
            secs};
}

// ---- criterion 9: transform round trip ----------------------------------

CriterionResult criterion9(Context& ctx) {
    const auto& cv = ctx.crossval();
    const auto t0 = Clock::now();
    const ProblemSetup& s = cv.setup;

    const TabulatedFunction brec = b_from_a(s.transform.a, s.transform.T, s.cfg.problem.m,
                                            s.cfg.problem.tab_step);
    double b_err = 0.0;
    for (std::size_t i = 0; i < brec.size(); ++i)
        b_err = std::max(b_err, std::abs(brec.value(i) - s.b.b(brec.node(i))));

    ConversionReport rep;
    const GridDensity rho = rescale(s.u0, s.transform, s.x_grid, &rep);
    const double mass_err = std::abs(rho.mass() - 1.0);

    const TabulatedFunction T2 = T_from_a(s.transform.a, s.cfg.problem.m);
    double route_err = 0.0;
    for (std::size_t i = 0; i < T2.size(); ++i)
        route_err = std::max(route_err, std::abs(T2.value(i) - s.transform.T.value(i)));

    const bool pass = b_err <= 1e-4 && mass_err <= 1e-8 && rep.boundary_mass <= 1e-8 &&
                      route_err <= 1e-6;
    return {9, criterion_name(9), pass,
            fmt("sup|b_rec - b| = %.3g <= 1e-4; |mass - 1| = %.3g, boundary %.3g <= 1e-8; "
                "T-route gap %.3g <= 1e-6",
                b_err, mass_err, rep.boundary_mass, route_err),
            seconds_since(t0)};
}

// ---- criterion 10: second-moment growth ---------------------------------

CriterionResult criterion10(Context& ctx) {
    const auto& cv = ctx.crossval();
    const auto t0 = Clock::now();
    const DiagnosticsReport rep = diagnostics_check(cv.jko, cv.setup.energy);
    const auto& c = find_check(rep, "second-moment-growth");
    return {10, criterion_name(10), c.pass, c.detail, seconds_since(t0)};
}

} // namespace

std::vector<int> all_criteria() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::string criterion_name(int id) {
    switch (id) {
        case 1: return "barenblatt-oracle";
        case 2: return "cross-validation";
        case 3: return "energy-estimates";
        case 4: return "hoelder-bound";
        case 5: return "entropy-sweep";
        case 6: return "maximum-principle";
        case 7: return "l1-stability";
        case 8: return "convexity-certificate";
        case 9: return "transform-roundtrip";
        case 10: return "second-moment";
        default: throw Error("unknown criterion id " + std::to_string(id));
    }
}

std::vector<CriterionResult> run_acceptance(std::span<const int> ids, const std::string& out_dir,
                                            int jobs) {
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    Context ctx;
    ctx.jobs = jobs;
    ctx.out_dir = out_dir;
    std::vector<CriterionResult> results;
    for (int id : ids) {
        switch (id) {
            case 1: results.push_back(criterion1(ctx)); break;
            case 2: results.push_back(criterion2(ctx)); break;
            case 3: results.push_back(criterion3(ctx)); break;
            case 4: results.push_back(criterion4(ctx)); break;
            case 5: results.push_back(criterion5(ctx)); break;
            case 6: results.push_back(criterion6(ctx)); break;
            case 7: results.push_back(criterion7(ctx)); break;
            case 8: results.push_back(criterion8(ctx)); break;
            case 9: results.push_back(criterion9(ctx)); break;
            case 10: results.push_back(criterion10(ctx)); break;
            default: throw Error("unknown criterion id " + std::to_string(id));
        }
    }
    return results;
}

} // namespace jkoflow
