#include "jkoflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace jkoflow {

namespace fs = std::filesystem;

FvProblem ProblemSetup::fv_problem() const { return FvProblem{cfg.problem.m, b.b, b.b_prime}; }

ProblemSetup build_problem(const ExperimentConfig& cfg) {
    cfg.validate();
    ConvectionCoefficient b = make_b_preset(cfg.problem);
    TransformedCoefficients tc = build_transform(b, cfg.problem.m, cfg.problem.alpha0,
                                                 cfg.problem.x_lo, cfg.problem.x_hi,
                                                 cfg.problem.tab_step);
    EnergyFunctional ef = EnergyFunctional::from_transform(tc);

    const double dy = (cfg.fv.y_hi - cfg.fv.y_lo) / static_cast<double>(cfg.fv.cells);
    const GridSpec y_grid{cfg.fv.y_lo, dy, cfg.fv.cells};
    const auto x_cells =
        static_cast<std::size_t>(std::ceil((cfg.problem.x_hi - cfg.problem.x_lo) / dy));
    const GridSpec x_grid{cfg.problem.x_lo, (cfg.problem.x_hi - cfg.problem.x_lo) / x_cells,
                          x_cells};

    GridDensity u0 = make_initial(cfg.initial, cfg.problem.m, y_grid);
    ConversionReport rep;
    GridDensity rho0 = rescale(u0, tc, x_grid, &rep);
    if (rep.window_overflow)
        throw Error("build_problem: initial datum does not fit in the x-window "
                    "(boundary mass " +
                    std::to_string(rep.boundary_mass) + "); widen problem.x_window");
    return ProblemSetup{cfg,
                        std::move(b),
                        std::move(tc),
                        std::move(ef),
                        y_grid,
                        x_grid,
                        std::move(u0),
                        std::move(rho0)};
}

SpaceTimeField jko_to_field(const Trajectory& traj, const TransformedCoefficients& tc,
                            const GridSpec& y_grid, std::span<const double> times) {
    SpaceTimeField field;
    field.grid = y_grid;
    for (double t : times) {
        const double pos = t / traj.tau;
        const auto idx = static_cast<std::size_t>(std::llround(pos));
        if (idx >= traj.states.size() || std::abs(pos - static_cast<double>(idx)) > 1e-6)
            throw InvariantError("jko_to_field: requested time " + std::to_string(t) +
                                 " is not on the tau-grid of the trajectory");
        const Quantile g_y = map_quantile(traj.states[idx], tc.T);
        GridDensity u = to_density(g_y, y_grid);
        field.times.push_back(t);
        field.values.emplace_back(u.values().begin(), u.values().end());
    }
    return field;
}

ComparisonResult compare_solutions(const SpaceTimeField& jko_field, const SpaceTimeField& fv_field,
                                   std::size_t w2_resolution) {
    if (jko_field.times.size() != fv_field.times.size())
        throw InvariantError("compare_solutions: snapshot counts differ");
    ComparisonResult comp;
    for (std::size_t j = 0; j < jko_field.times.size(); ++j) {
        if (std::abs(jko_field.times[j] - fv_field.times[j]) > 1e-9)
            throw InvariantError("compare_solutions: snapshot times differ");
        const GridDensity a = jko_field.density(j);
        const GridDensity b = fv_field.density(j);
        comp.times.push_back(jko_field.times[j]);
        comp.l1_jko_vs_fv.push_back(l1_distance(a, b));
        comp.w2_jko_vs_fv.push_back(
            wasserstein2(to_quantile(a, w2_resolution), to_quantile(b, w2_resolution)));
    }
    return comp;
}

namespace {

void write_tabulated_csv(const TabulatedFunction& f, const std::string& path) {
    std::ofstream os(path);
    os << "# x,value\n";
    char buf[80];
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", f.node(i), f.value(i));
        os << buf;
    }
}

std::vector<double> uniform_times(double t_end, double step_hint, double tau) {
    // uniform snapshot grid aligned with the tau-grid
    const auto stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(step_hint / tau)));
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / tau - 1e-9));
    std::vector<double> times;
    for (std::size_t k = 0; k <= steps; k += stride) times.push_back(tau * static_cast<double>(k));
    return times;
}

} // namespace

PipelineOutcome run_pipeline(const ExperimentConfig& cfg, int jobs) {
    PipelineOutcome out;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    std::ofstream report(dir / "report.txt");
    out.report_path = (dir / "report.txt").string();
    auto verdict = [&](const std::string& name, bool pass, const std::string& detail) {
        out.verdicts.emplace_back(name, pass);
        out.all_pass = out.all_pass && pass;
        report << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    };

    report << "# experiment report\n";
    report << "seed = " << cfg.seed << "\n";

    ProblemSetup setup = [&] {
        try {
            return build_problem(cfg);
        } catch (const std::exception& e) {
            report << "FAIL stage transform: " << e.what() << "\n";
            throw Error(std::string("pipeline stage 'transform' failed: ") + e.what());
        }
    }();
    write_tabulated_csv(setup.transform.alpha, (dir / "alpha.csv").string());
    write_tabulated_csv(setup.transform.T, (dir / "T.csv").string());
    write_tabulated_csv(setup.transform.a, (dir / "a.csv").string());
    {
        std::ofstream os(dir / "u0.csv");
        write_csv(setup.u0, os);
        std::ofstream os2(dir / "rho0.csv");
        write_csv(setup.rho0, os2);
    }

    // transform self-checks: route agreement and round trip
    {
        const TabulatedFunction T2 = T_from_a(setup.transform.a, cfg.problem.m);
        double route_err = 0.0;
        for (std::size_t i = 0; i < T2.size(); ++i)
            route_err = std::max(route_err,
                                 std::abs(T2.value(i) - setup.transform.T.value(i)));
        verdict("transform-T-routes", route_err <= 1e-6,
                "sup|T_ode - T_quadrature| = " + std::to_string(route_err));

        const TabulatedFunction brec =
            b_from_a(setup.transform.a, setup.transform.T, cfg.problem.m, cfg.problem.tab_step);
        double b_err = 0.0;
        for (std::size_t i = 0; i < brec.size(); ++i)
            b_err = std::max(b_err, std::abs(brec.value(i) - setup.b.b(brec.node(i))));
        verdict("transform-roundtrip", b_err <= 1e-4,
                "sup|b_recovered - b| = " + std::to_string(b_err));
    }

    std::optional<Trajectory> traj;
    if (cfg.run_jko_stage) {
        try {
            traj = run_jko(setup.rho0, cfg.jko, setup.energy);
        } catch (const std::exception& e) {
            throw Error(std::string("pipeline stage 'jko' failed: ") + e.what());
        }
        write_trajectory(*traj, (dir / "jko").string());
        verdict("jko-complete", !traj->aborted,
                traj->aborted ? *traj->aborted
                              : "steps = " + std::to_string(traj->steps()));
        const DiagnosticsReport diag = diagnostics_check(*traj, setup.energy);
        for (const auto& c : diag.checks) verdict("jko-" + c.name, c.pass, c.detail);
    }

    std::optional<SpaceTimeField> fv;
    const std::vector<double> snap_times =
        uniform_times(cfg.jko.t_end, cfg.jko.t_end / 100.0, cfg.jko.tau);
    if (cfg.run_fv_stage) {
        try {
            FvConfig fvc{setup.y_grid, cfg.fv.dt, cfg.fv.nu, cfg.jko.t_end, cfg.fv.cfl_safety};
            fv = fv_run(setup.u0, setup.fv_problem(), fvc, snap_times);
        } catch (const std::exception& e) {
            throw Error(std::string("pipeline stage 'fv' failed: ") + e.what());
        }
        emit_plotdata(*fv, (dir / "fv_profiles.dat").string());
    }

    if (traj && fv) {
        SpaceTimeField jko_cmp =
            jko_to_field(*traj, setup.transform, setup.y_grid, cfg.checks.compare_times);
        SpaceTimeField fv_cmp;
        fv_cmp.grid = fv->grid;
        for (double t : cfg.checks.compare_times) {
            const auto it = std::min_element(fv->times.begin(), fv->times.end(),
                                             [t](double a, double b) {
                                                 return std::abs(a - t) < std::abs(b - t);
                                             });
            if (std::abs(*it - t) > 1e-9)
                throw Error("pipeline stage 'compare' failed: compare time " +
                            std::to_string(t) + " missing from the snapshot grid");
            fv_cmp.times.push_back(t);
            fv_cmp.values.push_back(fv->values[static_cast<std::size_t>(it - fv->times.begin())]);
        }
        const ComparisonResult comp = compare_solutions(jko_cmp, fv_cmp);
        emit_plotdata(comp, (dir / "comparison.dat").string());
        double max_l1 = 0.0;
        for (double v : comp.l1_jko_vs_fv) max_l1 = std::max(max_l1, v);
        verdict("comparison-l1", max_l1 <= 5e-2,
                "max L1(jko, fv) over compare_times = " + std::to_string(max_l1));
    }

    if (fv) {
        const auto bank =
            make_test_bank(cfg.checks.test_functions, 0.0, cfg.jko.t_end, setup.y_grid.x_min,
                           setup.y_grid.x_max(), cfg.seed);
        const auto kgrid = default_k_grid(*fv, cfg.checks.k_levels);
        const auto eps = default_eps_sequence(*fv, cfg.problem.m);
        const EntropyReport rep = entropy_sweep(*fv, setup.fv_problem(), kgrid, bank, eps, jobs);
        std::ofstream os(dir / "entropy_fv.csv");
        rep.write_csv(os);
        verdict("entropy-fv",
                rep.min_residual >= -cfg.checks.entropy_tol_scale * rep.lhs_scale,
                "min residual " + std::to_string(rep.min_residual) + " vs scale " +
                    std::to_string(rep.lhs_scale));
    }
    if (traj) {
        const SpaceTimeField jf = jko_to_field(*traj, setup.transform, setup.y_grid, snap_times);
        const auto bank =
            make_test_bank(cfg.checks.test_functions, 0.0, cfg.jko.t_end, setup.y_grid.x_min,
                           setup.y_grid.x_max(), cfg.seed);
        const auto kgrid = default_k_grid(jf, cfg.checks.k_levels);
        const auto eps = default_eps_sequence(jf, cfg.problem.m);
        const EntropyReport rep = entropy_sweep(jf, setup.fv_problem(), kgrid, bank, eps, jobs);
        std::ofstream os(dir / "entropy_jko.csv");
        rep.write_csv(os);
        verdict("entropy-jko",
                rep.min_residual >= -cfg.checks.entropy_tol_scale * rep.lhs_scale,
                "min residual " + std::to_string(rep.min_residual) + " vs scale " +
                    std::to_string(rep.lhs_scale));
        emit_plotdata(jf, (dir / "jko_profiles.dat").string());
    }

    report << (out.all_pass ? "ALL PASS\n" : "FAILURES PRESENT\n");
    return out;
}

std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& cfg,
                                              std::span<const double> tau_list,
                                              std::span<const std::size_t> n_list, int jobs) {
    (void)jobs;
    ProblemSetup setup = build_problem(cfg);
    const bool use_oracle = cfg.problem.b_preset == "zero" && cfg.initial.preset == "barenblatt" &&
                            cfg.problem.alpha0 == 1.0;

    struct Entry {
        double tau;
        std::size_t n;
        GridDensity u;
    };
    std::vector<Entry> runs;
    for (double tau : tau_list)
        for (std::size_t n : n_list) {
            JkoConfig jc = cfg.jko;
            jc.tau = tau;
            jc.n_quantiles = n;
            Trajectory traj = run_jko(setup.rho0, jc, setup.energy);
            if (traj.aborted) throw Error("convergence_study: run aborted: " + *traj.aborted);
            const Quantile g_y = map_quantile(traj.states.back(), setup.transform.T);
            runs.push_back({tau, n, to_density(g_y, setup.y_grid)});
        }

    // reference: closed form at t0 + t_end, or the finest run
    std::optional<GridDensity> ref;
    if (use_oracle)
        ref = barenblatt_density(cfg.problem.m, cfg.initial.t0 + cfg.jko.t_end, setup.y_grid);
    else
        ref = runs.back().u;

    std::vector<ConvergenceRow> rows;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (!use_oracle && i + 1 == runs.size()) break;  // finest run is the reference
        ConvergenceRow row;
        row.tau = runs[i].tau;
        row.n = runs[i].n;
        row.err_l1 = l1_distance(runs[i].u, *ref);
        double lm = 0.0;
        for (std::size_t c = 0; c < setup.y_grid.cells; ++c)
            lm += std::pow(std::abs(runs[i].u.value(c) - ref->value(c)), cfg.problem.m);
        row.err_lm = std::pow(lm * setup.y_grid.dx, 1.0 / cfg.problem.m);
        row.err_w2 = wasserstein2(to_quantile(runs[i].u, 400), to_quantile(*ref, 400));
        rows.push_back(row);
    }
    return rows;
}

void write_convergence_csv(std::span<const ConvergenceRow> rows, std::ostream& os) {
    os << "# tau,n,err_l1,err_lm,err_w2\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%zu,%.17g,%.17g,%.17g\n", r.tau, r.n, r.err_l1,
                      r.err_lm, r.err_w2);
        os << buf;
    }
    // empirical order in tau from the first and last rows sharing the largest n
    if (rows.size() >= 2 && rows.front().tau != rows.back().tau && rows.front().err_l1 > 0.0 &&
        rows.back().err_l1 > 0.0) {
        const double order = std::log(rows.front().err_l1 / rows.back().err_l1) /
                             std::log(rows.front().tau / rows.back().tau);
        std::snprintf(buf, sizeof(buf), "# fitted_order_l1,%.6g\n", order);
        os << buf;
    }
}

void emit_plotdata(const SpaceTimeField& field, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("emit_plotdata: cannot open " + path);
    os << "# columns: y";
    char buf[64];
    for (double t : field.times) {
        std::snprintf(buf, sizeof(buf), " u(t=%.12g)", t);
        os << buf;
    }
    os << "\n";
    for (std::size_t i = 0; i < field.grid.cells; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", field.grid.center(i));
        os << buf;
        for (const auto& row : field.values) {
            std::snprintf(buf, sizeof(buf), " %.17g", row[i]);
            os << buf;
        }
        os << "\n";
    }
}

void emit_plotdata(const ComparisonResult& comp, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error("emit_plotdata: cannot open " + path);
    os << "# columns: t l1_jko_vs_fv w2_jko_vs_fv\n";
    char buf[128];
    for (std::size_t j = 0; j < comp.times.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", comp.times[j],
                      comp.l1_jko_vs_fv[j], comp.w2_jko_vs_fv[j]);
        os << buf;
    }
}

std::vector<std::vector<double>> read_plotdata(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("read_plotdata: cannot open " + path);
    std::vector<std::vector<double>> columns;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double v;
        std::size_t col = 0;
        while (ss >> v) {
            if (columns.size() <= col) columns.resize(col + 1);
            columns[col].push_back(v);
            ++col;
        }
    }
    return columns;
}

} // namespace jkoflow
