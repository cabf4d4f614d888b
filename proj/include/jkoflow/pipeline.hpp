#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jkoflow/config.hpp"
#include "jkoflow/entropycheck.hpp"
#include "jkoflow/jko.hpp"
#include "jkoflow/presets.hpp"
#include "jkoflow/refsolver.hpp"

namespace jkoflow {

/// One fully assembled problem instance: drift, coordinate change, energy,
/// grids, and the initial datum in both coordinate systems.
struct ProblemSetup {
    ExperimentConfig cfg;
    ConvectionCoefficient b;
    TransformedCoefficients transform;
    EnergyFunctional energy;
    GridSpec y_grid;
    GridSpec x_grid;
    GridDensity u0;    // initial datum in physical coordinates
    GridDensity rho0;  // transformed initial datum

    FvProblem fv_problem() const;
};

ProblemSetup build_problem(const ExperimentConfig& cfg);

/// Reconstruct JKO states at the given times (which must sit on the tau-grid)
/// as densities in physical coordinates: G_u = T o G_rho pushed to y_grid.
SpaceTimeField jko_to_field(const Trajectory& traj, const TransformedCoefficients& tc,
                            const GridSpec& y_grid, std::span<const double> times);

struct ComparisonResult {
    std::vector<double> times;
    std::vector<double> l1_jko_vs_fv;
    std::vector<double> w2_jko_vs_fv;
    std::vector<std::pair<std::string, bool>> verdicts;
};

/// L1 and W2 distances between the rescaled JKO solution and the reference
/// solution at the matching snapshot times.
ComparisonResult compare_solutions(const SpaceTimeField& jko_field, const SpaceTimeField& fv_field,
                                   std::size_t w2_resolution = 400);

struct PipelineOutcome {
    bool all_pass = true;
    std::vector<std::pair<std::string, bool>> verdicts;
    std::string report_path;
};

/// Full experiment: transform build -> JKO and/or FV run -> rescale ->
/// comparisons -> entropy sweeps -> diagnostics; writes CSV artifacts and
/// report.txt under cfg.output_dir. Returns the collected verdicts.
PipelineOutcome run_pipeline(const ExperimentConfig& cfg, int jobs = 1);

struct ConvergenceRow {
    double tau = 0.0;
    std::size_t n = 0;
    double err_l1 = 0.0;
    double err_lm = 0.0;
    double err_w2 = 0.0;
};

/// JKO runs over the (tau, n) product grid; errors at t_end against the
/// closed-form source solution when available (b = 0, barenblatt datum),
/// otherwise against the finest run.
std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& cfg,
                                              std::span<const double> tau_list,
                                              std::span<const std::size_t> n_list, int jobs = 1);

void write_convergence_csv(std::span<const ConvergenceRow> rows, std::ostream& os);

/// Gnuplot-style whitespace-separated columns with '#' header comments.
void emit_plotdata(const SpaceTimeField& field, const std::string& path);
void emit_plotdata(const ComparisonResult& comp, const std::string& path);
/// Parse-back of emit_plotdata output (column-major).
std::vector<std::vector<double>> read_plotdata(const std::string& path);

} // namespace jkoflow
