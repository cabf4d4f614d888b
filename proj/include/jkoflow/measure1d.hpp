#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "jkoflow/common.hpp"

namespace jkoflow {

/// Uniform spatial grid of `cells` cells of width `dx`, starting at `x_min`.
struct GridSpec {
    double x_min = 0.0;
    double dx = 1.0;
    std::size_t cells = 0;

    double x_max() const { return x_min + dx * static_cast<double>(cells); }
    double edge(std::size_t i) const { return x_min + dx * static_cast<double>(i); }
    double center(std::size_t i) const { return x_min + dx * (static_cast<double>(i) + 0.5); }
};

/// Nonnegative cell-averaged probability density on a uniform grid.
///
/// Invariants enforced at construction: values >= 0, unit mass within 1e-10,
/// finite second moment. Immutable afterwards; safe to share across threads.
class GridDensity {
public:
    GridDensity(GridSpec grid, std::vector<double> values);

    const GridSpec& grid() const { return grid_; }
    double x_min() const { return grid_.x_min; }
    double dx() const { return grid_.dx; }
    std::size_t cells() const { return grid_.cells; }
    std::span<const double> values() const { return values_; }
    double value(std::size_t i) const { return values_[i]; }

    double mass() const;
    double sup() const;

    /// Piecewise-linear distribution function U(x) = mu((-inf, x)).
    /// Exact at cell edges, linear inside cells, clamped to [0,1] outside.
    double cdf(double x) const;
    /// Cumulative mass at cell edge i (0 <= i <= cells); cdf_at_edge(0) == 0.
    double cdf_at_edge(std::size_t i) const { return cumulative_[i]; }

private:
    GridSpec grid_;
    std::vector<double> values_;
    std::vector<double> cumulative_; // size cells+1
};

/// Monotone discretized pseudo-inverse distribution function.
/// values[i] represents G((i+1/2)/n).
class Quantile {
public:
    explicit Quantile(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double value(std::size_t i) const { return values_[i]; }
    double omega(std::size_t i) const {
        return (static_cast<double>(i) + 0.5) / static_cast<double>(values_.size());
    }

private:
    std::vector<double> values_;
};

/// Diagnostics produced by quantile -> grid reconstruction.
struct ConversionReport {
    bool atoms = false;            // flat quantile segment: mass concentrated in one cell
    double boundary_mass = 0.0;    // mass assigned to the two outermost cells
    bool window_overflow = false;  // boundary_mass exceeds 1e-8
};

/// Invert the piecewise-linear CDF of `d` at the midpoints omega_i = (i+1/2)/n.
/// Flat CDF stretches resolve to their right end (sup-convention).
Quantile to_quantile(const GridDensity& d, std::size_t n);

/// Push the piecewise-linear interpolant of `q` forward to cell averages on `grid`.
/// Mass is conserved exactly; values falling outside the window are clamped into
/// the boundary cells and surfaced through `report`.
GridDensity to_density(const Quantile& q, const GridSpec& grid, ConversionReport* report = nullptr);

/// Exact discrete L2-Wasserstein distance: sqrt(sum_i (G_i - Gt_i)^2 / n).
double wasserstein2(const Quantile& a, const Quantile& b);

Quantile shift(const Quantile& q, double c);

// CSV serialization: header "# kind,n,x_min,dx", then one value per line with
// >= 15 significant digits.
void write_csv(const GridDensity& d, std::ostream& os);
void write_csv(const Quantile& q, std::ostream& os);
GridDensity read_density_csv(std::istream& is);
Quantile read_quantile_csv(std::istream& is);

} // namespace jkoflow
