#pragma once

#include "jkoflow/config.hpp"
#include "jkoflow/measure1d.hpp"
#include "jkoflow/transform.hpp"

namespace jkoflow {

/// Analytic drift presets with certified bounds (zero, gaussian bump,
/// smoothed indicator of [0,1]); 'constant_nonzero' is rejected by config
/// validation before reaching this point.
ConvectionCoefficient make_b_preset(const ProblemConfig& problem);

/// Self-similar source-type solution of the porous medium part (b = 0):
/// u(t, y) = t^-alpha (C - kappa y^2 t^-2alpha)_+^(1/(m-1)) with
/// alpha = 1/(m+1), kappa = (m-1)/(2m(m+1)) and C fixed by unit mass.
double barenblatt_value(double m, double t, double y);
double barenblatt_support_radius(double m, double t);

/// Cell-averaged closed form, renormalized to exact unit mass on the grid.
GridDensity barenblatt_density(double m, double t, const GridSpec& grid);

/// Initial datum presets on a y-grid (unit mass, nonnegative).
GridDensity make_initial(const InitialConfig& initial, double m, const GridSpec& y_grid);

} // namespace jkoflow
