#pragma once

#include <functional>
#include <string>

#include "jkoflow/measure1d.hpp"
#include "jkoflow/tabulated.hpp"

namespace jkoflow {

/// Convection coefficient b of the physical equation, supplied analytically
/// together with certified bounds. The library checks the bounds rather than
/// trusting them.
struct ConvectionCoefficient {
    std::function<double(double)> b;
    std::function<double(double)> b_prime;
    double l1_norm_bound = 0.0;    // bound on integral of |b| over the real line
    double lipschitz_bound = 0.0;  // bound on both sup|b| and sup|b'|
    std::string name = "custom";

    /// Sample-based invariant check on [y_lo, y_hi]; throws InvariantError.
    void validate(double y_lo, double y_hi, int samples = 4001) const;
};

/// Output of the coordinate change b -> (alpha, T, a).
///
/// T is the strictly increasing change of coordinates with T(0) = 0 and
/// T'(x) = alpha(T(x)); a(x) = m/(m-1) * alpha(T(x))^-(m+1) is the weight of
/// the transformed energy and satisfies a >= a_lower > 0 on the window.
struct TransformedCoefficients {
    double m = 2.0;
    double alpha0 = 1.0;
    TabulatedFunction alpha;  // function of y
    TabulatedFunction T;      // function of x
    TabulatedFunction a;      // function of x
    double a_lower = 0.0;
    double a_upper = 0.0;
    double a_second_derivative_sup = 0.0;

    double T_inverse(double y) const { return invert_monotone(T, y); }
    bool is_identity() const;
};

/// alpha(y) = alpha0 * exp(-((m-1)/2m) * int_0^y b), tabulated on [y_lo, y_hi]
/// with y = 0 on a node. Requires y_lo < 0 < y_hi.
TabulatedFunction alpha_from_b(const ConvectionCoefficient& cc, double m, double alpha0,
                               double y_lo, double y_hi, double step);

/// Integrate T'(x) = alpha(T(x)), T(0) = 0 by classical RK4 with fixed step,
/// outward from 0 to both window ends. Throws RangeError if the tabulated
/// alpha window is exhausted before x reaches the ends.
TabulatedFunction solve_T(const TabulatedFunction& alpha, double x_lo, double x_hi, double step);

/// a(x) = m/(m-1) * alpha(T(x))^-(m+1) on T's grid.
TabulatedFunction a_from_alpha(const TabulatedFunction& alpha, const TabulatedFunction& T,
                               double m);

/// T(x) = int_0^x [ (m-1)/m * a(xi) ]^(-1/(m+1)) dxi on a's grid (second,
/// quadrature-based route to T). a's grid must contain x = 0 as a node.
TabulatedFunction T_from_a(const TabulatedFunction& a, double m);

/// Recover b on a uniform y-grid from b(T(x)) = 2m/(m^2-1) * (log a)'(x),
/// with (log a)' taken by centered differences on the tabulation.
TabulatedFunction b_from_a(const TabulatedFunction& a, const TabulatedFunction& T, double m,
                           double y_step);

/// Full b -> (alpha, T, a) construction on the x-window [x_lo, x_hi].
TransformedCoefficients build_transform(const ConvectionCoefficient& cc, double m, double alpha0,
                                        double x_lo, double x_hi, double step);

/// rho(x) = T'(x) u(T(x)) realized through the distribution functions:
/// cell averages on x_grid of the pullback measure. Mass-exact; support
/// escaping the window is clamped into boundary cells and reported.
GridDensity rescale(const GridDensity& u, const TransformedCoefficients& tc,
                    const GridSpec& x_grid, ConversionReport* report = nullptr);

/// Inverse of `rescale`: u(y) = rho(T^-1(y)) / T'(T^-1(y)) as cell averages.
GridDensity inverse_rescale(const GridDensity& rho, const TransformedCoefficients& tc,
                            const GridSpec& y_grid, ConversionReport* report = nullptr);

/// Quantile form of the same change of variables: G_u = T o G_rho.
Quantile map_quantile(const Quantile& q, const TabulatedFunction& T);

} // namespace jkoflow
