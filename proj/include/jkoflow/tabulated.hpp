#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "jkoflow/common.hpp"

namespace jkoflow {

/// Function tabulated on a uniform grid, evaluated with local cubic
/// (4-point Lagrange) interpolation. All coefficient functions of the library
/// share this single tabulation discipline so that derivative conventions
/// stay uniform across modules.
class TabulatedFunction {
public:
    TabulatedFunction(double x0, double step, std::vector<double> values);

    static TabulatedFunction sample(const std::function<double(double)>& f, double x_lo,
                                    double x_hi, double step);
    static TabulatedFunction constant(double value, double x_lo, double x_hi, double step);

    double x_min() const { return x0_; }
    double x_max() const { return x0_ + step_ * static_cast<double>(values_.size() - 1); }
    double step() const { return step_; }
    std::size_t size() const { return values_.size(); }
    double node(std::size_t i) const { return x0_ + step_ * static_cast<double>(i); }
    double value(std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

    /// Cubic interpolation; throws RangeError outside the tabulated window.
    double operator()(double x) const;
    /// Derivative of the local interpolating cubic.
    double derivative(double x) const;
    /// Centered second difference at an interior node (one-sided copy at the ends).
    double second_derivative_node(std::size_t i) const;

    double min_value() const;
    double max_value() const;
    /// Extremes of the second-difference table.
    double min_second_derivative() const;
    double max_second_derivative() const;

    bool contains(double x) const;

private:
    void locate(double x, std::size_t& i, double& t) const;

    double x0_;
    double step_;
    std::vector<double> values_;
};

/// Solve f(x) = y for strictly increasing tabulated f by bisection.
double invert_monotone(const TabulatedFunction& f, double y);

/// Composite Simpson rule with `intervals` subintervals (rounded up to even).
double simpson(const std::function<double(double)>& f, double a, double b, int intervals);

} // namespace jkoflow
