#include "jkoflow/tabulated.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jkoflow {

TabulatedFunction::TabulatedFunction(double x0, double step, std::vector<double> values)
    : x0_(x0), step_(step), values_(std::move(values)) {
    if (values_.size() < 4)
        throw InvariantError("TabulatedFunction: need at least 4 nodes");
    if (!(step_ > 0.0) || !std::isfinite(step_) || !std::isfinite(x0_))
        throw InvariantError("TabulatedFunction: invalid grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvariantError("TabulatedFunction: non-finite value");
}

TabulatedFunction TabulatedFunction::sample(const std::function<double(double)>& f, double x_lo,
                                            double x_hi, double step) {
    const auto count = static_cast<std::size_t>(std::ceil((x_hi - x_lo) / step - 1e-12)) + 1;
    std::vector<double> v(std::max<std::size_t>(count, 4));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(x_lo + step * static_cast<double>(i));
    return TabulatedFunction(x_lo, step, std::move(v));
}

TabulatedFunction TabulatedFunction::constant(double value, double x_lo, double x_hi, double step) {
    return sample([value](double) { return value; }, x_lo, x_hi, step);
}

bool TabulatedFunction::contains(double x) const {
    const double slack = 1e-9 * step_;
    return x >= x_min() - slack && x <= x_max() + slack;
}

void TabulatedFunction::locate(double x, std::size_t& i, double& t) const {
    if (!contains(x))
        throw RangeError("TabulatedFunction: x = " + std::to_string(x) +
                         " outside tabulated window [" + std::to_string(x_min()) + ", " +
                         std::to_string(x_max()) + "]");
    double s = (x - x0_) / step_;
    s = std::clamp(s, 0.0, static_cast<double>(values_.size() - 1));
    i = std::min(static_cast<std::size_t>(s), values_.size() - 2);
    // clamp the 4-point stencil {i-1, i, i+1, i+2} into the table
    if (i == 0) i = 1;
    if (i + 2 >= values_.size()) i = values_.size() - 3;
    t = s - static_cast<double>(i);
}

double TabulatedFunction::operator()(double x) const {
    std::size_t i;
    double t;
    locate(x, i, t);
    const double vm = values_[i - 1], v0 = values_[i], v1 = values_[i + 1], v2 = values_[i + 2];
    const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return vm * wm + v0 * w0 + v1 * w1 + v2 * w2;
}

double TabulatedFunction::derivative(double x) const {
    std::size_t i;
    double t;
    locate(x, i, t);
    const double vm = values_[i - 1], v0 = values_[i], v1 = values_[i + 1], v2 = values_[i + 2];
    const double wm = -(3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    const double w0 = (3.0 * t * t - 4.0 * t - 1.0) / 2.0;
    const double w1 = -(3.0 * t * t - 2.0 * t - 2.0) / 2.0;
    const double w2 = (3.0 * t * t - 1.0) / 6.0;
    return (vm * wm + v0 * w0 + v1 * w1 + v2 * w2) / step_;
}

double TabulatedFunction::second_derivative_node(std::size_t i) const {
    const std::size_t n = values_.size();
    std::size_t j = std::clamp<std::size_t>(i, 1, n - 2);
    return (values_[j + 1] - 2.0 * values_[j] + values_[j - 1]) / (step_ * step_);
}

double TabulatedFunction::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

double TabulatedFunction::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

double TabulatedFunction::min_second_derivative() const {
    double m = second_derivative_node(1);
    for (std::size_t i = 2; i + 1 < values_.size(); ++i)
        m = std::min(m, second_derivative_node(i));
    return m;
}

double TabulatedFunction::max_second_derivative() const {
    double m = second_derivative_node(1);
    for (std::size_t i = 2; i + 1 < values_.size(); ++i)
        m = std::max(m, second_derivative_node(i));
    return m;
}

double invert_monotone(const TabulatedFunction& f, double y) {
    const std::size_t n = f.size();
    if (y < f.value(0) || y > f.value(n - 1))
        throw RangeError("invert_monotone: value outside tabulated range");
    // bracket on nodes, then bisect the cubic inside the bracket
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (f.value(mid) <= y)
            lo = mid;
        else
            hi = mid;
    }
    double a = f.node(lo), b = f.node(hi);
    for (int it = 0; it < 80; ++it) {
        const double c = 0.5 * (a + b);
        if (f(c) <= y)
            a = c;
        else
            b = c;
    }
    return 0.5 * (a + b);
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    int n = std::max(2, intervals);
    if (n % 2 != 0) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += f(a + h * i) * (i % 2 == 0 ? 2.0 : 4.0);
    const double value = sum * h / 3.0;
    if (!std::isfinite(value)) throw Error("simpson: quadrature produced non-finite value");
    return value;
}

} // namespace jkoflow
