// Test-only oracles, kept independent of the library's numerical paths:
// the library integrates with Simpson rules and cubic tabulations, the
// oracles here use composite Gauss-Legendre quadrature and direct evaluation.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

// 20-point Gauss-Legendre nodes/weights on [-1, 1]
inline const double kGlNodes[20] = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
    -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154195,
    -0.2277858511416451, -0.0765265211334973, 0.0765265211334973,  0.2277858511416451,
    0.3737060887154195,  0.5108670019508271,  0.6360536807265150,  0.7463319064601508,
    0.8391169718222188,  0.9122344282513259,  0.9639719272779138,  0.9931285991850949};
inline const double kGlWeights[20] = {
    0.0176140071391521, 0.0406014298003869, 0.0626720483341091, 0.0832767415767048,
    0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183820,
    0.1491729864726037, 0.1527533871307258, 0.1527533871307258, 0.1491729864726037,
    0.1420961093183820, 0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869, 0.0176140071391521};

/// Composite 20-point Gauss-Legendre over `panels` subintervals.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int panels = 64) {
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        double s = 0.0;
        for (int q = 0; q < 20; ++q) s += kGlWeights[q] * f(lo + 0.5 * h * (1.0 + kGlNodes[q]));
        total += 0.5 * h * s;
    }
    return total;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Random nondecreasing array (quantile-like) of length n.
inline std::vector<double> random_monotone(std::mt19937_64& rng, std::size_t n, double scale) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    double acc = -scale * u(rng);
    for (auto& x : v) {
        acc += scale * u(rng) / static_cast<double>(n);
        x = acc;
    }
    return v;
}

} // namespace oracles
