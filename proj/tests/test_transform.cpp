#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jkoflow/presets.hpp"
#include "jkoflow/transform.hpp"
#include "oracles.hpp"

using namespace jkoflow;

namespace {

ProblemConfig gaussian_problem() {
    ProblemConfig p;
    p.b_preset = "gaussian";
    p.b_amplitude = 0.5;
    return p;
}

} // namespace

TEST_CASE("TabulatedFunction: cubic interpolation reproduces smooth functions") {
    const TabulatedFunction f =
        TabulatedFunction::sample([](double x) { return std::sin(x); }, -2.0, 2.0, 1e-2);
    for (double x : {-1.7, -0.3, 0.0, 0.421, 1.9}) {
        CHECK(f(x) == doctest::Approx(std::sin(x)).epsilon(1e-8));
        CHECK(f.derivative(x) == doctest::Approx(std::cos(x)).epsilon(1e-5));
    }
    CHECK_THROWS_AS(f(2.5), RangeError);
    CHECK(f.min_second_derivative() == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("invert_monotone") {
    const TabulatedFunction f =
        TabulatedFunction::sample([](double x) { return x * x * x + x; }, -2.0, 2.0, 1e-3);
    for (double y : {-5.0, -0.5, 0.0, 1.3, 7.0}) {
        const double x = invert_monotone(f, y);
        CHECK(x * x * x + x == doctest::Approx(y).epsilon(1e-9));
    }
    CHECK_THROWS_AS(invert_monotone(f, 100.0), RangeError);
}

TEST_CASE("ConvectionCoefficient validation catches lying bounds") {
    ConvectionCoefficient cc = make_b_preset(gaussian_problem());
    CHECK_NOTHROW(cc.validate(-6.0, 6.0));
    cc.lipschitz_bound = 0.1;  // below the true sup |b| = 0.5
    CHECK_THROWS_AS(cc.validate(-6.0, 6.0), InvariantError);
}

TEST_CASE("alpha_from_b: zero drift and value at origin") {
    ProblemConfig zero;
    zero.b_preset = "zero";
    const ConvectionCoefficient cc = make_b_preset(zero);
    const TabulatedFunction alpha = alpha_from_b(cc, 2.0, 1.5, -2.0, 2.0, 1e-3);
    CHECK(alpha(0.0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(alpha(-1.3) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(alpha(1.7) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("alpha_from_b: smoothed indicator matches the quadrature oracle") {
    ProblemConfig p;
    p.b_preset = "smoothed_indicator";
    p.b_amplitude = 1.0;
    const ConvectionCoefficient cc = make_b_preset(p);
    const TabulatedFunction alpha = alpha_from_b(cc, 2.0, 1.0, -3.0, 3.0, 1e-3);

    // oracle: independent Gauss-Legendre integral of b over [0, 2]; the
    // smoothing trims w log(2)/2 of the unit area at the y = 0 edge
    const double integral = oracles::integrate(cc.b, 0.0, 2.0, 200);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-2));
    const double expected = std::exp(-0.25 * integral);  // (m-1)/(2m) = 1/4 for m = 2
    CHECK(alpha(2.0) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(alpha(2.0) == doctest::Approx(0.7788).epsilon(2e-3));
    CHECK(alpha(0.0) == 1.0);
}

TEST_CASE("solve_T: constant alpha is linear") {
    const TabulatedFunction one = TabulatedFunction::constant(1.0, -5.0, 5.0, 1e-2);
    const TabulatedFunction T1 = solve_T(one, -3.0, 3.0, 1e-3);
    CHECK(T1(1.7) == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(T1(-2.4) == doctest::Approx(-2.4).epsilon(1e-12));

    const TabulatedFunction two = TabulatedFunction::constant(2.0, -8.0, 8.0, 1e-2);
    const TabulatedFunction T2 = solve_T(two, -3.0, 3.0, 1e-3);
    CHECK(T2(1.5) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("solve_T: separable closed form T = sqrt(1+2x) - 1") {
    const TabulatedFunction alpha =
        TabulatedFunction::sample([](double y) { return 1.0 / (1.0 + y); }, -0.95, 5.0, 1e-3);
    const TabulatedFunction T = solve_T(alpha, -0.4, 2.0, 1e-3);
    CHECK(T(1.5) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(T(-0.375) == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("solve_T reports alpha window exhaustion") {
    const TabulatedFunction narrow = TabulatedFunction::constant(2.0, -1.0, 1.0, 1e-2);
    CHECK_THROWS_AS(solve_T(narrow, -3.0, 3.0, 1e-3), RangeError);
}

TEST_CASE("a_from_alpha: constant cases") {
    const TabulatedFunction one = TabulatedFunction::constant(1.0, -4.0, 4.0, 1e-2);
    const TabulatedFunction T = solve_T(one, -2.0, 2.0, 1e-3);
    const TabulatedFunction a2 = a_from_alpha(one, T, 2.0);
    CHECK(a2(0.7) == doctest::Approx(2.0).epsilon(1e-12));
    const TabulatedFunction a3 = a_from_alpha(one, T, 3.0);
    CHECK(a3(-1.1) == doctest::Approx(1.5).epsilon(1e-12));

    // alpha = 2 at every point seen through T, m = 2: a = 2 * 2^-3 = 0.25
    const TabulatedFunction two = TabulatedFunction::constant(2.0, -8.0, 8.0, 1e-2);
    const TabulatedFunction T2 = solve_T(two, -2.0, 2.0, 1e-3);
    const TabulatedFunction a4 = a_from_alpha(two, T2, 2.0);
    CHECK(a4(0.3) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("T_from_a: closed forms") {
    const double m = 2.0;
    const TabulatedFunction a_id = TabulatedFunction::constant(m / (m - 1.0), -2.0, 2.0, 1e-3);
    const TabulatedFunction T_id = T_from_a(a_id, m);
    CHECK(T_id(1.25) == doctest::Approx(1.25).epsilon(1e-12));

    const double half_value = std::pow(2.0, m + 1.0) * m / (m - 1.0);
    const TabulatedFunction a_half = TabulatedFunction::constant(half_value, -2.0, 2.0, 1e-3);
    CHECK(T_from_a(a_half, m)(1.0) == doctest::Approx(0.5).epsilon(1e-12));

    // m = 2, a = 2 (1+xi)^2: T(x) = 3 ((1+x)^(1/3) - 1) for x >= 0
    const TabulatedFunction a_quad = TabulatedFunction::sample(
        [](double xi) { return 2.0 * square(1.0 + xi); }, -0.01, 3.0, 1e-3);
    // grid contains 0 as a node (x0 = -0.01, step 1e-3)
    const TabulatedFunction T = T_from_a(a_quad, 2.0);
    for (double x : {0.5, 1.0, 2.0})
        CHECK(T(x) == doctest::Approx(3.0 * (std::cbrt(1.0 + x) - 1.0)).epsilon(1e-9));
}

TEST_CASE("b_from_a: constant a recovers b = 0, prefactor check") {
    const TabulatedFunction a_const = TabulatedFunction::constant(2.0, -3.0, 3.0, 1e-3);
    const TabulatedFunction T = T_from_a(a_const, 2.0);
    const TabulatedFunction b0 = b_from_a(a_const, T, 2.0, 1e-2);
    for (std::size_t i = 0; i < b0.size(); ++i) CHECK(std::abs(b0.value(i)) < 1e-12);

    // a = exp(c x): (log a)' = c and T'(x) = (a/2)^(-1/3) at m = 2, so the
    // recovered drift at y = T(x) is (4/3) c (exp(c x)/2)^(1/3)
    const double c = 0.3;
    const TabulatedFunction a_exp =
        TabulatedFunction::sample([c](double x) { return std::exp(c * x); }, -3.0, 3.0, 1e-3);
    const TabulatedFunction T_exp = T_from_a(a_exp, 2.0);
    const TabulatedFunction b_exp = b_from_a(a_exp, T_exp, 2.0, 1e-2);
    const double y_probe = b_exp.node(b_exp.size() / 2);
    const double x_probe = invert_monotone(T_exp, y_probe);
    const double expected = 4.0 / 3.0 * c * std::cbrt(std::exp(c * x_probe) / 2.0);
    CHECK(b_exp(y_probe) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("full round trip b -> (alpha, T, a) -> b within 1e-4") {
    const ConvectionCoefficient cc = make_b_preset(gaussian_problem());
    const TransformedCoefficients tc = build_transform(cc, 2.0, 1.0, -4.5, 4.5, 1e-3);
    CHECK(tc.a_lower > 0.0);
    CHECK(tc.T(0.0) == doctest::Approx(0.0).epsilon(1e-14));

    const TabulatedFunction brec = b_from_a(tc.a, tc.T, 2.0, 1e-3);
    double sup_err = 0.0;
    for (std::size_t i = 0; i < brec.size(); ++i)
        sup_err = std::max(sup_err, std::abs(brec.value(i) - cc.b(brec.node(i))));
    CHECK(sup_err < 1e-4);
}

TEST_CASE("two routes to T agree within 1e-6") {
    const ConvectionCoefficient cc = make_b_preset(gaussian_problem());
    const TransformedCoefficients tc = build_transform(cc, 2.0, 1.0, -4.5, 4.5, 1e-3);
    const TabulatedFunction T2 = T_from_a(tc.a, 2.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < T2.size(); ++i)
        gap = std::max(gap, std::abs(T2.value(i) - tc.T.value(i)));
    CHECK(gap < 1e-6);
}

TEST_CASE("properties (a1), (a2) hold for the gaussian preset") {
    const ConvectionCoefficient cc = make_b_preset(gaussian_problem());
    const TransformedCoefficients tc = build_transform(cc, 2.0, 1.0, -4.5, 4.5, 1e-3);
    CHECK(tc.a_lower > 1.0);  // a stays near m/(m-1) = 2 for this drift
    CHECK(tc.a_upper < 3.0);
    CHECK(std::isfinite(tc.a_second_derivative_sup));
    CHECK(std::abs(tc.a_second_derivative_sup) < 10.0);
    // T strictly increasing
    for (std::size_t i = 0; i + 1 < tc.T.size(); ++i)
        CHECK(tc.T.value(i + 1) > tc.T.value(i));
}

TEST_CASE("rescale: identity transform, pushforward of uniform, mass") {
    ProblemConfig zero;
    zero.b_preset = "zero";
    const ConvectionCoefficient cc = make_b_preset(zero);

    // alpha0 = 1: T = x, rescale is a resampling
    const TransformedCoefficients tc1 = build_transform(cc, 2.0, 1.0, -3.0, 3.0, 1e-3);
    const GridSpec yg{-2.0, 0.01, 400};
    const GridDensity u = barenblatt_density(2.0, 0.3, yg);
    const GridDensity rho = rescale(u, tc1, yg);
    double l1 = 0.0;
    for (std::size_t i = 0; i < yg.cells; ++i)
        l1 += std::abs(rho.value(i) - u.value(i)) * yg.dx;
    CHECK(l1 < 1e-4);
    CHECK(rho.mass() == doctest::Approx(1.0).epsilon(1e-12));

    // alpha0 = 2: T(x) = 2x; uniform on [0,2] in y becomes uniform on [0,1] in x
    const TransformedCoefficients tc2 = build_transform(cc, 2.0, 2.0, -3.0, 3.0, 1e-3);
    const GridSpec yg2{-0.5, 0.01, 300};
    std::vector<double> uv(300, 0.0);
    for (std::size_t i = 0; i < 300; ++i) {
        const double y = yg2.center(i);
        if (y > 0.0 && y < 2.0) uv[i] = 0.5;
    }
    double mass = 0.0;
    for (double v : uv) mass += v * yg2.dx;
    for (auto& v : uv) v /= mass;
    const GridDensity u2(yg2, std::move(uv));
    const GridDensity rho2 = rescale(u2, tc2, GridSpec{-0.25, 0.005, 300});
    // interior of [0,1] should sit near density 1
    CHECK(rho2.value(150) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(rho2.value(200) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(rho2.mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse_rescale inverts rescale in L1") {
    const ConvectionCoefficient cc = make_b_preset(gaussian_problem());
    const TransformedCoefficients tc = build_transform(cc, 2.0, 1.0, -4.5, 4.5, 1e-3);
    const GridSpec yg{-3.0, 0.005, 1200};
    const GridDensity u = barenblatt_density(2.0, 0.3, yg);
    const GridSpec xg{-3.5, 0.005, 1400};
    const GridDensity rho = rescale(u, tc, xg);
    const GridDensity back = inverse_rescale(rho, tc, yg);
    double l1 = 0.0;
    for (std::size_t i = 0; i < yg.cells; ++i)
        l1 += std::abs(back.value(i) - u.value(i)) * yg.dx;
    CHECK(l1 < 1e-3);
}

TEST_CASE("map_quantile agrees with rescale through the CDF route") {
    const ConvectionCoefficient cc = make_b_preset(gaussian_problem());
    const TransformedCoefficients tc = build_transform(cc, 2.0, 1.0, -4.5, 4.5, 1e-3);
    const GridSpec xg{-3.0, 0.005, 1200};
    const GridDensity rho = barenblatt_density(2.0, 0.3, xg);  // treat as x-space density
    const Quantile gx = to_quantile(rho, 200);
    const Quantile gy = map_quantile(gx, tc.T);
    // G_u(omega) = T(G_rho(omega)) must match the quantile of inverse_rescale(rho)
    const GridSpec yg{-3.5, 0.005, 1400};
    const GridDensity u = inverse_rescale(rho, tc, yg);
    const Quantile gy2 = to_quantile(u, 200);
    for (std::size_t i = 0; i < 200; ++i)
        CHECK(gy.value(i) == doctest::Approx(gy2.value(i)).epsilon(1e-3));
}
