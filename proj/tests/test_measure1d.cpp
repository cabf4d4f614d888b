#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "jkoflow/measure1d.hpp"
#include "oracles.hpp"

using namespace jkoflow;

namespace {

GridDensity uniform_density(double lo, double hi, std::size_t cells) {
    const GridSpec g{lo, (hi - lo) / static_cast<double>(cells), cells};
    return GridDensity(g, std::vector<double>(cells, 1.0 / (hi - lo)));
}

// rho(x) = 2x on [0,1], exact cell averages (average of a linear function)
GridDensity ramp_density(std::size_t cells) {
    const GridSpec g{0.0, 1.0 / static_cast<double>(cells), cells};
    std::vector<double> v(cells);
    for (std::size_t i = 0; i < cells; ++i) v[i] = 2.0 * g.center(i);
    return GridDensity(g, std::move(v));
}

} // namespace

TEST_CASE("GridDensity invariants") {
    CHECK_THROWS_AS(GridDensity(GridSpec{0.0, 0.1, 10}, std::vector<double>(10, 0.5)),
                    InvariantError);  // mass 0.5
    CHECK_THROWS_AS(GridDensity(GridSpec{0.0, 0.1, 10}, std::vector<double>(9, 1.0)),
                    InvariantError);  // size mismatch
    std::vector<double> neg(10, 1.0);
    neg[3] = -0.1;
    neg[4] = 1.2;  // keep mass 1
    CHECK_THROWS_AS(GridDensity(GridSpec{0.0, 0.1, 10}, neg), InvariantError);
    CHECK_NOTHROW(uniform_density(0.0, 1.0, 64));
}

TEST_CASE("cdf: uniform and ramp") {
    const GridDensity u = uniform_density(0.0, 1.0, 100);
    CHECK(u.cdf(0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u.cdf(-3.0) == 0.0);
    CHECK(u.cdf(0.0) == 0.0);
    CHECK(u.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(u.cdf(7.0) == 1.0);

    // exact integral: U(0.5) = int_0^0.5 2x dx = 0.25; 0.5 is a cell edge
    const GridDensity r = ramp_density(100);
    CHECK(r.cdf(0.5) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("to_quantile: uniform midpoints") {
    const GridDensity u = uniform_density(0.0, 1.0, 64);
    const Quantile q = to_quantile(u, 4);
    REQUIRE(q.size() == 4);
    CHECK(q.value(0) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(q.value(1) == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(q.value(2) == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(q.value(3) == doctest::Approx(0.875).epsilon(1e-12));
}

TEST_CASE("to_quantile: narrow bump concentrates") {
    const double c = 0.7;
    const GridSpec g{0.0, 0.01, 100};
    std::vector<double> v(100, 0.0);
    v[70] = 100.0;  // all mass in the cell containing c
    const GridDensity d(g, std::move(v));
    const Quantile q = to_quantile(d, 16);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(q.value(i) - c) <= 0.011);
}

TEST_CASE("to_quantile: inverts U(x) = x^2 at omega = 1/4") {
    const GridDensity r = ramp_density(100);
    const Quantile q = to_quantile(r, 2);  // omega = {0.25, 0.75}
    CHECK(q.value(0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(q.value(1) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-4));
}

TEST_CASE("to_quantile rejects n < 2") {
    const GridDensity u = uniform_density(0.0, 1.0, 16);
    CHECK_THROWS_AS(to_quantile(u, 1), InvariantError);
}

TEST_CASE("to_density: midpoint quantile gives back uniform") {
    std::vector<double> g(8);
    for (std::size_t i = 0; i < 8; ++i) g[i] = (i + 0.5) / 8.0;
    const GridDensity d = to_density(Quantile(g), GridSpec{0.0, 0.125, 8});
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(d.value(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("to_density: constant slope 2 gives uniform on [0,2]") {
    const std::size_t n = 50;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = 2.0 * (i + 0.5) / n;
    const GridSpec grid{0.0, 0.05, 40};
    const GridDensity d = to_density(Quantile(g), grid);
    for (std::size_t i = 0; i < grid.cells; ++i)
        CHECK(d.value(i) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("to_density: G = omega^2 approximates 1/(2 sqrt(x))") {
    const std::size_t n = 1000;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (static_cast<double>(i) + 0.5) / n;
        g[i] = w * w;
    }
    const GridSpec grid{0.0, 1e-3, 1000};
    const GridDensity d = to_density(Quantile(g), grid);
    double l1 = 0.0;
    for (std::size_t i = 1; i < grid.cells; ++i) {  // skip the singular first cell
        const double x = grid.center(i);
        l1 += std::abs(d.value(i) - 0.5 / std::sqrt(x)) * grid.dx;
    }
    CHECK(l1 < 1e-2);
}

TEST_CASE("to_density flags atoms and conserves mass under clamping") {
    ConversionReport rep;
    const GridDensity d =
        to_density(Quantile({0.0, 0.5, 0.5, 1.0}), GridSpec{-1.0, 0.25, 8}, &rep);
    CHECK(rep.atoms);
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));

    // quantile range far beyond the window: mass is clamped into boundary cells
    ConversionReport rep2;
    const GridDensity d2 =
        to_density(Quantile({-10.0, -9.0, 9.0, 10.0}), GridSpec{-1.0, 0.25, 8}, &rep2);
    CHECK(rep2.window_overflow);
    CHECK(d2.mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wasserstein2: translation, identity, ramp") {
    const GridDensity a = uniform_density(0.0, 1.0, 200);
    const GridDensity b = uniform_density(2.0, 3.0, 200);
    const Quantile qa = to_quantile(a, 128), qb = to_quantile(b, 128);
    CHECK(wasserstein2(qa, qb) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(wasserstein2(qa, qa) == 0.0);

    // G = omega vs 2 omega: discrete value sqrt(1/3 - 1/(12 n^2)), limit 3^(-1/2)
    const std::size_t n = 1000;
    std::vector<double> g1(n), g2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (static_cast<double>(i) + 0.5) / n;
        g1[i] = w;
        g2[i] = 2.0 * w;
    }
    const double w2 = wasserstein2(Quantile(g1), Quantile(g2));
    const double nn = static_cast<double>(n);
    CHECK(w2 == doctest::Approx(std::sqrt(1.0 / 3.0 - 1.0 / (12.0 * nn * nn))).epsilon(1e-14));
    CHECK(std::abs(w2 - 1.0 / std::sqrt(3.0)) < 1e-6);

    CHECK_THROWS_AS(wasserstein2(Quantile(g1), qa), InvariantError);
}

TEST_CASE("wasserstein2 metric axioms on random monotone triples") {
    std::mt19937_64 rng(991);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto a = oracles::random_monotone(rng, 32, 2.0);
        const auto b = oracles::random_monotone(rng, 32, 2.0);
        const auto c = oracles::random_monotone(rng, 32, 2.0);
        const Quantile qa(a), qb(b), qc(c);
        const double ab = wasserstein2(qa, qb);
        const double ba = wasserstein2(qb, qa);
        CHECK(ab == ba);  // symmetry is exact
        CHECK(ab <= wasserstein2(qa, qc) + wasserstein2(qc, qb) + 1e-12);
        CHECK(ab >= 0.0);
    }
}

TEST_CASE("wasserstein2 translation equivariance is exact") {
    std::mt19937_64 rng(7);
    const Quantile q(oracles::random_monotone(rng, 64, 1.0));
    CHECK(wasserstein2(shift(q, 0.37), q) == doctest::Approx(0.37).epsilon(1e-15));
    CHECK(wasserstein2(shift(q, -1.25), q) == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("round trip density -> quantile -> density converges with order >= 1") {
    // smooth compactly supported profile
    const GridSpec fine{-1.5, 3.0 / 3000, 3000};
    std::vector<double> v(fine.cells);
    double mass = 0.0;
    for (std::size_t i = 0; i < fine.cells; ++i) {
        const double x = fine.center(i);
        const double d = 1.0 - x * x;
        v[i] = d > 0.0 ? std::exp(-1.0 / d) : 0.0;
        mass += v[i] * fine.dx;
    }
    for (auto& x : v) x /= mass;
    const GridDensity d(fine, std::move(v));

    std::vector<std::size_t> ns = {50, 100, 200, 400};
    std::vector<double> errors;
    for (std::size_t n : ns) {
        const GridDensity back = to_density(to_quantile(d, n), fine);
        double l1 = 0.0;
        for (std::size_t i = 0; i < fine.cells; ++i)
            l1 += std::abs(back.value(i) - d.value(i)) * fine.dx;
        errors.push_back(l1);
    }
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) CHECK(errors[k + 1] < errors[k]);
    // piecewise-constant-in-omega reconstruction: L1 error c (1 + log n)/n for
    // densities vanishing at the support edge, so the measured order is
    // 1 - O(1/log n); check the log-corrected first-order envelope instead of a
    // naked exponent fit.
    const double order = std::log2(errors.front() / errors.back()) /
                         std::log2(static_cast<double>(ns.back()) / ns.front());
    CHECK(order >= 0.85);
    for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
        const double env_a = errors[k] * ns[k] / (1.0 + std::log(ns[k]));
        const double env_b = errors[k + 1] * ns[k + 1] / (1.0 + std::log(ns[k + 1]));
        CHECK(env_b <= env_a * 1.05);
    }
}

TEST_CASE("csv round trip is bit-exact") {
    const GridDensity d = ramp_density(37);
    std::stringstream ss;
    write_csv(d, ss);
    const GridDensity back = read_density_csv(ss);
    REQUIRE(back.cells() == d.cells());
    for (std::size_t i = 0; i < d.cells(); ++i) CHECK(back.value(i) == d.value(i));

    std::mt19937_64 rng(3);
    const Quantile q(oracles::random_monotone(rng, 19, 1.0));
    std::stringstream qs;
    write_csv(q, qs);
    const Quantile qback = read_quantile_csv(qs);
    REQUIRE(qback.size() == q.size());
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(qback.value(i) == q.value(i));
}
