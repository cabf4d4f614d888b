#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jkoflow/refsolver.hpp"

namespace jkoflow {

/// The standard mollifier delta_1(y) = Z^-1 exp(-1/(1-y^2)) on (-1,1) and its
/// eps-rescalings, together with the mollified sign / step / abs / positive
/// part. sgn' = 2 delta and stp' = delta hold by construction.
class Mollifier {
public:
    explicit Mollifier(double eps);

    double eps() const { return eps_; }
    static double normalization();  // Z
    static double delta1(double y);

    double delta(double y) const;  // delta_eps
    double sgn(double y) const;    // nondecreasing, -1/+1 outside (-eps, eps)
    double step(double y) const;   // nondecreasing, 0/1 outside
    double abs(double y) const;
    double heav(double y) const;   // mollified positive part

private:
    double eps_;
};

/// Tensor-product test function theta(t) phi(y): nonnegative smooth bumps with
/// compact support and analytic derivatives.
struct TestFunction {
    std::string id;
    double t_center = 0.0, t_halfwidth = 1.0;
    double y_center = 0.0, y_halfwidth = 1.0;

    static double bump(double s);        // exp(-1/(1-s^2)) on (-1,1)
    static double bump_prime(double s);

    double theta(double t) const;
    double theta_prime(double t) const;
    double phi(double y) const;
    double phi_prime(double y) const;
};

/// Seeded bank of bumps with varied centers/widths strictly inside
/// (t_lo, t_hi) x (y_lo, y_hi).
std::vector<TestFunction> make_test_bank(std::size_t count, double t_lo, double t_hi, double y_lo,
                                         double y_hi, std::uint64_t seed);

struct EntropyEntry {
    double k = 0.0;
    std::string test_id;
    double lhs = 0.0;
    double rhs_flux = 0.0;
    double dissipation_estimate = 0.0;  // max over the eps sequence
    double residual = 0.0;              // lhs - rhs_flux - dissipation_estimate
    std::vector<std::pair<double, double>> dissipation_by_eps;
};

/// Kruzkov residual of one (k, test function) pair on space-time data:
///   lhs      = iint |u-k| theta' phi
///   rhs_flux = iint sgn(u-k) ( [(u^m)_y + b (u^m - k^m)] theta phi'
///                              - b_y k^m theta phi )
///   dissipation(eps) = iint sgn_eps'(u^m - k^m) [(u^m)_y]^2 theta phi
/// (u^m)_y by centered differences; midpoint quadrature in y, snapshot
/// spacing in t. Expected residual >= -tol for entropy-consistent data.
EntropyEntry entropy_residual(const SpaceTimeField& u, double k, const TestFunction& tf,
                              const FvProblem& prob, std::span<const double> eps_seq);

struct EntropyReport {
    std::vector<EntropyEntry> entries;
    double min_residual = 0.0;  // +inf sentinel when entries is empty
    double lhs_scale = 0.0;     // max |lhs| over entries

    void write_csv(std::ostream& os) const;  // one row per (k, test_id, eps) + summary
};

/// Cartesian sweep over entropy levels and the test bank.
EntropyReport entropy_sweep(const SpaceTimeField& u, const FvProblem& prob,
                            std::span<const double> k_grid, std::span<const TestFunction> bank,
                            std::span<const double> eps_seq, int jobs = 1);

/// Levels (0, 1.2 sup u] at `count` uniform steps.
std::vector<double> default_k_grid(const SpaceTimeField& u, std::size_t count);
/// {4h, 2h, h} where h is the largest one-cell jump of u^m in the data (the
/// resolution of u^m values; below it the mollified derivative is noise).
std::vector<double> default_eps_sequence(const SpaceTimeField& u, double m);

} // namespace jkoflow
