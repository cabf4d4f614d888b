#include "jkoflow/entropycheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "jkoflow/tabulated.hpp"

namespace jkoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double raw_bump(double y) {  // unnormalized exp(-1/(1-y^2))
    const double s = 1.0 - y * y;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

// cumulative integrals of the mollifier kernel on [-1, 1] built once:
// tables for Z, Delta1 (CDF) and I1(s) = int_{-1}^s r delta1(r) dr
struct MollifierTables {
    double Z;
    TabulatedFunction cdf;      // Delta1
    TabulatedFunction moment;   // I1

    static const MollifierTables& instance() {
        static const MollifierTables tables = build();
        return tables;
    }

private:
    static MollifierTables build() {
        constexpr std::size_t kIntervals = 8192;
        const double h = 2.0 / kIntervals;
        // 4-point Gauss-Legendre per interval
        const double gl_x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                0.8611363115940526};
        const double gl_w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                0.3478548451374538};
        std::vector<double> cdf(kIntervals + 1, 0.0), mom(kIntervals + 1, 0.0);
        for (std::size_t i = 0; i < kIntervals; ++i) {
            const double a = -1.0 + h * static_cast<double>(i);
            double s0 = 0.0, s1 = 0.0;
            for (int q = 0; q < 4; ++q) {
                const double y = a + 0.5 * h * (1.0 + gl_x[q]);
                const double v = raw_bump(y);
                s0 += gl_w[q] * v;
                s1 += gl_w[q] * y * v;
            }
            cdf[i + 1] = cdf[i] + 0.5 * h * s0;
            mom[i + 1] = mom[i] + 0.5 * h * s1;
        }
        const double Z = cdf.back();
        for (auto& v : cdf) v /= Z;
        for (auto& v : mom) v /= Z;
        return MollifierTables{Z, TabulatedFunction(-1.0, h, std::move(cdf)),
                               TabulatedFunction(-1.0, h, std::move(mom))};
    }

    MollifierTables(double z, TabulatedFunction c, TabulatedFunction m)
        : Z(z), cdf(std::move(c)), moment(std::move(m)) {}
};

double cdf1(double s) {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return std::clamp(MollifierTables::instance().cdf(s), 0.0, 1.0);
}

double moment1(double s) {
    if (s <= -1.0) return 0.0;
    if (s >= 1.0) return 0.0;  // total first moment vanishes by symmetry
    return MollifierTables::instance().moment(s);
}

} // namespace

Mollifier::Mollifier(double eps) : eps_(eps) {
    if (!(eps > 0.0)) throw InvariantError("Mollifier: need eps > 0");
}

double Mollifier::normalization() { return MollifierTables::instance().Z; }

double Mollifier::delta1(double y) { return raw_bump(y) / MollifierTables::instance().Z; }

double Mollifier::delta(double y) const { return delta1(y / eps_) / eps_; }

double Mollifier::sgn(double y) const { return 2.0 * cdf1(y / eps_) - 1.0; }

double Mollifier::step(double y) const { return cdf1(y / eps_); }

double Mollifier::abs(double y) const {
    const double s = y / eps_;
    if (s <= -1.0 || s >= 1.0) return std::fabs(y);
    return eps_ * (s * (2.0 * cdf1(s) - 1.0) - 2.0 * moment1(s));
}

double Mollifier::heav(double y) const {
    const double s = y / eps_;
    if (s >= 1.0) return y;
    if (s <= -1.0) return 0.0;
    return eps_ * (s * cdf1(s) - moment1(s));
}

double TestFunction::bump(double s) { return raw_bump(s); }

double TestFunction::bump_prime(double s) {
    const double d = 1.0 - s * s;
    if (d <= 0.0) return 0.0;
    return raw_bump(s) * (-2.0 * s / (d * d));
}

double TestFunction::theta(double t) const { return bump((t - t_center) / t_halfwidth); }
double TestFunction::theta_prime(double t) const {
    return bump_prime((t - t_center) / t_halfwidth) / t_halfwidth;
}
double TestFunction::phi(double y) const { return bump((y - y_center) / y_halfwidth); }
double TestFunction::phi_prime(double y) const {
    return bump_prime((y - y_center) / y_halfwidth) / y_halfwidth;
}

std::vector<TestFunction> make_test_bank(std::size_t count, double t_lo, double t_hi, double y_lo,
                                         double y_hi, std::uint64_t seed) {
    if (!(t_hi > t_lo) || !(y_hi > y_lo))
        throw InvariantError("make_test_bank: empty windows");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<TestFunction> bank;
    bank.reserve(count);
    const double t_span = t_hi - t_lo, y_span = y_hi - y_lo;
    for (std::size_t i = 0; i < count; ++i) {
        TestFunction tf;
        tf.id = "tf" + std::to_string(i);
        tf.t_halfwidth = 0.5 * t_span * (0.35 + 0.45 * unit(rng));
        const double t_margin = 0.01 * t_span;
        const double t_play = t_span - 2.0 * (tf.t_halfwidth + t_margin);
        tf.t_center = t_lo + t_margin + tf.t_halfwidth + std::max(0.0, t_play) * unit(rng);
        tf.y_halfwidth = 0.5 * y_span * (0.25 + 0.5 * unit(rng));
        const double y_margin = 0.01 * y_span;
        const double y_play = y_span - 2.0 * (tf.y_halfwidth + y_margin);
        tf.y_center = y_lo + y_margin + tf.y_halfwidth + std::max(0.0, y_play) * unit(rng);
        bank.push_back(tf);
    }
    return bank;
}

namespace {

// data-derived quantities shared across all (k, test) pairs of a sweep
struct PreparedField {
    const SpaceTimeField* u;
    double dt, dy;
    std::vector<std::vector<double>> um;   // u^m per snapshot
    std::vector<std::vector<double>> dum;  // centered d(u^m)/dy per snapshot
    std::vector<double> b, bp;             // at cell centers

    PreparedField(const SpaceTimeField& field, const FvProblem& prob)
        : u(&field), dt(field.dt_snapshot()), dy(field.grid.dx) {
        const std::size_t cells = field.grid.cells;
        um.resize(field.values.size());
        dum.resize(field.values.size());
        for (std::size_t j = 0; j < field.values.size(); ++j) {
            um[j].resize(cells);
            dum[j].resize(cells);
            for (std::size_t i = 0; i < cells; ++i)
                um[j][i] = std::pow(field.values[j][i], prob.m);
            for (std::size_t i = 0; i < cells; ++i) {
                if (i == 0)
                    dum[j][i] = (um[j][1] - um[j][0]) / dy;
                else if (i + 1 == cells)
                    dum[j][i] = (um[j][i] - um[j][i - 1]) / dy;
                else
                    dum[j][i] = (um[j][i + 1] - um[j][i - 1]) / (2.0 * dy);
            }
        }
        b.resize(cells);
        bp.resize(cells);
        for (std::size_t i = 0; i < cells; ++i) {
            b[i] = prob.b(field.grid.center(i));
            bp[i] = prob.b_prime(field.grid.center(i));
        }
    }
};

EntropyEntry residual_impl(const PreparedField& pf, double k, const TestFunction& tf, double m,
                           std::span<const double> eps_seq) {
    const SpaceTimeField& field = *pf.u;
    if (tf.t_center - tf.t_halfwidth < field.times.front() - 1e-12 ||
        tf.t_center + tf.t_halfwidth > field.times.back() + 1e-12 ||
        tf.y_center - tf.y_halfwidth < field.grid.x_min - 1e-12 ||
        tf.y_center + tf.y_halfwidth > field.grid.x_max() + 1e-12)
        throw InvariantError("entropy_residual: test-function support leaves the data window");

    const double km = std::pow(k, m);
    const std::size_t cells = field.grid.cells;
    const double lo = tf.y_center - tf.y_halfwidth, hi = tf.y_center + tf.y_halfwidth;
    std::size_t i_lo = 0, i_hi = cells;
    while (i_lo < cells && field.grid.center(i_lo) < lo) ++i_lo;
    while (i_hi > i_lo && field.grid.center(i_hi - 1) > hi) --i_hi;

    EntropyEntry entry;
    entry.k = k;
    entry.test_id = tf.id;
    std::vector<Mollifier> mollifiers;
    mollifiers.reserve(eps_seq.size());
    for (double e : eps_seq) mollifiers.emplace_back(e);
    std::vector<double> diss(eps_seq.size(), 0.0);

    for (std::size_t j = 0; j < field.times.size(); ++j) {
        const double t = field.times[j];
        const double th = tf.theta(t);
        const double thp = tf.theta_prime(t);
        if (th == 0.0 && thp == 0.0) continue;
        const auto& urow = field.values[j];
        const auto& umrow = pf.um[j];
        const auto& dumrow = pf.dum[j];
        for (std::size_t i = i_lo; i < i_hi; ++i) {
            const double y = field.grid.center(i);
            const double ph = tf.phi(y);
            const double php = tf.phi_prime(y);
            if (ph == 0.0 && php == 0.0) continue;
            const double uv = urow[i];
            entry.lhs += std::abs(uv - k) * thp * ph;
            const double sg = uv > k ? 1.0 : (uv < k ? -1.0 : 0.0);
            entry.rhs_flux += sg * ((dumrow[i] + pf.b[i] * (umrow[i] - km)) * th * php -
                                    pf.bp[i] * km * th * ph);
            const double arg = umrow[i] - km;
            for (std::size_t e = 0; e < mollifiers.size(); ++e) {
                if (std::abs(arg) >= mollifiers[e].eps()) continue;
                diss[e] += 2.0 * mollifiers[e].delta(arg) * square(dumrow[i]) * th * ph;
            }
        }
    }
    const double cellw = pf.dy * pf.dt;
    entry.lhs *= cellw;
    entry.rhs_flux *= cellw;
    entry.dissipation_estimate = 0.0;
    for (std::size_t e = 0; e < eps_seq.size(); ++e) {
        diss[e] *= cellw;
        entry.dissipation_by_eps.emplace_back(eps_seq[e], diss[e]);
        entry.dissipation_estimate = std::max(entry.dissipation_estimate, diss[e]);
    }
    entry.residual = entry.lhs - entry.rhs_flux - entry.dissipation_estimate;
    return entry;
}

} // namespace

EntropyEntry entropy_residual(const SpaceTimeField& u, double k, const TestFunction& tf,
                              const FvProblem& prob, std::span<const double> eps_seq) {
    if (!(k >= 0.0)) throw InvariantError("entropy_residual: need k >= 0");
    const PreparedField pf(u, prob);
    return residual_impl(pf, k, tf, prob.m, eps_seq);
}

EntropyReport entropy_sweep(const SpaceTimeField& u, const FvProblem& prob,
                            std::span<const double> k_grid, std::span<const TestFunction> bank,
                            std::span<const double> eps_seq, int jobs) {
    EntropyReport report;
    report.min_residual = kInf;
    report.lhs_scale = 0.0;
    if (k_grid.empty() || bank.empty()) return report;

    const PreparedField pf(u, prob);
    report.entries.resize(k_grid.size() * bank.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const double k = k_grid[idx / bank.size()];
            const TestFunction& tf = bank[idx % bank.size()];
            report.entries[idx] = residual_impl(pf, k, tf, prob.m, eps_seq);
        }
    };
    const std::size_t total = report.entries.size();
    const std::size_t nthreads = std::min<std::size_t>(std::max(jobs, 1), total);
    if (nthreads <= 1) {
        work(0, total);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t)
            pool.emplace_back(work, total * t / nthreads, total * (t + 1) / nthreads);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : report.entries) {
        report.min_residual = std::min(report.min_residual, e.residual);
        report.lhs_scale = std::max(report.lhs_scale, std::abs(e.lhs));
    }
    return report;
}

std::vector<double> default_k_grid(const SpaceTimeField& u, std::size_t count) {
    const double top = 1.2 * u.sup();
    std::vector<double> k(count);
    for (std::size_t i = 0; i < count; ++i)
        k[i] = top * static_cast<double>(i + 1) / static_cast<double>(count);
    return k;
}

std::vector<double> default_eps_sequence(const SpaceTimeField& u, double m) {
    double h = 0.0, top = 0.0;
    for (const auto& row : u.values) {
        for (std::size_t i = 0; i + 1 < row.size(); ++i) {
            const double a = std::pow(row[i], m), b = std::pow(row[i + 1], m);
            h = std::max(h, std::abs(b - a));
            top = std::max(top, a);
        }
    }
    if (h <= 0.0) h = 1e-12 * (1.0 + top);
    return {4.0 * h, 2.0 * h, h};
}

void EntropyReport::write_csv(std::ostream& os) const {
    os << "# k,test_id,eps,lhs,rhs_flux,dissipation_at_eps,residual\n";
    char buf[240];
    for (const auto& e : entries) {
        for (const auto& [eps, d] : e.dissipation_by_eps) {
            std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.k,
                          e.test_id.c_str(), eps, e.lhs, e.rhs_flux, d, e.residual);
            os << buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "# summary,min_residual,%.17g,lhs_scale,%.17g\n",
                  min_residual, lhs_scale);
    os << buf;
}

} // namespace jkoflow
