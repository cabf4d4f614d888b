#include "jkoflow/jko.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace jkoflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Energy-weight access used by both the objective and its derivatives; the
// derivative convention (centered differences of the cubic interpolant at the
// tabulation step) matches the energy module.
struct Weight {
    const TabulatedFunction* a;
    double h;  // tabulation step
    double margin_lo, margin_hi;

    explicit Weight(const TabulatedFunction& tab)
        : a(&tab), h(tab.step()), margin_lo(tab.x_min() + 2.0 * tab.step()),
          margin_hi(tab.x_max() - 2.0 * tab.step()) {}

    bool in_window(double x) const { return x >= margin_lo && x <= margin_hi; }
    double value(double x) const { return (*a)(x); }
    double prime(double x) const { return ((*a)(x + h) - (*a)(x - h)) / (2.0 * h); }
    double second(double x) const {
        return ((*a)(x + h) - 2.0 * (*a)(x) + (*a)(x - h)) / (h * h);
    }
};

double objective_value(std::span<const double> g, std::span<const double> p, double tau, double m,
                       const Weight& w) {
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    double transport = 0.0;
    for (std::size_t i = 0; i < n; ++i) transport += square(g[i] - p[i]);
    transport /= 2.0 * tau * dn;

    double psi = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dg = g[j + 1] - g[j];
        if (!(dg > 0.0)) return kInf;
        const double xbar = 0.5 * (g[j] + g[j + 1]);
        if (!w.in_window(xbar)) return kInf;
        const double xi = dn * dg;
        psi += w.value(xbar) * std::pow(xi, 1.0 - m);
    }
    return transport + psi / (m * dn);
}

struct FullEval {
    double value = kInf;
    double grad_norm = kInf;
};

// value, gradient and tridiagonal Hessian (diag/off) in one pass
FullEval full_eval(std::span<const double> g, std::span<const double> p, double tau, double m,
                   const Weight& w, std::vector<double>& grad, std::vector<double>& hd,
                   std::vector<double>& ho) {
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    const double inv_tn = 1.0 / (tau * dn);
    grad.assign(n, 0.0);
    hd.assign(n, 0.0);
    ho.assign(n - 1, 0.0);

    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = g[i] - p[i];
        value += 0.5 * inv_tn * r * r;
        grad[i] = inv_tn * r;
        hd[i] = inv_tn;
    }

    const double wq = 1.0 / dn;  // quadrature weight per interior increment
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dg = g[j + 1] - g[j];
        if (!(dg > 0.0)) return {kInf, kInf};
        const double xbar = 0.5 * (g[j] + g[j + 1]);
        if (!w.in_window(xbar)) return {kInf, kInf};
        const double xi = dn * dg;
        const double xi_m = std::pow(xi, -m);   // xi^-m
        const double xi_1m = xi_m * xi;         // xi^(1-m)
        const double xi_m1 = xi_m / xi;         // xi^-(m+1)
        const double av = w.value(xbar);
        const double ap = w.prime(xbar);
        const double app = w.second(xbar);

        const double H = av * xi_1m / m;
        const double Hx = ap * xi_1m / m;
        const double Hxi = (1.0 - m) / m * av * xi_m;
        const double Hxx = app * xi_1m / m;
        const double Hxxi = (1.0 - m) / m * ap * xi_m;
        const double Hxixi = (m - 1.0) * av * xi_m1;

        value += wq * H;
        grad[j] += wq * (0.5 * Hx - dn * Hxi);
        grad[j + 1] += wq * (0.5 * Hx + dn * Hxi);
        hd[j] += wq * (0.25 * Hxx - dn * Hxxi + dn * dn * Hxixi);
        hd[j + 1] += wq * (0.25 * Hxx + dn * Hxxi + dn * dn * Hxixi);
        ho[j] += wq * (0.25 * Hxx - dn * dn * Hxixi);
    }

    double gnorm = 0.0;
    for (double v : grad) gnorm = std::max(gnorm, std::abs(v));
    return {value, gnorm};
}

// symmetric tridiagonal solve of (H + lambda I) d = -grad; false on a
// nonpositive pivot
bool solve_shifted(const std::vector<double>& hd, const std::vector<double>& ho,
                   const std::vector<double>& grad, double lambda, std::vector<double>& w,
                   std::vector<double>& z, std::vector<double>& d) {
    const std::size_t n = hd.size();
    w.resize(n);
    z.resize(n);
    d.resize(n);
    w[0] = hd[0] + lambda;
    if (!(w[0] > 0.0)) return false;
    z[0] = -grad[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double mi = ho[i - 1] / w[i - 1];
        w[i] = hd[i] + lambda - mi * ho[i - 1];
        if (!(w[i] > 0.0)) return false;
        z[i] = -grad[i] - mi * z[i - 1];
    }
    d[n - 1] = z[n - 1] / w[n - 1];
    for (std::size_t i = n - 1; i > 0; --i) d[i - 1] = (z[i - 1] - ho[i - 1] * d[i]) / w[i - 1];
    return true;
}

} // namespace

double discrete_potential(const Quantile& g, const EnergyFunctional& ef) {
    const Weight w(ef.a);
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    double psi = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dg = g.value(j + 1) - g.value(j);
        if (!(dg > 0.0)) return kInf;
        const double xbar = 0.5 * (g.value(j) + g.value(j + 1));
        if (!w.in_window(xbar)) return kInf;
        psi += w.value(xbar) * std::pow(dn * dg, 1.0 - ef.m);
    }
    return psi / (ef.m * dn);
}

double discrete_entropy(const Quantile& g) {
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    double e = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dg = g.value(j + 1) - g.value(j);
        if (!(dg > 0.0)) return kInf;
        e -= std::log(dn * dg);
    }
    return e / dn;
}

double discrete_second_moment(const Quantile& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += square(g.value(i));
    return s / static_cast<double>(g.size());
}

double discrete_lm_norm(const Quantile& g, double m) {
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dg = g.value(j + 1) - g.value(j);
        if (!(dg > 0.0)) return kInf;
        s += std::pow(dn * dg, 1.0 - m);
    }
    return s / dn;
}

double discrete_h1_rho_m_half(const Quantile& g, double m) {
    const std::size_t n = g.size();
    const double dn = static_cast<double>(n);
    double s = 0.0;
    double rho_prev = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dg = g.value(j + 1) - g.value(j);
        if (!(dg > 0.0)) return kInf;
        const double rho = std::pow(1.0 / (dn * dg), 0.5 * m);
        if (j > 0) {
            const double slope = 0.5 * dn * (g.value(j + 1) - g.value(j - 1));
            s += dn * square(rho - rho_prev) / slope;
        }
        rho_prev = rho;
    }
    return s;
}

double step_objective(const Quantile& g, const Quantile& g_prev, double tau,
                      const EnergyFunctional& ef) {
    if (g.size() != g_prev.size())
        throw InvariantError("step_objective: quantile resolutions differ");
    if (!(tau > 0.0)) throw InvariantError("step_objective: need tau > 0");
    const Weight w(ef.a);
    return objective_value(g.values(), g_prev.values(), tau, ef.m, w);
}

StepResult jko_step(const Quantile& g_prev, const JkoConfig& cfg, const EnergyFunctional& ef) {
    if (!(cfg.tau > 0.0) || !(cfg.inner_tol > 0.0))
        throw InvariantError("jko_step: invalid config");
    const Weight w(ef.a);
    const std::size_t n = g_prev.size();
    std::vector<double> g(g_prev.values().begin(), g_prev.values().end());
    const std::span<const double> p = g_prev.values();

    std::vector<double> grad, hd, ho, wbuf, zbuf, d, trial;
    FullEval ev = full_eval(g, p, cfg.tau, ef.m, w, grad, hd, ho);
    if (!std::isfinite(ev.value))
        throw InvariantError("jko_step: objective infinite at the warm start");

    double lambda = 0.0;
    int iter = 0;
    bool converged = false;
    for (; iter < cfg.inner_max_iter; ++iter) {
        if (ev.grad_norm <= cfg.inner_tol) {
            converged = true;
            break;
        }
        double max_diag = 0.0;
        for (double v : hd) max_diag = std::max(max_diag, std::abs(v));
        const double lambda0 = 1e-10 * std::max(1.0, max_diag);

        bool accepted = false;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            if (!solve_shifted(hd, ho, grad, lambda, wbuf, zbuf, d)) {
                lambda = (lambda == 0.0) ? lambda0 : lambda * 10.0;
                continue;
            }
            double descent = 0.0;
            for (std::size_t i = 0; i < n; ++i) descent += grad[i] * d[i];
            if (!(descent < 0.0)) {
                lambda = (lambda == 0.0) ? lambda0 : lambda * 10.0;
                continue;
            }
            // fraction-to-boundary: keep all increments strictly positive
            double t = 1.0;
            for (std::size_t j = 0; j + 1 < n; ++j) {
                const double dd = d[j + 1] - d[j];
                if (dd < 0.0) t = std::min(t, -0.995 * (g[j + 1] - g[j]) / dd);
            }
            trial.resize(n);
            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = g[i] + t * d[i];
                const double jt = objective_value(trial, p, cfg.tau, ef.m, w);
                if (jt <= ev.value + 1e-4 * t * descent) {
                    g.swap(trial);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) lambda = (lambda == 0.0) ? lambda0 : lambda * 10.0;
        }
        if (!accepted) break;
        lambda *= 0.25;
        if (lambda < 1e-300) lambda = 0.0;
        ev = full_eval(g, p, cfg.tau, ef.m, w, grad, hd, ho);
    }

    return StepResult{Quantile(std::move(g)), ev.value, ev.grad_norm, iter, converged};
}

namespace {

StepDiagnostics make_diagnostics(const Quantile& g, const Quantile* prev,
                                 const EnergyFunctional& ef, double grad_norm, int iterations) {
    StepDiagnostics d;
    d.w2_to_prev = prev ? wasserstein2(g, *prev) : 0.0;
    d.potential = discrete_potential(g, ef);
    d.entropy = discrete_entropy(g);
    d.second_moment = discrete_second_moment(g);
    d.h1_seminorm_rho_m_half = discrete_h1_rho_m_half(g, ef.m);
    d.grad_norm = grad_norm;
    d.iterations = iterations;
    return d;
}

} // namespace

Trajectory run_jko(const Quantile& start, const JkoConfig& cfg, const EnergyFunctional& ef) {
    if (cfg.n_quantiles < 8) throw InvariantError("run_jko: need n_quantiles >= 8");
    if (!(cfg.t_end > 0.0)) throw InvariantError("run_jko: need t_end > 0");
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.tau - 1e-9));

    Trajectory traj;
    traj.tau = cfg.tau;
    traj.states.reserve(steps + 1);
    traj.per_step.reserve(steps + 1);
    if (!std::isfinite(discrete_potential(start, ef)))
        throw InvariantError("run_jko: initial state has infinite energy "
                             "(flat quantile segment or state outside the window of a)");
    traj.states.push_back(start);
    traj.per_step.push_back(make_diagnostics(start, nullptr, ef, 0.0, 0));

    for (std::size_t k = 0; k < steps; ++k) {
        StepResult r = jko_step(traj.states.back(), cfg, ef);
        const Quantile& prev = traj.states.back();
        StepDiagnostics d = make_diagnostics(r.state, &prev, ef, r.grad_norm, r.iterations);
        traj.states.push_back(std::move(r.state));
        traj.per_step.push_back(d);
        if (!r.converged) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "step %zu: inner solver stalled at grad_norm = %.3g after %d iterations"
                          " (best iterate kept)",
                          k + 1, r.grad_norm, r.iterations);
            traj.aborted = std::string(buf);
            break;
        }
    }
    return traj;
}

Trajectory run_jko(const GridDensity& rho0, const JkoConfig& cfg, const EnergyFunctional& ef) {
    return run_jko(to_quantile(rho0, cfg.n_quantiles), cfg, ef);
}

DiagnosticsReport diagnostics_check(const Trajectory& traj, const EnergyFunctional& ef) {
    DiagnosticsReport rep;
    if (traj.states.empty()) return rep;
    const std::size_t N = traj.states.size() - 1;
    const double f0 = traj.per_step[0].potential;
    char buf[200];

    // (i) F nonincreasing along steps
    {
        double worst = kInf;
        const double slack = 1e-10 * (1.0 + std::abs(f0));
        for (std::size_t k = 1; k <= N; ++k)
            worst = std::min(worst, traj.per_step[k - 1].potential - traj.per_step[k].potential +
                                        slack);
        std::snprintf(buf, sizeof(buf), "worst decrease margin %.3g (slack %.3g)",
                      N ? worst : 0.0, slack);
        rep.checks.push_back({"energy-monotone", !N || worst >= 0.0, N ? worst : 0.0, buf});
    }

    // (ii) sum of squared W2 increments <= 2 tau F(rho0)
    {
        double sum = 0.0;
        for (std::size_t k = 1; k <= N; ++k) sum += square(traj.per_step[k].w2_to_prev);
        const double bound = 2.0 * traj.tau * f0;
        const double margin = bound * (1.0 + 1e-10) - sum;
        std::snprintf(buf, sizeof(buf), "sum W2^2 = %.6g vs bound %.6g", sum, bound);
        rep.checks.push_back({"w2-square-summability", margin >= 0.0, margin, buf});
    }

    // (iii) second-moment growth with M = 2(m-1) - 2 inf(x a'/a)
    {
        double inf_ratio = kInf;
        for (std::size_t i = 1; i + 1 < ef.a.size(); ++i) {
            const double ap = (ef.a.value(i + 1) - ef.a.value(i - 1)) / (2.0 * ef.a.step());
            inf_ratio = std::min(inf_ratio, ef.a.node(i) * ap / ef.a.value(i));
        }
        const double Mconst = 2.0 * (ef.m - 1.0) - 2.0 * inf_ratio;
        const double m0 = traj.per_step[0].second_moment;
        double worst = kInf;
        for (std::size_t k = 1; k <= N; ++k) {
            const double bound = m0 + Mconst * f0 * traj.time(k);
            worst = std::min(worst, bound * (1.0 + 1e-6) + 1e-14 -
                                        traj.per_step[k].second_moment);
        }
        std::snprintf(buf, sizeof(buf), "M-constant %.6g, worst margin %.3g", Mconst,
                      N ? worst : 0.0);
        rep.checks.push_back({"second-moment-growth", !N || worst >= 0.0, N ? worst : 0.0, buf});
    }

    // (iv) entropy/dissipation balance (discrete flow-interchange estimate)
    {
        const double e0 = traj.per_step[0].entropy;
        const double tol = 1e-3 * (1.0 + std::abs(e0));
        const double cdiss = 4.0 * (ef.m - 1.0) * ef.a_lower / (ef.m * ef.m);
        const double cgrow = std::max(0.0, ef.a_second_derivative_sup) / ef.m;
        double diss_sum = 0.0, lm_sum = 0.0, worst = kInf;
        for (std::size_t k = 1; k <= N; ++k) {
            diss_sum += traj.per_step[k].h1_seminorm_rho_m_half;
            lm_sum += discrete_lm_norm(traj.states[k], ef.m);
            const double lhs = traj.per_step[k].entropy + cdiss * traj.tau * diss_sum;
            const double rhs = e0 + cgrow * traj.tau * lm_sum + tol;
            worst = std::min(worst, rhs - lhs);
        }
        std::snprintf(buf, sizeof(buf), "worst margin %.3g at tolerance %.3g", N ? worst : 0.0,
                      tol);
        rep.checks.push_back({"entropy-dissipation", !N || worst >= 0.0, N ? worst : 0.0, buf});
    }

    // Hoelder bound at snapshot times t_n = n tau
    {
        const double c = std::sqrt(2.0 * f0);
        double worst = kInf;
        for (std::size_t i = 0; i < traj.states.size(); ++i)
            for (std::size_t j = i + 1; j < traj.states.size(); ++j) {
                const double dt = traj.time(j) - traj.time(i);
                const double bound = c * std::sqrt(std::max(traj.tau, dt));
                worst = std::min(worst, bound * (1.0 + 1e-12) + 1e-14 -
                                            wasserstein2(traj.states[i], traj.states[j]));
            }
        std::snprintf(buf, sizeof(buf), "worst margin %.3g over all snapshot pairs",
                      N ? worst : 0.0);
        rep.checks.push_back({"hoelder-bound", !N || worst >= 0.0, N ? worst : 0.0, buf});
    }

    // weighted maximum principle on reconstructed densities
    {
        double glo = kInf, ghi = -kInf;
        for (const auto& s : traj.states) {
            glo = std::min(glo, s.value(0));
            ghi = std::max(ghi, s.value(s.size() - 1));
        }
        const double pad = 0.05 * (ghi - glo) + 1e-6;
        const double h = ef.a.step();
        const double lo = std::max(glo - pad, ef.a.x_min() + 2.0 * h);
        const double hi = std::min(ghi + pad, ef.a.x_max() - 2.0 * h);
        const std::size_t cells = std::max<std::size_t>(256, traj.states[0].size());
        const GridSpec grid{lo, (hi - lo) / static_cast<double>(cells), cells};

        const double expo = 1.0 / (ef.m - 1.0);
        GridDensity rho0 = to_density(traj.states[0], grid);
        double kbound = 0.0;
        for (std::size_t i = 0; i < cells; ++i)
            kbound = std::max(kbound, rho0.value(i) * std::pow(ef.a(grid.center(i)), expo));
        double worst = kInf;
        for (const auto& s : traj.states) {
            GridDensity rho = to_density(s, grid);
            for (std::size_t i = 0; i < cells; ++i) {
                const double cap = kbound * std::pow(ef.a(grid.center(i)), -expo) + 1e-3;
                worst = std::min(worst, cap - rho.value(i));
            }
        }
        std::snprintf(buf, sizeof(buf), "k = %.6g, worst margin %.3g (tol 1e-3)", kbound, worst);
        rep.checks.push_back({"maximum-principle", worst >= 0.0, worst, buf});
    }

    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

void write_trajectory(const Trajectory& traj, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    std::ofstream meta(fs::path(directory) / "meta.csv");
    if (!meta) throw Error("write_trajectory: cannot open meta.csv in " + directory);
    char buf[400];
    std::snprintf(buf, sizeof(buf), "# tau,%.17g\n# states,%zu\n", traj.tau, traj.states.size());
    meta << buf;
    meta << "# index,time,w2_to_prev,potential,entropy,second_moment,"
            "h1_seminorm_rho_m_half,grad_norm,iterations\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& d = traj.per_step[k];
        std::snprintf(buf, sizeof(buf),
                      "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", k, traj.time(k),
                      d.w2_to_prev, d.potential, d.entropy, d.second_moment,
                      d.h1_seminorm_rho_m_half, d.grad_norm, d.iterations);
        meta << buf;
        std::snprintf(buf, sizeof(buf), "state_%06zu.csv", k);
        std::ofstream state(fs::path(directory) / buf);
        write_csv(traj.states[k], state);
    }
    if (traj.aborted) meta << "# aborted," << *traj.aborted << "\n";
}

} // namespace jkoflow
