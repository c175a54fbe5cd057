#include "gapforge/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gapforge/bnb.hpp"
#include "gapforge/defaults.hpp"

namespace gapforge {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

std::vector<double> u_dot_columns(const IpInstance& inst, std::span<const double> u) {
    std::vector<double> out(inst.n, 0.0);
    for (int i = 0; i < inst.m; ++i) {
        if (u[i] == 0.0) continue;
        for (int j = 0; j < inst.n; ++j) out[j] += u[i] * inst.a(i, j);
    }
    return out;
}

} // namespace

std::string to_string(RepairOutcome o) {
    switch (o) {
        case RepairOutcome::Repaired: return "repaired";
        case RepairOutcome::TrivialNoRepair: return "trivial";
        case RepairOutcome::EmptyPool: return "empty_pool";
        case RepairOutcome::HitterFailed: return "hitter_failed";
        case RepairOutcome::InfeasiblePerturbed: return "infeasible_perturbed";
        case RepairOutcome::LpFailed: return "lp_failed";
    }
    return "?";
}

SelectionConfig resolve_config(SelectionConfig cfg, const IpInstance& inst) {
    const int m = inst.m;
    const double n = inst.n;
    if (cfg.kappa <= 0.0)
        cfg.kappa = inst.discrete() ? defaults::kKappaDiscrete : defaults::kKappaLogconcave;
    if (inst.model == Model::Packing) {
        if (cfg.pool_r <= 0)
            cfg.pool_r = static_cast<int>(
                std::ceil(defaults::kPackingPoolC * m * m * std::log(std::max(n, 3.0))));
        if (cfg.p <= 0.0) cfg.p = std::min(0.25, defaults::kPackingPC / (m * m));
        if (cfg.delta <= 0.0)
            cfg.delta = defaults::kPackingDeltaC1 * std::exp(defaults::kPackingDeltaC2 / inst.beta) *
                        cfg.pool_r / (std::pow(inst.beta, 4.0) * n);
        // gamma is resolved against mu inside repair_packing (needs u*-free data only).
    } else {
        if (cfg.p <= 0.0) cfg.p = defaults::kCenteredHitterP;
        if (cfg.delta <= 0.0) {
            double c_delta = inst.discrete() ? defaults::kCenteredDeltaC
                                             : defaults::kCenteredDeltaCLogconcave;
            cfg.delta = c_delta * m * m * m * std::log(std::max(n, 2.0)) / n;
        }
    }
    if (cfg.li_shift < 0.0) cfg.li_shift = cfg.approx_tol;
    return cfg;
}

std::vector<uint8_t> round_down(std::span<const double> x_star) {
    std::vector<uint8_t> x(x_star.size(), 0);
    for (size_t j = 0; j < x_star.size(); ++j) x[j] = x_star[j] >= 1.0 - kLpTol ? 1 : 0;
    return x;
}

std::vector<int> select_candidates_centered(const IpInstance& inst, const LpSolution& sol,
                                            const SelectionConfig& cfg_in, uint64_t seed) {
    SelectionConfig cfg = resolve_config(cfg_in, inst);
    double u_norm = norm2(sol.u);
    // Filter mode defaults to the wide analysis strip (rarely binding);
    // faithful mode needs a narrow strip or its acceptance coin underflows.
    double strip_c = cfg.strip_c > 0.0 ? cfg.strip_c
                     : cfg.mode == SelectionMode::AnalysisFaithful
                         ? defaults::kFaithfulStripC
                         : std::sqrt(150.0) * u_norm / std::sqrt(cfg.kappa);
    std::vector<double> ua = u_dot_columns(inst, sol.u);
    std::vector<int> z;
    Rng rng(seed, 0x5E1Ec1ull);
    const double delta = cfg.delta;
    for (int j : sol.n0) {
        double rc = sol.reduced_costs[j]; // u^T A_j - c_j
        if (rc < -kLpTol || rc > delta) continue;
        if (std::fabs(ua[j]) > strip_c) continue;
        if (cfg.mode == SelectionMode::AnalysisFaithful) {
            // Acceptance coin M / q(y) with q(y) = Pr[u^T y - N in [0,delta] |
            // u^T y - N >= 0] for N standard normal; M = delta * phi-scale at
            // the strip edge keeps the ratio in [0,1].
            double a = ua[j];
            double m_const = delta * std::exp(-0.5 * (strip_c + delta) * (strip_c + delta));
            double q = (normal_cdf(a) - normal_cdf(a - delta)) / std::max(normal_cdf(a), 1e-300);
            double accept_p = std::min(1.0, m_const / std::max(q, 1e-300));
            if (rng.uniform01() >= accept_p) continue;
        }
        z.push_back(j);
    }
    return z;
}

namespace {

// Second rejection round for logconcave columns: reweight on the halfspace
// {<mu', x> <= 0} so the pool mean projects to ~zero along mu'.
std::vector<int> mean_zero_reweight(const IpInstance& inst, std::vector<int> z, uint64_t seed,
                                    double* achieved_mean_norm) {
    const int m = inst.m;
    if (z.size() < 4) return z;
    std::vector<double> mu(m, 0.0);
    for (int j : z)
        for (int i = 0; i < m; ++i) mu[i] += inst.a(i, j);
    for (int i = 0; i < m; ++i) mu[i] /= z.size();
    double mu_norm = norm2(mu);
    if (achieved_mean_norm) *achieved_mean_norm = mu_norm;
    if (mu_norm < 1e-9) return z;

    double s_in = 0.0, s_out = 0.0;
    std::vector<double> proj(z.size());
    for (size_t idx = 0; idx < z.size(); ++idx) {
        double d = 0.0;
        for (int i = 0; i < m; ++i) d += mu[i] * inst.a(i, z[idx]);
        proj[idx] = d;
        (d <= 0.0 ? s_in : s_out) += d;
    }
    if (s_out <= 0.0) return z;
    double alpha = std::clamp(-s_in / s_out, 0.0, 1.0);
    Rng rng(seed, 0x2e40);
    std::vector<int> kept;
    double mean_proj = 0.0;
    std::vector<double> mean_vec(m, 0.0);
    for (size_t idx = 0; idx < z.size(); ++idx) {
        bool keep = proj[idx] <= 0.0 || rng.uniform01() < alpha;
        if (!keep) continue;
        kept.push_back(z[idx]);
        mean_proj += proj[idx];
        for (int i = 0; i < m; ++i) mean_vec[i] += inst.a(i, z[idx]);
    }
    if (kept.size() < 2) return z;
    for (int i = 0; i < m; ++i) mean_vec[i] /= kept.size();
    if (achieved_mean_norm) *achieved_mean_norm = norm2(mean_vec);
    return kept;
}

bool repaired_ok(RepairOutcome o) {
    return o == RepairOutcome::Repaired || o == RepairOutcome::TrivialNoRepair;
}

void finish_certificate(const IpInstance& inst, const LpSolution& sol, RoundingCertificate& cert) {
    const int m = inst.m, n = inst.n;
    cert.x_final = cert.x_rounded;
    for (int j : cert.repair_set) cert.x_final[j] = 1;
    cert.t_size = static_cast<int>(cert.repair_set.size());
    cert.z_size = static_cast<int>(cert.candidates.size());

    cert.slack.assign(m, 0.0);
    if (inst.discrete()) {
        std::vector<int64_t> ax = inst.product_num(cert.x_final);
        cert.slack_num.resize(m);
        bool ok = true;
        for (int i = 0; i < m; ++i) {
            cert.slack_num[i] = inst.b_num[i] - ax[i];
            cert.slack[i] = static_cast<double>(cert.slack_num[i]) / static_cast<double>(inst.k);
            if (cert.slack_num[i] < 0) ok = false;
        }
        cert.feasible = ok && repaired_ok(cert.outcome);
    } else {
        bool ok = true;
        for (int i = 0; i < m; ++i) {
            double ax = 0.0;
            for (int j = 0; j < n; ++j)
                if (cert.x_final[j]) ax += inst.a(i, j);
            cert.slack[i] = inst.b(i) - ax;
            if (cert.slack[i] < -1e-9) ok = false;
        }
        cert.feasible = ok && repaired_ok(cert.outcome);
    }

    std::vector<double> xf(n, 0.0);
    for (int j = 0; j < n; ++j) xf[j] = cert.x_final[j];
    cert.breakdown = gap_formula(xf, sol.u, inst);
    double cx = 0.0;
    for (int j = 0; j < n; ++j)
        if (cert.x_final[j]) cx += inst.c[j];
    cert.gap_upper = dual_value(sol.u, inst) - cx;
}

} // namespace

RoundingCertificate repair_centered(const IpInstance& inst, const LpSolution& sol,
                                    const SelectionConfig& cfg_in, uint64_t seed) {
    SelectionConfig cfg = resolve_config(cfg_in, inst);
    RoundingCertificate cert;
    const int m = inst.m;
    cert.x_rounded = round_down(sol.x);

    // Rounding displacement A(x* - x') and its recorded norm bound.
    std::vector<double> disp(m, 0.0);
    for (int j : sol.frac_idx)
        for (int i = 0; i < m; ++i) disp[i] += inst.a(i, j) * sol.x[j];
    cert.round_norm = norm2(disp);
    cert.round_norm_bound = std::sqrt(static_cast<double>(m)) * inst.max_column_norm();

    if (sol.frac_idx.empty()) {
        cert.outcome = RepairOutcome::TrivialNoRepair;
        cert.target.assign(m, 0.0);
        if (inst.discrete()) cert.target_num.assign(m, 0);
        finish_certificate(inst, sol, cert);
        return cert;
    }

    cert.candidates = select_candidates_centered(inst, sol, cfg, seed);
    if (!inst.discrete() && cfg.mode == SelectionMode::AnalysisFaithful)
        cert.candidates =
            mean_zero_reweight(inst, std::move(cert.candidates), seed, &cert.mean_zero_residual);
    if (cfg.z_cap > 0 && static_cast<int>(cert.candidates.size()) > cfg.z_cap)
        cert.candidates.resize(cfg.z_cap);
    if (cert.candidates.empty()) {
        cert.outcome = RepairOutcome::EmptyPool;
        cert.target.assign(m, 0.0);
        if (inst.discrete()) cert.target_num.assign(m, 0);
        finish_certificate(inst, sol, cert);
        return cert;
    }

    // Repair sets up to 1.5 p |Z| keep the reduced-cost contribution in the
    // intended regime; the DP prefers the smallest workable size, and a small
    // floor on the cap keeps tiny instances repairable at all.
    const int zs = static_cast<int>(cert.candidates.size());
    int band_cap = std::max(static_cast<int>(std::floor(1.5 * cfg.p * zs + 1e-9)), 8);
    CardinalityBand band{0, std::min(band_cap, zs)};

    if (inst.discrete()) {
        // Target floor(k A(x*-x')) / k; on rows with an active dual the slack
        // k(b - Ax') is integral and complementary slackness makes the floor
        // equal to it, so compute those rows exactly.
        std::vector<int64_t> ax_num = inst.product_num(cert.x_rounded);
        cert.target_num.assign(m, 0);
        for (int i = 0; i < m; ++i) {
            int64_t room = inst.b_num[i] - ax_num[i];
            if (sol.u[i] > kLpTol) {
                cert.target_num[i] = room;
            } else {
                cert.target_num[i] =
                    std::min<int64_t>(static_cast<int64_t>(std::floor(inst.k * disp[i] + 1e-9)), room);
            }
        }
        cert.target.resize(m);
        for (int i = 0; i < m; ++i)
            cert.target[i] = static_cast<double>(cert.target_num[i]) / static_cast<double>(inst.k);

        bool zero_target = std::all_of(cert.target_num.begin(), cert.target_num.end(),
                                       [](int64_t v) { return v == 0; });
        if (zero_target) {
            cert.outcome = RepairOutcome::TrivialNoRepair;
            finish_certificate(inst, sol, cert);
            return cert;
        }

        IntCols cols;
        cols.m = m;
        cols.nbar = zs;
        cols.denom = inst.k;
        cols.w.resize(static_cast<size_t>(m) * zs);
        for (int idx = 0; idx < zs; ++idx)
            for (int i = 0; i < m; ++i) cols.entry(i, idx) = inst.a_entry_num(i, cert.candidates[idx]);

        ExactHitOptions opts;
        opts.memory_budget_bytes = cfg.dp_budget_bytes;
        auto hitres = hit_target_exact(cols, cert.target_num, band, opts);
        if (!hitres) {
            cert.outcome = RepairOutcome::HitterFailed;
            finish_certificate(inst, sol, cert);
            return cert;
        }
        cert.residual = 0.0;
        for (int idx : hitres->subset) cert.repair_set.push_back(cert.candidates[idx]);
        cert.outcome = RepairOutcome::Repaired;
        finish_certificate(inst, sol, cert);
        return cert;
    }

    // Logconcave: shifted target keeps Ax'' strictly below Ax* once the
    // residual beats the shift. The band floor keeps the swap neighborhood
    // rich enough for the residual tolerance.
    band.lo = std::min(zs, std::max(static_cast<int>(std::ceil(0.5 * cfg.p * zs - 1e-9)),
                                    defaults::kApproxBandFloor));
    band.hi = std::min(zs, std::max(band.hi, band.lo + 8));
    double shift = cfg.li_shift;
    cert.target.resize(m);
    for (int i = 0; i < m; ++i) cert.target[i] = disp[i] - shift;

    RealCols cols;
    cols.m = m;
    cols.nbar = zs;
    cols.w.resize(static_cast<size_t>(m) * zs);
    for (int idx = 0; idx < zs; ++idx)
        for (int i = 0; i < m; ++i) cols.entry(i, idx) = inst.a(i, cert.candidates[idx]);

    auto hitres = hit_target_approx(cols, cert.target, band, cfg.approx_tol, cfg.approx_budget,
                                    seed ^ 0x9e21);
    cert.residual = hitres.cert.residual_norm;
    for (int idx : hitres.cert.subset) cert.repair_set.push_back(cert.candidates[idx]);
    cert.outcome = hitres.hit ? RepairOutcome::Repaired : RepairOutcome::HitterFailed;
    finish_certificate(inst, sol, cert);
    return cert;
}

RoundingCertificate repair_packing(const IpInstance& inst, const SelectionConfig& cfg_in,
                                   uint64_t seed) {
    SelectionConfig cfg = resolve_config(cfg_in, inst);
    RoundingCertificate cert;
    const int m = inst.m, n = inst.n;

    // Pool-column mean: entries uniform on {ceil(k/3m)/k, ..., 1}.
    int64_t entry_floor = (inst.k + 3 * m - 1) / (3 * m); // ceil(k / 3m)
    double mu = (static_cast<double>(inst.k) + static_cast<double>(entry_floor)) /
                (2.0 * static_cast<double>(inst.k));
    double gamma = cfg.gamma >= 0.0 ? cfg.gamma : cfg.p * cfg.pool_r * mu;

    // Perturbed rhs b' = b - gamma 1 must stay inside the packing window.
    std::vector<double> b_prime(m);
    for (int i = 0; i < m; ++i) {
        b_prime[i] = inst.b(i) - gamma;
        if (!(b_prime[i] > 0.5 * inst.beta * n && b_prime[i] < (0.5 - inst.beta) * n)) {
            cert.outcome = RepairOutcome::InfeasiblePerturbed;
            cert.x_rounded.assign(n, 0);
            LpSolution dummy;
            dummy.u.assign(m, 0.0);
            dummy.x.assign(n, 0.0);
            finish_certificate(inst, dummy, cert);
            return cert;
        }
    }

    LpOverrides ov;
    ov.b = b_prime;
    ov.max_pivots = cfg.max_pivots;
    LpSolution sol = solve_lp(inst, ov);
    if (sol.status != LpStatus::Optimal) {
        cert.outcome = RepairOutcome::LpFailed;
        cert.x_rounded.assign(n, 0);
        LpSolution dummy;
        dummy.u.assign(m, 0.0);
        dummy.x.assign(n, 0.0);
        finish_certificate(inst, dummy, cert);
        return cert;
    }

    cert.x_rounded = round_down(sol.x);
    std::vector<double> disp(m, 0.0);
    for (int j : sol.frac_idx)
        for (int i = 0; i < m; ++i) disp[i] += inst.a(i, j) * sol.x[j];
    cert.round_norm = norm2(disp);
    cert.round_norm_bound = std::sqrt(static_cast<double>(m)) * inst.max_column_norm();

    // Candidate pool: N0 columns with reduced cost in [0, delta] whose
    // entries clear the interval floor; the faithful mode also runs the
    // exponential-objective acceptance coin.
    double u1 = 0.0;
    for (double v : sol.u) u1 += v;
    // The faithful coin needs u^T y - delta >= 0 across the pool domain;
    // the deterministic filter has no such constraint.
    double delta = cfg.mode == SelectionMode::AnalysisFaithful
                       ? std::min(cfg.delta, std::max(u1, 1e-6) / (3.0 * m))
                       : cfg.delta;
    std::vector<double> ua = u_dot_columns(inst, sol.u);
    Rng rng(seed, 0x9Acd7ull);
    for (int j : sol.n0) {
        double rc = sol.reduced_costs[j];
        if (rc < -kLpTol || rc > delta) continue;
        bool domain_ok = true;
        for (int i = 0; i < m; ++i)
            if (inst.a_entry_num(i, j) < entry_floor) {
                domain_ok = false;
                break;
            }
        if (!domain_ok) continue;
        if (cfg.mode == SelectionMode::AnalysisFaithful) {
            double a = ua[j];
            double m_const = delta * std::exp(-u1);
            double q_num = std::exp(-(a - delta)) - std::exp(-a);
            double q_den = 1.0 - std::exp(-a);
            double q = q_den > 0.0 ? q_num / q_den : 1.0;
            double accept_p = std::min(1.0, m_const / std::max(q, 1e-300));
            if (rng.uniform01() >= accept_p) continue;
        }
        cert.candidates.push_back(j);
    }
    if (cfg.mode == SelectionMode::AnalysisFaithful &&
        static_cast<int>(cert.candidates.size()) > cfg.pool_r)
        cert.candidates.resize(cfg.pool_r);
    if (cfg.z_cap > 0 && static_cast<int>(cert.candidates.size()) > cfg.z_cap)
        cert.candidates.resize(cfg.z_cap);

    // Two-case target: active-dual rows take the exact remaining room, the
    // rest absorb the rhs shift.
    std::vector<int64_t> ax_num = inst.product_num(cert.x_rounded);
    cert.target_num.assign(m, 0);
    int64_t gamma_floor = static_cast<int64_t>(std::floor(gamma));
    for (int i = 0; i < m; ++i) {
        if (sol.u[i] > kLpTol)
            cert.target_num[i] = inst.b_num[i] - ax_num[i];
        else
            cert.target_num[i] = inst.k * gamma_floor;
    }
    cert.target.resize(m);
    for (int i = 0; i < m; ++i)
        cert.target[i] = static_cast<double>(cert.target_num[i]) / static_cast<double>(inst.k);

    bool zero_target = std::all_of(cert.target_num.begin(), cert.target_num.end(),
                                   [](int64_t v) { return v == 0; });
    if (zero_target) {
        cert.outcome = RepairOutcome::TrivialNoRepair;
        finish_certificate(inst, sol, cert);
        return cert;
    }
    if (cert.candidates.empty()) {
        cert.outcome = RepairOutcome::EmptyPool;
        finish_certificate(inst, sol, cert);
        return cert;
    }

    const int zs = static_cast<int>(cert.candidates.size());
    int band_cap =
        std::max(static_cast<int>(std::floor(1.5 * cfg.p * cfg.pool_r + 1e-9)), 8);
    CardinalityBand band{0, std::min(band_cap, zs)};
    IntCols cols;
    cols.m = m;
    cols.nbar = zs;
    cols.denom = inst.k;
    cols.w.resize(static_cast<size_t>(m) * zs);
    for (int idx = 0; idx < zs; ++idx)
        for (int i = 0; i < m; ++i) cols.entry(i, idx) = inst.a_entry_num(i, cert.candidates[idx]);

    ExactHitOptions opts;
    opts.memory_budget_bytes = cfg.dp_budget_bytes;
    auto hitres = hit_target_exact(cols, cert.target_num, band, opts);
    if (!hitres) {
        cert.outcome = RepairOutcome::HitterFailed;
        finish_certificate(inst, sol, cert);
        return cert;
    }
    for (int idx : hitres->subset) cert.repair_set.push_back(cert.candidates[idx]);
    cert.outcome = RepairOutcome::Repaired;
    finish_certificate(inst, sol, cert);
    return cert;
}

GapReport measure_gap(const IpInstance& inst, const SelectionConfig& cfg_in, uint64_t seed,
                      const MeasureOptions& opts) {
    GapReport rep;
    rep.model = model_tag(inst.model);
    rep.m = inst.m;
    rep.n = inst.n;
    rep.k = inst.k;
    rep.beta = inst.beta;
    rep.seed = inst.seed;

    SelectionConfig cfg = resolve_config(cfg_in, inst);
    try {
        LpSolution sol;
        if (inst.model == Model::Packing) {
            rep.cert = repair_packing(inst, cfg, seed);
            // Statistics reported against the unperturbed relaxation.
            sol = solve_lp(inst);
        } else {
            sol = solve_lp(inst);
            if (sol.status != LpStatus::Optimal) {
                rep.error = sol.status == LpStatus::Infeasible ? "lp_infeasible" : "lp_iteration_limit";
                return rep;
            }
            rep.cert = repair_centered(inst, sol, cfg, seed);
        }
        if (sol.status == LpStatus::Optimal) {
            rep.val_lp = sol.value;
            PropsReport props = check_solution_props(sol, inst);
            rep.u_norm2 = props.u_norm2;
            rep.u_norm1 = props.u_norm1;
            rep.n0_frac = props.n0_frac;
        }
        rep.z_size = rep.cert.z_size;
        rep.t_size = rep.cert.t_size;
        rep.residual = rep.cert.residual;
        rep.feasible = rep.cert.feasible;
        rep.gap_upper = rep.cert.gap_upper;
        if (rep.cert.outcome != RepairOutcome::Repaired &&
            rep.cert.outcome != RepairOutcome::TrivialNoRepair)
            rep.error = to_string(rep.cert.outcome);
        if (opts.exact_ipgap && inst.n <= opts.exact_ipgap_max_n && sol.status == LpStatus::Optimal) {
            BruteForceResult bf = brute_force_solve(inst);
            rep.ipgap_exact = rep.val_lp - bf.value;
        }
    } catch (const std::exception& e) {
        rep.error = e.what();
    }
    return rep;
}

} // namespace gapforge
