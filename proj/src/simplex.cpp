#include "gapforge/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gapforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBlandTrigger = 50;   // degenerate pivots before Bland engages
constexpr int kRefactorEvery = 64;

// Bounded-variable primal simplex on  max c^T x, Ax + s = b, lo <= x <= hi,
// s >= 0, with a dense explicitly-maintained basis inverse. Phase 1 drives
// out-of-bound basics to feasibility by minimizing the total violation with
// the composite-cost rule; phase 2 is Dantzig pricing with a Bland fallback
// after a run of degenerate steps. All tie-breaks are by lowest variable
// index, which makes the pivot sequence a pure function of the input.
class BoundedSimplex {
public:
    BoundedSimplex(const IpInstance& inst, const LpOverrides& ov)
        : inst_(inst), m_(inst.m), n_(inst.n), nv_(inst.n + inst.m) {
        lo_.assign(nv_, 0.0);
        hi_.assign(nv_, 1.0);
        if (!ov.lo.empty()) std::copy(ov.lo.begin(), ov.lo.end(), lo_.begin());
        if (!ov.hi.empty()) std::copy(ov.hi.begin(), ov.hi.end(), hi_.begin());
        for (int i = 0; i < m_; ++i) hi_[n_ + i] = kInf;
        b_.resize(m_);
        if (!ov.b.empty())
            std::copy(ov.b.begin(), ov.b.end(), b_.begin());
        else
            for (int i = 0; i < m_; ++i) b_[i] = inst.b(i);
        cost_.assign(nv_, 0.0);
        for (int j = 0; j < n_; ++j) cost_[j] = inst.c[j];
        max_pivots_ = ov.max_pivots > 0 ? ov.max_pivots : std::max<long>(20000, 60L * nv_);

        bool warmed = false;
        if (ov.warm && static_cast<int>(ov.warm->basis.size()) == m_ &&
            static_cast<int>(ov.warm->vstat.size()) == nv_) {
            basis_ = ov.warm->basis;
            vstat_ = ov.warm->vstat;
            for (int j = 0; j < nv_; ++j)
                if (vstat_[j] == 1 && hi_[j] == kInf) vstat_[j] = 0;
            warmed = factorize();
        }
        if (!warmed) {
            basis_.resize(m_);
            vstat_.assign(nv_, 0);
            for (int i = 0; i < m_; ++i) {
                basis_[i] = n_ + i;
                vstat_[n_ + i] = 2;
            }
            binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
            for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
        }
        compute_xb();
    }

    LpSolution run() {
        LpSolution sol;
        if (!phase1()) {
            sol.status = pivots_ >= max_pivots_ ? LpStatus::IterationLimit : LpStatus::Infeasible;
            sol.pivots = pivots_;
            return sol;
        }
        if (!phase2()) {
            sol.status = LpStatus::IterationLimit;
            sol.pivots = pivots_;
            return sol;
        }
        // Clean refactorization before extracting the solution.
        factorize();
        compute_xb();
        extract(sol);
        return sol;
    }

private:
    double col_entry(int j, int i) const {
        return j < n_ ? inst_.a(i, j) : (j - n_ == i ? 1.0 : 0.0);
    }

    // w = Binv * A_j
    void ftran(int j, std::vector<double>& w) const {
        if (j >= n_) {
            int r = j - n_;
            for (int i = 0; i < m_; ++i) w[i] = binv_[static_cast<size_t>(i) * m_ + r];
            return;
        }
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = &binv_[static_cast<size_t>(i) * m_];
            for (int r = 0; r < m_; ++r) s += row[r] * inst_.a(r, j);
            w[i] = s;
        }
    }

    double dot_col(int j, const std::vector<double>& y) const {
        if (j >= n_) return y[j - n_];
        double s = 0.0;
        for (int i = 0; i < m_; ++i) s += y[i] * inst_.a(i, j);
        return s;
    }

    // Gauss-Jordan inverse of the current basis matrix. Returns false when
    // the basis is singular (warm starts fall back to the slack basis).
    bool factorize() {
        std::vector<double> mat(static_cast<size_t>(m_) * m_);
        for (int p = 0; p < m_; ++p)
            for (int i = 0; i < m_; ++i) mat[static_cast<size_t>(i) * m_ + p] = col_entry(basis_[p], i);
        std::vector<double> inv(static_cast<size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[static_cast<size_t>(i) * m_ + i] = 1.0;
        for (int colp = 0; colp < m_; ++colp) {
            int piv = -1;
            double best = 1e-12;
            for (int i = colp; i < m_; ++i) {
                double v = std::fabs(mat[static_cast<size_t>(i) * m_ + colp]);
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (piv < 0) return false;
            if (piv != colp) {
                for (int r = 0; r < m_; ++r) {
                    std::swap(mat[static_cast<size_t>(piv) * m_ + r], mat[static_cast<size_t>(colp) * m_ + r]);
                    std::swap(inv[static_cast<size_t>(piv) * m_ + r], inv[static_cast<size_t>(colp) * m_ + r]);
                }
            }
            double d = mat[static_cast<size_t>(colp) * m_ + colp];
            for (int r = 0; r < m_; ++r) {
                mat[static_cast<size_t>(colp) * m_ + r] /= d;
                inv[static_cast<size_t>(colp) * m_ + r] /= d;
            }
            for (int i = 0; i < m_; ++i) {
                if (i == colp) continue;
                double f = mat[static_cast<size_t>(i) * m_ + colp];
                if (f == 0.0) continue;
                for (int r = 0; r < m_; ++r) {
                    mat[static_cast<size_t>(i) * m_ + r] -= f * mat[static_cast<size_t>(colp) * m_ + r];
                    inv[static_cast<size_t>(i) * m_ + r] -= f * inv[static_cast<size_t>(colp) * m_ + r];
                }
            }
        }
        binv_ = std::move(inv);
        return true;
    }

    void compute_xb() {
        std::vector<double> rhs = b_;
        for (int j = 0; j < nv_; ++j) {
            if (vstat_[j] == 2) continue;
            double v = vstat_[j] == 1 ? hi_[j] : lo_[j];
            if (v == 0.0) continue;
            if (j < n_) {
                for (int i = 0; i < m_; ++i) rhs[i] -= v * inst_.a(i, j);
            } else {
                rhs[j - n_] -= v;
            }
        }
        xb_.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = &binv_[static_cast<size_t>(i) * m_];
            for (int r = 0; r < m_; ++r) s += row[r] * rhs[r];
            xb_[i] = s;
        }
    }

    double infeasibility() const {
        double f = 0.0;
        for (int i = 0; i < m_; ++i) {
            int j = basis_[i];
            if (xb_[i] < lo_[j] - kLpTol) f += lo_[j] - xb_[i];
            if (xb_[i] > hi_[j] + kLpTol) f += xb_[i] - hi_[j];
        }
        return f;
    }

    // Entering-candidate scan shared by both phases. Phase 2 improves the
    // objective: reduced cost c_j - y^T A_j, positive at lower / negative at
    // upper enters. Phase 1 reduces the violation f, whose derivative along
    // x_j is -y^T A_j with y = g^T Binv, so the roles flip sign.
    int choose_entering(const std::vector<double>& y, bool phase1, bool bland, double& dir) const {
        int best = -1;
        double best_score = kLpTol;
        for (int j = 0; j < nv_; ++j) {
            if (vstat_[j] == 2 || lo_[j] == hi_[j]) continue;
            double r = phase1 ? dot_col(j, y) : cost_[j] - dot_col(j, y);
            double score, d;
            if (vstat_[j] == 0) {
                score = r;
                d = 1.0;
            } else {
                score = -r;
                d = -1.0;
            }
            if (score > best_score + 0.0) {
                if (bland) {
                    dir = d;
                    return j; // lowest index eligible
                }
                best = j;
                best_score = score;
                dir = d;
            }
        }
        return best;
    }

    // Ratio test. Entering variable j moves by theta*dir >= 0 from its bound;
    // basics move at rate -dir*w. Returns {theta, leaving position in basis or
    // -1 for a bound flip, target status for the leaver}.
    struct Ratio {
        double theta = kInf;
        int leave_pos = -1;
        uint8_t leave_stat = 0;
        bool flip = false;
    };

    Ratio ratio_test(int enter, double dir, const std::vector<double>& w, bool phase1) const {
        Ratio out;
        int leave_var = nv_; // tie-break key: lowest variable index wins
        if (hi_[enter] < kInf) {
            out.theta = hi_[enter] - lo_[enter];
            out.flip = true;
            leave_var = enter;
        }
        for (int i = 0; i < m_; ++i) {
            int j = basis_[i];
            double rate = -dir * w[i];
            if (std::fabs(rate) <= 1e-11) continue;
            double cand = kInf;
            uint8_t stat = 0;
            bool below = xb_[i] < lo_[j] - kLpTol;
            bool above = xb_[i] > hi_[j] + kLpTol;
            if (rate < 0.0) {
                // decreasing; blocks at lo (or at hi if currently above it in phase 1)
                if (phase1 && above) {
                    cand = (xb_[i] - hi_[j]) / (-rate);
                    stat = 1;
                } else if (!below) {
                    cand = (xb_[i] - lo_[j]) / (-rate);
                    stat = 0;
                }
            } else {
                // increasing; blocks at hi (or at lo if currently below it in phase 1)
                if (phase1 && below) {
                    cand = (lo_[j] - xb_[i]) / rate;
                    stat = 0;
                } else if (!above && hi_[j] < kInf) {
                    cand = (hi_[j] - xb_[i]) / rate;
                    stat = 1;
                }
            }
            if (cand >= kInf) continue;
            cand = std::max(cand, 0.0);
            bool better = cand < out.theta - 1e-12;
            bool tie = !better && cand <= out.theta + 1e-12;
            if (better || (tie && j < leave_var)) {
                out.theta = std::min(out.theta, cand);
                out.leave_pos = i;
                out.leave_stat = stat;
                out.flip = false;
                leave_var = j;
            }
        }
        return out;
    }

    void apply_step(int enter, double dir, const std::vector<double>& w, const Ratio& r) {
        double theta = r.theta;
        if (r.flip) {
            // Bound flip: no basis change.
            for (int i = 0; i < m_; ++i) xb_[i] -= dir * theta * w[i];
            vstat_[enter] = vstat_[enter] == 0 ? 1 : 0;
            return;
        }
        int pos = r.leave_pos;
        int leave = basis_[pos];
        double enter_val = (vstat_[enter] == 0 ? lo_[enter] : hi_[enter]) + dir * theta;
        for (int i = 0; i < m_; ++i) xb_[i] -= dir * theta * w[i];
        xb_[pos] = enter_val;
        basis_[pos] = enter;
        vstat_[enter] = 2;
        vstat_[leave] = r.leave_stat;
        // Rank-one update of the explicit inverse.
        double piv = w[pos];
        double* prow = &binv_[static_cast<size_t>(pos) * m_];
        for (int c = 0; c < m_; ++c) prow[c] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == pos) continue;
            double f = w[i];
            if (f == 0.0) continue;
            double* row = &binv_[static_cast<size_t>(i) * m_];
            for (int c = 0; c < m_; ++c) row[c] -= f * prow[c];
        }
        if (++since_refactor_ >= kRefactorEvery) {
            since_refactor_ = 0;
            factorize();
            compute_xb();
        }
    }

    bool phase1() {
        int degenerate_run = 0;
        std::vector<double> g(m_), y(m_), w(m_);
        while (pivots_ < max_pivots_) {
            double f = infeasibility();
            if (f <= kLpTol * std::max(1, m_)) return true;
            for (int i = 0; i < m_; ++i) {
                int j = basis_[i];
                g[i] = xb_[i] < lo_[j] - kLpTol ? -1.0 : (xb_[i] > hi_[j] + kLpTol ? 1.0 : 0.0);
            }
            // y^T = g^T Binv
            for (int c = 0; c < m_; ++c) {
                double s = 0.0;
                for (int i = 0; i < m_; ++i) s += g[i] * binv_[static_cast<size_t>(i) * m_ + c];
                y[c] = s;
            }
            double dir = 0.0;
            bool bland = degenerate_run >= kBlandTrigger;
            int enter = choose_entering(y, /*phase1=*/true, bland, dir);
            if (enter < 0) return false; // phase-1 optimum, still infeasible
            ftran(enter, w);
            Ratio r = ratio_test(enter, dir, w, /*phase1=*/true);
            if (r.theta >= kInf) return false;
            apply_step(enter, dir, w, r);
            ++pivots_;
            double f2 = infeasibility();
            degenerate_run = f2 < f - 1e-12 ? 0 : degenerate_run + 1;
        }
        return false;
    }

    bool phase2() {
        int degenerate_run = 0;
        std::vector<double> y(m_), w(m_);
        while (pivots_ < max_pivots_) {
            for (int c = 0; c < m_; ++c) {
                double s = 0.0;
                for (int i = 0; i < m_; ++i)
                    s += cost_[basis_[i]] * binv_[static_cast<size_t>(i) * m_ + c];
                y[c] = s;
            }
            double dir = 0.0;
            bool bland = degenerate_run >= kBlandTrigger;
            int enter = choose_entering(y, /*phase1=*/false, bland, dir);
            if (enter < 0) return true; // optimal
            ftran(enter, w);
            Ratio r = ratio_test(enter, dir, w, /*phase1=*/false);
            if (r.theta >= kInf)
                throw SimplexError("unbounded direction in a box-constrained problem");
            apply_step(enter, dir, w, r);
            ++pivots_;
            degenerate_run = r.theta > 1e-12 ? 0 : degenerate_run + 1;
        }
        return false;
    }

    void extract(LpSolution& sol) {
        sol.status = LpStatus::Optimal;
        sol.pivots = pivots_;
        sol.basis = basis_;
        sol.vstat = vstat_;
        sol.x.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j)
            if (vstat_[j] != 2) sol.x[j] = vstat_[j] == 1 ? hi_[j] : lo_[j];
        for (int i = 0; i < m_; ++i) {
            int j = basis_[i];
            if (j < n_) sol.x[j] = std::clamp(xb_[i], lo_[j], hi_[j]);
        }
        // Duals from the final pricing vector, clamped at zero.
        std::vector<double> y(m_);
        for (int c = 0; c < m_; ++c) {
            double s = 0.0;
            for (int i = 0; i < m_; ++i)
                s += cost_[basis_[i]] * binv_[static_cast<size_t>(i) * m_ + c];
            y[c] = s;
        }
        sol.u.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) sol.u[i] = std::max(y[i], 0.0);
        sol.value = 0.0;
        for (int j = 0; j < n_; ++j) sol.value += cost_[j] * sol.x[j];
        sol.reduced_costs.assign(n_, 0.0);
        for (int j = 0; j < n_; ++j) {
            double s = 0.0;
            for (int i = 0; i < m_; ++i) s += sol.u[i] * inst_.a(i, j);
            sol.reduced_costs[j] = s - cost_[j];
        }
        for (int j = 0; j < n_; ++j) {
            if (sol.x[j] <= kLpTol)
                sol.n0.push_back(j);
            else if (sol.x[j] >= 1.0 - kLpTol)
                sol.n1.push_back(j);
            else
                sol.frac_idx.push_back(j);
        }
    }

    const IpInstance& inst_;
    int m_, n_, nv_;
    std::vector<double> lo_, hi_, b_, cost_;
    std::vector<int> basis_;
    std::vector<uint8_t> vstat_;
    std::vector<double> binv_, xb_;
    long pivots_ = 0;
    long max_pivots_ = 0;
    int since_refactor_ = 0;
};

} // namespace

LpSolution solve_lp(const IpInstance& inst) { return solve_lp(inst, LpOverrides{}); }

LpSolution solve_lp(const IpInstance& inst, const LpOverrides& ov) {
    BoundedSimplex solver(inst, ov);
    return solver.run();
}

double dual_value(std::span<const double> u, const IpInstance& inst) {
    if (static_cast<int>(u.size()) != inst.m) throw SimplexError("dual_value: u has wrong dimension");
    for (double v : u)
        if (v < -kLpTol) throw SimplexError("dual_value: u must be nonnegative");
    double val = 0.0;
    for (int i = 0; i < inst.m; ++i) val += inst.b(i) * u[i];
    for (int j = 0; j < inst.n; ++j) {
        double atu = 0.0;
        for (int i = 0; i < inst.m; ++i) atu += u[i] * inst.a(i, j);
        val += std::max(inst.c[j] - atu, 0.0);
    }
    return val;
}

GapBreakdown gap_formula(std::span<const double> x, std::span<const double> u,
                         const IpInstance& inst) {
    GapBreakdown out;
    for (int i = 0; i < inst.m; ++i) {
        double ax = 0.0;
        for (int j = 0; j < inst.n; ++j) ax += inst.a(i, j) * x[j];
        out.slack_term += (inst.b(i) - ax) * u[i];
    }
    for (int j = 0; j < inst.n; ++j) {
        double atu = 0.0;
        for (int i = 0; i < inst.m; ++i) atu += u[i] * inst.a(i, j);
        double rc = atu - inst.c[j];
        out.reduced_cost_term += x[j] * std::max(rc, 0.0) + (1.0 - x[j]) * std::max(-rc, 0.0);
    }
    out.total = out.slack_term + out.reduced_cost_term;
    return out;
}

PropsReport check_solution_props(const LpSolution& sol, const IpInstance& inst,
                                 const PropsThresholds& thresholds) {
    PropsReport rep;
    for (double v : sol.u) {
        rep.u_norm2 += v * v;
        rep.u_norm1 += std::fabs(v);
    }
    rep.u_norm2 = std::sqrt(rep.u_norm2);
    rep.n0_frac = inst.n > 0 ? static_cast<double>(sol.n0.size()) / inst.n : 0.0;
    if (inst.model == Model::Packing) {
        rep.u_norm_threshold = thresholds.packing_u_norm1_beta_factor / inst.beta;
        rep.u_norm_ok = rep.u_norm1 <= rep.u_norm_threshold;
        rep.n0_frac_threshold = 0.0;
        rep.n0_ok = true;
    } else {
        rep.u_norm_threshold = thresholds.centered_u_norm2;
        rep.u_norm_ok = rep.u_norm2 <= rep.u_norm_threshold;
        rep.n0_frac_threshold = thresholds.centered_n0_frac;
        rep.n0_ok = rep.n0_frac >= rep.n0_frac_threshold;
    }
    return rep;
}

} // namespace gapforge
