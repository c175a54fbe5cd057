#include "gapforge/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace gapforge {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int sign_of(int64_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }
int sign_of(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

} // namespace

void DiscrepancyQuery::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw DiscError("query: p must lie in (0,1)");
    if (sigma <= 0.0) throw DiscError("query: sigma must be positive");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw DiscError("query: kappa must lie in (0,1]");
    if (integer_mode()) {
        if (static_cast<int>(mu_num.size()) != int_columns.m ||
            static_cast<int>(target_num.size()) != int_columns.m)
            throw DiscError("query: integer mu/target dimension mismatch");
    } else {
        if (real_columns.nbar == 0) throw DiscError("query: no columns");
        if (static_cast<int>(mu.size()) != real_columns.m ||
            static_cast<int>(target.size()) != real_columns.m)
            throw DiscError("query: mu/target dimension mismatch");
    }
}

SelectionTrace subsample(const DiscrepancyQuery& query, uint64_t coin_seed) {
    query.validate();
    if (query.integer_mode())
        return subsample(query.int_columns, query.mu_num, query.sigma, query.kappa, coin_seed);
    return subsample(query.real_columns, query.mu, query.sigma, query.kappa, coin_seed);
}

// ---------------------------------------------------------------------------
// Subsampling
// ---------------------------------------------------------------------------

SelectionTrace subsample(const IntCols& cols, std::span<const int64_t> mu_num, double sigma,
                         double kappa, uint64_t coin_seed) {
    if (sigma <= 0.0 || !(kappa > 0.0 && kappa <= 1.0))
        throw DiscError("subsample: need sigma > 0 and kappa in (0,1]");
    SelectionTrace trace;
    trace.norm_cap = 10.0 * sigma * std::sqrt(static_cast<double>(cols.m) / kappa);
    trace.running_sum_num.assign(cols.m, 0);
    trace.decisions.resize(cols.nbar);
    const double cap_num2 =
        trace.norm_cap * trace.norm_cap * static_cast<double>(cols.denom) * cols.denom;

    std::vector<int64_t> centered(cols.m);
    for (int j = 0; j < cols.nbar; ++j) {
        auto& dec = trace.decisions[j];
        int64_t norm2 = 0;
        bool col_zero = true;
        for (int d = 0; d < cols.m; ++d) {
            centered[d] = cols.entry(d, j) - mu_num[d];
            norm2 += centered[d] * centered[d];
            if (centered[d] != 0) col_zero = false;
        }
        dec.norm_ok = static_cast<double>(norm2) <= cap_num2;
        int64_t inner = 0;
        bool sum_zero = true;
        for (int d = 0; d < cols.m; ++d) {
            inner += trace.running_sum_num[d] * centered[d];
            if (trace.running_sum_num[d] != 0) sum_zero = false;
        }
        dec.inner_sign = sign_of(inner);
        if (!dec.norm_ok) continue;
        bool accept;
        if (inner < 0) {
            accept = true;
        } else if (inner > 0) {
            accept = false;
        } else if (col_zero || sum_zero) {
            // Trivial tie: the column cannot grow the running norm.
            accept = true;
        } else {
            accept = Rng(coin_seed, static_cast<uint64_t>(j)).coin();
        }
        dec.accepted = accept;
        if (accept) {
            trace.selected.push_back(j);
            for (int d = 0; d < cols.m; ++d) trace.running_sum_num[d] += centered[d];
        }
    }
    trace.running_sum.resize(cols.m);
    for (int d = 0; d < cols.m; ++d)
        trace.running_sum[d] =
            static_cast<double>(trace.running_sum_num[d]) / static_cast<double>(cols.denom);
    return trace;
}

SelectionTrace subsample(const RealCols& cols, std::span<const double> mu, double sigma,
                         double kappa, uint64_t coin_seed) {
    if (sigma <= 0.0 || !(kappa > 0.0 && kappa <= 1.0))
        throw DiscError("subsample: need sigma > 0 and kappa in (0,1]");
    SelectionTrace trace;
    trace.norm_cap = 10.0 * sigma * std::sqrt(static_cast<double>(cols.m) / kappa);
    trace.running_sum.assign(cols.m, 0.0);
    trace.decisions.resize(cols.nbar);
    const double cap2 = trace.norm_cap * trace.norm_cap;

    std::vector<double> centered(cols.m);
    for (int j = 0; j < cols.nbar; ++j) {
        auto& dec = trace.decisions[j];
        double norm2 = 0.0;
        bool col_zero = true;
        for (int d = 0; d < cols.m; ++d) {
            centered[d] = cols.entry(d, j) - mu[d];
            norm2 += centered[d] * centered[d];
            if (centered[d] != 0.0) col_zero = false;
        }
        dec.norm_ok = norm2 <= cap2;
        double inner = 0.0;
        bool sum_zero = true;
        for (int d = 0; d < cols.m; ++d) {
            inner += trace.running_sum[d] * centered[d];
            if (trace.running_sum[d] != 0.0) sum_zero = false;
        }
        dec.inner_sign = sign_of(inner, 0.0);
        if (!dec.norm_ok) continue;
        bool accept;
        if (inner < 0.0) {
            accept = true;
        } else if (inner > 0.0) {
            accept = false;
        } else if (col_zero || sum_zero) {
            accept = true;
        } else {
            accept = Rng(coin_seed, static_cast<uint64_t>(j)).coin();
        }
        dec.accepted = accept;
        if (accept) {
            trace.selected.push_back(j);
            for (int d = 0; d < cols.m; ++d) trace.running_sum[d] += centered[d];
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Exact target hitting: layered subset-sum DP with witness reconstruction
// ---------------------------------------------------------------------------

namespace {

struct Box {
    std::vector<int64_t> lo, hi;
    std::vector<size_t> stride;
    size_t cells = 1;

    bool contains(std::span<const int64_t> s) const {
        for (size_t d = 0; d < lo.size(); ++d)
            if (s[d] < lo[d] || s[d] > hi[d]) return false;
        return true;
    }
    size_t index(std::span<const int64_t> s) const {
        size_t idx = 0;
        for (size_t d = 0; d < lo.size(); ++d) idx += static_cast<size_t>(s[d] - lo[d]) * stride[d];
        return idx;
    }
    void unindex(size_t idx, std::span<int64_t> s) const {
        for (size_t d = 0; d < lo.size(); ++d) {
            s[d] = lo[d] + static_cast<int64_t>(idx / stride[d]);
            idx %= stride[d];
        }
    }
};

Box make_box(const IntCols& cols, int max_card) {
    Box box;
    int m = cols.m;
    box.lo.assign(m, 0);
    box.hi.assign(m, 0);
    for (int d = 0; d < m; ++d) {
        // Two bounds per side: total negative/positive mass, and the
        // cardinality cap times the extreme single entries. Partial sums of
        // any subset within the cap stay inside.
        int64_t neg_total = 0, pos_total = 0, min_e = 0, max_e = 0;
        for (int j = 0; j < cols.nbar; ++j) {
            int64_t v = cols.entry(d, j);
            if (v < 0) neg_total += v;
            if (v > 0) pos_total += v;
            min_e = std::min(min_e, v);
            max_e = std::max(max_e, v);
        }
        int64_t lo1 = neg_total, lo2 = static_cast<int64_t>(max_card) * min_e;
        int64_t hi1 = pos_total, hi2 = static_cast<int64_t>(max_card) * max_e;
        box.lo[d] = std::max(lo1, lo2);
        box.hi[d] = std::min(hi1, hi2);
    }
    box.stride.assign(m, 1);
    size_t acc = 1; // last axis fastest
    for (int d = m - 1; d >= 0; --d) {
        box.stride[d] = acc;
        acc *= static_cast<size_t>(std::max<int64_t>(box.hi[d] - box.lo[d] + 1, 1));
    }
    box.cells = acc;
    return box;
}

constexpr uint32_t kStart = 0xFFFFFFFFu;

} // namespace

std::optional<SubsetCertificate> hit_target_exact(const IntCols& cols,
                                                  std::span<const int64_t> t_num,
                                                  CardinalityBand band,
                                                  const ExactHitOptions& opts) {
    const int m = cols.m;
    const int nbar = cols.nbar;
    if (m > opts.m_max)
        throw DiscError("hit_target_exact: m = " + std::to_string(m) +
                        " exceeds the dense-DP limit " + std::to_string(opts.m_max));
    int lo_card = std::max(band.lo, 0);
    int hi_card = band.hi < 0 ? nbar : std::min(band.hi, nbar);
    if (lo_card > hi_card || lo_card > nbar) return std::nullopt;

    const int layers = opts.track_cardinality ? hi_card + 1 : 1;
    Box box = make_box(cols, hi_card);
    size_t need = box.cells * static_cast<size_t>(layers) * sizeof(uint32_t);
    if (need > opts.memory_budget_bytes) throw BoxOverflow(need, opts.memory_budget_bytes);

    // The box always contains the origin; a target outside it is unreachable.
    if (!box.contains(t_num)) return std::nullopt;

    std::vector<uint32_t> creator(box.cells * layers, 0);
    std::vector<int64_t> origin(m, 0);
    size_t origin_idx = box.index(origin);
    creator[origin_idx] = kStart; // layer 0

    std::vector<int64_t> s(m), s2(m);
    if (opts.track_cardinality) {
        for (int j = 0; j < nbar; ++j) {
            for (int c = std::min(hi_card, j + 1); c >= 1; --c) {
                const uint32_t* prev = creator.data() + box.cells * static_cast<size_t>(c - 1);
                uint32_t* cur = creator.data() + box.cells * static_cast<size_t>(c);
                for (size_t idx = 0; idx < box.cells; ++idx) {
                    if (prev[idx] == 0) continue;
                    box.unindex(idx, s);
                    bool ok = true;
                    for (int d = 0; d < m; ++d) {
                        s2[d] = s[d] + cols.entry(d, j);
                        if (s2[d] < box.lo[d] || s2[d] > box.hi[d]) {
                            ok = false;
                            break;
                        }
                    }
                    if (!ok) continue;
                    size_t idx2 = box.index(s2);
                    if (cur[idx2] == 0) cur[idx2] = static_cast<uint32_t>(j + 1);
                }
            }
        }
        size_t t_idx = box.index(t_num);
        for (int c = lo_card; c <= hi_card; ++c) {
            uint32_t tag = creator[box.cells * static_cast<size_t>(c) + t_idx];
            if (tag == 0) continue;
            SubsetCertificate cert;
            cert.band_lo = lo_card;
            cert.band_hi = hi_card;
            cert.exact = true;
            cert.achieved_num.assign(t_num.begin(), t_num.end());
            cert.achieved.resize(m);
            for (int d = 0; d < m; ++d)
                cert.achieved[d] = static_cast<double>(t_num[d]) / static_cast<double>(cols.denom);
            std::copy(t_num.begin(), t_num.end(), s.begin());
            int cc = c;
            while (cc > 0) {
                uint32_t cr = creator[box.cells * static_cast<size_t>(cc) + box.index(s)];
                int j = static_cast<int>(cr) - 1;
                cert.subset.push_back(j);
                for (int d = 0; d < m; ++d) s[d] -= cols.entry(d, j);
                --cc;
            }
            std::reverse(cert.subset.begin(), cert.subset.end());
            return cert;
        }
        return std::nullopt;
    }

    // Cardinality-free variant: one layer, guard against reusing the current
    // column by skipping cells it created in this pass.
    for (int j = 0; j < nbar; ++j) {
        uint32_t tag = static_cast<uint32_t>(j + 1);
        for (size_t idx = 0; idx < box.cells; ++idx) {
            uint32_t cr = creator[idx];
            if (cr == 0 || cr == tag) continue;
            box.unindex(idx, s);
            bool ok = true;
            for (int d = 0; d < m; ++d) {
                s2[d] = s[d] + cols.entry(d, j);
                if (s2[d] < box.lo[d] || s2[d] > box.hi[d]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            size_t idx2 = box.index(s2);
            if (creator[idx2] == 0) creator[idx2] = tag;
        }
    }
    uint32_t tag = creator[box.index(t_num)];
    if (tag == 0) return std::nullopt;
    SubsetCertificate cert;
    cert.band_lo = 0;
    cert.band_hi = nbar;
    cert.exact = true;
    cert.achieved_num.assign(t_num.begin(), t_num.end());
    cert.achieved.resize(m);
    for (int d = 0; d < m; ++d)
        cert.achieved[d] = static_cast<double>(t_num[d]) / static_cast<double>(cols.denom);
    std::copy(t_num.begin(), t_num.end(), s.begin());
    while (true) {
        uint32_t cr = creator[box.index(s)];
        if (cr == kStart) break;
        int j = static_cast<int>(cr) - 1;
        cert.subset.push_back(j);
        for (int d = 0; d < m; ++d) s[d] -= cols.entry(d, j);
    }
    std::reverse(cert.subset.begin(), cert.subset.end());
    return cert;
}

// ---------------------------------------------------------------------------
// Approximate target hitting
// ---------------------------------------------------------------------------

namespace {

double norm2_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

struct LocalSearchState {
    std::vector<int> in;          // subset indices
    std::vector<uint8_t> member;  // bitmap
    std::vector<double> residual; // t - A 1_T
    double res2 = 0.0;

    void add(const RealCols& cols, int j) {
        in.push_back(j);
        member[j] = 1;
        for (int d = 0; d < cols.m; ++d) residual[d] -= cols.entry(d, j);
        res2 = norm2_of(residual);
    }
    void drop(const RealCols& cols, size_t pos) {
        int j = in[pos];
        member[j] = 0;
        in.erase(in.begin() + pos);
        for (int d = 0; d < cols.m; ++d) residual[d] += cols.entry(d, j);
        res2 = norm2_of(residual);
    }
};

double res2_after_swap(const RealCols& cols, const std::vector<double>& residual, int out_j,
                       int in_j) {
    double s = 0.0;
    for (int d = 0; d < cols.m; ++d) {
        double r = residual[d] + cols.entry(d, out_j) - cols.entry(d, in_j);
        s += r * r;
    }
    return s;
}

} // namespace

ApproxHitResult hit_target_approx(const RealCols& cols, std::span<const double> t,
                                  CardinalityBand band, double tol, int budget_restarts,
                                  uint64_t seed) {
    const int m = cols.m;
    const int nbar = cols.nbar;
    ApproxHitResult out;
    out.cert.band_lo = band.lo;
    out.cert.band_hi = band.hi < 0 ? nbar : band.hi;
    out.cert.exact = false;
    out.cert.achieved.assign(m, 0.0);
    out.cert.residual_norm = std::sqrt(norm2_of(t));
    if (band.lo > nbar || out.cert.band_hi < band.lo) {
        // Infeasible band: report the empty subset as Best immediately.
        return out;
    }
    int lo_card = std::max(band.lo, 0);
    int hi_card = std::min(out.cert.band_hi, nbar);

    double best_res2 = std::numeric_limits<double>::infinity();
    std::vector<int> best_subset;
    int best_restart = -1;

    const double tol2 = tol * tol;
    std::vector<int> order(nbar);
    for (int r = 0; r < budget_restarts; ++r) {
        Rng rng(seed, static_cast<uint64_t>(r));
        std::iota(order.begin(), order.end(), 0);
        for (int i = nbar - 1; i > 0; --i)
            std::swap(order[i], order[rng.next_below(static_cast<uint64_t>(i + 1))]);

        LocalSearchState st;
        st.member.assign(nbar, 0);
        st.residual.assign(t.begin(), t.end());
        st.res2 = norm2_of(st.residual);

        // Greedy residual descent in randomized column order.
        while (static_cast<int>(st.in.size()) < hi_card) {
            int best_j = -1;
            double best = st.res2;
            bool force = static_cast<int>(st.in.size()) < lo_card;
            for (int j : order) {
                if (st.member[j]) continue;
                double s = 0.0;
                for (int d = 0; d < m; ++d) {
                    double v = st.residual[d] - cols.entry(d, j);
                    s += v * v;
                }
                if (s < best - 1e-15 || (force && best_j < 0)) {
                    best = s;
                    best_j = j;
                }
            }
            if (best_j < 0) break;
            st.add(cols, best_j);
            if (st.res2 <= tol2 && static_cast<int>(st.in.size()) >= lo_card) break;
        }

        // 1-moves and 1-swaps to a local optimum, then sampled 2-swaps.
        for (int pass = 0; pass < 200; ++pass) {
            bool improved = false;
            // drops
            for (size_t pos = 0; pos < st.in.size() && static_cast<int>(st.in.size()) > lo_card;) {
                int j = st.in[pos];
                double s = 0.0;
                for (int d = 0; d < m; ++d) {
                    double v = st.residual[d] + cols.entry(d, j);
                    s += v * v;
                }
                if (s < st.res2 - 1e-15) {
                    st.drop(cols, pos);
                    improved = true;
                } else {
                    ++pos;
                }
            }
            // adds
            if (static_cast<int>(st.in.size()) < hi_card) {
                for (int j : order) {
                    if (st.member[j]) continue;
                    double s = 0.0;
                    for (int d = 0; d < m; ++d) {
                        double v = st.residual[d] - cols.entry(d, j);
                        s += v * v;
                    }
                    if (s < st.res2 - 1e-15) {
                        st.add(cols, j);
                        improved = true;
                        if (static_cast<int>(st.in.size()) >= hi_card) break;
                    }
                }
            }
            // 1-swaps
            for (size_t pos = 0; pos < st.in.size(); ++pos) {
                int out_j = st.in[pos];
                int best_in = -1;
                double best = st.res2;
                for (int j : order) {
                    if (st.member[j]) continue;
                    double s = res2_after_swap(cols, st.residual, out_j, j);
                    if (s < best - 1e-15) {
                        best = s;
                        best_in = j;
                    }
                }
                if (best_in >= 0) {
                    st.drop(cols, pos);
                    st.add(cols, best_in);
                    improved = true;
                }
            }
            if (st.res2 <= tol2) break;
            if (!improved) {
                // Two-swap escape by meet-in-the-middle over single-swap
                // deltas: sample swaps (a out, b in), sort by first residual
                // coordinate, and pair each delta with its nearest complement
                // toward the target. This inspects ~N^2 candidate 2-swaps for
                // O(N log N) work, which is what it takes to land within a
                // 1e-3 ball in two dimensions.
                bool escaped = false;
                size_t tsz = st.in.size();
                size_t osz = nbar - tsz;
                if (tsz >= 2 && osz >= 2) {
                    struct Delta {
                        double x, y; // residual change (m <= 2 padded with 0)
                        int out_j, in_j;
                    };
                    std::vector<int> outside;
                    outside.reserve(osz);
                    for (int j = 0; j < nbar; ++j)
                        if (!st.member[j]) outside.push_back(j);
                    size_t want = std::min<size_t>(20000, tsz * osz);
                    std::vector<Delta> deltas;
                    deltas.reserve(want);
                    for (size_t i = 0; i < want; ++i) {
                        int a = st.in[rng.next_below(tsz)];
                        int b = outside[rng.next_below(osz)];
                        Delta dl;
                        dl.out_j = a;
                        dl.in_j = b;
                        dl.x = cols.entry(0, b) - cols.entry(0, a);
                        dl.y = m > 1 ? cols.entry(1, b) - cols.entry(1, a) : 0.0;
                        deltas.push_back(dl);
                    }
                    std::sort(deltas.begin(), deltas.end(),
                              [](const Delta& a, const Delta& b) { return a.x < b.x; });
                    double rx = st.residual[0];
                    double ry = m > 1 ? st.residual[1] : 0.0;
                    double best = st.res2 - 1e-15;
                    int b_out1 = -1, b_in1 = -1, b_out2 = -1, b_in2 = -1;
                    for (const Delta& d1 : deltas) {
                        double qx = rx - d1.x, qy = ry - d1.y;
                        Delta probe;
                        probe.x = qx;
                        auto it = std::lower_bound(
                            deltas.begin(), deltas.end(), probe,
                            [](const Delta& a, const Delta& b) { return a.x < b.x; });
                        auto consider = [&](const Delta& d2) {
                            if (d1.out_j == d2.out_j || d1.in_j == d2.in_j) return;
                            double ex = qx - d2.x, ey = qy - d2.y;
                            double s = ex * ex + ey * ey;
                            if (s < best) {
                                best = s;
                                b_out1 = d1.out_j;
                                b_in1 = d1.in_j;
                                b_out2 = d2.out_j;
                                b_in2 = d2.in_j;
                            }
                        };
                        double bound = std::sqrt(best);
                        for (auto fwd = it; fwd != deltas.end() && fwd->x - qx <= bound; ++fwd)
                            consider(*fwd);
                        for (auto bwd = it; bwd != deltas.begin();) {
                            --bwd;
                            if (qx - bwd->x > bound) break;
                            consider(*bwd);
                        }
                    }
                    if (b_out1 >= 0) {
                        auto pos_of = [&](int j) {
                            return std::find(st.in.begin(), st.in.end(), j) - st.in.begin();
                        };
                        st.drop(cols, pos_of(b_out1));
                        st.drop(cols, pos_of(b_out2));
                        st.add(cols, b_in1);
                        st.add(cols, b_in2);
                        escaped = true;
                    }
                }
                if (!escaped) break;
            }
        }

        if (static_cast<int>(st.in.size()) >= lo_card && st.res2 < best_res2 - 1e-15) {
            best_res2 = st.res2;
            best_subset = st.in;
            best_restart = r;
        }
        out.restarts_used = r + 1;
        if (best_res2 <= tol2) break;
    }

    if (best_restart >= 0) {
        std::sort(best_subset.begin(), best_subset.end());
        out.cert.subset = best_subset;
        out.cert.achieved.assign(m, 0.0);
        for (int j : best_subset)
            for (int d = 0; d < m; ++d) out.cert.achieved[d] += cols.entry(d, j);
        double s = 0.0;
        for (int d = 0; d < m; ++d) {
            double v = t[d] - out.cert.achieved[d];
            s += v * v;
        }
        out.cert.residual_norm = std::sqrt(s);
        out.hit = out.cert.residual_norm <= tol;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Probability oracles
// ---------------------------------------------------------------------------

size_t Pmf::cells() const {
    size_t c = 1;
    for (int d = 0; d < m; ++d) c *= static_cast<size_t>(hi[d] - lo[d] + 1);
    return c;
}

size_t Pmf::index(std::span<const int64_t> s) const {
    size_t idx = 0;
    for (int d = 0; d < m; ++d) {
        idx = idx * static_cast<size_t>(hi[d] - lo[d] + 1) + static_cast<size_t>(s[d] - lo[d]);
    }
    return idx;
}

bool Pmf::contains(std::span<const int64_t> s) const {
    for (int d = 0; d < m; ++d)
        if (s[d] < lo[d] || s[d] > hi[d]) return false;
    return true;
}

double Pmf::at(std::span<const int64_t> s) const { return contains(s) ? p[index(s)] : 0.0; }

Pmf pmf_convolution(const IntCols& cols, double p, size_t memory_budget_bytes) {
    if (!(p >= 0.0 && p <= 1.0)) throw DiscError("pmf_convolution: p outside [0,1]");
    if (cols.m > 3) throw DiscError("pmf_convolution: dense box supports m <= 3");
    Pmf pmf;
    pmf.m = cols.m;
    pmf.lo.assign(cols.m, 0);
    pmf.hi.assign(cols.m, 0);
    for (int d = 0; d < cols.m; ++d) {
        for (int j = 0; j < cols.nbar; ++j) {
            int64_t v = cols.entry(d, j);
            if (v < 0) pmf.lo[d] += v;
            if (v > 0) pmf.hi[d] += v;
        }
    }
    size_t cells = pmf.cells();
    if (cells * 2 * sizeof(double) > memory_budget_bytes)
        throw BoxOverflow(cells * 2 * sizeof(double), memory_budget_bytes);

    std::vector<size_t> dim(cols.m), stride(cols.m);
    size_t acc = 1;
    for (int d = cols.m - 1; d >= 0; --d) {
        dim[d] = static_cast<size_t>(pmf.hi[d] - pmf.lo[d] + 1);
        stride[d] = acc;
        acc *= dim[d];
    }

    pmf.p.assign(cells, 0.0);
    std::vector<double> next(cells, 0.0);
    std::vector<int64_t> origin(cols.m, 0);
    pmf.p[pmf.index(origin)] = 1.0;

    std::vector<int64_t> s(cols.m);
    for (int j = 0; j < cols.nbar; ++j) {
        // Shift offset of column j in flattened index space.
        int64_t shift = 0;
        bool zero_col = true;
        for (int d = 0; d < cols.m; ++d) {
            shift += cols.entry(d, j) * static_cast<int64_t>(stride[d]);
            if (cols.entry(d, j) != 0) zero_col = false;
        }
        if (zero_col) continue; // (1-p) + p shift(0) = identity
        std::fill(next.begin(), next.end(), 0.0);
        for (size_t idx = 0; idx < cells; ++idx) {
            double mass = pmf.p[idx];
            if (mass == 0.0) continue;
            next[idx] += (1.0 - p) * mass;
            // Bounds per axis must be rechecked; flat shift alone can wrap.
            size_t rem = idx;
            bool ok = true;
            for (int d = 0; d < cols.m; ++d) {
                int64_t coord = static_cast<int64_t>(rem / stride[d]);
                rem %= stride[d];
                int64_t c2 = coord + cols.entry(d, j);
                if (c2 < 0 || c2 >= static_cast<int64_t>(dim[d])) {
                    ok = false;
                    break;
                }
            }
            if (ok) next[static_cast<size_t>(static_cast<int64_t>(idx) + shift)] += p * mass;
        }
        pmf.p.swap(next);
    }
    pmf.total_mass = std::accumulate(pmf.p.begin(), pmf.p.end(), 0.0);
    return pmf;
}

std::complex<double> charfn(const RealCols& cols, double p, std::span<const double> theta) {
    std::complex<double> prod(1.0, 0.0);
    for (int j = 0; j < cols.nbar; ++j) {
        double phase = 0.0;
        for (int d = 0; d < cols.m; ++d) phase += theta[d] * cols.entry(d, j);
        prod *= std::complex<double>(1.0 - p + p * std::cos(kTwoPi * phase),
                                     p * std::sin(kTwoPi * phase));
    }
    return prod;
}

std::complex<double> charfn(const IntCols& cols, double p, std::span<const double> theta) {
    std::complex<double> prod(1.0, 0.0);
    for (int j = 0; j < cols.nbar; ++j) {
        double phase = 0.0;
        for (int d = 0; d < cols.m; ++d) phase += theta[d] * static_cast<double>(cols.entry(d, j));
        prod *= std::complex<double>(1.0 - p + p * std::cos(kTwoPi * phase),
                                     p * std::sin(kTwoPi * phase));
    }
    return prod;
}

double pmf_fourier(const IntCols& cols, double p, std::span<const int64_t> lambda_num,
                   int grid_per_axis) {
    const int m = cols.m;
    if (grid_per_axis < 1) throw DiscError("pmf_fourier: grid must be positive");
    // Nyquist check against the actual support box relative to lambda.
    for (int d = 0; d < m; ++d) {
        int64_t lo = 0, hi = 0;
        for (int j = 0; j < cols.nbar; ++j) {
            int64_t v = cols.entry(d, j);
            if (v < 0) lo += v;
            if (v > 0) hi += v;
        }
        int64_t max_freq = std::max(std::llabs(hi - lambda_num[d]), std::llabs(lambda_num[d] - lo));
        if (grid_per_axis < max_freq + 1)
            throw DiscError("pmf_fourier: grid too coarse for the support box (need >= " +
                            std::to_string(max_freq + 1) + " points per axis)");
    }

    // Rectangle rule over [-1/2,1/2)^m; exact for trigonometric polynomials
    // within the Nyquist bound checked above.
    const double step = 1.0 / grid_per_axis;
    std::vector<int> idx(m, 0);
    std::vector<double> theta(m);
    double acc = 0.0;
    for (;;) {
        for (int d = 0; d < m; ++d) theta[d] = -0.5 + idx[d] * step;
        std::complex<double> v = charfn(cols, p, theta);
        double phase = 0.0;
        for (int d = 0; d < m; ++d) phase += theta[d] * static_cast<double>(lambda_num[d]);
        acc += v.real() * std::cos(kTwoPi * phase) + v.imag() * std::sin(kTwoPi * phase);
        int d = 0;
        while (d < m && ++idx[d] == grid_per_axis) idx[d++] = 0;
        if (d == m) break;
    }
    double vol = std::pow(step, m);
    return acc * vol;
}

DecayProfile decay_profile(const IntCols& cols, double p, std::span<const double> radii,
                           int grid_per_axis) {
    if (cols.m > 2) throw DiscError("decay_profile: grid evaluation supports m <= 2");
    DecayProfile prof;
    prof.beta_aux = 1.0 / (80.0 * p * std::sqrt(static_cast<double>(cols.m)));
    std::vector<double> edges(radii.begin(), radii.end());
    std::sort(edges.begin(), edges.end());
    if (edges.empty() || edges.front() > 0.0) edges.insert(edges.begin(), 0.0);
    if (edges.back() < 0.5) edges.push_back(0.5);
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        prof.shell_lo.push_back(edges[i]);
        prof.shell_hi.push_back(edges[i + 1]);
        prof.max_abs.push_back(0.0);
    }

    const int g = grid_per_axis;
    std::vector<int> idx(cols.m, 0);
    std::vector<double> theta(cols.m);
    for (;;) {
        double norm_inf = 0.0;
        for (int d = 0; d < cols.m; ++d) {
            theta[d] = -0.5 + static_cast<double>(idx[d]) / (g - 1);
            norm_inf = std::max(norm_inf, std::fabs(theta[d]));
        }
        double v = std::abs(charfn(cols, p, theta));
        for (size_t s = 0; s < prof.max_abs.size(); ++s) {
            bool last = s + 1 == prof.max_abs.size();
            if (norm_inf >= prof.shell_lo[s] - 1e-12 &&
                (norm_inf < prof.shell_hi[s] - 1e-12 || (last && norm_inf <= prof.shell_hi[s] + 1e-12))) {
                prof.max_abs[s] = std::max(prof.max_abs[s], v);
                break;
            }
        }
        int d = 0;
        while (d < cols.m && ++idx[d] == g) idx[d++] = 0;
        if (d == cols.m) break;
    }
    return prof;
}

} // namespace gapforge
