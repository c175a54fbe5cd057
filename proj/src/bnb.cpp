#include "gapforge/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

namespace gapforge {

namespace {

constexpr double kPruneTol = 1e-9;

struct Node {
    double bound = 0.0;
    long id = 0;
    std::vector<int8_t> fix; // -1 free, 0/1 fixed
    LpSolution sol;          // solved relaxation at this node
};

struct QueueKey {
    double bound;
    long id;
    size_t slot;
};

struct KeyLess {
    bool operator()(const QueueKey& a, const QueueKey& b) const {
        if (a.bound != b.bound) return a.bound < b.bound; // max-heap on bound
        return a.id > b.id;                               // then lowest id
    }
};

LpSolution solve_node(const IpInstance& inst, const std::vector<int8_t>& fix,
                      const LpSolution* warm) {
    LpOverrides ov;
    ov.lo.assign(inst.n, 0.0);
    ov.hi.assign(inst.n, 1.0);
    for (int j = 0; j < inst.n; ++j)
        if (fix[j] >= 0) ov.lo[j] = ov.hi[j] = fix[j];
    ov.warm = warm;
    return solve_lp(inst, ov);
}

bool exact_feasible(const IpInstance& inst, std::span<const uint8_t> x) {
    if (inst.discrete()) {
        std::vector<int64_t> ax = inst.product_num(x);
        for (int i = 0; i < inst.m; ++i)
            if (ax[i] > inst.b_num[i]) return false;
        return true;
    }
    for (int i = 0; i < inst.m; ++i) {
        double ax = 0.0;
        for (int j = 0; j < inst.n; ++j)
            if (x[j]) ax += inst.a(i, j);
        if (ax > inst.b(i) + 1e-9) return false;
    }
    return true;
}

double objective(const IpInstance& inst, std::span<const uint8_t> x) {
    double v = 0.0;
    for (int j = 0; j < inst.n; ++j)
        if (x[j]) v += inst.c[j];
    return v;
}

} // namespace

BnbResult best_bound_solve(const IpInstance& inst, const BnbOptions& opts) {
    BnbResult res;
    const int n = inst.n;

    std::vector<std::unique_ptr<Node>> nodes;
    std::priority_queue<QueueKey, std::vector<QueueKey>, KeyLess> open;

    double incumbent_value = -std::numeric_limits<double>::infinity();
    std::vector<uint8_t> incumbent;

    auto try_incumbent = [&](std::span<const uint8_t> x) {
        if (!exact_feasible(inst, x)) return;
        double v = objective(inst, x);
        if (v > incumbent_value) {
            incumbent_value = v;
            incumbent.assign(x.begin(), x.end());
        }
    };
    // x = 0 is feasible whenever b >= 0; it seeds the incumbent so node
    // counts match the tree-size accounting (the root is node 1).
    {
        std::vector<uint8_t> zero(n, 0);
        try_incumbent(zero);
    }

    auto push_node = [&](std::vector<int8_t> fix, const LpSolution* warm) {
        LpSolution sol = solve_node(inst, fix, warm);
        ++res.nodes_explored;
        res.lp_pivots += sol.pivots;
        if (sol.status != LpStatus::Optimal) {
            ++res.nodes_pruned; // infeasible child is a leaf of the tree
            return;
        }
        auto node = std::make_unique<Node>();
        node->bound = sol.value;
        node->id = res.nodes_explored;
        node->fix = std::move(fix);
        node->sol = std::move(sol);
        open.push(QueueKey{node->bound, node->id, nodes.size()});
        nodes.push_back(std::move(node));
    };

    push_node(std::vector<int8_t>(n, -1), nullptr);

    double last_popped = std::numeric_limits<double>::infinity();
    while (!open.empty()) {
        if (res.nodes_explored >= opts.node_limit) {
            res.status = BnbResult::Status::NodeLimit;
            break;
        }
        QueueKey key = open.top();
        open.pop();
        Node node = std::move(*nodes[key.slot]);
        nodes[key.slot].reset();
        if (opts.check_bound_order) {
            if (key.bound > last_popped + 1e-6)
                throw std::logic_error("best-bound order violated");
        }
        last_popped = key.bound;

        if (node.bound <= incumbent_value + kPruneTol) {
            ++res.nodes_pruned;
            if (opts.prune_audit && *opts.prune_audit)
                (*opts.prune_audit)(node.fix, node.bound, incumbent_value);
            continue;
        }

        // Integral relaxation: candidate incumbent, nothing to branch on.
        if (node.sol.frac_idx.empty()) {
            std::vector<uint8_t> x(n, 0);
            for (int j = 0; j < n; ++j) x[j] = node.sol.x[j] >= 0.5 ? 1 : 0;
            try_incumbent(x);
            continue;
        }

        // Most-fractional branching, ties by lowest index.
        int var = -1;
        double best = 2.0;
        for (int j : node.sol.frac_idx) {
            double d = std::fabs(node.sol.x[j] - 0.5);
            if (d < best - 1e-15) {
                best = d;
                var = j;
            }
        }
        for (int v = 0; v <= 1; ++v) {
            std::vector<int8_t> fix = node.fix;
            fix[var] = static_cast<int8_t>(v);
            push_node(std::move(fix), &node.sol);
        }
    }

    res.has_incumbent = !incumbent.empty() || incumbent_value > -1e300;
    res.incumbent = incumbent;
    res.opt_value = incumbent_value;
    if (res.status == BnbResult::Status::Optimal && !std::isfinite(incumbent_value))
        res.status = BnbResult::Status::NodeLimit; // no feasible point found
    return res;
}

BruteForceResult brute_force_solve(const IpInstance& inst) {
    const int n = inst.n;
    if (n > 30) throw std::invalid_argument("brute_force_solve: n too large for 2^n enumeration");
    BruteForceResult out;
    out.value = -std::numeric_limits<double>::infinity();

    std::vector<uint8_t> x(n, 0);
    double cx = 0.0;
    bool use_int = inst.discrete();
    std::vector<int64_t> ax_num(inst.m, 0);
    std::vector<double> ax(inst.m, 0.0);

    auto consider = [&]() {
        bool ok = true;
        if (use_int) {
            for (int i = 0; i < inst.m; ++i)
                if (ax_num[i] > inst.b_num[i]) {
                    ok = false;
                    break;
                }
        } else {
            for (int i = 0; i < inst.m; ++i)
                if (ax[i] > inst.b(i) + 1e-12) {
                    ok = false;
                    break;
                }
        }
        if (!ok) return;
        out.feasible_exists = true;
        // Recompute the objective in index order so ties are deterministic.
        if (cx > out.value) {
            out.value = cx;
            out.x = x;
        }
    };

    consider();
    uint64_t total = uint64_t(1) << n;
    for (uint64_t g = 1; g < total; ++g) {
        int bit = __builtin_ctzll(g); // Gray-code flip position
        bool now_on = !x[bit];
        x[bit] = now_on;
        double sgn = now_on ? 1.0 : -1.0;
        cx += sgn * inst.c[bit];
        if (use_int) {
            for (int i = 0; i < inst.m; ++i)
                ax_num[i] += (now_on ? 1 : -1) * inst.a_entry_num(i, bit);
        } else {
            for (int i = 0; i < inst.m; ++i) ax[i] += sgn * inst.a(i, bit);
        }
        consider();
    }
    if (!out.feasible_exists) out.value = -std::numeric_limits<double>::infinity();
    // Remove accumulated drift: recompute the winner's objective directly.
    if (out.feasible_exists) {
        double v = 0.0;
        for (int j = 0; j < n; ++j)
            if (out.x[j]) v += inst.c[j];
        out.value = v;
    }
    return out;
}

namespace {

struct CountContext {
    const std::vector<double>* w;
    const std::vector<double>* suffix_sum;
    long steps = 0;
    long step_budget = 0;
    bool truncated = false;
};

BigInt count_rec(CountContext& ctx, size_t i, double remaining) {
    const auto& w = *ctx.w;
    if (remaining < 0) return 0;
    if (i == w.size()) return 1;
    if (++ctx.steps > ctx.step_budget) {
        ctx.truncated = true;
        return 1; // the all-zero completion always fits
    }
    // All remaining weights fit: every completion is valid.
    if ((*ctx.suffix_sum)[i] <= remaining) return BigInt(1) << (w.size() - i);
    // Ascending order: once one weight exceeds the budget, all later do.
    if (w[i] > remaining) return 1;
    BigInt skip = count_rec(ctx, i + 1, remaining);
    BigInt take = count_rec(ctx, i + 1, remaining - w[i]);
    return skip + take;
}

} // namespace

KnapsackCount knapsack_count(std::span<const double> weights, double budget, long step_budget) {
    for (double w : weights)
        if (w < 0 || !std::isfinite(w))
            throw std::invalid_argument("knapsack_count: weights must be nonnegative and finite");
    if (budget < 0) throw std::invalid_argument("knapsack_count: budget must be nonnegative");

    KnapsackCount out;
    out.weights.assign(weights.begin(), weights.end());
    out.budget = budget;

    std::vector<double> sorted(weights.begin(), weights.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> suffix(sorted.size() + 1, 0.0);
    for (size_t i = sorted.size(); i-- > 0;) suffix[i] = suffix[i + 1] + sorted[i];

    CountContext ctx;
    ctx.w = &sorted;
    ctx.suffix_sum = &suffix;
    ctx.step_budget = step_budget;
    out.count = count_rec(ctx, 0, budget);
    out.partial = ctx.truncated;
    out.bound_2nk1 = 2 * BigInt(weights.size()) * out.count + 1;
    return out;
}

TreeBoundReport tree_bound_check(const IpInstance& inst, const LpSolution& sol, double gap,
                                 const BnbOptions& opts) {
    TreeBoundReport rep;
    rep.gap_used = gap;
    rep.bnb = best_bound_solve(inst, opts);
    std::vector<double> weights(inst.n);
    for (int j = 0; j < inst.n; ++j) weights[j] = std::fabs(sol.reduced_costs[j]);
    rep.knapsack = knapsack_count(weights, std::max(gap, 0.0) + 1e-9);
    rep.bound_holds = BigInt(rep.bnb.nodes_explored) <= rep.knapsack.bound_2nk1;
    return rep;
}

TreeSweepResult sweep_tree_sizes(const TreeSweepParams& params, std::span<const int> n_list,
                                 std::span<const uint64_t> seeds) {
    TreeSweepResult out;
    for (int n : n_list) {
        std::vector<long> sizes;
        TreeSweepSummary sum;
        sum.n = n;
        for (uint64_t seed : seeds) {
            IpInstance inst;
            if (params.model == Model::Packing)
                inst = gen_packing(n, params.m, params.k, params.beta, PackingBSpec{}, seed);
            else
                inst = gen_centered_dsu(n, params.m, params.k, CenteredBSpec{}, seed);
            BnbOptions opts;
            opts.node_limit = params.node_limit;
            BnbResult r = best_bound_solve(inst, opts);
            TreeSweepRow row;
            row.n = n;
            row.seed = seed;
            row.nodes = r.nodes_explored;
            row.node_limit_hit = r.status == BnbResult::Status::NodeLimit;
            out.rows.push_back(row);
            ++sum.cells;
            if (row.node_limit_hit)
                ++sum.excluded;
            else
                sizes.push_back(row.nodes);
        }
        if (!sizes.empty()) {
            std::sort(sizes.begin(), sizes.end());
            sum.median_nodes = sizes[sizes.size() / 2];
            sum.max_nodes = sizes.back();
            sum.exponent = std::log(static_cast<double>(std::max<long>(sum.median_nodes, 1))) /
                           std::log(static_cast<double>(n));
        }
        out.summary.push_back(sum);
    }
    return out;
}

} // namespace gapforge
