#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gapforge/instance.hpp"
#include "gapforge/simplex.hpp"

namespace gapforge {

using BigInt = boost::multiprecision::cpp_int;

struct BnbResult {
    enum class Status { Optimal, NodeLimit };
    Status status = Status::Optimal;
    double opt_value = 0.0;
    std::vector<uint8_t> incumbent;
    bool has_incumbent = false;
    long nodes_explored = 0; // nodes created in the tree, all LP-evaluated
    long nodes_pruned = 0;   // bound-dominated pops plus infeasible children
    long lp_pivots = 0;
};

struct BnbOptions {
    long node_limit = 2000000;
    bool check_bound_order = false; // assert popped bounds are non-increasing
    // Audit hook: called for every bound-pruned node with its fixings and
    // bound, so tests can exhaustively verify pruning soundness.
    std::function<void(const std::vector<int8_t>& fix, double bound, double incumbent)>*
        prune_audit = nullptr;
};

/// Best-bound-first branch and bound on max c^T x, Ax <= b, x in {0,1}^n.
/// Nodes are keyed by their own LP value (ties by creation id), branching is
/// on the most-fractional variable, child LPs warm-start from the parent
/// basis.
BnbResult best_bound_solve(const IpInstance& inst, const BnbOptions& opts = {});

/// Exhaustive 2^n reference solver (Gray-code incremental evaluation).
struct BruteForceResult {
    double value = 0.0;
    std::vector<uint8_t> x;
    bool feasible_exists = false;
};
BruteForceResult brute_force_solve(const IpInstance& inst);

/// Exact count of {x in {0,1}^n : sum_i x_i w_i <= budget} by branch and
/// prune over ascending weights with prefix-sum shortcuts. Counts can exceed
/// 2^63, hence the big-integer result; a step budget turns the count into a
/// flagged lower bound instead of running forever.
struct KnapsackCount {
    std::vector<double> weights;
    double budget = 0.0;
    BigInt count = 0;
    BigInt bound_2nk1 = 0; // 2 n count + 1
    bool partial = false;  // step budget hit; count is a lower bound
};

KnapsackCount knapsack_count(std::span<const double> weights, double budget,
                             long step_budget = 200000000);

/// Runs the solver and the knapsack count at gap >= IPGAP and checks the
/// tree-size bound nodes <= 2 n |K| + 1.
struct TreeBoundReport {
    BnbResult bnb;
    KnapsackCount knapsack;
    double gap_used = 0.0;
    bool bound_holds = false;
};

TreeBoundReport tree_bound_check(const IpInstance& inst, const LpSolution& sol, double gap,
                                 const BnbOptions& opts = {});

/// Tree-size scaling experiment: nodes explored per (n, seed) cell plus the
/// fitted exponent log(nodes)/log(n) of the per-n medians.
struct TreeSweepRow {
    int n = 0;
    uint64_t seed = 0;
    long nodes = 0;
    bool node_limit_hit = false;
};

struct TreeSweepSummary {
    int n = 0;
    long median_nodes = 0;
    long max_nodes = 0;
    int cells = 0, excluded = 0;
    double exponent = 0.0; // log(median)/log(n)
};

struct TreeSweepResult {
    std::vector<TreeSweepRow> rows;
    std::vector<TreeSweepSummary> summary;
};

struct TreeSweepParams {
    Model model = Model::CenteredDsu;
    int m = 2;
    int64_t k = 3;
    double beta = 0.1; // packing only
    long node_limit = 2000000;
};

TreeSweepResult sweep_tree_sizes(const TreeSweepParams& params, std::span<const int> n_list,
                                 std::span<const uint64_t> seeds);

} // namespace gapforge
