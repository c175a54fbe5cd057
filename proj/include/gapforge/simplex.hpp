#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapforge/instance.hpp"

namespace gapforge {

enum class LpStatus { Optimal, Infeasible, IterationLimit };

/// Basic optimal solution of  max c^T x  s.t.  Ax <= b,  0 <= x <= 1  and its
/// dual. reduced_costs holds (A^T u - c)_i, the sign convention the rounding
/// pipelines consume. frac_idx / n0 / n1 partition [n] at tolerance 1e-9;
/// a basic solution has |frac_idx| <= m.
struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> x;
    std::vector<double> u;
    double value = 0.0;
    std::vector<double> reduced_costs;
    std::vector<int> frac_idx, n0, n1;
    long pivots = 0;

    // Final basis for warm starts: variable indices (j < n structural,
    // j >= n slack of row j-n) and per-variable status.
    std::vector<int> basis;
    std::vector<uint8_t> vstat; // 0 = at lower, 1 = at upper, 2 = basic
};

inline constexpr double kLpTol = 1e-9;       // basis / slackness classification
inline constexpr double kLpDualityTol = 1e-8;

struct SimplexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bounds/overrides for branch-and-bound nodes and perturbed right-hand sides.
struct LpOverrides {
    std::vector<double> lo, hi;      // per-variable bounds; empty = [0,1]^n
    std::vector<double> b;           // rhs override (scaled units); empty = instance b
    const LpSolution* warm = nullptr; // basis to start from
    long max_pivots = 0;             // 0 = default cap
};

LpSolution solve_lp(const IpInstance& inst);
LpSolution solve_lp(const IpInstance& inst, const LpOverrides& ov);

/// b^T u + ||(c - A^T u)^+||_1; rejects u with negative entries.
double dual_value(std::span<const double> u, const IpInstance& inst);

/// Exact decomposition of dual_value(u) - c^T x into the slack term
/// (b - Ax)^T u plus the reduced-cost terms.
struct GapBreakdown {
    double slack_term = 0.0;
    double reduced_cost_term = 0.0;
    double total = 0.0;
};

GapBreakdown gap_formula(std::span<const double> x, std::span<const double> u,
                         const IpInstance& inst);

/// Dual-norm / zero-set statistics with pass flags against the configured
/// thresholds (defaults: centered ||u||_2 <= 32 and |N0| >= n/1e5; packing
/// ||u||_1 <= 6/beta).
struct PropsReport {
    double u_norm2 = 0.0;
    double u_norm1 = 0.0;
    double n0_frac = 0.0;
    double u_norm_threshold = 0.0;
    double n0_frac_threshold = 0.0;
    bool u_norm_ok = false;
    bool n0_ok = false;
};

struct PropsThresholds {
    double centered_u_norm2 = 32.0;
    double centered_n0_frac = 1e-5;
    double packing_u_norm1_beta_factor = 6.0; // threshold = factor / beta
};

PropsReport check_solution_props(const LpSolution& sol, const IpInstance& inst,
                                 const PropsThresholds& thresholds = {});

} // namespace gapforge
