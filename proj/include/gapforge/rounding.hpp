#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gapforge/discrepancy.hpp"
#include "gapforge/instance.hpp"
#include "gapforge/simplex.hpp"

namespace gapforge {

enum class SelectionMode { AnalysisFaithful, PracticalFilter };

/// Knobs for the repair pipelines. AnalysisFaithful draws the acceptance
/// coins of the rejection-sampling constructions so distributional claims
/// stay testable; PracticalFilter deterministically takes every qualifying
/// column. Fields left at their sentinel values resolve to the calibrated
/// defaults in defaults.hpp.
struct SelectionConfig {
    SelectionMode mode = SelectionMode::PracticalFilter;
    double delta = 0.0;    // reduced-cost ceiling; <= 0 derives the model default
    double strip_c = 0.0;  // centered strip half-width C; <= 0 derives sqrt(150)||u||/sqrt(kappa)
    double kappa = 0.0;    // anti-concentration constant; <= 0 derives the model default
    double p = 0.0;        // hitter inclusion rate; <= 0 derives the model default
    double gamma = -1.0;   // packing rhs shift; < 0 derives p * r * mu
    int pool_r = 0;        // packing pool size; <= 0 derives the model default
    int z_cap = 400;       // cap on |Z| fed to the exact hitter (0 = no cap)
    double approx_tol = 1e-3;   // logconcave hitter residual target
    int approx_budget = 200;    // restarts
    double li_shift = -1.0;     // logconcave target down-shift; < 0 uses approx_tol
    size_t dp_budget_bytes = size_t(1) << 30;
    long max_pivots = 0;
};

/// Fills every derived field of cfg for the given instance.
SelectionConfig resolve_config(SelectionConfig cfg, const IpInstance& inst);

enum class RepairOutcome {
    Repaired,
    TrivialNoRepair, // x* already integral and feasible; nothing to fix
    EmptyPool,
    HitterFailed,
    InfeasiblePerturbed,
    LpFailed,
};

std::string to_string(RepairOutcome o);

/// Everything the rounding run produced: the floor x', the candidate pool Z,
/// the repair set T, the final x'' = x' + 1_T, exact feasibility data, and
/// the gap decomposition dual_value(u*) - c^T x'' at (x'', u*).
struct RoundingCertificate {
    RepairOutcome outcome = RepairOutcome::Repaired;
    std::vector<uint8_t> x_rounded; // x'
    std::vector<int> candidates;    // Z (column indices)
    std::vector<int> repair_set;    // T, subset of Z
    std::vector<uint8_t> x_final;   // x''
    bool feasible = false;
    std::vector<double> slack;       // b - A x'' (scaled)
    std::vector<int64_t> slack_num;  // exact, discrete models
    double gap_upper = 0.0;          // dual_value(u*) - c^T x''
    GapBreakdown breakdown;
    std::vector<double> target;      // t (scaled)
    std::vector<int64_t> target_num; // discrete models
    double residual = 0.0;           // ||A 1_T - t||
    double round_norm = 0.0;         // ||A (x* - x')||, recorded
    double round_norm_bound = 0.0;   // sqrt(m) * max column norm
    double mean_zero_residual = 0.0; // |E[B'']| proxy after reweighting (LI)
    int z_size = 0, t_size = 0;
};

/// x'_i = floor(x*_i) with snap tolerance; values above 1 - 1e-9 round to 1.
std::vector<uint8_t> round_down(std::span<const double> x_star);

/// Candidate pool for the centered models: i in N0 with reduced cost in
/// [0, delta] and |u*^T A_i| <= C, thinned by the rejection-sampling coins in
/// AnalysisFaithful mode.
std::vector<int> select_candidates_centered(const IpInstance& inst, const LpSolution& sol,
                                            const SelectionConfig& cfg, uint64_t seed);

RoundingCertificate repair_centered(const IpInstance& inst, const LpSolution& sol,
                                    const SelectionConfig& cfg, uint64_t seed);

RoundingCertificate repair_packing(const IpInstance& inst, const SelectionConfig& cfg,
                                   uint64_t seed);

/// One orchestrated pipeline run; errors land in the report, not exceptions,
/// so sweeps can tabulate failure rates.
struct GapReport {
    std::string model;
    int m = 0, n = 0;
    int64_t k = 0;
    double beta = 0.0;
    uint64_t seed = 0;
    double val_lp = 0.0;
    double u_norm2 = 0.0, u_norm1 = 0.0;
    double n0_frac = 0.0;
    int z_size = 0, t_size = 0;
    double residual = 0.0;
    bool feasible = false;
    double gap_upper = 0.0;
    std::optional<double> ipgap_exact;
    std::string error; // empty = clean run
    RoundingCertificate cert;
};

struct MeasureOptions {
    bool exact_ipgap = false; // brute force val_IP (use only for small n)
    int exact_ipgap_max_n = 30;
};

GapReport measure_gap(const IpInstance& inst, const SelectionConfig& cfg, uint64_t seed,
                      const MeasureOptions& opts = {});

} // namespace gapforge
