#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gapforge/rng.hpp"

namespace gapforge {

struct DiscError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a dense DP / PMF box exceeds the memory budget; carries the
/// required vs available byte counts.
struct BoxOverflow : DiscError {
    BoxOverflow(size_t required, size_t available)
        : DiscError("state box needs " + std::to_string(required) + " bytes, budget " +
                    std::to_string(available)),
          required_bytes(required),
          available_bytes(available) {}
    size_t required_bytes;
    size_t available_bytes;
};

/// Integer columns: m x nbar numerators over a common denominator. Stored
/// column-major; entry(d, j) is coordinate d of column j.
struct IntCols {
    int m = 0;
    int nbar = 0;
    int64_t denom = 1;
    std::vector<int64_t> w; // column-major, size m*nbar

    int64_t entry(int d, int j) const { return w[static_cast<size_t>(j) * m + d]; }
    int64_t& entry(int d, int j) { return w[static_cast<size_t>(j) * m + d]; }
    double scaled(int d, int j) const {
        return static_cast<double>(entry(d, j)) / static_cast<double>(denom);
    }
};

/// Real columns, same layout.
struct RealCols {
    int m = 0;
    int nbar = 0;
    std::vector<double> w;

    double entry(int d, int j) const { return w[static_cast<size_t>(j) * m + d]; }
    double& entry(int d, int j) { return w[static_cast<size_t>(j) * m + d]; }
};

/// One fully-specified engine query: columns plus the distributional data
/// (mean, covariance bound, anti-concentration constant), the Bernoulli
/// inclusion rate and the target. The operations below also accept the
/// pieces individually.
struct DiscrepancyQuery {
    IntCols int_columns;   // integer mode (numerators over int_columns.denom)
    RealCols real_columns; // continuous mode (whichever has nbar > 0 is used)
    double p = 0.0;        // Bernoulli inclusion rate in (0,1)
    std::vector<double> mu;
    std::vector<int64_t> mu_num; // integer mode; over the columns' denom
    double sigma = 1.0;          // operator-norm bound of the column covariance
    double kappa = 0.025;        // anti-concentration constant in (0,1]
    std::vector<double> target;
    std::vector<int64_t> target_num;

    bool integer_mode() const { return int_columns.nbar > 0; }
    void validate() const; // throws DiscError on a malformed query
};

// ---------------------------------------------------------------------------
// Column subsampling
// ---------------------------------------------------------------------------

struct SelectionDecision {
    bool accepted = false;
    int inner_sign = 0; // sign of <running sum, column - mu> at decision time
    bool norm_ok = false;
};

/// Trace of the greedy subsampling pass: a column is kept only if its
/// centered norm is below 10 sigma sqrt(m/kappa) and adding it does not
/// increase the norm of the running centered sum. Consequently
/// ||running_sum||^2 <= sum of the selected centered norms, exactly.
struct SelectionTrace {
    std::vector<int> selected;
    std::vector<double> running_sum;      // final sum of (A_i - mu), scaled units
    std::vector<int64_t> running_sum_num; // integer mode only, over the input denom
    double norm_cap = 0.0;
    std::vector<SelectionDecision> decisions;
};

/// Integer-exact subsampling; mu_num shares the columns' denominator. Genuine
/// ties (nonzero sum, nonzero centered column, inner product exactly zero)
/// are resolved by a fair coin on a per-index substream of coin_seed; trivial
/// ties (zero sum or zero centered column) accept, since they cannot grow
/// the running norm.
SelectionTrace subsample(const IntCols& cols, std::span<const int64_t> mu_num, double sigma,
                         double kappa, uint64_t coin_seed);

/// Real-arithmetic variant; the tie rule fires on exact floating-point zeros.
SelectionTrace subsample(const RealCols& cols, std::span<const double> mu, double sigma,
                         double kappa, uint64_t coin_seed);

SelectionTrace subsample(const DiscrepancyQuery& query, uint64_t coin_seed);

// ---------------------------------------------------------------------------
// Target hitting
// ---------------------------------------------------------------------------

/// A {0,1}-combination certificate: subset T with A 1_T equal (exact mode) or
/// close (residual_norm) to the requested target.
struct SubsetCertificate {
    std::vector<int> subset;
    std::vector<double> achieved;      // scaled units
    std::vector<int64_t> achieved_num; // integer mode
    double residual_norm = 0.0;
    int band_lo = 0, band_hi = 0;
    bool exact = false;
};

struct CardinalityBand {
    int lo = 0;
    int hi = 0; // inclusive; hi < 0 means "any size"
};

struct ExactHitOptions {
    bool track_cardinality = true;
    size_t memory_budget_bytes = size_t(1) << 30;
    int m_max = 3; // dense DP rows; the state box is exponential in m
};

/// Complete search for T with (columns) 1_T = t over the integer numerators,
/// |T| within the band. Layered dynamic program over (prefix, sum vector,
/// cardinality) with back-pointers; the state box is trimmed to sums
/// reachable with at most band.hi columns. Returns nullopt exactly when no
/// such subset exists.
std::optional<SubsetCertificate> hit_target_exact(const IntCols& cols,
                                                  std::span<const int64_t> t_num,
                                                  CardinalityBand band,
                                                  const ExactHitOptions& opts = {});

struct ApproxHitResult {
    SubsetCertificate cert;
    bool hit = false; // residual_norm <= tol
    int restarts_used = 0;
};

/// Randomized greedy construction plus 1-swap/2-swap local search with
/// multi-restart; returns the first subset meeting tol, otherwise the best
/// found across the restart budget (lowest restart index breaks ties).
ApproxHitResult hit_target_approx(const RealCols& cols, std::span<const double> t,
                                  CardinalityBand band, double tol, int budget_restarts,
                                  uint64_t seed);

// ---------------------------------------------------------------------------
// Probability oracles
// ---------------------------------------------------------------------------

/// Dense PMF of A 1_S with independent Pr[i in S] = p, over the integer box
/// spanned by the achievable sums (numerators).
struct Pmf {
    int m = 0;
    std::vector<int64_t> lo, hi; // per-axis box bounds
    std::vector<double> p;       // dense, last axis fastest
    double total_mass = 0.0;

    size_t cells() const;
    size_t index(std::span<const int64_t> s) const;
    bool contains(std::span<const int64_t> s) const;
    double at(std::span<const int64_t> s) const;
};

Pmf pmf_convolution(const IntCols& cols, double p, size_t memory_budget_bytes = size_t(1) << 30);

/// Characteristic function of A 1_S at frequency theta:
/// prod_j ((1-p) + p exp(2 pi i <theta, A_j>)).
std::complex<double> charfn(const RealCols& cols, double p, std::span<const double> theta);
std::complex<double> charfn(const IntCols& cols, double p, std::span<const double> theta);

/// Fourier inversion of the PMF at a single integer target: rectangle-rule
/// quadrature over the fundamental domain [-1/2,1/2]^m of the numerator
/// lattice. With grid_per_axis >= 2*nbar*max|entry| + 1 the rule is exact for
/// this trigonometric polynomial; a coarser grid that still covers the actual
/// support box relative to lambda is accepted, anything below that throws.
double pmf_fourier(const IntCols& cols, double p, std::span<const int64_t> lambda_num,
                   int grid_per_axis);

/// Shell table of max |charfn| over the fundamental domain, used to observe
/// the exponential decay of the Fourier spectrum away from the origin.
struct DecayProfile {
    std::vector<double> shell_lo, shell_hi; // ||theta||_inf ranges
    std::vector<double> max_abs;
    double beta_aux = 0.0; // 1/(80 p sqrt(m)), the near-origin window scale
};

DecayProfile decay_profile(const IntCols& cols, double p, std::span<const double> radii,
                           int grid_per_axis = 129);

} // namespace gapforge
