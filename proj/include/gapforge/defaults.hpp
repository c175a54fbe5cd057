#pragma once

#include <cstdint>

// Frozen calibration constants. Each value was fixed once on desk-scale
// sweeps (m <= 3, n <= 8000, k <= 5) and is consumed by resolve_config()
// and the verification suite; changing one invalidates the recorded pass
// rates of the acceptance run.
namespace gapforge::defaults {

// Anti-concentration constants used by the pipelines; deliberately
// conservative lower estimates for both column families.
inline constexpr double kKappaDiscrete = 0.025;
inline constexpr double kKappaLogconcave = 0.02;

// Centered pipeline: delta = c_delta * m^3 * log(n) / n, capped below 1;
// inclusion rate for the hitter band. The continuous model needs a larger
// candidate pool: the approximate hitter lands within tol only when the
// 2-swap delta cloud is dense enough, which takes |Z| in the hundreds.
inline constexpr double kCenteredDeltaC = 3.0;
inline constexpr double kCenteredDeltaCLogconcave = 12.0;
inline constexpr double kCenteredHitterP = 0.05;

// The local search composes pairs of single swaps; with fewer than about a
// dozen selected columns the pair cloud is too thin to land inside tol, so
// the continuous hitter keeps at least this many columns in play.
inline constexpr int kApproxBandFloor = 14;

// AnalysisFaithful strip width: the formula C = sqrt(150)||u*||/sqrt(kappa)
// makes the acceptance coin exp(-C^2/2)-small, so the faithful mode runs
// with this calibrated width instead unless overridden.
inline constexpr double kFaithfulStripC = 2.0;

// Packing pipeline: pool size r = ceil(c_r * m^2 * log n), inclusion rate
// p = c_p / m^2, delta = c_d1 * exp(c_d2 / beta) * r / (beta^4 * n) capped
// below u1_cap = ||u*||_1 / (3m) as the rejection sampler requires.
inline constexpr double kPackingPoolC = 2.0;
inline constexpr double kPackingPC = 0.5;
inline constexpr double kPackingDeltaC1 = 1.2e-4;
inline constexpr double kPackingDeltaC2 = 0.10;

// Scaling-experiment thresholds (medians over seeds must stay within this
// factor across the n-range when normalized by log^2(n)/n).
inline constexpr double kScalingSpreadFactor = 4.0;

} // namespace gapforge::defaults
