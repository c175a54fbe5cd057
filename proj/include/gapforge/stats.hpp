#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gapforge/instance.hpp"

namespace gapforge {

/// Base-e entropy -x log x - (1-x) log(1-x); endpoints return 0.
double entropy(double x);

struct Rational {
    int64_t num = 0;
    int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Exact second and fourth moments of the symmetric discrete uniform law on
/// {0, +-1/k, ..., +-1}: E[U^2] = (k+1)/(3k), E[U^4] = (k+1)(3k^2+3k-1)/(15k^3).
struct DsuMoments {
    Rational m2;
    Rational m4;
};
DsuMoments dsu_moments(int64_t k);

/// Certificate that a column law keeps theta^T X away from the integer
/// lattice on every probed frequency, conditioned on every probed halfspace
/// through the mean. worst_prob is the minimum over the grid of
///   Pr[ d(theta^T X, Z) >= kappa_test * min(1, ||theta||_inf * sigma)
///       | <nu, X> <= <nu, mean> ].
struct AcCertificate {
    ColumnLaw law;
    double kappa_test = 0.0;
    double worst_prob = 1.0;
    std::vector<double> worst_theta, worst_nu;
    bool exact = false;   // exact support enumeration vs Monte Carlo
    long trials = 0;      // Monte Carlo sample count (0 when exact)
    double std_error = 0; // binomial standard error at worst_prob (MC only)
};

struct AcGridSpec {
    int theta_points_per_axis = 33; // on [-1/2, 1/2]; the zero vector is skipped
    int nu_directions = 64;
    double theta_ball_radius = 0.5; // continuous laws probe a ball instead of V
};

struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

AcCertificate ac_certify(const ColumnLaw& law, double kappa_test = 0.02,
                         const AcGridSpec& grid = {}, long trials = 200000, uint64_t seed = 1,
                         int64_t exact_budget = 10000000);

/// Low-discrepancy directions on the unit sphere in R^m.
std::vector<std::vector<double>> sphere_directions(int m, int count);

/// Monte-Carlo minimum over nu of Pr[<nu, X> >= <nu, mean>]. Every halfspace
/// through the mean of a logconcave law carries mass >= 1/e.
struct HalfspaceMassReport {
    double min_mass = 1.0;
    std::vector<double> worst_nu;
    double std_error = 0.0;
    long trials = 0;
};

HalfspaceMassReport grunbaum_check(const ColumnLaw& law, int nu_directions, long trials,
                                   uint64_t seed = 1);
HalfspaceMassReport grunbaum_check(int m, const std::function<void(Rng&, std::span<double>)>& sampler,
                                   std::span<const double> mean, int nu_directions, long trials,
                                   uint64_t seed = 1);

// Tail-bound helpers used as test oracles: for sums of {0,1} variables with
// mean mu, the lower/upper tails are exp(-eps^2 mu / 2) and exp(-eps^2 mu / 3);
// the martingale version is exp(-eps^2 mu^2 / (2n)).
double chernoff_lower_tail(double mu, double eps);
double chernoff_upper_tail(double mu, double eps);
double azuma_upper_tail(double mu, double eps, long n);

} // namespace gapforge
