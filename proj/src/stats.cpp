#include "gapforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gapforge {

double entropy(double x) {
    if (x < 0.0 || x > 1.0) throw StatsError("entropy: argument outside [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

namespace {

Rational reduced(int64_t num, int64_t den) {
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g == 0) g = 1;
    return {num / g, den / g};
}

double dist_to_int(double v) {
    double r = v - std::nearbyint(v);
    return std::fabs(r);
}

} // namespace

DsuMoments dsu_moments(int64_t k) {
    if (k < 1) throw StatsError("dsu_moments: k must be >= 1");
    DsuMoments out;
    out.m2 = reduced(k + 1, 3 * k);
    out.m4 = reduced((k + 1) * (3 * k * k + 3 * k - 1), 15 * k * k * k);
    return out;
}

std::vector<std::vector<double>> sphere_directions(int m, int count) {
    std::vector<std::vector<double>> dirs;
    dirs.reserve(count);
    if (m == 1) {
        dirs.push_back({1.0});
        if (count > 1) dirs.push_back({-1.0});
        return dirs;
    }
    if (m == 2) {
        for (int i = 0; i < count; ++i) {
            double a = 2.0 * M_PI * i / count;
            dirs.push_back({std::cos(a), std::sin(a)});
        }
        return dirs;
    }
    // Deterministic low-discrepancy points: golden-angle spiral in the first
    // two coordinates, stratified additive recurrences in the rest.
    const double golden = 0.6180339887498949;
    for (int i = 0; i < count; ++i) {
        std::vector<double> v(m);
        double phi = 2.0 * M_PI * std::fmod(golden * i, 1.0);
        double z = -1.0 + 2.0 * (i + 0.5) / count;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        v[0] = r * std::cos(phi);
        v[1] = r * std::sin(phi);
        v[2] = z;
        for (int d = 3; d < m; ++d)
            v[d] = std::cos(2.0 * M_PI * std::fmod((d + 1) * golden * (i + 1), 1.0));
        double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (double& x : v) x /= norm;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

namespace {

// Theta grid over [-1/2,1/2]^m (or a ball for continuous laws), skipping the
// zero vector: the distance threshold vanishes there and the event is vacuous.
std::vector<std::vector<double>> theta_grid(int m, const AcGridSpec& spec, bool discrete) {
    std::vector<double> axis;
    int g = std::max(spec.theta_points_per_axis, 2);
    double half = discrete ? 0.5 : spec.theta_ball_radius;
    for (int i = 0; i < g; ++i) axis.push_back(-half + 2.0 * half * i / (g - 1));
    std::vector<std::vector<double>> grid;
    std::vector<int> idx(m, 0);
    for (;;) {
        std::vector<double> t(m);
        double norm_inf = 0.0;
        for (int d = 0; d < m; ++d) {
            t[d] = axis[idx[d]];
            norm_inf = std::max(norm_inf, std::fabs(t[d]));
        }
        if (norm_inf > 1e-15) grid.push_back(t);
        int d = 0;
        while (d < m && ++idx[d] == g) idx[d++] = 0;
        if (d == m) break;
    }
    return grid;
}

struct WeightedPoint {
    std::vector<double> x;
    double p;
};

std::vector<WeightedPoint> enumerate_support(const ColumnLaw& law) {
    std::vector<double> per = law.coordinate_support();
    double pp = 1.0 / per.size();
    std::vector<WeightedPoint> pts;
    std::vector<int> idx(law.m, 0);
    for (;;) {
        WeightedPoint w;
        w.x.resize(law.m);
        w.p = 1.0;
        for (int d = 0; d < law.m; ++d) {
            w.x[d] = per[idx[d]];
            w.p *= pp;
        }
        pts.push_back(std::move(w));
        int d = 0;
        while (d < law.m && ++idx[d] == static_cast<int>(per.size())) idx[d++] = 0;
        if (d == law.m) break;
    }
    return pts;
}

} // namespace

AcCertificate ac_certify(const ColumnLaw& law, double kappa_test, const AcGridSpec& grid,
                         long trials, uint64_t seed, int64_t exact_budget) {
    AcCertificate cert;
    cert.law = law;
    cert.kappa_test = kappa_test;
    double sigma = law.sigma();
    std::vector<double> mu = law.mean();
    auto thetas = theta_grid(law.m, grid, law.finite_support());
    auto nus = sphere_directions(law.m, grid.nu_directions);

    bool exact = law.finite_support() && law.support_size() <= exact_budget;
    cert.exact = exact;

    std::vector<WeightedPoint> pts;
    if (exact) {
        pts = enumerate_support(law);
    } else {
        if (trials <= 0) throw StatsError("ac_certify: Monte Carlo requires trials > 0");
        Rng rng(seed, 0);
        pts.resize(trials);
        for (auto& w : pts) {
            w.x.resize(law.m);
            law.sample(rng, w.x);
            w.p = 1.0 / trials;
        }
        cert.trials = trials;
    }

    cert.worst_prob = 1.0;
    for (const auto& nu : nus) {
        double nu_mu = std::inner_product(nu.begin(), nu.end(), mu.begin(), 0.0);
        // Conditioning mask for this halfspace.
        std::vector<const WeightedPoint*> cond;
        double mass = 0.0;
        for (const auto& w : pts) {
            double d = std::inner_product(nu.begin(), nu.end(), w.x.begin(), 0.0);
            if (d <= nu_mu + 1e-12) {
                cond.push_back(&w);
                mass += w.p;
            }
        }
        if (mass <= 0.0) continue;
        for (const auto& theta : thetas) {
            double norm_inf = 0.0;
            for (double v : theta) norm_inf = std::max(norm_inf, std::fabs(v));
            double threshold = kappa_test * std::min(1.0, norm_inf * sigma);
            double hit = 0.0;
            for (const auto* w : cond) {
                double tx = std::inner_product(theta.begin(), theta.end(), w->x.begin(), 0.0);
                if (dist_to_int(tx) >= threshold) hit += w->p;
            }
            double prob = hit / mass;
            if (prob < cert.worst_prob) {
                cert.worst_prob = prob;
                cert.worst_theta = theta;
                cert.worst_nu = nu;
            }
        }
    }
    if (!exact)
        cert.std_error =
            std::sqrt(std::max(cert.worst_prob * (1.0 - cert.worst_prob), 1e-12) / trials);
    return cert;
}

HalfspaceMassReport grunbaum_check(const ColumnLaw& law, int nu_directions, long trials,
                                   uint64_t seed) {
    auto mu = law.mean();
    return grunbaum_check(
        law.m, [&law](Rng& rng, std::span<double> out) { law.sample(rng, out); }, mu,
        nu_directions, trials, seed);
}

HalfspaceMassReport grunbaum_check(int m, const std::function<void(Rng&, std::span<double>)>& sampler,
                                   std::span<const double> mean, int nu_directions, long trials,
                                   uint64_t seed) {
    auto nus = sphere_directions(m, nu_directions);
    std::vector<long> above(nus.size(), 0);
    Rng rng(seed, 0);
    std::vector<double> x(m);
    for (long t = 0; t < trials; ++t) {
        sampler(rng, x);
        for (size_t i = 0; i < nus.size(); ++i) {
            double d = 0.0, dm = 0.0;
            for (int dd = 0; dd < m; ++dd) {
                d += nus[i][dd] * x[dd];
                dm += nus[i][dd] * mean[dd];
            }
            if (d >= dm - 1e-12) ++above[i];
        }
    }
    HalfspaceMassReport rep;
    rep.trials = trials;
    rep.min_mass = 1.0;
    for (size_t i = 0; i < nus.size(); ++i) {
        double p = static_cast<double>(above[i]) / trials;
        if (p < rep.min_mass) {
            rep.min_mass = p;
            rep.worst_nu = nus[i];
        }
    }
    rep.std_error = std::sqrt(std::max(rep.min_mass * (1.0 - rep.min_mass), 1e-12) / trials);
    return rep;
}

double chernoff_lower_tail(double mu, double eps) { return std::exp(-eps * eps * mu / 2.0); }
double chernoff_upper_tail(double mu, double eps) { return std::exp(-eps * eps * mu / 3.0); }
double azuma_upper_tail(double mu, double eps, long n) {
    return std::exp(-eps * eps * mu * mu / (2.0 * n));
}

} // namespace gapforge
