#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gapforge/stats.hpp"

using namespace gapforge;

TEST_CASE("entropy endpoints and midpoint") {
    CHECK(entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(entropy(0.0) == 0.0);
    CHECK(entropy(1.0) == 0.0);
    CHECK_THROWS_AS(entropy(-0.1), StatsError);
    CHECK_THROWS_AS(entropy(1.1), StatsError);
}

TEST_CASE("binomial prefix sums obey the entropy bound") {
    for (int n = 5; n <= 30; n += 5) {
        for (double alpha : {0.1, 0.2, 0.3, 0.4, 0.5}) {
            long double sum = 0;
            long double binom = 1; // C(n, 0)
            int cap = static_cast<int>(std::floor(alpha * n));
            for (int i = 0; i <= cap; ++i) {
                sum += binom;
                binom = binom * (n - i) / (i + 1);
            }
            CHECK(static_cast<double>(sum) <= std::exp(entropy(alpha) * n) * (1 + 1e-12));
        }
    }
}

TEST_CASE("dsu moments: exact rationals") {
    DsuMoments m1 = dsu_moments(1);
    CHECK(m1.m2.num == 2);
    CHECK(m1.m2.den == 3);
    DsuMoments m3 = dsu_moments(3);
    CHECK(m3.m2.num == 4);
    CHECK(m3.m2.den == 9);
    for (int64_t k = 1; k <= 100; ++k) {
        DsuMoments m = dsu_moments(k);
        CHECK(m.m4.value() / (m.m2.value() * m.m2.value()) <= 2.0 + 1e-12);
    }
}

namespace {

// Exact moments of Z = |sum a_i X_i| over the full (2k+1)^n product of
// symmetric discrete uniforms; n is small enough to enumerate.
struct ZMoments {
    double e1 = 0, e2 = 0, e4 = 0;
};

ZMoments enumerate_z(const std::vector<double>& a, int64_t k) {
    int n = static_cast<int>(a.size());
    long per = 2 * k + 1;
    long total = 1;
    for (int i = 0; i < n; ++i) total *= per;
    ZMoments zm;
    std::vector<long> idx(n, 0);
    for (long c = 0; c < total; ++c) {
        double s = 0;
        long rem = c;
        for (int i = 0; i < n; ++i) {
            long v = rem % per;
            rem /= per;
            s += a[i] * static_cast<double>(v - k) / static_cast<double>(k);
        }
        double z = std::fabs(s);
        zm.e1 += z;
        zm.e2 += z * z;
        zm.e4 += z * z * z * z;
    }
    zm.e1 /= total;
    zm.e2 /= total;
    zm.e4 /= total;
    return zm;
}

} // namespace

TEST_CASE("khinchine comparison holds for dsu sums") {
    Rng rng(71, 0);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 4 + static_cast<int>(rng.next_below(5)); // up to 8 at k=2
        std::vector<double> a(n);
        for (double& v : a) v = rng.normal();
        ZMoments zm = enumerate_z(a, 2);
        CHECK(zm.e2 <= 3.0 * zm.e1 * zm.e1 * (1 + 1e-12));
        CHECK(std::sqrt(zm.e4 / 3.0) <= zm.e2 * (1 + 1e-12));
    }
}

TEST_CASE("ac event by direct 3-point enumeration") {
    // Entries {-1,0,1}, theta = 1/2, condition on x <= 0: the conditional law
    // is uniform on {-1,0} and only x = -1 is 1/2-far from the lattice.
    ColumnLaw law;
    law.family = ColumnLaw::Family::DiscreteInterval;
    law.m = 1;
    law.a = -1;
    law.k = 2;
    double sigma = law.sigma();
    CHECK(sigma == doctest::Approx(std::sqrt(2.0 / 3.0)));
    double threshold = 0.1 * std::min(1.0, 0.5 * sigma);
    int hits = 0, total = 0;
    for (int x = -1; x <= 0; ++x) {
        ++total;
        double d = std::fabs(0.5 * x - std::nearbyint(0.5 * x));
        if (d >= threshold) ++hits;
    }
    CHECK(static_cast<double>(hits) / total == 0.5);
    CHECK(0.5 >= 0.1 * std::min(1.0, 0.5 * sigma));
}

TEST_CASE("ac_certify: exact enumeration beats the loose default threshold") {
    ColumnLaw law;
    law.family = ColumnLaw::Family::DiscreteInterval;
    law.m = 1;
    law.a = -1;
    law.k = 2;
    AcCertificate cert = ac_certify(law, 0.02);
    CHECK(cert.exact);
    CHECK(cert.worst_prob >= 0.02);
    CHECK(cert.worst_prob <= 1.0);
}

TEST_CASE("ac_certify: exact and monte-carlo agree within 4 standard errors") {
    ColumnLaw law;
    law.family = ColumnLaw::Family::DiscreteInterval;
    law.m = 2;
    law.a = -1;
    law.k = 2;
    AcGridSpec grid;
    grid.theta_points_per_axis = 9;
    grid.nu_directions = 8;
    AcCertificate exact = ac_certify(law, 0.02, grid);
    CHECK(exact.exact);
    AcCertificate mc = ac_certify(law, 0.02, grid, 200000, 5, /*exact_budget=*/1);
    CHECK(!mc.exact);
    CHECK(std::fabs(mc.worst_prob - exact.worst_prob) <= 4.0 * std::max(mc.std_error, 1e-3));
}

TEST_CASE("grunbaum masses") {
    ColumnLaw cube;
    cube.family = ColumnLaw::Family::UniformCube;
    cube.m = 2;
    HalfspaceMassReport sym = grunbaum_check(cube, 32, 100000);
    CHECK(sym.min_mass >= 0.45); // symmetric law: every halfspace ~ 1/2

    ColumnLaw ball;
    ball.family = ColumnLaw::Family::UniformBall;
    ball.m = 2;
    HalfspaceMassReport br = grunbaum_check(ball, 32, 100000);
    CHECK(br.min_mass >= 1.0 / std::exp(1.0) - 0.02);

    // Exponential coordinates, m = 1: Pr[X >= mean] = 1/e exactly.
    auto sampler = [](Rng& rng, std::span<double> out) { out[0] = rng.exponential(); };
    std::vector<double> mean{1.0};
    HalfspaceMassReport er = grunbaum_check(1, sampler, mean, 2, 100000);
    CHECK(er.min_mass >= 1.0 / std::exp(1.0) - 0.02);
}

TEST_CASE("tail-bound helpers upper bound empirical tails") {
    const long trials = 100000;
    const int n = 100;
    const double q = 0.3;
    const double mu = n * q;
    Rng rng(99, 0);
    for (double eps : {0.2, 0.4}) {
        long below = 0, above = 0;
        Rng local(101 + static_cast<uint64_t>(eps * 10), 0);
        for (long t = 0; t < trials; ++t) {
            int s = 0;
            for (int i = 0; i < n; ++i) s += local.uniform01() < q ? 1 : 0;
            if (s <= mu * (1 - eps)) ++below;
            if (s >= mu * (1 + eps)) ++above;
        }
        double se = 3.0 / std::sqrt(static_cast<double>(trials));
        CHECK(static_cast<double>(below) / trials <= chernoff_lower_tail(mu, eps) + se);
        CHECK(static_cast<double>(above) / trials <= chernoff_upper_tail(mu, eps) + se);
        CHECK(chernoff_lower_tail(mu, eps) <= 1.0);
        CHECK(azuma_upper_tail(mu, eps, n) <= 1.0);
    }
    (void)rng;
}
