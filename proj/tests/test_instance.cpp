#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gapforge/instance.hpp"
#include "gapforge/stats.hpp"

using namespace gapforge;

TEST_CASE("dsu generator respects domain and zero rhs") {
    IpInstance inst = gen_centered_dsu(4, 1, 1, CenteredBSpec{}, 7);
    CHECK(inst.m == 1);
    CHECK(inst.n == 4);
    for (int64_t v : inst.a_num) {
        CHECK(v >= -1);
        CHECK(v <= 1);
    }
    REQUIRE(inst.b_num.size() == 1);
    CHECK(inst.b_num[0] == 0);
}

TEST_CASE("same seed reproduces the byte serialization") {
    IpInstance a = gen_centered_dsu(50, 3, 4, CenteredBSpec{}, 123);
    IpInstance b = gen_centered_dsu(50, 3, 4, CenteredBSpec{}, 123);
    CHECK(serialize_instance(a) == serialize_instance(b));
    IpInstance c = gen_centered_dsu(50, 3, 4, CenteredBSpec{}, 124);
    CHECK(serialize_instance(a) != serialize_instance(c));
}

TEST_CASE("dsu second moment matches (k+1)/(3k) and the fourth-moment ratio stays below 2") {
    const int64_t k = 3;
    const long draws = 1000000;
    double sum2 = 0.0, sum4 = 0.0;
    Rng rng(42, 0);
    for (long i = 0; i < draws; ++i) {
        double u = static_cast<double>(rng.uniform_int(-k, k)) / k;
        sum2 += u * u;
        sum4 += u * u * u * u;
    }
    double m2 = sum2 / draws, m4 = sum4 / draws;
    DsuMoments exact = dsu_moments(k);
    // 3 sigma Monte-Carlo window on the second moment.
    double var_u2 = exact.m4.value() - exact.m2.value() * exact.m2.value();
    double window = 3.0 * std::sqrt(var_u2 / draws);
    CHECK(std::fabs(m2 - exact.m2.value()) <= window);
    CHECK(m4 / (m2 * m2) <= 2.0 + 0.01);
}

TEST_CASE("packing generator: mid rule, exponential objective, entry domain") {
    IpInstance inst = gen_packing(100, 2, 3, 0.1, PackingBSpec{}, 5);
    REQUIRE(inst.b_num.size() == 2);
    CHECK(inst.b_num[0] == 75);
    CHECK(inst.b_num[1] == 75);
    for (int64_t v : inst.a_num) {
        CHECK(v >= 1);
        CHECK(v <= 3);
    }
    double mean = 0.0;
    const long draws = 1000000;
    Rng rng(9, 0);
    for (long i = 0; i < draws; ++i) mean += rng.exponential();
    mean /= draws;
    CHECK(std::fabs(mean - 1.0) <= 0.01);
}

TEST_CASE("packing rejects an empty rhs window") {
    CHECK_THROWS_AS(gen_packing(1, 1, 3, 0.24, PackingBSpec{}, 1), InstanceError);
    CHECK_THROWS_AS(gen_packing(10, 1, 2, 0.1, PackingBSpec{}, 1), InstanceError); // k < 3
    PackingBSpec bad;
    bad.b_num = {1000000};
    CHECK_THROWS_AS(gen_packing(100, 1, 3, 0.1, bad, 1), InstanceError);
}

TEST_CASE("uniform cube columns have unit per-coordinate variance") {
    ColumnLaw law;
    law.family = ColumnLaw::Family::UniformCube;
    law.m = 2;
    const long draws = 100000;
    double var0 = 0.0;
    std::vector<double> x(2);
    Rng rng(11, 0);
    for (long i = 0; i < draws; ++i) {
        law.sample(rng, x);
        var0 += x[0] * x[0];
    }
    var0 /= draws;
    CHECK(std::fabs(var0 - 1.0) <= 0.02);
}

TEST_CASE("truncated gaussian respects the support radius") {
    IpInstance inst =
        gen_centered_logconcave(500, 3, LogconcaveFamily::TruncatedGaussian, std::nullopt, 3, 6.0);
    CHECK(inst.radius == 6.0);
    for (int j = 0; j < inst.n; ++j) {
        double norm2 = 0.0;
        for (int i = 0; i < inst.m; ++i) norm2 += inst.a(i, j) * inst.a(i, j);
        CHECK(norm2 <= 36.0 + 1e-12);
    }
}

TEST_CASE("uniform ball is centered") {
    ColumnLaw law;
    law.family = ColumnLaw::Family::UniformBall;
    law.m = 2;
    const long draws = 1000000;
    double s0 = 0.0, s1 = 0.0;
    std::vector<double> x(2);
    Rng rng(13, 0);
    for (long i = 0; i < draws; ++i) {
        law.sample(rng, x);
        s0 += x[0];
        s1 += x[1];
    }
    double norm = std::hypot(s0 / draws, s1 / draws);
    CHECK(norm <= 0.01);
}

TEST_CASE("logconcave columns are isotropic to 0.05 in operator norm") {
    for (auto fam : {LogconcaveFamily::UniformCube, LogconcaveFamily::UniformBall,
                     LogconcaveFamily::TruncatedGaussian}) {
        IpInstance inst = gen_centered_logconcave(100000, 2, fam, std::nullopt, 17, 6.0);
        double c00 = 0, c01 = 0, c11 = 0;
        for (int j = 0; j < inst.n; ++j) {
            double a0 = inst.a(0, j), a1 = inst.a(1, j);
            c00 += a0 * a0;
            c01 += a0 * a1;
            c11 += a1 * a1;
        }
        c00 /= inst.n;
        c01 /= inst.n;
        c11 /= inst.n;
        // Operator-norm distance of a symmetric 2x2 matrix from identity.
        double tr = (c00 - 1.0) + (c11 - 1.0);
        double det = (c00 - 1.0) * (c11 - 1.0) - c01 * c01;
        double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
        double op = std::max(std::fabs(tr / 2.0 + disc), std::fabs(tr / 2.0 - disc));
        CHECK(op <= 0.05);
    }
}

TEST_CASE("save/load round trip is exact for all models") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "gapforge_test_io";
    fs::create_directories(dir);

    IpInstance dsu = gen_centered_dsu(40, 2, 5, CenteredBSpec{}, 77);
    IpInstance pack = gen_packing(40, 3, 4, 0.12, PackingBSpec{}, 78);
    IpInstance lc =
        gen_centered_logconcave(40, 2, LogconcaveFamily::TruncatedGaussian, std::nullopt, 79, 5.5);
    for (const IpInstance* inst : {&dsu, &pack, &lc}) {
        std::string path = (dir / ("t" + std::to_string(inst->seed) + ".ip")).string();
        save_instance(*inst, path);
        IpInstance back = load_instance(path);
        CHECK(serialize_instance(*inst) == serialize_instance(back));
        CHECK(back.model == inst->model);
        CHECK(back.seed == inst->seed);
    }
    CHECK(lc.radius == 5.5);
}

TEST_CASE("load rejects malformed files") {
    IpInstance inst = gen_centered_dsu(4, 2, 2, CenteredBSpec{}, 1);
    std::string good = serialize_instance(inst);

    CHECK_THROWS_AS(parse_instance("not-a-header\n"), InstanceError);

    // Drop one matrix entry: dimension mismatch.
    std::string truncated = good.substr(0, good.rfind(' '));
    CHECK_THROWS_AS(parse_instance(truncated), InstanceError);

    // Entry outside {-k,...,k}.
    std::string dcopy = good;
    size_t hdr_end = dcopy.find('\n', dcopy.find('\n') + 1);
    size_t pos = dcopy.find_first_not_of(" \n", hdr_end);
    dcopy.replace(pos, dcopy.find_first_of(" \n", pos) - pos, "9");
    CHECK_THROWS_AS(parse_instance(dcopy), InstanceError);
}

TEST_CASE("column streams are order independent") {
    IpInstance inst = gen_centered_dsu(20, 2, 3, CenteredBSpec{}, 55);
    // Reproduce column 17 in isolation.
    Rng rng(55, 17);
    for (int i = 0; i < 2; ++i) CHECK(inst.a_entry_num(i, 17) == rng.uniform_int(-3, 3));
    CHECK(inst.c[17] == doctest::Approx(rng.normal()).epsilon(1e-15));
}
