#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "gapforge/instance.hpp"
#include "gapforge/simplex.hpp"

using namespace gapforge;

namespace {

IpInstance make_manual(int m, int n, std::vector<int64_t> a, std::vector<int64_t> b,
                       std::vector<double> c, int64_t k = 1) {
    IpInstance inst;
    inst.model = Model::CenteredDsu;
    inst.m = m;
    inst.n = n;
    inst.k = k;
    inst.a_num = std::move(a);
    inst.b_num = std::move(b);
    inst.c = std::move(c);
    return inst;
}

// Complete vertex enumeration for n <= 10, m <= 2 box LPs.
double oracle_lp_value(const IpInstance& inst, bool* feasible) {
    const int n = inst.n, m = inst.m;
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    std::vector<double> x(n);

    auto consider = [&]() {
        for (int j = 0; j < n; ++j)
            if (x[j] < -1e-9 || x[j] > 1 + 1e-9) return;
        for (int i = 0; i < m; ++i) {
            double ax = 0;
            for (int j = 0; j < n; ++j) ax += inst.a(i, j) * x[j];
            if (ax > inst.b(i) + 1e-9) return;
        }
        found = true;
        double v = 0;
        for (int j = 0; j < n; ++j) v += inst.c[j] * x[j];
        best = std::max(best, v);
    };

    std::vector<int> fsel;
    std::function<void(int)> rec_free = [&](int start) {
        // Fix the complement to all bound patterns, solve active rows.
        int f = static_cast<int>(fsel.size());
        std::vector<int> rest;
        for (int j = 0; j < n; ++j)
            if (std::find(fsel.begin(), fsel.end(), j) == fsel.end()) rest.push_back(j);
        std::vector<int> rows(f);
        std::function<void(int, int)> rec_rows = [&](int rstart, int depth) {
            if (depth == f) {
                for (uint64_t pat = 0; pat < (uint64_t(1) << rest.size()); ++pat) {
                    for (size_t t = 0; t < rest.size(); ++t) x[rest[t]] = (pat >> t) & 1;
                    if (f == 0) {
                        consider();
                        continue;
                    }
                    double M[2][2]{}, rhs[2]{};
                    for (int r = 0; r < f; ++r) {
                        rhs[r] = inst.b(rows[r]);
                        for (int t : rest) rhs[r] -= inst.a(rows[r], t) * x[t];
                        for (int cidx = 0; cidx < f; ++cidx) M[r][cidx] = inst.a(rows[r], fsel[cidx]);
                    }
                    if (f == 1) {
                        if (std::fabs(M[0][0]) < 1e-12) continue;
                        x[fsel[0]] = rhs[0] / M[0][0];
                    } else {
                        double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
                        if (std::fabs(det) < 1e-12) continue;
                        x[fsel[0]] = (rhs[0] * M[1][1] - M[0][1] * rhs[1]) / det;
                        x[fsel[1]] = (M[0][0] * rhs[1] - rhs[0] * M[1][0]) / det;
                    }
                    consider();
                }
                return;
            }
            for (int r = rstart; r < m; ++r) {
                rows[depth] = r;
                rec_rows(r + 1, depth + 1);
            }
        };
        rec_rows(0, 0);
        if (static_cast<int>(fsel.size()) < std::min(m, n)) {
            for (int j = start; j < n; ++j) {
                fsel.push_back(j);
                rec_free(j + 1);
                fsel.pop_back();
            }
        }
    };
    rec_free(0);
    if (feasible) *feasible = found;
    return best;
}

} // namespace

TEST_CASE("two-variable example solves to the known vertex") {
    IpInstance inst = make_manual(1, 2, {1, 1}, {1}, {2.0, 1.0});
    LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
    bool feas;
    CHECK(oracle_lp_value(inst, &feas) == doctest::Approx(2.0));
}

TEST_CASE("nonpositive objective solves to zero") {
    IpInstance inst = make_manual(1, 3, {1, -1, 1}, {2}, {-1.0, -0.5, 0.0});
    LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == doctest::Approx(0.0));
    for (double v : sol.u) CHECK(v == doctest::Approx(0.0));
    PropsReport rep = check_solution_props(sol, inst);
    CHECK(rep.n0_frac >= 2.0 / 3.0); // x2 has c = 0 and may sit anywhere
}

TEST_CASE("random instances match vertex enumeration") {
    int checked = 0;
    for (int t = 0; t < 120; ++t) {
        Rng prng(5000 + t, 0);
        int m = 1 + static_cast<int>(prng.next_below(2));
        int n = 3 + static_cast<int>(prng.next_below(4)); // up to 6
        std::vector<int64_t> b(m);
        for (auto& v : b) v = prng.uniform_int(-2, 5);
        CenteredBSpec spec;
        spec.b_num = b;
        IpInstance inst = gen_centered_dsu(n, m, 2, spec, 5000 + t);
        bool feasible;
        double oracle = oracle_lp_value(inst, &feasible);
        LpSolution sol = solve_lp(inst);
        if (!feasible) {
            CHECK(sol.status == LpStatus::Infeasible);
            continue;
        }
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.value == doctest::Approx(oracle).epsilon(1e-9));
        ++checked;
    }
    CHECK(checked >= 80);
}

TEST_CASE("phase one finds feasibility with negative rhs") {
    // x = (1,0) satisfies -x1 + x2 <= -1; x = 0 does not.
    IpInstance inst = make_manual(1, 2, {-1, 1}, {-1}, {0.1, 1.0});
    LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);
    // Optimum: x2 as large as the constraint allows given x1 = 1.
    CHECK(sol.value == doctest::Approx(0.1));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
}

TEST_CASE("detects infeasibility") {
    IpInstance inst = make_manual(1, 2, {1, 1}, {-3}, {1.0, 1.0});
    LpSolution sol = solve_lp(inst);
    CHECK(sol.status == LpStatus::Infeasible);
}

TEST_CASE("dual value formula and weak duality") {
    IpInstance inst = gen_centered_dsu(30, 3, 3, CenteredBSpec{}, 9001);
    // u = 0: sum of positive objective parts.
    std::vector<double> zero(3, 0.0);
    double expect = 0;
    for (double v : inst.c) expect += std::max(v, 0.0);
    CHECK(dual_value(zero, inst) == doctest::Approx(expect).epsilon(1e-12));

    // c = 0, u = e1: b_1 + ||(-A row 1)^+||_1.
    IpInstance zc = inst;
    std::fill(zc.c.begin(), zc.c.end(), 0.0);
    std::vector<double> e1{1.0, 0.0, 0.0};
    double row_neg = 0;
    for (int j = 0; j < zc.n; ++j) row_neg += std::max(-zc.a(0, j), 0.0);
    CHECK(dual_value(e1, zc) == doctest::Approx(zc.b(0) + row_neg).epsilon(1e-12));

    CHECK_THROWS_AS(dual_value(std::vector<double>{-1.0, 0.0, 0.0}, inst), SimplexError);

    // Weak duality across random primal/dual pairs.
    LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);
    Rng rng(2024, 0);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> x(inst.n), u(inst.m);
        for (auto& v : x) v = rng.uniform01();
        for (auto& v : u) v = rng.uniform01() * 2.0;
        bool feasible = true;
        for (int i = 0; i < inst.m && feasible; ++i) {
            double ax = 0;
            for (int j = 0; j < inst.n; ++j) ax += inst.a(i, j) * x[j];
            if (ax > inst.b(i)) feasible = false;
        }
        if (!feasible) continue;
        double cx = 0;
        for (int j = 0; j < inst.n; ++j) cx += inst.c[j] * x[j];
        CHECK(dual_value(u, inst) >= cx - 1e-9);
    }
}

TEST_CASE("gap formula is the algebraic identity") {
    IpInstance inst = gen_centered_dsu(25, 2, 3, CenteredBSpec{}, 31337);
    LpSolution sol = solve_lp(inst);
    REQUIRE(sol.status == LpStatus::Optimal);

    GapBreakdown at_opt = gap_formula(sol.x, sol.u, inst);
    CHECK(std::fabs(at_opt.total) <= kLpDualityTol);

    std::vector<double> zero_x(inst.n, 0.0), zero_u(inst.m, 0.0);
    GapBreakdown zz = gap_formula(zero_x, zero_u, inst);
    double cpos = 0;
    for (double v : inst.c) cpos += std::max(v, 0.0);
    CHECK(zz.total == doctest::Approx(cpos).epsilon(1e-12));
    CHECK(zz.slack_term == doctest::Approx(0.0));

    Rng rng(5150, 0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x(inst.n), u(inst.m);
        for (auto& v : x) v = rng.uniform01();
        for (auto& v : u) v = rng.uniform01();
        GapBreakdown g = gap_formula(x, u, inst);
        double cx = 0;
        for (int j = 0; j < inst.n; ++j) cx += inst.c[j] * x[j];
        CHECK(g.total == doctest::Approx(dual_value(u, inst) - cx).epsilon(1e-9));
    }
}

TEST_CASE("basic structure and determinism on a mixed corpus") {
    long pivots = 0;
    for (int t = 0; t < 120; ++t) {
        Rng prng(600 + t, 0);
        int m = 1 + static_cast<int>(prng.next_below(5));
        int n = 10 + static_cast<int>(prng.next_below(120));
        IpInstance inst = t % 3 == 0 ? gen_packing(n, m, 3, 0.1, PackingBSpec{}, 600 + t)
                                     : gen_centered_dsu(n, m, 3, CenteredBSpec{}, 600 + t);
        LpSolution a = solve_lp(inst);
        REQUIRE(a.status == LpStatus::Optimal);
        CHECK(static_cast<int>(a.frac_idx.size()) <= m);
        CHECK(a.frac_idx.size() + a.n0.size() + a.n1.size() == static_cast<size_t>(n));
        LpSolution b = solve_lp(inst);
        CHECK(a.pivots == b.pivots);
        CHECK(a.basis == b.basis);
        CHECK(a.value == b.value); // bitwise: same pivot path
        pivots += a.pivots;
        double dv = dual_value(a.u, inst);
        CHECK(std::fabs(dv - a.value) <= kLpDualityTol * std::max(1.0, std::fabs(a.value)));
    }
    CHECK(pivots > 0);
}

TEST_CASE("degenerate instances terminate") {
    // Duplicated rows and columns with b = 0 stall Dantzig; Bland must exit.
    // Optimum fills x1..x4 (the -1 columns buy room for the +1 ones).
    IpInstance inst = make_manual(2, 6, {1, 1, -1, -1, 1, 1, 1, 1, -1, -1, 1, 1}, {0, 0},
                                  {1.0, 1.0, 0.5, 0.5, 0.25, 0.25});
    LpSolution sol = solve_lp(inst);
    CHECK(sol.status == LpStatus::Optimal);
    CHECK(sol.value == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("warm starts and bound overrides agree with cold solves") {
    IpInstance inst = gen_centered_dsu(60, 2, 3, CenteredBSpec{}, 4242);
    LpSolution root = solve_lp(inst);
    REQUIRE(root.status == LpStatus::Optimal);
    LpOverrides ov;
    ov.lo.assign(inst.n, 0.0);
    ov.hi.assign(inst.n, 1.0);
    ov.lo[3] = ov.hi[3] = 1.0; // fix x3 = 1
    ov.warm = &root;
    LpSolution warm = solve_lp(inst, ov);
    LpOverrides cold = ov;
    cold.warm = nullptr;
    LpSolution coldsol = solve_lp(inst, cold);
    if (warm.status == LpStatus::Optimal && coldsol.status == LpStatus::Optimal)
        CHECK(warm.value == doctest::Approx(coldsol.value).epsilon(1e-9));
}
