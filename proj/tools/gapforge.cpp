#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gapforge/bnb.hpp"
#include "gapforge/discrepancy.hpp"
#include "gapforge/instance.hpp"
#include "gapforge/rounding.hpp"
#include "gapforge/simplex.hpp"
#include "gapforge/sweep.hpp"
#include "gapforge/verify.hpp"

using namespace gapforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

std::vector<int64_t> read_b_file_num(const std::string& path, int m, int64_t k) {
    std::ifstream f(path);
    if (!f) throw InstanceError("cannot open b file: " + path);
    std::vector<int64_t> out;
    double v;
    while (f >> v) {
        double scaled = v * static_cast<double>(k);
        int64_t num = std::llround(scaled);
        if (std::fabs(scaled - static_cast<double>(num)) > 1e-9)
            throw InstanceError("b entry " + std::to_string(v) + " is not integral over k");
        out.push_back(num);
    }
    if (static_cast<int>(out.size()) != m) throw InstanceError("b file has wrong dimension");
    return out;
}

struct GenArgs {
    std::string model = "dsu";
    std::string family = "cube";
    int m = 2, n = 100;
    int64_t k = 3;
    double beta = 0.1;
    double radius = 0.0;
    std::string b = "default";
    uint64_t seed = 0;
    std::string out = "instance.ip";
};

IpInstance generate(const GenArgs& a) {
    if (a.model == "dsu") {
        CenteredBSpec spec;
        if (a.b != "default" && a.b != "zero") spec.b_num = read_b_file_num(a.b, a.m, a.k);
        return gen_centered_dsu(a.n, a.m, a.k, spec, a.seed);
    }
    if (a.model == "packing") {
        PackingBSpec spec;
        if (a.b != "default" && a.b != "mid") spec.b_num = read_b_file_num(a.b, a.m, a.k);
        return gen_packing(a.n, a.m, a.k, a.beta, spec, a.seed);
    }
    if (a.model == "logconcave") {
        LogconcaveFamily fam = LogconcaveFamily::UniformCube;
        if (a.family == "ball") fam = LogconcaveFamily::UniformBall;
        else if (a.family == "tgauss") fam = LogconcaveFamily::TruncatedGaussian;
        else if (a.family != "cube") throw InstanceError("unknown family: " + a.family);
        std::optional<std::vector<double>> b;
        if (a.b != "default" && a.b != "zero") {
            std::ifstream f(a.b);
            if (!f) throw InstanceError("cannot open b file: " + a.b);
            std::vector<double> vals;
            double v;
            while (f >> v) vals.push_back(v);
            b = vals;
        }
        return gen_centered_logconcave(a.n, a.m, fam, b, a.seed, a.radius);
    }
    throw InstanceError("unknown model: " + a.model);
}

void print_solution(const IpInstance& inst, const LpSolution& sol) {
    std::printf("status      optimal\n");
    std::printf("value       %.17g\n", sol.value);
    std::printf("pivots      %ld\n", sol.pivots);
    PropsReport props = check_solution_props(sol, inst);
    std::printf("u_norm2     %.17g\n", props.u_norm2);
    std::printf("u_norm1     %.17g\n", props.u_norm1);
    std::printf("n0          %zu (frac %.6f of n)\n", sol.n0.size(), props.n0_frac);
    std::printf("n1          %zu\n", sol.n1.size());
    std::printf("fractional  %zu (<= m = %d)\n", sol.frac_idx.size(), inst.m);
    std::printf("props       u_norm %s, n0 %s\n", props.u_norm_ok ? "ok" : "FAIL",
                props.n0_ok ? "ok" : "FAIL");
}

IntCols cols_from_instance(const IpInstance& inst, int col_lo, int col_hi) {
    if (!inst.discrete()) throw InstanceError("disc: integer queries need a discrete instance");
    col_hi = std::min(col_hi, inst.n);
    if (col_lo < 0 || col_lo >= col_hi) throw InstanceError("disc: bad column range");
    IntCols cols;
    cols.m = inst.m;
    cols.nbar = col_hi - col_lo;
    cols.denom = inst.k;
    cols.w.resize(static_cast<size_t>(cols.m) * cols.nbar);
    for (int j = col_lo; j < col_hi; ++j)
        for (int i = 0; i < inst.m; ++i) cols.entry(i, j - col_lo) = inst.a_entry_num(i, j);
    return cols;
}

std::vector<int64_t> parse_int_vector(const std::string& text) {
    std::istringstream in(text);
    std::vector<int64_t> out;
    int64_t v;
    while (in >> v) out.push_back(v);
    return out;
}

std::vector<double> parse_real_vector(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gapforge: random integer programs, LP duals, discrepancy repair, branch and bound"};
    app.require_subcommand(1);

    // gen ---------------------------------------------------------------
    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate a random instance file");
    gen->add_option("--model", gen_args.model)->check(CLI::IsMember({"dsu", "logconcave", "packing"}));
    gen->add_option("--family", gen_args.family)->check(CLI::IsMember({"cube", "ball", "tgauss"}));
    gen->add_option("--m", gen_args.m);
    gen->add_option("--n", gen_args.n);
    gen->add_option("--k", gen_args.k);
    gen->add_option("--beta", gen_args.beta);
    gen->add_option("--radius", gen_args.radius);
    gen->add_option("--b", gen_args.b, "zero | mid | <path to b file>");
    gen->add_option("--seed", gen_args.seed);
    gen->add_option("-o,--out", gen_args.out);

    // solve ---------------------------------------------------------------
    std::string solve_file;
    CLI::App* solve = app.add_subcommand("solve", "solve the LP relaxation and report duals");
    solve->add_option("file", solve_file)->required();

    // gap ---------------------------------------------------------------
    std::string gap_file, gap_mode = "filter", gap_out;
    double gap_delta = 0, gap_p = 0, gap_gamma = -1, gap_tol = 1e-3;
    int gap_budget = 200;
    bool gap_exact = false;
    uint64_t gap_seed = 0;
    CLI::App* gap = app.add_subcommand("gap", "run the rounding pipeline, append a CSV row");
    gap->add_option("file", gap_file)->required();
    gap->add_option("--mode", gap_mode)->check(CLI::IsMember({"filter", "faithful"}));
    gap->add_option("--delta-c", gap_delta, "reduced-cost ceiling override");
    gap->add_option("--p", gap_p);
    gap->add_option("--gamma-c", gap_gamma);
    gap->add_option("--tol", gap_tol);
    gap->add_option("--budget", gap_budget);
    gap->add_option("--seed", gap_seed, "pipeline randomness seed");
    gap->add_flag("--exact-ipgap", gap_exact, "also brute-force IPGAP (n <= 30)");
    gap->add_option("-o,--out", gap_out, "CSV to append to");

    // bnb ---------------------------------------------------------------
    std::string bnb_file;
    long bnb_node_limit = 2000000;
    CLI::App* bnb = app.add_subcommand("bnb", "best-bound branch and bound plus the tree-size bound");
    bnb->add_option("file", bnb_file)->required();
    bnb->add_option("--node-limit", bnb_node_limit);

    // disc ---------------------------------------------------------------
    std::string disc_op = "pmf", disc_file, disc_target, disc_theta, disc_band;
    double disc_p = 0.3, disc_tol = 1e-3;
    int disc_cols_lo = 0, disc_cols_hi = 16, disc_grid = 0, disc_budget = 200;
    uint64_t disc_seed = 0;
    CLI::App* disc = app.add_subcommand("disc", "ad-hoc discrepancy queries on instance columns");
    disc->add_option("--op", disc_op)->check(CLI::IsMember({"pmf", "fourier", "charfn", "hit", "hit-approx"}));
    disc->add_option("file", disc_file)->required();
    disc->add_option("--cols-lo", disc_cols_lo);
    disc->add_option("--cols-hi", disc_cols_hi);
    disc->add_option("--p", disc_p);
    disc->add_option("--target", disc_target, "space-separated target vector (numerators)");
    disc->add_option("--theta", disc_theta, "space-separated frequency vector");
    disc->add_option("--band", disc_band, "cardinality band lo:hi");
    disc->add_option("--grid", disc_grid);
    disc->add_option("--tol", disc_tol);
    disc->add_option("--budget", disc_budget);
    disc->add_option("--seed", disc_seed);

    // verify ---------------------------------------------------------------
    std::string verify_suite = "all";
    CLI::App* verify = app.add_subcommand("verify", "run the invariant suites; nonzero exit on failure");
    verify->add_option("--suite", verify_suite);

    // sweep ---------------------------------------------------------------
    std::string sweep_config_path;
    int sweep_jobs = 0;
    bool sweep_tree = false;
    CLI::App* sweep = app.add_subcommand("sweep", "run a (n x seed) sweep from a JSON config");
    sweep->add_option("--config", sweep_config_path)->required();
    sweep->add_option("--jobs", sweep_jobs, "override config parallelism");
    sweep->add_flag("--tree", sweep_tree, "tree-size sweep instead of gap sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            IpInstance inst = generate(gen_args);
            save_instance(inst, gen_args.out);
            std::printf("wrote %s (%s m=%d n=%d)\n", gen_args.out.c_str(),
                        model_tag(inst.model).c_str(), inst.m, inst.n);
            return kExitOk;
        }
        if (*solve) {
            IpInstance inst = load_instance(solve_file);
            LpSolution sol = solve_lp(inst);
            if (sol.status == LpStatus::Infeasible) {
                std::printf("status      infeasible\n");
                return kExitOk;
            }
            if (sol.status == LpStatus::IterationLimit) {
                std::printf("status      iteration-limit\n");
                return kExitBudget;
            }
            print_solution(inst, sol);
            return kExitOk;
        }
        if (*gap) {
            IpInstance inst = load_instance(gap_file);
            SelectionConfig sel;
            sel.mode = gap_mode == "faithful" ? SelectionMode::AnalysisFaithful
                                              : SelectionMode::PracticalFilter;
            sel.delta = gap_delta;
            sel.p = gap_p;
            sel.gamma = gap_gamma;
            sel.approx_tol = gap_tol;
            sel.approx_budget = gap_budget;
            MeasureOptions mopts;
            mopts.exact_ipgap = gap_exact;
            GapReport rep = measure_gap(inst, sel, gap_seed, mopts);
            std::printf("val_lp    %.17g\n", rep.val_lp);
            std::printf("gap_upper %.17g\n", rep.gap_upper);
            std::printf("feasible  %s\n", rep.feasible ? "yes" : "no");
            std::printf("|Z|=%d |T|=%d residual=%.3g\n", rep.z_size, rep.t_size, rep.residual);
            if (rep.ipgap_exact) std::printf("ipgap_exact %.17g\n", *rep.ipgap_exact);
            if (!rep.error.empty()) std::printf("error     %s\n", rep.error.c_str());
            if (!gap_out.empty()) {
                SweepConfig cfg;
                cfg.model = rep.model;
                cfg.m = rep.m;
                cfg.k = rep.k;
                cfg.beta = rep.beta;
                cfg.mode = gap_mode;
                cfg.delta = gap_delta;
                cfg.p = gap_p;
                cfg.gamma = gap_gamma;
                cfg.tol = gap_tol;
                cfg.budget = gap_budget;
                bool fresh = !std::filesystem::exists(gap_out);
                std::ofstream f(gap_out, std::ios::app | std::ios::binary);
                if (!f) throw InstanceError("cannot open for append: " + gap_out);
                std::string text = gap_csv_text(cfg, {rep});
                if (!fresh) {
                    // Strip the version + header lines when appending.
                    size_t p1 = text.find('\n');
                    size_t p2 = text.find('\n', p1 + 1);
                    text = text.substr(p2 + 1);
                }
                f << text;
            }
            return rep.error.empty() ? kExitOk : kExitBudget;
        }
        if (*bnb) {
            IpInstance inst = load_instance(bnb_file);
            LpSolution sol = solve_lp(inst);
            if (sol.status != LpStatus::Optimal) {
                std::printf("lp status not optimal\n");
                return kExitBudget;
            }
            BnbOptions opts;
            opts.node_limit = bnb_node_limit;
            BnbResult res = best_bound_solve(inst, opts);
            std::printf("status          %s\n",
                        res.status == BnbResult::Status::Optimal ? "optimal" : "node-limit");
            std::printf("opt_value       %.17g\n", res.opt_value);
            std::printf("nodes_explored  %ld\n", res.nodes_explored);
            std::printf("nodes_pruned    %ld\n", res.nodes_pruned);
            double gap_for_bound;
            if (inst.n <= 30) {
                BruteForceResult bf = brute_force_solve(inst);
                gap_for_bound = sol.value - bf.value;
                std::printf("ipgap_exact     %.17g\n", gap_for_bound);
            } else {
                GapReport rep = measure_gap(inst, SelectionConfig{}, 0);
                if (!rep.feasible) {
                    std::printf("tree bound      skipped (repair failed, no gap certificate)\n");
                    return res.status == BnbResult::Status::Optimal ? kExitOk : kExitBudget;
                }
                gap_for_bound = rep.gap_upper;
                std::printf("gap_upper       %.17g\n", gap_for_bound);
            }
            TreeBoundReport tb = tree_bound_check(inst, sol, gap_for_bound, opts);
            std::ostringstream kc;
            kc << tb.knapsack.count;
            std::ostringstream bd;
            bd << tb.knapsack.bound_2nk1;
            std::printf("knapsack_count  %s%s\n", kc.str().c_str(),
                        tb.knapsack.partial ? " (partial)" : "");
            std::printf("bound_2nK+1     %s -> %s\n", bd.str().c_str(),
                        tb.bound_holds ? "holds" : "VIOLATED");
            if (!tb.bound_holds) return kExitVerifyFail;
            return res.status == BnbResult::Status::Optimal ? kExitOk : kExitBudget;
        }
        if (*disc) {
            IpInstance inst = load_instance(disc_file);
            if (disc_op == "charfn") {
                IntCols cols = cols_from_instance(inst, disc_cols_lo, disc_cols_hi);
                std::vector<double> theta = parse_real_vector(disc_theta);
                if (static_cast<int>(theta.size()) != inst.m)
                    throw InstanceError("theta needs m entries");
                auto v = charfn(cols, disc_p, theta);
                std::printf("charfn = %.12g + %.12gi  |.| = %.12g\n", v.real(), v.imag(),
                            std::abs(v));
                return kExitOk;
            }
            if (disc_op == "pmf" || disc_op == "fourier") {
                IntCols cols = cols_from_instance(inst, disc_cols_lo, disc_cols_hi);
                if (disc_op == "pmf") {
                    Pmf pmf = pmf_convolution(cols, disc_p);
                    std::printf("support cells %zu, total mass %.12f\n", pmf.cells(),
                                pmf.total_mass);
                    double mx = 0;
                    for (double q : pmf.p) mx = std::max(mx, q);
                    std::printf("max prob %.12g\n", mx);
                } else {
                    std::vector<int64_t> lambda = parse_int_vector(disc_target);
                    if (static_cast<int>(lambda.size()) != inst.m)
                        throw InstanceError("target needs m entries");
                    int grid = disc_grid;
                    if (grid <= 0) {
                        int64_t max_abs = 1;
                        for (int64_t w : cols.w) max_abs = std::max<int64_t>(max_abs, std::llabs(w));
                        grid = static_cast<int>(2 * cols.nbar * max_abs + 1);
                    }
                    double prob = pmf_fourier(cols, disc_p, lambda, grid);
                    std::printf("Pr[D = lambda] = %.12g (grid %d)\n", prob, grid);
                }
                return kExitOk;
            }
            if (disc_op == "hit") {
                IntCols cols = cols_from_instance(inst, disc_cols_lo, disc_cols_hi);
                std::vector<int64_t> target = parse_int_vector(disc_target);
                if (static_cast<int>(target.size()) != inst.m)
                    throw InstanceError("target needs m entries");
                CardinalityBand band{0, -1};
                if (!disc_band.empty()) {
                    if (std::sscanf(disc_band.c_str(), "%d:%d", &band.lo, &band.hi) != 2)
                        throw InstanceError("band must be lo:hi");
                }
                auto res = hit_target_exact(cols, target, band);
                if (!res) {
                    std::printf("not found (search is complete)\n");
                    return kExitOk;
                }
                std::printf("|T| = %zu, columns:", res->subset.size());
                for (int j : res->subset) std::printf(" %d", j + disc_cols_lo);
                std::printf("\n");
                return kExitOk;
            }
            // hit-approx
            if (!inst.discrete() || disc_op == "hit-approx") {
                RealCols cols;
                int hi = std::min(disc_cols_hi, inst.n);
                cols.m = inst.m;
                cols.nbar = hi - disc_cols_lo;
                cols.w.resize(static_cast<size_t>(cols.m) * cols.nbar);
                for (int j = disc_cols_lo; j < hi; ++j)
                    for (int i = 0; i < inst.m; ++i)
                        cols.entry(i, j - disc_cols_lo) = inst.a(i, j);
                std::vector<double> target = parse_real_vector(disc_target);
                if (static_cast<int>(target.size()) != inst.m)
                    throw InstanceError("target needs m entries");
                CardinalityBand band{0, -1};
                if (!disc_band.empty()) {
                    if (std::sscanf(disc_band.c_str(), "%d:%d", &band.lo, &band.hi) != 2)
                        throw InstanceError("band must be lo:hi");
                }
                auto res = hit_target_approx(cols, target, band, disc_tol, disc_budget, disc_seed);
                std::printf("%s: |T| = %zu, residual = %.6g (restarts %d)\n",
                            res.hit ? "hit" : "best", res.cert.subset.size(),
                            res.cert.residual_norm, res.restarts_used);
                return kExitOk;
            }
        }
        if (*verify) {
            std::vector<int> ids = criteria_for_suite(verify_suite);
            if (ids.empty()) {
                std::fprintf(stderr, "unknown suite: %s\n", verify_suite.c_str());
                return kExitUsage;
            }
            bool all_pass = true;
            for (int id : ids) {
                CriterionResult r = run_criterion(id);
                std::printf("[%s] %2d %s (%.1fs) %s\n", r.pass ? "PASS" : "FAIL", r.index,
                            r.name.c_str(), r.seconds, r.details.c_str());
                std::fflush(stdout);
                all_pass = all_pass && r.pass;
            }
            return all_pass ? kExitOk : kExitVerifyFail;
        }
        if (*sweep) {
            std::ifstream f(sweep_config_path);
            if (!f) throw InstanceError("cannot open config: " + sweep_config_path);
            std::ostringstream ss;
            ss << f.rdbuf();
            SweepConfig cfg = sweep_config_from_json(ss.str());
            if (sweep_jobs > 0) cfg.jobs = sweep_jobs;
            if (sweep_tree) {
                TreeSweepParams params;
                params.model = cfg.model == "packing" ? Model::Packing : Model::CenteredDsu;
                params.m = cfg.m;
                params.k = cfg.k;
                params.beta = cfg.beta;
                auto seeds = seed_list(cfg);
                TreeSweepResult res = sweep_tree_sizes(params, cfg.n_list, seeds);
                std::ofstream out(cfg.out, std::ios::binary);
                if (!out) throw InstanceError("cannot open for writing: " + cfg.out);
                out << tree_csv_text(cfg, res);
                std::ofstream side(cfg.out + ".config.json", std::ios::binary);
                side << sweep_config_to_json(cfg);
                for (const auto& s : res.summary)
                    std::printf("n=%d median=%ld max=%ld exponent=%.3f excluded=%d\n", s.n,
                                s.median_nodes, s.max_nodes, s.exponent, s.excluded);
            } else {
                auto rows = run_gap_sweep(cfg);
                write_gap_csv(cfg, rows);
                int fails = 0;
                for (const auto& r : rows)
                    if (!r.error.empty()) ++fails;
                std::printf("wrote %s (%zu rows, %d with errors)\n", cfg.out.c_str(), rows.size(),
                            fails);
            }
            return kExitOk;
        }
    } catch (const BoxOverflow& e) {
        std::fprintf(stderr, "budget exceeded: %s\n", e.what());
        return kExitBudget;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
