#include "gapforge/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace gapforge {

using nlohmann::json;

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sweep_config_to_json(const SweepConfig& cfg) {
    json j;
    j["model"] = cfg.model;
    j["family"] = cfg.family;
    j["m"] = cfg.m;
    j["k"] = cfg.k;
    j["beta"] = cfg.beta;
    j["radius"] = cfg.radius;
    j["b"] = cfg.b;
    j["n_list"] = cfg.n_list;
    j["seed_count"] = cfg.seed_count;
    j["seeds"] = cfg.seeds;
    j["mode"] = cfg.mode;
    j["delta"] = cfg.delta;
    j["p"] = cfg.p;
    j["gamma"] = cfg.gamma;
    j["tol"] = cfg.tol;
    j["budget"] = cfg.budget;
    j["pool_r"] = cfg.pool_r;
    j["z_cap"] = cfg.z_cap;
    j["exact_ipgap"] = cfg.exact_ipgap;
    j["jobs"] = cfg.jobs;
    j["out"] = cfg.out;
    return j.dump(2) + "\n";
}

SweepConfig sweep_config_from_json(const std::string& text) {
    json j = json::parse(text);
    SweepConfig cfg;
    cfg.model = j.value("model", cfg.model);
    cfg.family = j.value("family", cfg.family);
    cfg.m = j.value("m", cfg.m);
    cfg.k = j.value("k", cfg.k);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.radius = j.value("radius", cfg.radius);
    cfg.b = j.value("b", cfg.b);
    cfg.n_list = j.value("n_list", cfg.n_list);
    cfg.seed_count = j.value("seed_count", cfg.seed_count);
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.mode = j.value("mode", cfg.mode);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.p = j.value("p", cfg.p);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.budget = j.value("budget", cfg.budget);
    cfg.pool_r = j.value("pool_r", cfg.pool_r);
    cfg.z_cap = j.value("z_cap", cfg.z_cap);
    cfg.exact_ipgap = j.value("exact_ipgap", cfg.exact_ipgap);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.out = j.value("out", cfg.out);
    return cfg;
}

std::string config_hash(const SweepConfig& cfg) {
    // FNV-1a over the canonical JSON, minus fields that do not affect rows.
    SweepConfig canon = cfg;
    canon.jobs = 1;
    canon.out.clear();
    std::string text = sweep_config_to_json(canon);
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

IpInstance instance_for(const SweepConfig& cfg, int n, uint64_t seed) {
    if (cfg.model == "dsu") {
        return gen_centered_dsu(n, cfg.m, cfg.k, CenteredBSpec{}, seed);
    }
    if (cfg.model == "packing") {
        return gen_packing(n, cfg.m, cfg.k, cfg.beta, PackingBSpec{}, seed);
    }
    if (cfg.model == "logconcave") {
        LogconcaveFamily fam = LogconcaveFamily::UniformCube;
        if (cfg.family == "ball") fam = LogconcaveFamily::UniformBall;
        if (cfg.family == "tgauss") fam = LogconcaveFamily::TruncatedGaussian;
        return gen_centered_logconcave(n, cfg.m, fam, std::nullopt, seed, cfg.radius);
    }
    throw InstanceError("unknown model: " + cfg.model);
}

SelectionConfig selection_for(const SweepConfig& cfg) {
    SelectionConfig sel;
    sel.mode = cfg.mode == "faithful" ? SelectionMode::AnalysisFaithful
                                      : SelectionMode::PracticalFilter;
    sel.delta = cfg.delta;
    sel.p = cfg.p;
    sel.gamma = cfg.gamma;
    sel.approx_tol = cfg.tol;
    sel.approx_budget = cfg.budget;
    sel.pool_r = cfg.pool_r;
    sel.z_cap = cfg.z_cap;
    return sel;
}

std::vector<uint64_t> seed_list(const SweepConfig& cfg) {
    if (!cfg.seeds.empty()) return cfg.seeds;
    std::vector<uint64_t> seeds(std::max(cfg.seed_count, 0));
    for (size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
    return seeds;
}

std::vector<GapReport> run_gap_sweep(const SweepConfig& cfg, int jobs_override) {
    std::vector<uint64_t> seeds = seed_list(cfg);
    struct Cell {
        int n;
        uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int n : cfg.n_list)
        for (uint64_t s : seeds) cells.push_back({n, s});

    std::vector<GapReport> rows(cells.size());
    SelectionConfig sel = selection_for(cfg);
    MeasureOptions mopts;
    mopts.exact_ipgap = cfg.exact_ipgap;

    int jobs = jobs_override > 0 ? jobs_override : std::max(cfg.jobs, 1);
    jobs = std::min<int>(jobs, std::max<size_t>(cells.size(), 1));
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) return;
            try {
                IpInstance inst = instance_for(cfg, cells[idx].n, cells[idx].seed);
                rows[idx] = measure_gap(inst, sel, cells[idx].seed, mopts);
            } catch (const std::exception& e) {
                rows[idx].model = cfg.model;
                rows[idx].m = cfg.m;
                rows[idx].n = cells[idx].n;
                rows[idx].k = cfg.k;
                rows[idx].beta = cfg.beta;
                rows[idx].seed = cells[idx].seed;
                rows[idx].error = e.what();
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    // Cells were created sorted by (n, seed) already; rows follow them.
    return rows;
}

std::string gap_csv_text(const SweepConfig& cfg, const std::vector<GapReport>& rows) {
    std::string hash = config_hash(cfg);
    std::ostringstream out;
    out << kCsvVersionLine << "\n" << kGapCsvHeader << "\n";
    for (const GapReport& r : rows) {
        double u_norm = r.model == "packing" ? r.u_norm1 : r.u_norm2;
        out << r.model << ',' << r.m << ',' << r.n << ',' << r.k << ','
            << (r.model == "packing" ? format17(r.beta) : "-") << ',' << r.seed << ','
            << format17(r.val_lp) << ',' << format17(u_norm) << ',' << format17(r.n0_frac) << ','
            << r.z_size << ',' << r.t_size << ',' << format17(r.residual) << ','
            << (r.feasible ? 1 : 0) << ',' << format17(r.gap_upper) << ',';
        if (r.ipgap_exact) out << format17(*r.ipgap_exact);
        out << ',' << hash << '\n';
    }
    return out.str();
}

void write_gap_csv(const SweepConfig& cfg, const std::vector<GapReport>& rows) {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw InstanceError("cannot open for writing: " + cfg.out);
    f << gap_csv_text(cfg, rows);
    std::ofstream side(cfg.out + ".config.json", std::ios::binary);
    if (!side) throw InstanceError("cannot open for writing: " + cfg.out + ".config.json");
    side << sweep_config_to_json(cfg);
}

std::string tree_csv_text(const SweepConfig& cfg, const TreeSweepResult& result) {
    std::string hash = config_hash(cfg);
    std::ostringstream out;
    out << kCsvVersionLine << "\n";
    out << "model,m,n,k,beta,seed,nodes,node_limit_hit,config_hash\n";
    for (const TreeSweepRow& r : result.rows) {
        out << cfg.model << ',' << cfg.m << ',' << r.n << ',' << cfg.k << ','
            << (cfg.model == "packing" ? format17(cfg.beta) : "-") << ',' << r.seed << ','
            << r.nodes << ',' << (r.node_limit_hit ? 1 : 0) << ',' << hash << '\n';
    }
    return out.str();
}

} // namespace gapforge
