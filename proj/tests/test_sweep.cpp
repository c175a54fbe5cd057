#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gapforge/sweep.hpp"

using namespace gapforge;

namespace {

SweepConfig small_config() {
    SweepConfig cfg;
    cfg.model = "dsu";
    cfg.m = 2;
    cfg.k = 3;
    cfg.n_list = {40, 80};
    cfg.seed_count = 4;
    return cfg;
}

} // namespace

TEST_CASE("config serialization round trips") {
    SweepConfig cfg = small_config();
    cfg.mode = "faithful";
    cfg.delta = 0.25;
    cfg.seeds = {3, 9, 27};
    SweepConfig back = sweep_config_from_json(sweep_config_to_json(cfg));
    CHECK(back.model == cfg.model);
    CHECK(back.n_list == cfg.n_list);
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.mode == cfg.mode);
    CHECK(back.delta == cfg.delta);
    CHECK(config_hash(back) == config_hash(cfg));
}

TEST_CASE("config hash is content sensitive but ignores output plumbing") {
    SweepConfig a = small_config();
    SweepConfig b = a;
    b.out = "elsewhere.csv";
    b.jobs = 8;
    CHECK(config_hash(a) == config_hash(b));
    SweepConfig c = a;
    c.k = 4;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("serial and parallel sweeps emit identical bytes") {
    SweepConfig cfg = small_config();
    auto rows1 = run_gap_sweep(cfg, 1);
    auto rows4 = run_gap_sweep(cfg, 4);
    CHECK(gap_csv_text(cfg, rows1) == gap_csv_text(cfg, rows4));
    // Re-run from the serialized config.
    SweepConfig back = sweep_config_from_json(sweep_config_to_json(cfg));
    auto rows2 = run_gap_sweep(back, 2);
    CHECK(gap_csv_text(back, rows2) == gap_csv_text(cfg, rows1));
}

TEST_CASE("csv carries the schema header and one row per cell") {
    SweepConfig cfg = small_config();
    auto rows = run_gap_sweep(cfg, 2);
    std::string csv = gap_csv_text(cfg, rows);
    CHECK(csv.rfind(kCsvVersionLine, 0) == 0);
    CHECK(csv.find(kGapCsvHeader) != std::string::npos);
    size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 2 + cfg.n_list.size() * 4);
    // Every row ends with the config hash.
    std::string hash = config_hash(cfg);
    size_t found = 0, pos = 0;
    while ((pos = csv.find(hash, pos)) != std::string::npos) {
        ++found;
        pos += hash.size();
    }
    CHECK(found == cfg.n_list.size() * 4);
}

TEST_CASE("instance_for covers all models") {
    SweepConfig cfg = small_config();
    CHECK(instance_for(cfg, 20, 1).model == Model::CenteredDsu);
    cfg.model = "packing";
    CHECK(instance_for(cfg, 50, 1).model == Model::Packing);
    cfg.model = "logconcave";
    cfg.family = "ball";
    CHECK(instance_for(cfg, 20, 1).model == Model::CenteredLogconcave);
    cfg.model = "nope";
    CHECK_THROWS_AS(instance_for(cfg, 20, 1), InstanceError);
}

TEST_CASE("tree sweep csv is stable") {
    SweepConfig cfg = small_config();
    cfg.n_list = {16};
    std::vector<int> ns = cfg.n_list;
    std::vector<uint64_t> seeds{1, 2, 3};
    TreeSweepParams params;
    params.m = cfg.m;
    params.k = cfg.k;
    auto res1 = sweep_tree_sizes(params, ns, seeds);
    auto res2 = sweep_tree_sizes(params, ns, seeds);
    CHECK(tree_csv_text(cfg, res1) == tree_csv_text(cfg, res2));
}
