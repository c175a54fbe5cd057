#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gapforge/bnb.hpp"
#include "gapforge/rounding.hpp"

namespace gapforge {

/// Serializable description of a sweep: re-running from the sidecar config
/// reproduces every CSV row byte for byte, at any parallelism degree.
struct SweepConfig {
    std::string model = "dsu"; // dsu | logconcave | packing
    std::string family = "cube";
    int m = 2;
    int64_t k = 3;
    double beta = 0.1;
    double radius = 0.0;
    std::string b = "default"; // zero (centered) or mid (packing)
    std::vector<int> n_list;
    int seed_count = 0;
    std::vector<uint64_t> seeds; // explicit list takes precedence

    std::string mode = "filter"; // filter | faithful
    double delta = 0.0;          // 0 = model default
    double p = 0.0;
    double gamma = -1.0;
    double tol = 1e-3;
    int budget = 200;
    int pool_r = 0;
    int z_cap = 400;
    bool exact_ipgap = false;

    int jobs = 1;
    std::string out = "sweep.csv";
};

std::string sweep_config_to_json(const SweepConfig& cfg);
SweepConfig sweep_config_from_json(const std::string& text);

/// Content hash of the resolved config (FNV-1a over the canonical JSON).
std::string config_hash(const SweepConfig& cfg);

IpInstance instance_for(const SweepConfig& cfg, int n, uint64_t seed);
SelectionConfig selection_for(const SweepConfig& cfg);
std::vector<uint64_t> seed_list(const SweepConfig& cfg);

/// Runs every (n, seed) cell; cells are pure, so threads only affect wall
/// time. Rows come back sorted by (n, seed).
std::vector<GapReport> run_gap_sweep(const SweepConfig& cfg, int jobs_override = -1);

std::string gap_csv_text(const SweepConfig& cfg, const std::vector<GapReport>& rows);
void write_gap_csv(const SweepConfig& cfg, const std::vector<GapReport>& rows);

std::string tree_csv_text(const SweepConfig& cfg, const TreeSweepResult& result);

inline constexpr const char* kCsvVersionLine = "# gapforge-csv v1";
inline constexpr const char* kGapCsvHeader =
    "model,m,n,k,beta,seed,val_lp,u_norm,n0_frac,z_size,t_size,residual,feasible,gap_upper,"
    "ipgap_exact?,config_hash";

std::string format17(double v);

} // namespace gapforge
