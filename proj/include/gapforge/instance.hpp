#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gapforge/rng.hpp"

namespace gapforge {

struct InstanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Model { CenteredDsu, CenteredLogconcave, Packing };

enum class LogconcaveFamily { UniformCube, UniformBall, TruncatedGaussian };

std::string model_tag(Model model);

/// A random 0/1 integer program  max c^T x  s.t.  Ax <= b,  x in {0,1}^n.
///
/// Discrete models store A and b exactly as integer numerators over the
/// common denominator k; the solver-facing accessors a()/b() return the
/// scaled values A_num/k in [-1,1]. The logconcave model stores reals.
struct IpInstance {
    Model model = Model::CenteredDsu;
    int m = 0; // rows (constraints)
    int n = 0; // columns (variables)
    int64_t k = 1; // denominator for discrete models

    // Discrete storage (CenteredDsu, Packing): row-major m x n numerators.
    std::vector<int64_t> a_num;
    std::vector<int64_t> b_num;

    // Real storage (CenteredLogconcave): row-major m x n.
    std::vector<double> a_real;
    std::vector<double> b_real;

    std::vector<double> c;

    double beta = 0.0; // packing margin, in (0, 1/4)
    LogconcaveFamily family = LogconcaveFamily::UniformCube;
    double radius = 0.0; // support radius (logconcave; recorded)

    uint64_t seed = 0;
    std::string generator{Rng::kGeneratorName};

    bool discrete() const { return model != Model::CenteredLogconcave; }

    double a(int i, int j) const {
        return discrete() ? static_cast<double>(a_num[static_cast<size_t>(i) * n + j]) / static_cast<double>(k)
                          : a_real[static_cast<size_t>(i) * n + j];
    }
    int64_t a_entry_num(int i, int j) const { return a_num[static_cast<size_t>(i) * n + j]; }

    double b(int i) const {
        return discrete() ? static_cast<double>(b_num[i]) / static_cast<double>(k) : b_real[i];
    }

    /// Scaled column j as a dense m-vector.
    std::vector<double> column(int j) const;

    /// sum_j A_{.,j} x_j as integer numerators (discrete models only).
    std::vector<int64_t> product_num(std::span<const uint8_t> x01) const;

    double max_column_norm() const;
};

/// b for the centered generators: default is the zero vector.
struct CenteredBSpec {
    std::optional<std::vector<int64_t>> b_num; // numerators over k; nullopt = 0
};

/// b for the packing generator: "mid" places round(k*n/4) clamped into the
/// open interval (k*n*beta, k*n*(1/2-beta)).
struct PackingBSpec {
    std::optional<std::vector<int64_t>> b_num; // nullopt = mid rule
};

IpInstance gen_centered_dsu(int n, int m, int64_t k, const CenteredBSpec& b_spec, uint64_t seed);

IpInstance gen_centered_logconcave(int n, int m, LogconcaveFamily family,
                                   const std::optional<std::vector<double>>& b_spec,
                                   uint64_t seed, double radius = 0.0);

IpInstance gen_packing(int n, int m, int64_t k, double beta, const PackingBSpec& b_spec,
                       uint64_t seed);

void save_instance(const IpInstance& inst, const std::string& path);
IpInstance load_instance(const std::string& path);

std::string serialize_instance(const IpInstance& inst);
IpInstance parse_instance(const std::string& text);

/// One of the column distributions the harness understands, with its exact
/// first/second-moment data. Discrete families expose their full support so
/// certification can enumerate instead of sample.
struct ColumnLaw {
    enum class Family {
        DsuSymmetric,      // uniform on {0, +-1/k, ..., +-1}
        DiscreteInterval,  // integer uniform on {a, ..., a+k}
        PackingUniform,    // uniform on {1/k, ..., 1}
        UniformCube,       // per-coordinate uniform, unit variance
        UniformBall,       // uniform on the radius-sqrt(m+2) ball
        TruncatedGaussian, // standard normal conditioned on ||x|| <= radius
    };

    Family family = Family::DsuSymmetric;
    int m = 1;
    int64_t k = 1;
    int64_t a = 0;       // interval start (DiscreteInterval)
    double radius = 0.0; // TruncatedGaussian

    double coordinate_mean() const;
    std::vector<double> mean() const;
    /// Operator-norm bound on the covariance (coordinates are i.i.d., so
    /// this is the per-coordinate variance, except for the ball/truncation
    /// where it is bounded by 1).
    double sigma() const;

    bool finite_support() const;
    int64_t support_size() const; // (k+1)^m style counts; finite families only

    void sample(Rng& rng, std::span<double> out) const;
    /// Enumerate the support of a single coordinate (finite families).
    std::vector<double> coordinate_support() const;
};

} // namespace gapforge
