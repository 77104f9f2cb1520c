#pragma once

// Shared domain types: particles, clouds, datasets, run configuration and
// the per-epoch trace record.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "efp/rng.hpp"

namespace efp {

using Vec = std::vector<double>;
// A particle is a point in parameter space R^n. For the two-layer network
// n = d + 2 with coordinates ordered (beta, alpha_1..alpha_d, gamma).
using Particle = Vec;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(std::string msg, std::size_t particle, std::int64_t epoch)
        : std::runtime_error(std::move(msg)), particle(particle), epoch(epoch) {}
    std::size_t particle;
    std::int64_t epoch;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

// N particles of one shared dimension, stored contiguously (row-major).
// Represents the empirical measure (1/N) sum_i delta_{x_i}.
class ParticleCloud {
public:
    ParticleCloud() = default;

    ParticleCloud(int dim, std::size_t count)
        : dim_(dim), count_(count), data_(static_cast<std::size_t>(dim) * count, 0.0) {
        if (dim <= 0) throw ContractViolation("ParticleCloud: dimension must be positive");
    }

    int dim() const { return dim_; }
    std::size_t size() const { return count_; }

    std::span<double> particle(std::size_t i) {
        return {data_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<const double> particle(std::size_t i) const {
        return {data_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }

    void set_particle(std::size_t i, std::span<const double> x) {
        if (static_cast<int>(x.size()) != dim_)
            throw ContractViolation("ParticleCloud: particle dimension mismatch");
        auto dst = particle(i);
        for (int c = 0; c < dim_; ++c) dst[c] = x[c];
    }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    bool operator==(const ParticleCloud&) const = default;

private:
    int dim_ = 0;
    std::size_t count_ = 0;
    std::vector<double> data_;
};

// N particles, each coordinate i.i.d. Normal(mean, std^2).
inline ParticleCloud gaussian_cloud(int dim, std::size_t count, double mean, double stddev,
                                    RngStream& rng) {
    if (count == 0) throw ConfigError("gaussian_cloud: particle count must be at least 1");
    if (!(stddev > 0.0)) throw ConfigError("gaussian_cloud: standard deviation must be positive");
    ParticleCloud cloud(dim, count);
    for (double& v : cloud.flat()) v = rng.normal(mean, stddev);
    return cloud;
}

// K feature/label pairs plus a validation grid.
struct Dataset {
    int feature_dim = 0;
    std::vector<double> features;      // K x feature_dim, row-major
    std::vector<double> labels;        // K
    std::vector<double> val_features;  // K_val x feature_dim
    std::vector<double> val_labels;    // K_val

    std::size_t size() const { return labels.size(); }
    std::size_t val_size() const { return val_labels.size(); }

    std::span<const double> feature(std::size_t k) const {
        return {features.data() + k * static_cast<std::size_t>(feature_dim),
                static_cast<std::size_t>(feature_dim)};
    }
    std::span<const double> val_feature(std::size_t k) const {
        return {val_features.data() + k * static_cast<std::size_t>(feature_dim),
                static_cast<std::size_t>(feature_dim)};
    }

    void validate() const {
        if (feature_dim <= 0) throw ConfigError("Dataset: feature dimension must be positive");
        if (labels.empty()) throw ConfigError("Dataset: needs at least one sample");
        if (features.size() != labels.size() * static_cast<std::size_t>(feature_dim))
            throw ConfigError("Dataset: features/labels size mismatch");
        if (val_features.size() != val_labels.size() * static_cast<std::size_t>(feature_dim))
            throw ConfigError("Dataset: validation features/labels size mismatch");
        if (!all_finite(features) || !all_finite(labels) || !all_finite(val_features) ||
            !all_finite(val_labels))
            throw ConfigError("Dataset: non-finite entry");
    }
};

// Full experiment configuration. Defaults are the sine-regression setup.
struct EfpConfig {
    double dt = 0.2;             // outer time step
    double T = 120.0;            // outer horizon
    double alpha = 1.0;          // learning rate
    std::size_t N = 1000;        // particle count (outer and inner)
    double sigma2_half = 0.0005; // regularization sigma^2 / 2
    double ds = 0.1;             // inner time step
    double S_first = 100.0;      // inner horizon, first epoch
    double S_other = 5.0;        // inner horizon, remaining epochs
    double init_mean = 0.0;      // m_0 Gaussian mean
    double init_std = 15.0;      // m_0 Gaussian std
    std::uint64_t seed = 0;

    double sigma2() const { return 2.0 * sigma2_half; }
    double sigma() const { return std::sqrt(sigma2()); }
    // the 1e-9 slack keeps decimal configs (0.2, 0.1, ...) on their intended
    // integer counts despite binary rounding
    std::size_t epochs() const { return static_cast<std::size_t>(std::ceil(T / dt - 1e-9)); }
    std::size_t replaced_per_epoch() const {
        return static_cast<std::size_t>(
            std::floor(alpha * dt * static_cast<double>(N) + 1e-9));
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string(name) + " must be positive and finite");
        };
        positive(dt, "dt");
        positive(T, "T");
        positive(alpha, "alpha");
        positive(sigma2_half, "sigma2_half");
        positive(ds, "ds");
        positive(S_first, "S_first");
        positive(S_other, "S_other");
        positive(init_std, "init_std");
        if (!std::isfinite(init_mean)) throw ConfigError("init_mean must be finite");
        if (N < 1) throw ConfigError("N must be at least 1");
        if (alpha * dt > 1.0 + 1e-12)
            throw ConfigError("alpha * dt must not exceed 1 (mixture weight)");
        if (replaced_per_epoch() < 1)
            throw ConfigError("floor(alpha * dt * N) must be at least 1 (outer step is a no-op)");
    }
};

// One row of the per-epoch metric log. wall_s is measured and therefore not
// part of the reproducible trace.csv contents (see io.hpp).
struct TraceRow {
    std::int64_t epoch = 0;  // 1-based count of completed outer iterations
    double t = 0.0;
    double objective = 0.0;
    std::optional<double> validation_error;
    double entropy_rel_g = 0.0;
    double free_energy = 0.0;
    std::optional<double> aux_w1;
    std::optional<double> aux_tv;
    double wall_s = 0.0;
    bool entropy_jittered = false;
};

struct RunTrace {
    std::vector<TraceRow> rows;
};

}  // namespace efp
