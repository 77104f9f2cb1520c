#pragma once

// Outer iteration: the birth-death update, the full two-loop run, and the
// mean-field Langevin baseline. One epoch = inner Langevin run, then
// replacement of floor(alpha dt N) outer particles by their index-matched
// inner counterparts, then metrics.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "efp/diagnostics.hpp"
#include "efp/grid1d.hpp"
#include "efp/objective.hpp"
#include "efp/sampler.hpp"
#include "efp/types.hpp"

namespace efp {

struct EpochResult {
    std::int64_t epoch = 0;  // 1-based, counts completed outer iterations
    double t = 0.0;
    const ParticleCloud& cloud;            // outer cloud after the update
    const std::vector<std::size_t>& replaced;  // distinct, sorted
    const MetricsSnapshot& metrics;
};

using EpochObserver = std::function<void(const EpochResult&)>;

// Replaces K = floor(alpha dt N) uniformly chosen outer particles by the
// index-matched inner particles. Returns the sorted replaced indices.
inline std::vector<std::size_t> outer_step(ParticleCloud& outer, const ParticleCloud& inner_final,
                                           double alpha, double dt, RngStream& rng) {
    const std::size_t n = outer.size();
    const auto replace_count =
        static_cast<std::size_t>(std::floor(alpha * dt * static_cast<double>(n) + 1e-9));
    if (replace_count == 0)
        throw ConfigError("outer_step: floor(alpha * dt * N) is zero, the step is a no-op");
    if (replace_count > inner_final.size())
        throw ContractViolation("outer_step: fewer inner particles than replacements");
    if (inner_final.dim() != outer.dim())
        throw ContractViolation("outer_step: inner/outer dimension mismatch");

    // uniform K-subset via partial Fisher-Yates
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    for (std::size_t j = 0; j < replace_count; ++j) {
        const std::size_t swap_at = j + static_cast<std::size_t>(rng.uniform_below(n - j));
        std::swap(indices[j], indices[swap_at]);
    }
    indices.resize(replace_count);
    std::sort(indices.begin(), indices.end());

    for (std::size_t i : indices) {
        if (i >= inner_final.size())
            throw ContractViolation("outer_step: index-matched replacement needs M >= N");
        outer.set_particle(i, inner_final.particle(i));
    }
    return indices;
}

// Draws i.i.d. samples from the quadrature-normalized best response on a
// 1-D grid (inverse CDF). Stands in for the Langevin inner loop where the
// outer-loop theory should be tested without sampler bias.
class ExactGibbsSampler {
public:
    explicit ExactGibbsSampler(double half_width = 6.0, std::size_t nodes = 2001)
        : grid_(Grid1d::uniform(half_width, nodes)) {}

    void resample(const Objective& objective, const FrozenObjective& frozen, double sigma2,
                  ParticleCloud& cloud, RngStream& rng) const {
        if (cloud.dim() != 1)
            throw ContractViolation("ExactGibbsSampler: only one-dimensional objectives");
        const auto density = normalized_density(grid_, [&](double x) {
            return gibbs_log_density_unnormalized(objective, frozen, std::span{&x, 1}, sigma2);
        });
        const auto cdf = density_cdf(grid_, density);
        for (std::size_t i = 0; i < cloud.size(); ++i)
            cloud.particle(i)[0] = quantile(grid_, cdf, rng.uniform01());
    }

    const Grid1d& grid() const { return grid_; }

private:
    Grid1d grid_;
};

enum class InnerMode {
    ula,          // Langevin inner iterations with warm start
    exact_gibbs,  // i.i.d. draws from the quadrature-normalized target (1-D)
};

namespace detail {

// deterministic reference cloud at the quantiles (i - 1/2)/N of the current
// best-response target; W1 against it approximates W1(cloud, Phi(m))
inline double w1_to_best_response(const ParticleCloud& cloud, const Objective& objective,
                                  const FrozenObjective& frozen, double sigma2) {
    const Grid1d grid = Grid1d::uniform(6.0, 2001);
    const auto density = normalized_density(grid, [&](double x) {
        return gibbs_log_density_unnormalized(objective, frozen, std::span{&x, 1}, sigma2);
    });
    const auto cdf = density_cdf(grid, density);
    ParticleCloud ref(1, cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        ref.particle(i)[0] =
            quantile(grid, cdf, (static_cast<double>(i) + 0.5) / static_cast<double>(cloud.size()));
    return wasserstein1_1d(cloud, ref);
}

inline MetricsSnapshot epoch_metrics(const Objective& objective, const ParticleCloud& cloud,
                                     const EfpConfig& config) {
    MetricsSnapshot snap = make_snapshot(objective, cloud, config.sigma2_half);
    if (objective.dim() == 1) {
        const auto frozen = objective.freeze(cloud);
        snap.aux_w1 = w1_to_best_response(cloud, objective, *frozen, config.sigma2());
        snap.aux_tv = fixed_point_residual_1d(cloud, objective, config.sigma2());
    }
    return snap;
}

}  // namespace detail

// The full two-loop run. The inner state starts as a copy of the outer
// cloud, runs S_first at epoch 0 and S_other afterwards, and is carried
// forward across epochs (warm start).
inline RunTrace run_efp(const Objective& objective, const EfpConfig& config,
                        InnerMode mode = InnerMode::ula, const EpochObserver& observer = {}) {
    config.validate();
    if (mode == InnerMode::exact_gibbs && objective.dim() != 1)
        throw ConfigError("exact inner sampler requires a one-dimensional objective");

    auto init_rng = rng_stream(config.seed, StreamPhase::init, 0, 0);
    ParticleCloud outer =
        gaussian_cloud(objective.dim(), config.N, config.init_mean, config.init_std, init_rng);
    InnerState inner{outer, -1};
    const ExactGibbsSampler exact_sampler;
    std::vector<RngStream> streams(config.N);

    RunTrace trace;
    const auto total_epochs = config.epochs();
    trace.rows.reserve(total_epochs);
    for (std::size_t e = 0; e < total_epochs; ++e) {
        const auto start = std::chrono::steady_clock::now();
        const double horizon = e == 0 ? config.S_first : config.S_other;
        const auto frozen = objective.freeze(outer);
        if (mode == InnerMode::ula) {
            for (std::size_t i = 0; i < config.N; ++i)
                streams[i] = rng_stream(config.seed, StreamPhase::inner, e, i);
            run_inner(objective, *frozen, inner, horizon, config.ds, config.sigma(), streams,
                      static_cast<std::int64_t>(e));
        } else {
            auto rng = rng_stream(config.seed, StreamPhase::exact_sampler, e, 0);
            exact_sampler.resample(objective, *frozen, config.sigma2(), inner.cloud, rng);
            inner.epoch_of_last_run = static_cast<std::int64_t>(e);
        }

        auto replace_rng = rng_stream(config.seed, StreamPhase::replacement, e, 0);
        const auto replaced = outer_step(outer, inner.cloud, config.alpha, config.dt, replace_rng);

        TraceRow row;
        row.epoch = static_cast<std::int64_t>(e) + 1;
        row.t = static_cast<double>(e + 1) * config.dt;
        const MetricsSnapshot metrics = detail::epoch_metrics(objective, outer, config);
        row.objective = metrics.objective_value;
        row.validation_error = metrics.validation_error;
        row.entropy_rel_g = metrics.entropy_rel_g;
        row.free_energy = metrics.free_energy;
        row.aux_w1 = metrics.aux_w1;
        row.aux_tv = metrics.aux_tv;
        row.entropy_jittered = metrics.entropy_jittered;
        row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        trace.rows.push_back(row);
        if (observer) observer(EpochResult{row.epoch, row.t, outer, replaced, metrics});
    }
    return trace;
}

// Mean-field Langevin baseline: one cloud evolved by ULA with the drift's
// measure argument being the cloud itself, re-frozen every step. Metrics
// are recorded on the same epoch grid as run_efp.
inline RunTrace run_mfld_baseline(const Objective& objective, const EfpConfig& config,
                                  const EpochObserver& observer = {}) {
    config.validate();
    auto init_rng = rng_stream(config.seed, StreamPhase::init, 0, 0);
    ParticleCloud cloud =
        gaussian_cloud(objective.dim(), config.N, config.init_mean, config.init_std, init_rng);

    const auto steps_per_epoch =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.dt / config.ds)));
    std::vector<RngStream> streams(config.N);
    for (std::size_t i = 0; i < config.N; ++i)
        streams[i] = rng_stream(config.seed, StreamPhase::mfld, 0, i);

    const auto n = static_cast<std::size_t>(objective.dim());
    const double sigma = config.sigma();
    RunTrace trace;
    const auto total_epochs = config.epochs();
    trace.rows.reserve(total_epochs);
    static const std::vector<std::size_t> no_replacements;
    for (std::size_t e = 0; e < total_epochs; ++e) {
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            const auto frozen = objective.freeze(cloud);
            parallel_for(cloud.size(), [&](std::size_t begin, std::size_t end) {
                std::vector<double> drift_v(n), noise(n), grad_u(n);
                for (std::size_t i = begin; i < end; ++i) {
                    auto x = cloud.particle(i);
                    frozen->intrinsic(x, drift_v);
                    objective.potential_gradient(x, grad_u);
                    for (std::size_t c = 0; c < n; ++c)
                        drift_v[c] = -drift_v[c] - config.sigma2_half * grad_u[c];
                    for (std::size_t c = 0; c < n; ++c) noise[c] = streams[i].normal();
                    try {
                        ula_step(x, drift_v, sigma, config.ds, noise);
                    } catch (const DivergenceError&) {
                        throw DivergenceError(
                            "MFLD divergence: non-finite coordinate in particle " +
                                std::to_string(i) + " at epoch " + std::to_string(e),
                            i, static_cast<std::int64_t>(e));
                    }
                }
            });
        }

        TraceRow row;
        row.epoch = static_cast<std::int64_t>(e) + 1;
        row.t = static_cast<double>(e + 1) * config.dt;
        const MetricsSnapshot metrics = detail::epoch_metrics(objective, cloud, config);
        row.objective = metrics.objective_value;
        row.validation_error = metrics.validation_error;
        row.entropy_rel_g = metrics.entropy_rel_g;
        row.free_energy = metrics.free_energy;
        row.aux_w1 = metrics.aux_w1;
        row.aux_tv = metrics.aux_tv;
        row.entropy_jittered = metrics.entropy_jittered;
        row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        trace.rows.push_back(row);
        if (observer) observer(EpochResult{row.epoch, row.t, cloud, no_replacements, metrics});
    }
    return trace;
}

}  // namespace efp
