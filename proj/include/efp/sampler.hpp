#pragma once

// Inner iteration: unadjusted Langevin algorithm targeting the Gibbs best
// response m_hat = Phi(m), with the measure m frozen for the whole run.
// The stationary density is proportional to
//   exp(-(2/sigma^2) dF/dm(m, x) - U(x)).

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "efp/objective.hpp"
#include "efp/parallel.hpp"
#include "efp/rng.hpp"
#include "efp/types.hpp"

namespace efp {

// M Langevin particles carried across outer epochs (warm start).
struct InnerState {
    ParticleCloud cloud;
    std::int64_t epoch_of_last_run = -1;
};

// drift(x) = -(DF(m, x) + (sigma^2/2) grad U(x))
inline void drift(const Objective& objective, const FrozenObjective& frozen, double sigma2_half,
                  std::span<const double> x, std::span<double> out) {
    frozen.intrinsic(x, out);
    const std::size_t n = x.size();
    std::vector<double> grad_u(n);
    objective.potential_gradient(x, grad_u);
    for (std::size_t i = 0; i < n; ++i) out[i] = -out[i] - sigma2_half * grad_u[i];
}

// One Euler step: x <- x + drift * ds + sigma * sqrt(ds) * noise.
// Throws DivergenceError (without context) on a non-finite coordinate.
inline void ula_step(std::span<double> x, std::span<const double> drift_value, double sigma,
                     double ds, std::span<const double> noise) {
    const double root_ds = std::sqrt(ds);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += drift_value[i] * ds + sigma * root_ds * noise[i];
        if (!std::isfinite(x[i]))
            throw DivergenceError("ula_step: non-finite coordinate", 0, -1);
    }
}

// Applies floor(S/ds) ULA steps to every inner particle independently, with
// the frozen measure held constant. Each particle consumes only its own
// stream, so the result is independent of worker count; passing the same
// streams back in chains runs bit-identically (warm start).
inline std::size_t run_inner(const Objective& objective, const FrozenObjective& frozen,
                             InnerState& state, double S, double ds, double sigma,
                             std::span<RngStream> streams, std::int64_t epoch) {
    if (!(ds > 0.0)) throw ConfigError("run_inner: ds must be positive");
    if (streams.size() != state.cloud.size())
        throw ContractViolation("run_inner: one stream per inner particle required");
    const auto steps = static_cast<std::size_t>(std::floor(S / ds + 1e-9));
    state.epoch_of_last_run = epoch;
    if (steps == 0) return 0;

    const double sigma2_half = 0.5 * sigma * sigma;
    const auto n = static_cast<std::size_t>(state.cloud.dim());
    ParticleCloud& cloud = state.cloud;
    parallel_for(cloud.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> drift_v(n), noise(n), grad_u(n);
        for (std::size_t i = begin; i < end; ++i) {
            auto x = cloud.particle(i);
            RngStream& rng = streams[i];
            for (std::size_t s = 0; s < steps; ++s) {
                frozen.intrinsic(x, drift_v);
                objective.potential_gradient(x, grad_u);
                for (std::size_t c = 0; c < n; ++c)
                    drift_v[c] = -drift_v[c] - sigma2_half * grad_u[c];
                for (std::size_t c = 0; c < n; ++c) noise[c] = rng.normal();
                try {
                    ula_step(x, drift_v, sigma, ds, noise);
                } catch (const DivergenceError&) {
                    throw DivergenceError("Langevin divergence: non-finite coordinate in particle " +
                                              std::to_string(i) + " at epoch " +
                                              std::to_string(epoch),
                                          i, epoch);
                }
            }
        }
    });
    return steps;
}

// log of the unnormalized best-response density,
//   -(2/sigma^2) dF/dm(m, x) - U(x).
inline double gibbs_log_density_unnormalized(const Objective& objective,
                                             const FrozenObjective& frozen,
                                             std::span<const double> x, double sigma2) {
    return -(2.0 / sigma2) * frozen.linear(x) - objective.potential(x);
}

}  // namespace efp
