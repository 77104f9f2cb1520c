#pragma once

// Measurable quantities: entropy relative to the reference Gibbs measure,
// free energy, exact 1-D Wasserstein-1 distance, and the 1-D fixed-point
// residual in total variation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "efp/grid1d.hpp"
#include "efp/objective.hpp"
#include "efp/sampler.hpp"
#include "efp/types.hpp"

namespace efp {

struct MetricsSnapshot {
    double objective_value = 0.0;
    std::optional<double> validation_error;
    double entropy_rel_g = 0.0;  // estimate of H(m|g)
    double free_energy = 0.0;    // objective_value + sigma2_half * entropy_rel_g, exactly
    std::optional<double> aux_w1;
    std::optional<double> aux_tv;
    bool entropy_jittered = false;
};

inline double digamma(double x) {
    // recurrence to x >= 10, then the asymptotic series
    double result = 0.0;
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

// volume of the unit ball in R^n
inline double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

namespace detail {

// distance to the k-th nearest neighbor (excluding self) for every particle
inline std::vector<double> knn_distances(const ParticleCloud& cloud, int k) {
    const std::size_t n = cloud.size();
    std::vector<double> eps(n);
    if (cloud.dim() == 1) {
        // sorted order: the k nearest lie among the k predecessors/successors
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = cloud.particle(i)[0];
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
        std::vector<double> sorted(n);
        for (std::size_t i = 0; i < n; ++i) sorted[i] = xs[order[i]];
        std::vector<double> cand;
        for (std::size_t i = 0; i < n; ++i) {
            cand.clear();
            const std::size_t lo = i >= static_cast<std::size_t>(k) ? i - k : 0;
            const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(k));
            for (std::size_t j = lo; j <= hi; ++j)
                if (j != i) cand.push_back(std::abs(sorted[j] - sorted[i]));
            std::nth_element(cand.begin(), cand.begin() + (k - 1), cand.end());
            eps[order[i]] = cand[static_cast<std::size_t>(k - 1)];
        }
    } else {
        const int dim = cloud.dim();
        std::vector<double> best(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
            const auto xi = cloud.particle(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const auto xj = cloud.particle(j);
                double sq = 0.0;
                for (int c = 0; c < dim; ++c) {
                    const double diff = xi[c] - xj[c];
                    sq += diff * diff;
                }
                if (sq < best.back()) {
                    best.back() = sq;
                    for (std::size_t b = best.size() - 1; b > 0 && best[b] < best[b - 1]; --b)
                        std::swap(best[b], best[b - 1]);
                }
            }
            eps[i] = std::sqrt(best.back());
        }
    }
    return eps;
}

}  // namespace detail

struct EntropyEstimate {
    double value = 0.0;
    bool jittered = false;  // some k-NN distance hit the 1e-12 floor
};

// H(m|g) = -H_diff(m) + E^m[U] with H_diff from the Kozachenko-Leonenko
// k-nearest-neighbor estimator (k = 3 by default):
//   H_diff = psi(N) - psi(k) + log V_n + (n/N) sum_i log eps_i.
inline EntropyEstimate entropy_relative_to_g(const ParticleCloud& cloud,
                                             const Objective& objective, int k = 3) {
    const std::size_t n = cloud.size();
    if (n < 2) throw ContractViolation("entropy_relative_to_g: needs at least 2 particles");
    const auto eps = detail::knn_distances(cloud, k);
    EntropyEstimate est;
    double log_sum = 0.0;
    for (double e : eps) {
        if (e < 1e-12) {
            e = 1e-12;
            est.jittered = true;
        }
        log_sum += std::log(e);
    }
    const double h_diff = digamma(static_cast<double>(n)) - digamma(static_cast<double>(k)) +
                          std::log(unit_ball_volume(cloud.dim())) +
                          static_cast<double>(cloud.dim()) * log_sum / static_cast<double>(n);
    double mean_u = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_u += objective.potential(cloud.particle(i));
    mean_u /= static_cast<double>(n);
    est.value = -h_diff + mean_u;
    return est;
}

// Exact empirical W1 between equal-size 1-D clouds: sort both, average the
// coordinate gaps.
inline double wasserstein1_1d(const ParticleCloud& a, const ParticleCloud& b) {
    if (a.dim() != 1 || b.dim() != 1)
        throw ContractViolation("wasserstein1_1d: clouds must be one-dimensional");
    if (a.size() != b.size())
        throw ContractViolation("wasserstein1_1d: clouds must have equal size");
    std::vector<double> xs(a.flat().begin(), a.flat().end());
    std::vector<double> ys(b.flat().begin(), b.flat().end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += std::abs(xs[i] - ys[i]);
    return acc / static_cast<double>(xs.size());
}

struct FixedPointResidualParams {
    double grid_half_width = 6.0;
    std::size_t grid_nodes = 2001;
    std::size_t hist_bins = 50;
    double hist_lo = -4.0;
    double hist_hi = 4.0;
};

// Total-variation distance between the cloud's 50-bin histogram density and
// the quadrature-normalized best-response density Phi(cloud). Cloud mass
// outside the histogram window counts fully toward the distance.
inline double fixed_point_residual_1d(const ParticleCloud& cloud, const Objective& objective,
                                      double sigma2,
                                      const FixedPointResidualParams& params = {}) {
    if (cloud.dim() != 1)
        throw ContractViolation("fixed_point_residual_1d: cloud must be one-dimensional");
    const auto frozen = objective.freeze(cloud);
    const Grid1d grid = Grid1d::uniform(params.grid_half_width, params.grid_nodes);
    const auto target = normalized_density(grid, [&](double x) {
        return gibbs_log_density_unnormalized(objective, *frozen, std::span{&x, 1}, sigma2);
    });

    const double bin_width =
        (params.hist_hi - params.hist_lo) / static_cast<double>(params.hist_bins);
    std::vector<double> hist(params.hist_bins, 0.0);
    std::size_t outside = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double x = cloud.particle(i)[0];
        if (x < params.hist_lo || x >= params.hist_hi) {
            ++outside;
            continue;
        }
        const auto b = std::min(params.hist_bins - 1,
                                static_cast<std::size_t>((x - params.hist_lo) / bin_width));
        hist[b] += 1.0;
    }
    const double inv_mass = 1.0 / (static_cast<double>(cloud.size()) * bin_width);
    for (double& v : hist) v *= inv_mass;

    auto hist_at = [&](double x) {
        if (x < params.hist_lo || x >= params.hist_hi) return 0.0;
        const auto b = std::min(params.hist_bins - 1,
                                static_cast<std::size_t>((x - params.hist_lo) / bin_width));
        return hist[b];
    };
    std::vector<double> abs_diff(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i)
        abs_diff[i] = std::abs(hist_at(grid.nodes[i]) - target[i]);
    const double out_frac = static_cast<double>(outside) / static_cast<double>(cloud.size());
    return 0.5 * (trapezoid(grid, abs_diff) + out_frac);
}

// Snapshot with the free-energy decomposition identity built in.
inline MetricsSnapshot make_snapshot(const Objective& objective, const ParticleCloud& cloud,
                                     double sigma2_half) {
    MetricsSnapshot snap;
    snap.objective_value = objective.value(cloud);
    snap.validation_error = objective.validation_error(cloud);
    const auto entropy = entropy_relative_to_g(cloud, objective);
    snap.entropy_rel_g = entropy.value;
    snap.entropy_jittered = entropy.jittered;
    snap.free_energy = snap.objective_value + sigma2_half * snap.entropy_rel_g;
    return snap;
}

}  // namespace efp
