#pragma once

// Uniform 1-D quadrature grid with trapezoid-rule normalization, CDF and
// quantile lookup. Backs the exact Gibbs sampler stub and the 1-D
// fixed-point diagnostics. The window [-L, L] must cover essentially all of
// the target's mass (default L = 6, 2001 nodes).

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "efp/types.hpp"

namespace efp {

struct Grid1d {
    double lo = -6.0;
    double hi = 6.0;
    std::vector<double> nodes;

    static Grid1d uniform(double half_width, std::size_t node_count) {
        Grid1d g;
        g.lo = -half_width;
        g.hi = half_width;
        g.nodes.resize(node_count);
        const double step = (g.hi - g.lo) / static_cast<double>(node_count - 1);
        for (std::size_t i = 0; i < node_count; ++i)
            g.nodes[i] = g.lo + step * static_cast<double>(i);
        return g;
    }

    double spacing() const { return nodes[1] - nodes[0]; }
};

inline double trapezoid(const Grid1d& grid, std::span<const double> values) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        acc += 0.5 * (values[i] + values[i + 1]) * (grid.nodes[i + 1] - grid.nodes[i]);
    return acc;
}

// Density proportional to exp(log_density), normalized over the grid. The
// maximum is subtracted before exponentiation to keep the values in range.
inline std::vector<double> normalized_density(const Grid1d& grid,
                                              const std::function<double(double)>& log_density) {
    std::vector<double> dens(grid.nodes.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        dens[i] = log_density(grid.nodes[i]);
        peak = std::max(peak, dens[i]);
    }
    for (double& v : dens) v = std::exp(v - peak);
    const double mass = trapezoid(grid, dens);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw ContractViolation("normalized_density: target has no mass on the grid");
    for (double& v : dens) v /= mass;
    return dens;
}

// Cumulative trapezoid integral of a density; endpoints pinned to [0, 1].
inline std::vector<double> density_cdf(const Grid1d& grid, std::span<const double> density) {
    std::vector<double> cdf(density.size());
    cdf[0] = 0.0;
    for (std::size_t i = 1; i < density.size(); ++i)
        cdf[i] = cdf[i - 1] +
                 0.5 * (density[i] + density[i - 1]) * (grid.nodes[i] - grid.nodes[i - 1]);
    const double total = cdf.back();
    for (double& v : cdf) v /= total;
    cdf.back() = 1.0;
    return cdf;
}

// Inverse CDF by linear interpolation; u in [0, 1].
inline double quantile(const Grid1d& grid, std::span<const double> cdf, double u) {
    if (u <= 0.0) return grid.nodes.front();
    if (u >= 1.0) return grid.nodes.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (cdf[mid] <= u ? lo : hi) = mid;
    }
    const double span = cdf[hi] - cdf[lo];
    const double w = span > 0.0 ? (u - cdf[lo]) / span : 0.5;
    return grid.nodes[lo] + w * (grid.nodes[hi] - grid.nodes[lo]);
}

}  // namespace efp
