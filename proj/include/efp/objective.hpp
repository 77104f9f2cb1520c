#pragma once

// Mean-field objectives: F(m), its linear functional derivative
// dF/dm(m, x), the intrinsic derivative DF(m, x) = grad_x dF/dm(m, x), and
// the reference Gibbs potential U with grad U. Two concrete objectives are
// provided: the two-layer-network quadratic loss and a measure-independent
// toy objective with closed-form fixed point.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <utility>

#include "efp/types.hpp"

namespace efp {

// U(x) = |x|^2 / 2 + (n/2) log(2*pi), so that integral of exp(-U) is 1.
// The additive constant makes free-energy values absolute.
inline double reference_potential(std::span<const double> x) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    return 0.5 * sq + 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi);
}

// grad U(x) = x
inline void reference_gradient(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i];
}

// Derivative evaluations against a measure held fixed (the outer cloud
// during one inner run). Implementations cache whatever depends only on the
// frozen measure.
class FrozenObjective {
public:
    virtual ~FrozenObjective() = default;
    // dF/dm(m, x)
    virtual double linear(std::span<const double> x) const = 0;
    // DF(m, x) = grad_x dF/dm(m, x)
    virtual void intrinsic(std::span<const double> x, std::span<double> out) const = 0;
};

class Objective {
public:
    virtual ~Objective() = default;

    virtual int dim() const = 0;
    // F(m) for the empirical measure of the cloud
    virtual double value(const ParticleCloud& cloud) const = 0;
    virtual std::unique_ptr<FrozenObjective> freeze(const ParticleCloud& cloud) const = 0;
    // quadratic error on the validation grid; objectives without one return nullopt
    virtual std::optional<double> validation_error(const ParticleCloud&) const {
        return std::nullopt;
    }

    double linear_derivative(const ParticleCloud& cloud, std::span<const double> x) const {
        return freeze(cloud)->linear(x);
    }
    Vec intrinsic_derivative(const ParticleCloud& cloud, std::span<const double> x) const {
        Vec out(x.size());
        freeze(cloud)->intrinsic(x, out);
        return out;
    }

    double potential(std::span<const double> x) const { return reference_potential(x); }
    void potential_gradient(std::span<const double> x, std::span<double> out) const {
        reference_gradient(x, out);
    }
};

// Two-layer network with quadratic loss,
//   F(m) = 1/(2K) sum_k (y_k - E^m[h(beta) phi(alpha . z_k + gamma)])^2.
// phi is the modified ReLU clamped to [0, 5]; h truncates beta to [-5, 5].
// Subgradient convention at the kinks: derivative 0 on the closed
// saturation set (measure zero at the kink points themselves).
class NnObjective : public Objective {
public:
    explicit NnObjective(Dataset data) : data_(std::move(data)) { data_.validate(); }

    static double activation(double t) { return t <= 0.0 ? 0.0 : (t >= 5.0 ? 5.0 : t); }
    static double activation_deriv(double t) { return (t > 0.0 && t < 5.0) ? 1.0 : 0.0; }
    static double truncation(double b) { return b <= -5.0 ? -5.0 : (b >= 5.0 ? 5.0 : b); }
    static double truncation_deriv(double b) { return (b > -5.0 && b < 5.0) ? 1.0 : 0.0; }

    const Dataset& dataset() const { return data_; }
    int dim() const override { return data_.feature_dim + 2; }

    // phi_hat(x, z) = h(beta) phi(alpha . z + gamma), x = (beta, alpha, gamma)
    static double unit_output(std::span<const double> x, std::span<const double> z) {
        const int d = static_cast<int>(z.size());
        double pre = x[static_cast<std::size_t>(d) + 1];
        for (int j = 0; j < d; ++j) pre += x[static_cast<std::size_t>(j) + 1] * z[j];
        return truncation(x[0]) * activation(pre);
    }

    // (1/N) sum_i phi_hat(x_i, z)
    double network_output(const ParticleCloud& cloud, std::span<const double> z) const {
        if (cloud.dim() != dim())
            throw ContractViolation("network_output: cloud dimension != d + 2");
        double sum = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) sum += unit_output(cloud.particle(i), z);
        return sum / static_cast<double>(cloud.size());
    }

    double value(const ParticleCloud& cloud) const override {
        return half_mse(cloud, data_.features, data_.labels);
    }

    std::optional<double> validation_error(const ParticleCloud& cloud) const override {
        if (data_.val_size() == 0) return std::nullopt;
        return half_mse(cloud, data_.val_features, data_.val_labels);
    }

    std::unique_ptr<FrozenObjective> freeze(const ParticleCloud& cloud) const override;

private:
    double half_mse(const ParticleCloud& cloud, const std::vector<double>& feats,
                    const std::vector<double>& labs) const {
        const auto count = labs.size();
        double acc = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            std::span<const double> z{feats.data() + k * static_cast<std::size_t>(data_.feature_dim),
                                      static_cast<std::size_t>(data_.feature_dim)};
            const double r = network_output(cloud, z) - labs[k];
            acc += r * r;
        }
        return 0.5 * acc / static_cast<double>(count);
    }

    Dataset data_;
};

// Residuals r_k = E^m[phi_hat(., z_k)] - y_k are fixed once the measure is
// frozen; every inner-loop evaluation is then O(K).
class NnFrozen : public FrozenObjective {
public:
    NnFrozen(const NnObjective& obj, const ParticleCloud& cloud) : obj_(obj) {
        const auto& data = obj.dataset();
        residuals_.resize(data.size());
        for (std::size_t k = 0; k < data.size(); ++k)
            residuals_[k] = obj.network_output(cloud, data.feature(k)) - data.labels[k];
    }

    // (1/K) sum_k r_k phi_hat(x, z_k)
    double linear(std::span<const double> x) const override {
        const auto& data = obj_.dataset();
        double acc = 0.0;
        for (std::size_t k = 0; k < data.size(); ++k)
            acc += residuals_[k] * NnObjective::unit_output(x, data.feature(k));
        return acc / static_cast<double>(data.size());
    }

    // DF_beta  = (1/K) sum_k r_k h'(beta) phi(pre_k)
    // DF_alpha = (1/K) sum_k r_k h(beta) phi'(pre_k) z_k
    // DF_gamma = (1/K) sum_k r_k h(beta) phi'(pre_k)
    void intrinsic(std::span<const double> x, std::span<double> out) const override {
        const auto& data = obj_.dataset();
        const int d = data.feature_dim;
        const double beta = x[0];
        const double hb = NnObjective::truncation(beta);
        const double dhb = NnObjective::truncation_deriv(beta);
        for (double& v : out) v = 0.0;
        for (std::size_t k = 0; k < data.size(); ++k) {
            const auto z = data.feature(k);
            double pre = x[static_cast<std::size_t>(d) + 1];
            for (int j = 0; j < d; ++j) pre += x[static_cast<std::size_t>(j) + 1] * z[j];
            const double r = residuals_[k];
            out[0] += r * dhb * NnObjective::activation(pre);
            const double w = r * hb * NnObjective::activation_deriv(pre);
            for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j) + 1] += w * z[j];
            out[static_cast<std::size_t>(d) + 1] += w;
        }
        const double inv_k = 1.0 / static_cast<double>(data.size());
        for (double& v : out) v *= inv_k;
    }

    std::span<const double> residuals() const { return residuals_; }

private:
    const NnObjective& obj_;
    std::vector<double> residuals_;
};

inline std::unique_ptr<FrozenObjective> NnObjective::freeze(const ParticleCloud& cloud) const {
    if (cloud.dim() != dim()) throw ContractViolation("freeze: cloud dimension != d + 2");
    return std::make_unique<NnFrozen>(*this, cloud);
}

// One-dimensional objective with measure-independent linear derivative,
//   F(m) = E^m[v],  dF/dm(m, x) = v(x),  DF(m, x) = v'(x).
// The best-response map is then constant and the fixed point has density
// proportional to exp(-(2/sigma^2) v(x) - U(x)), which is Gaussian for
// quadratic v. Used as the closed-form oracle problem.
class ToyObjective : public Objective {
public:
    ToyObjective(std::function<double(double)> v, std::function<double(double)> dv)
        : v_(std::move(v)), dv_(std::move(dv)) {}

    static ToyObjective quadratic() {
        return ToyObjective([](double x) { return 0.5 * x * x; }, [](double x) { return x; });
    }
    static ToyObjective zero() {
        return ToyObjective([](double) { return 0.0; }, [](double) { return 0.0; });
    }

    int dim() const override { return 1; }
    double v(double x) const { return v_(x); }
    double dv(double x) const { return dv_(x); }

    double value(const ParticleCloud& cloud) const override {
        double acc = 0.0;
        for (std::size_t i = 0; i < cloud.size(); ++i) acc += v_(cloud.particle(i)[0]);
        return acc / static_cast<double>(cloud.size());
    }

    std::unique_ptr<FrozenObjective> freeze(const ParticleCloud&) const override {
        struct Frozen : FrozenObjective {
            explicit Frozen(const ToyObjective& o) : obj(o) {}
            double linear(std::span<const double> x) const override { return obj.v(x[0]); }
            void intrinsic(std::span<const double> x, std::span<double> out) const override {
                out[0] = obj.dv(x[0]);
            }
            const ToyObjective& obj;
        };
        return std::make_unique<Frozen>(*this);
    }

private:
    std::function<double(double)> v_;
    std::function<double(double)> dv_;
};

}  // namespace efp
