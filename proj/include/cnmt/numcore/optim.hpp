#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cnmt/numcore/params.hpp"

namespace cnmt::num {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 1.0; // <= 0 disables clipping
};

/// First/second moment estimates, one array per parameter in ParamSet order.
template <typename T>
struct OptimizerState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<std::vector<T>> first_moment;
    std::vector<std::vector<T>> second_moment;
};

/// Throws NumericalError naming the first parameter with a non-finite
/// gradient entry.
template <typename T>
void check_finite_grads(const ParamSet<T>& params) {
    for (const auto& p : params.items()) {
        for (T g : p.tensor.grad()) {
            if (!std::isfinite(g)) {
                throw NumericalError("non-finite gradient in parameter " + p.name);
            }
        }
    }
}

template <typename T>
double global_grad_norm(const ParamSet<T>& params) {
    double sq = 0.0;
    for (const auto& p : params.items()) {
        for (T g : p.tensor.grad()) {
            sq += static_cast<double>(g) * static_cast<double>(g);
        }
    }
    return std::sqrt(sq);
}

/// Rescales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
template <typename T>
double clip_global_norm(const ParamSet<T>& params, double max_norm) {
    const double norm = global_grad_norm(params);
    if (max_norm > 0.0 && norm > max_norm) {
        const T factor = static_cast<T>(max_norm / norm);
        for (const auto& p : params.items()) {
            if (p.tensor.has_grad()) {
                for (T& g : p.tensor.grad_mut()) {
                    g *= factor;
                }
            }
        }
    }
    return norm;
}

template <typename T>
class Adam {
  public:
    Adam(const ParamSet<T>& params, AdamConfig config) {
        state_.config = config;
        for (const auto& p : params.items()) {
            state_.first_moment.emplace_back(p.tensor.size(), T(0));
            state_.second_moment.emplace_back(p.tensor.size(), T(0));
        }
    }

    /// Clips, then applies one Adam update. Parameters without a gradient are
    /// treated as having a zero gradient. Returns the pre-clip gradient norm.
    double step(ParamSet<T>& params) {
        if (params.size() != state_.first_moment.size()) {
            throw ContractError("optimizer state was built for a different parameter set");
        }
        check_finite_grads(params);
        const double norm = clip_global_norm(params, state_.config.clip_norm);
        ++state_.step;
        const auto& c = state_.config;
        const double t = static_cast<double>(state_.step);
        const T b1 = static_cast<T>(c.beta1);
        const T b2 = static_cast<T>(c.beta2);
        const T corr1 = static_cast<T>(1.0 - std::pow(c.beta1, t));
        const T corr2 = static_cast<T>(1.0 - std::pow(c.beta2, t));
        const T lr = static_cast<T>(c.learning_rate);
        const T eps = static_cast<T>(c.epsilon);
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor<T> tensor = params.items()[i].tensor;
            auto m = std::span<T>(state_.first_moment[i]);
            auto v = std::span<T>(state_.second_moment[i]);
            if (m.size() != tensor.size()) {
                throw ContractError("optimizer moment shape mismatch for " + params.items()[i].name);
            }
            auto w = tensor.data();
            auto g = tensor.grad();
            for (std::size_t k = 0; k < w.size(); ++k) {
                const T gk = g.empty() ? T(0) : g[k];
                m[k] = b1 * m[k] + (T(1) - b1) * gk;
                v[k] = b2 * v[k] + (T(1) - b2) * gk * gk;
                const T mhat = m[k] / corr1;
                const T vhat = v[k] / corr2;
                w[k] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
        return norm;
    }

    OptimizerState<T>& state() { return state_; }
    const OptimizerState<T>& state() const { return state_; }

  private:
    OptimizerState<T> state_;
};

} // namespace cnmt::num
