#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cnmt/numcore/tensor.hpp"

namespace cnmt::num {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform for a given engine state.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

template <typename T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo, double hi) {
    for (T& v : t.data()) {
        v = static_cast<T>(uniform(rng, lo, hi));
    }
}

template <typename T>
void fill_constant(Tensor<T>& t, T value) {
    for (T& v : t.data()) {
        v = value;
    }
}

/// Square matrix with orthonormal rows: Gram-Schmidt over a uniform random
/// draw (computed in double, then rounded).
template <typename T>
void fill_orthogonal(Tensor<T>& t, Rng& rng) {
    if (t.rank() != 2 || t.dim(0) != t.dim(1)) {
        throw ShapeError("fill_orthogonal needs a square matrix, got " + to_string(t.shape()));
    }
    const std::size_t n = t.dim(0);
    std::vector<double> m(n * n);
    for (auto& v : m) {
        v = uniform(rng, -1.0, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double* ri = m.data() + i * n;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                const double* rj = m.data() + j * n;
                double proj = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    proj += ri[k] * rj[k];
                }
                for (std::size_t k = 0; k < n; ++k) {
                    ri[k] -= proj * rj[k];
                }
            }
        }
        double norm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            norm += ri[k] * ri[k];
        }
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < n; ++k) {
            ri[k] /= norm;
        }
    }
    auto out = t.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i] = static_cast<T>(m[i]);
    }
}

} // namespace cnmt::num
