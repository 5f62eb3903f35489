#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cnmt/numcore/tensor.hpp"

// Differentiable operations. Every op computes its forward value eagerly and,
// when recording is active and an input requires a gradient, appends the exact
// backward rule to the active tape. No broadcasting except add_bias.

namespace cnmt::num {

namespace detail {

template <typename T, typename... Rest>
Tape<T>* recording_tape(const Tensor<T>& first, const Rest&... rest) {
    Tape<T>* tape = active_tape<T>();
    if (tape == nullptr) {
        return nullptr;
    }
    const bool any = first.requires_grad() || (rest.requires_grad() || ...);
    return any ? tape : nullptr;
}

template <typename T>
Tape<T>* recording_tape(std::span<const Tensor<T>> inputs) {
    Tape<T>* tape = active_tape<T>();
    if (tape == nullptr) {
        return nullptr;
    }
    for (const auto& t : inputs) {
        if (t.requires_grad()) {
            return tape;
        }
    }
    return nullptr;
}

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

template <typename T>
T sigmoid_value(T x) {
    if (x >= T(0)) {
        return T(1) / (T(1) + std::exp(-x));
    }
    const T e = std::exp(x);
    return e / (T(1) + e);
}

} // namespace detail

/// a[m x k] * b[k x n] -> [m x n]. A rank-1 `a` is treated as a row vector
/// and yields a rank-1 result of length n.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    const bool vec = a.rank() == 1;
    if ((a.rank() != 1 && a.rank() != 2) || b.rank() != 2) {
        throw ShapeError("matmul: unsupported ranks " + to_string(a.shape()) + " x " + to_string(b.shape()));
    }
    const std::size_t m = vec ? 1 : a.dim(0);
    const std::size_t k = vec ? a.dim(0) : a.dim(1);
    const std::size_t n = b.dim(1);
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions disagree " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
    }
    std::vector<T> c(m * n, T(0));
    auto A = a.data();
    auto B = b.data();
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T aip = A[i * k + p];
            if (aip == T(0)) {
                continue;
            }
            const T* brow = B.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += aip * brow[j];
            }
        }
    }
    Tape<T>* tape = detail::recording_tape(a, b);
    Tensor<T> out(vec ? Shape{n} : Shape{m, n}, std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([a, b, out, m, k, n] {
            if (!out.has_grad()) {
                return;
            }
            auto G = out.grad();
            auto A = a.data();
            auto B = b.data();
            if (a.requires_grad()) {
                auto dA = a.grad_mut();
                for (std::size_t i = 0; i < m; ++i) {
                    const T* grow = G.data() + i * n;
                    for (std::size_t p = 0; p < k; ++p) {
                        const T* brow = B.data() + p * n;
                        T acc = T(0);
                        for (std::size_t j = 0; j < n; ++j) {
                            acc += grow[j] * brow[j];
                        }
                        dA[i * k + p] += acc;
                    }
                }
            }
            if (b.requires_grad()) {
                auto dB = b.grad_mut();
                for (std::size_t i = 0; i < m; ++i) {
                    const T* grow = G.data() + i * n;
                    for (std::size_t p = 0; p < k; ++p) {
                        const T aip = A[i * k + p];
                        if (aip == T(0)) {
                            continue;
                        }
                        T* dbrow = dB.data() + p * n;
                        for (std::size_t j = 0; j < n; ++j) {
                            dbrow[j] += aip * grow[j];
                        }
                    }
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_same_shape("add", a, b);
    std::vector<T> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = a.data()[i] + b.data()[i];
    }
    Tape<T>* tape = detail::recording_tape(a, b);
    Tensor<T> out(a.shape(), std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([a, b, out] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            for (const Tensor<T>* in : {&a, &b}) {
                if (in->requires_grad()) {
                    auto d = in->grad_mut();
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        d[i] += g[i];
                    }
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_same_shape("sub", a, b);
    std::vector<T> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = a.data()[i] - b.data()[i];
    }
    Tape<T>* tape = detail::recording_tape(a, b);
    Tensor<T> out(a.shape(), std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([a, b, out] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            if (a.requires_grad()) {
                auto d = a.grad_mut();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    d[i] += g[i];
                }
            }
            if (b.requires_grad()) {
                auto d = b.grad_mut();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    d[i] -= g[i];
                }
            }
        });
    }
    return out;
}

/// Hadamard product.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    detail::require_same_shape("mul", a, b);
    std::vector<T> c(a.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = a.data()[i] * b.data()[i];
    }
    Tape<T>* tape = detail::recording_tape(a, b);
    Tensor<T> out(a.shape(), std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([a, b, out] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            if (a.requires_grad()) {
                auto d = a.grad_mut();
                auto bv = b.data();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    d[i] += g[i] * bv[i];
                }
            }
            if (b.requires_grad()) {
                auto d = b.grad_mut();
                auto av = a.data();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    d[i] += g[i] * av[i];
                }
            }
        });
    }
    return out;
}

/// x[n] + bias[n], or x[m x n] + bias[n] added to every row.
template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
    if (bias.rank() != 1 || x.rank() < 1 || x.rank() > 2 || x.shape().back() != bias.dim(0)) {
        throw ShapeError("add_bias: cannot add " + to_string(bias.shape()) + " to " + to_string(x.shape()));
    }
    const std::size_t n = bias.dim(0);
    const std::size_t rows = x.size() / n;
    std::vector<T> c(x.data().begin(), x.data().end());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) {
            c[r * n + j] += bias.data()[j];
        }
    }
    Tape<T>* tape = detail::recording_tape(x, bias);
    Tensor<T> out(x.shape(), std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([x, bias, out, rows, n] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            if (x.requires_grad()) {
                auto d = x.grad_mut();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    d[i] += g[i];
                }
            }
            if (bias.requires_grad()) {
                auto d = bias.grad_mut();
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < n; ++j) {
                        d[j] += g[r * n + j];
                    }
                }
            }
        });
    }
    return out;
}

namespace detail {

// Pointwise map whose derivative is expressed through the input and output.
template <typename T, typename Fwd, typename Deriv>
Tensor<T> pointwise(const Tensor<T>& x, Fwd fwd, Deriv deriv) {
    std::vector<T> y(x.size());
    auto xv = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = fwd(xv[i]);
    }
    Tape<T>* tape = recording_tape(x);
    Tensor<T> out(x.shape(), std::move(y), tape != nullptr);
    if (tape != nullptr) {
        tape->record([x, out, deriv] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            auto xv = x.data();
            auto yv = out.data();
            auto d = x.grad_mut();
            for (std::size_t i = 0; i < g.size(); ++i) {
                d[i] += g[i] * deriv(xv[i], yv[i]);
            }
        });
    }
    return out;
}

} // namespace detail

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
    return detail::pointwise(
        x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    return detail::pointwise(
        x, [](T v) { return detail::sigmoid_value(v); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    return detail::pointwise(
        x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

/// 1 - x
template <typename T>
Tensor<T> one_minus(const Tensor<T>& x) {
    return detail::pointwise(
        x, [](T v) { return T(1) - v; }, [](T, T) { return T(-1); });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
    return detail::pointwise(
        x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

enum class Elementwise { tanh, sigmoid, relu, add, mul };

template <typename T>
Tensor<T> elementwise(Elementwise fn, const Tensor<T>& x, const Tensor<T>& y = {}) {
    switch (fn) {
    case Elementwise::tanh:
        return tanh(x);
    case Elementwise::sigmoid:
        return sigmoid(x);
    case Elementwise::relu:
        return relu(x);
    case Elementwise::add:
        return add(x, y);
    case Elementwise::mul:
        return mul(x, y);
    }
    throw ContractError("elementwise: unknown function");
}

/// Concatenates rank-1 tensors.
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) {
        throw PreconditionError("concat: no inputs");
    }
    std::vector<T> c;
    for (const auto& p : parts) {
        if (p.rank() != 1) {
            throw ShapeError("concat: expected rank-1 inputs, got " + to_string(p.shape()));
        }
        c.insert(c.end(), p.data().begin(), p.data().end());
    }
    Tape<T>* tape = detail::recording_tape<T>(std::span<const Tensor<T>>(parts));
    const std::size_t total = c.size();
    Tensor<T> out(Shape{total}, std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([parts, out] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            std::size_t offset = 0;
            for (const auto& p : parts) {
                if (p.requires_grad()) {
                    auto d = p.grad_mut();
                    for (std::size_t i = 0; i < d.size(); ++i) {
                        d[i] += g[offset + i];
                    }
                }
                offset += p.size();
            }
        });
    }
    return out;
}

/// Stacks equal-length rank-1 tensors as the rows of a matrix.
template <typename T>
Tensor<T> stack_rows(const std::vector<Tensor<T>>& rows) {
    if (rows.empty()) {
        throw PreconditionError("stack_rows: no rows");
    }
    const std::size_t n = rows.front().size();
    for (const auto& r : rows) {
        if (r.rank() != 1 || r.size() != n) {
            throw ShapeError("stack_rows: row shape " + to_string(r.shape()) + " differs from [" +
                             std::to_string(n) + "]");
        }
    }
    Tensor<T> flat = concat(rows);
    std::vector<T> c(flat.data().begin(), flat.data().end());
    Tape<T>* tape = detail::recording_tape(flat);
    Tensor<T> out(Shape{rows.size(), n}, std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([flat, out] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            auto d = flat.grad_mut();
            for (std::size_t i = 0; i < g.size(); ++i) {
                d[i] += g[i];
            }
        });
    }
    return out;
}

/// Same values under a new shape with the same element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
    if (numel(shape) != x.size()) {
        throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
    }
    std::vector<T> c(x.data().begin(), x.data().end());
    Tape<T>* tape = detail::recording_tape(x);
    Tensor<T> out(std::move(shape), std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([x, out] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            auto d = x.grad_mut();
            for (std::size_t i = 0; i < g.size(); ++i) {
                d[i] += g[i];
            }
        });
    }
    return out;
}

/// Row i of a matrix as a rank-1 tensor.
template <typename T>
Tensor<T> row(const Tensor<T>& x, std::size_t i) {
    if (x.rank() != 2) {
        throw ShapeError("row: expected a matrix, got " + to_string(x.shape()));
    }
    if (i >= x.dim(0)) {
        throw IndexError("row: index " + std::to_string(i) + " out of range for " + to_string(x.shape()));
    }
    const std::size_t n = x.dim(1);
    std::vector<T> c(x.data().begin() + static_cast<std::ptrdiff_t>(i * n),
                     x.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    Tape<T>* tape = detail::recording_tape(x);
    Tensor<T> out(Shape{n}, std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([x, out, i, n] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            auto d = x.grad_mut();
            for (std::size_t j = 0; j < n; ++j) {
                d[i * n + j] += g[j];
            }
        });
    }
    return out;
}

/// Looks up rows of an embedding table. Row `frozen_row`, if given, reads as
/// zeros and never receives a gradient.
template <typename T>
Tensor<T> embedding_rows(const Tensor<T>& table, const std::vector<int>& ids,
                         std::optional<std::size_t> frozen_row = std::nullopt) {
    if (table.rank() != 2) {
        throw ShapeError("embedding: table must be a matrix, got " + to_string(table.shape()));
    }
    if (ids.empty()) {
        throw PreconditionError("embedding: empty id sequence");
    }
    const std::size_t vocab = table.dim(0);
    const std::size_t d = table.dim(1);
    std::vector<T> c;
    c.reserve(ids.size() * d);
    for (int id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
            throw IndexError("embedding: id " + std::to_string(id) + " outside table of " + std::to_string(vocab) +
                             " rows");
        }
        if (frozen_row && *frozen_row == static_cast<std::size_t>(id)) {
            c.insert(c.end(), d, T(0));
            continue;
        }
        auto first = table.data().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(id) * d);
        c.insert(c.end(), first, first + static_cast<std::ptrdiff_t>(d));
    }
    Tape<T>* tape = detail::recording_tape(table);
    Tensor<T> out(Shape{ids.size(), d}, std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([table, out, ids, d, frozen_row] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            auto dt = table.grad_mut();
            for (std::size_t t = 0; t < ids.size(); ++t) {
                const auto id = static_cast<std::size_t>(ids[t]);
                if (frozen_row && *frozen_row == id) {
                    continue;
                }
                for (std::size_t j = 0; j < d; ++j) {
                    dt[id * d + j] += g[t * d + j];
                }
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, int id) {
    Tensor<T> rows = embedding_rows(table, std::vector<int>{id});
    return row(rows, 0);
}

/// Valid temporal convolution: seq[T x d], kernel[w x d x n], bias[n] ->
/// [(T - w + 1) x n].
template <typename T>
Tensor<T> conv1d_time(const Tensor<T>& seq, const Tensor<T>& kernel, const Tensor<T>& bias) {
    if (seq.rank() != 2 || kernel.rank() != 3 || bias.rank() != 1) {
        throw ShapeError("conv1d_time: expected seq[T x d], kernel[w x d x n], bias[n], got " +
                         to_string(seq.shape()) + ", " + to_string(kernel.shape()) + ", " + to_string(bias.shape()));
    }
    const std::size_t len = seq.dim(0);
    const std::size_t d = seq.dim(1);
    const std::size_t w = kernel.dim(0);
    const std::size_t n = kernel.dim(2);
    if (kernel.dim(1) != d || bias.dim(0) != n) {
        throw ShapeError("conv1d_time: kernel " + to_string(kernel.shape()) + " incompatible with seq " +
                         to_string(seq.shape()) + " and bias " + to_string(bias.shape()));
    }
    if (len < w) {
        throw PreconditionError("conv1d_time: sequence length " + std::to_string(len) + " shorter than width " +
                                std::to_string(w));
    }
    const std::size_t steps = len - w + 1;
    const std::size_t window = w * d; // consecutive rows are contiguous
    std::vector<T> c(steps * n);
    auto S = seq.data();
    auto K = kernel.data();
    for (std::size_t t = 0; t < steps; ++t) {
        T* orow = c.data() + t * n;
        std::copy(bias.data().begin(), bias.data().end(), orow);
        const T* win = S.data() + t * d;
        for (std::size_t q = 0; q < window; ++q) {
            const T v = win[q];
            if (v == T(0)) {
                continue;
            }
            const T* krow = K.data() + q * n;
            for (std::size_t f = 0; f < n; ++f) {
                orow[f] += v * krow[f];
            }
        }
    }
    Tape<T>* tape = detail::recording_tape(seq, kernel, bias);
    Tensor<T> out(Shape{steps, n}, std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([seq, kernel, bias, out, steps, d, window, n] {
            if (!out.has_grad()) {
                return;
            }
            auto G = out.grad();
            auto S = seq.data();
            auto K = kernel.data();
            if (bias.requires_grad()) {
                auto db = bias.grad_mut();
                for (std::size_t t = 0; t < steps; ++t) {
                    for (std::size_t f = 0; f < n; ++f) {
                        db[f] += G[t * n + f];
                    }
                }
            }
            if (kernel.requires_grad()) {
                auto dK = kernel.grad_mut();
                for (std::size_t t = 0; t < steps; ++t) {
                    const T* win = S.data() + t * d;
                    const T* grow = G.data() + t * n;
                    for (std::size_t q = 0; q < window; ++q) {
                        const T v = win[q];
                        if (v == T(0)) {
                            continue;
                        }
                        T* dk = dK.data() + q * n;
                        for (std::size_t f = 0; f < n; ++f) {
                            dk[f] += v * grow[f];
                        }
                    }
                }
            }
            if (seq.requires_grad()) {
                auto dS = seq.grad_mut();
                for (std::size_t t = 0; t < steps; ++t) {
                    const T* grow = G.data() + t * n;
                    for (std::size_t q = 0; q < window; ++q) {
                        const T* krow = K.data() + q * n;
                        T acc = T(0);
                        for (std::size_t f = 0; f < n; ++f) {
                            acc += krow[f] * grow[f];
                        }
                        dS[t * d + q] += acc;
                    }
                }
            }
        });
    }
    return out;
}

/// Per-column maximum of seq[T x n]. Gradient flows to the first (lowest
/// time index) maximising row of each column.
template <typename T>
Tensor<T> max_over_time(const Tensor<T>& seq) {
    if (seq.rank() != 2) {
        throw ShapeError("max_over_time: expected [T x n], got " + to_string(seq.shape()));
    }
    const std::size_t len = seq.dim(0);
    const std::size_t n = seq.dim(1);
    std::vector<T> c(n);
    std::vector<std::size_t> argmax(n, 0);
    auto S = seq.data();
    for (std::size_t f = 0; f < n; ++f) {
        T best = S[f];
        for (std::size_t t = 1; t < len; ++t) {
            if (S[t * n + f] > best) {
                best = S[t * n + f];
                argmax[f] = t;
            }
        }
        c[f] = best;
    }
    Tape<T>* tape = detail::recording_tape(seq);
    Tensor<T> out(Shape{n}, std::move(c), tape != nullptr);
    if (tape != nullptr) {
        tape->record([seq, out, argmax, n] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            auto d = seq.grad_mut();
            for (std::size_t f = 0; f < n; ++f) {
                d[argmax[f] * n + f] += g[f];
            }
        });
    }
    return out;
}

/// Additive penalty that removes a position from a softmax.
template <typename T>
inline constexpr T kMaskedScore = T(-1e9);

/// Numerically stable softmax of a rank-1 tensor. Positions with mask[i] == 0
/// get the score kMaskedScore before normalisation.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, const std::vector<unsigned char>* mask = nullptr) {
    if (x.rank() != 1) {
        throw ShapeError("softmax: expected a vector, got " + to_string(x.shape()));
    }
    const std::size_t n = x.size();
    if (mask != nullptr && mask->size() != n) {
        throw ShapeError("softmax: mask length " + std::to_string(mask->size()) + " vs " + std::to_string(n));
    }
    std::vector<T> y(x.data().begin(), x.data().end());
    if (mask != nullptr) {
        for (std::size_t i = 0; i < n; ++i) {
            if ((*mask)[i] == 0) {
                y[i] = kMaskedScore<T>;
            }
        }
    }
    const T mx = *std::max_element(y.begin(), y.end());
    T total = T(0);
    for (auto& v : y) {
        v = std::exp(v - mx);
        total += v;
    }
    for (auto& v : y) {
        v /= total;
    }
    Tape<T>* tape = detail::recording_tape(x);
    Tensor<T> out(x.shape(), std::move(y), tape != nullptr);
    if (tape != nullptr) {
        tape->record([x, out, n] {
            if (!out.has_grad()) {
                return;
            }
            auto g = out.grad();
            auto yv = out.data();
            T inner = T(0);
            for (std::size_t i = 0; i < n; ++i) {
                inner += g[i] * yv[i];
            }
            auto d = x.grad_mut();
            for (std::size_t i = 0; i < n; ++i) {
                d[i] += yv[i] * (g[i] - inner);
            }
        });
    }
    return out;
}

/// log(softmax(values)) on plain numbers, for decoding and scoring.
template <typename T>
std::vector<T> log_softmax_values(std::span<const T> values) {
    const T mx = *std::max_element(values.begin(), values.end());
    T total = T(0);
    for (T v : values) {
        total += std::exp(v - mx);
    }
    const T log_z = mx + std::log(total);
    std::vector<T> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = values[i] - log_z;
    }
    return out;
}

/// -log softmax(logits)[target] as a scalar.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, int target) {
    if (logits.rank() != 1) {
        throw ShapeError("cross_entropy: expected logits vector, got " + to_string(logits.shape()));
    }
    const std::size_t n = logits.size();
    if (target < 0 || static_cast<std::size_t>(target) >= n) {
        throw IndexError("cross_entropy: target " + std::to_string(target) + " outside [0, " + std::to_string(n) +
                         ")");
    }
    const auto logp = log_softmax_values<T>(logits.data());
    Tape<T>* tape = detail::recording_tape(logits);
    Tensor<T> out = Tensor<T>::scalar(-logp[static_cast<std::size_t>(target)], tape != nullptr);
    if (tape != nullptr) {
        tape->record([logits, out, logp, target] {
            if (!out.has_grad()) {
                return;
            }
            const T g = out.grad()[0];
            auto d = logits.grad_mut();
            for (std::size_t i = 0; i < logp.size(); ++i) {
                d[i] += g * std::exp(logp[i]);
            }
            d[static_cast<std::size_t>(target)] -= g;
        });
    }
    return out;
}

/// Sum of all entries, as a scalar.
template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    T total = T(0);
    for (T v : x.data()) {
        total += v;
    }
    Tape<T>* tape = detail::recording_tape(x);
    Tensor<T> out = Tensor<T>::scalar(total, tape != nullptr);
    if (tape != nullptr) {
        tape->record([x, out] {
            if (!out.has_grad()) {
                return;
            }
            const T g = out.grad()[0];
            for (T& d : x.grad_mut()) {
                d += g;
            }
        });
    }
    return out;
}

template <typename T>
Tensor<T> dot(const Tensor<T>& a, const Tensor<T>& b) {
    return sum(mul(a, b));
}

/// Sum of scalars.
template <typename T>
Tensor<T> add_n(const std::vector<Tensor<T>>& scalars) {
    if (scalars.empty()) {
        throw PreconditionError("add_n: no inputs");
    }
    T total = T(0);
    for (const auto& s : scalars) {
        total += s.item();
    }
    Tape<T>* tape = detail::recording_tape<T>(std::span<const Tensor<T>>(scalars));
    Tensor<T> out = Tensor<T>::scalar(total, tape != nullptr);
    if (tape != nullptr) {
        tape->record([scalars, out] {
            if (!out.has_grad()) {
                return;
            }
            const T g = out.grad()[0];
            for (const auto& s : scalars) {
                if (s.requires_grad()) {
                    s.grad_mut()[0] += g;
                }
            }
        });
    }
    return out;
}

} // namespace cnmt::num
