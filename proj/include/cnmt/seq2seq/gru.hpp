#pragma once

#include <string>

#include "cnmt/numcore/init.hpp"
#include "cnmt/numcore/ops.hpp"
#include "cnmt/numcore/params.hpp"

namespace cnmt::seq2seq {

template <typename T>
struct GruCellParams {
    num::Tensor<T> W_z, W_r, W; // input_dim x H
    num::Tensor<T> U_z, U_r, U; // H x H
    num::Tensor<T> b_z, b_r, b; // H

    std::size_t input_dim() const { return W.dim(0); }
    std::size_t hidden() const { return U.dim(0); }
};

/// Registers "<prefix>.W_z" ... "<prefix>.b" in `params`. Input weights are
/// uniform, recurrent weights orthogonal, biases zero.
template <typename T>
GruCellParams<T> make_gru(num::ParamSet<T>& params, const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden, num::Rng& rng, double scale) {
    GruCellParams<T> p;
    auto input = [&](const char* name) {
        auto t = params.add(prefix + "." + name, num::Tensor<T>::zeros({input_dim, hidden}));
        num::fill_uniform(t, rng, -scale, scale);
        return t;
    };
    auto recurrent = [&](const char* name) {
        auto t = params.add(prefix + "." + name, num::Tensor<T>::zeros({hidden, hidden}));
        num::fill_orthogonal(t, rng);
        return t;
    };
    auto bias = [&](const char* name) { return params.add(prefix + "." + name, num::Tensor<T>::zeros({hidden})); };
    p.W_z = input("W_z");
    p.W_r = input("W_r");
    p.W = input("W");
    p.U_z = recurrent("U_z");
    p.U_r = recurrent("U_r");
    p.U = recurrent("U");
    p.b_z = bias("b_z");
    p.b_r = bias("b_r");
    p.b = bias("b");
    return p;
}

/// z = sigmoid(x W_z + h U_z + b_z), r = sigmoid(x W_r + h U_r + b_r),
/// h~ = tanh(x W + (r * h) U + b), h' = (1 - z) * h + z * h~
template <typename T>
num::Tensor<T> gru_cell(const num::Tensor<T>& x, const num::Tensor<T>& h_prev, const GruCellParams<T>& p) {
    const std::size_t d = p.input_dim();
    const std::size_t h = p.hidden();
    if (x.rank() != 1 || x.size() != d || h_prev.rank() != 1 || h_prev.size() != h) {
        throw ShapeError("gru_cell: input " + num::to_string(x.shape()) + " and state " +
                         num::to_string(h_prev.shape()) + " do not fit a cell of input " + std::to_string(d) +
                         ", hidden " + std::to_string(h));
    }
    using num::add;
    using num::add_bias;
    using num::matmul;
    auto z = num::sigmoid(add_bias(add(matmul(x, p.W_z), matmul(h_prev, p.U_z)), p.b_z));
    auto r = num::sigmoid(add_bias(add(matmul(x, p.W_r), matmul(h_prev, p.U_r)), p.b_r));
    auto candidate = num::tanh(add_bias(add(matmul(x, p.W), matmul(num::mul(r, h_prev), p.U)), p.b));
    return add(num::mul(num::one_minus(z), h_prev), num::mul(z, candidate));
}

} // namespace cnmt::seq2seq
