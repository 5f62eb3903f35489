#pragma once

#include <string>
#include <vector>

#include "cnmt/numcore/init.hpp"
#include "cnmt/numcore/ops.hpp"
#include "cnmt/numcore/params.hpp"

namespace cnmt::seq2seq {

template <typename T>
struct AttentionParams {
    num::Tensor<T> W_a; // H x A, decoder state
    num::Tensor<T> U_a; // 2H x A, annotations
    num::Tensor<T> v;   // A
};

template <typename T>
struct EncodedSource {
    num::Tensor<T> annotations;    // I x 2H, forward ‖ backward
    num::Tensor<T> backward_first; // backward state at position 1
    num::Tensor<T> projected;      // annotations U_a, computed once per sentence
    std::vector<std::string> words;
    std::vector<int> ids; // source vocabulary ids (UNK when unknown)

    std::size_t length() const { return annotations.dim(0); }
};

template <typename T>
struct Attention {
    num::Tensor<T> weights; // I
    num::Tensor<T> context; // 2H
};

template <typename T>
AttentionParams<T> make_attention(num::ParamSet<T>& params, std::size_t hidden, std::size_t annotation_dim,
                                  std::size_t attention_dim, num::Rng& rng, double scale) {
    AttentionParams<T> p;
    p.W_a = params.add("attn.W_a", num::Tensor<T>::zeros({hidden, attention_dim}));
    p.U_a = params.add("attn.U_a", num::Tensor<T>::zeros({annotation_dim, attention_dim}));
    p.v = params.add("attn.v", num::Tensor<T>::zeros({attention_dim}));
    num::fill_uniform(p.W_a, rng, -scale, scale);
    num::fill_uniform(p.U_a, rng, -scale, scale);
    num::fill_uniform(p.v, rng, -scale, scale);
    return p;
}

template <typename T>
num::Tensor<T> project_annotations(const num::Tensor<T>& annotations, const AttentionParams<T>& p) {
    return num::matmul(annotations, p.U_a);
}

/// e_k = v . tanh(s W_a + h_k U_a);  alpha = softmax(e);  c = sum_k alpha_k h_k.
/// Positions with mask[k] == 0 get zero weight.
template <typename T>
Attention<T> attend(const num::Tensor<T>& state, const EncodedSource<T>& enc, const AttentionParams<T>& p,
                    const std::vector<unsigned char>* mask = nullptr) {
    const std::size_t len = enc.length();
    const std::size_t a = p.v.size();
    if (state.rank() != 1 || state.size() != p.W_a.dim(0) || enc.projected.shape() != num::Shape{len, a}) {
        throw ShapeError("attend: state " + num::to_string(state.shape()) + ", projection " +
                         num::to_string(enc.projected.shape()) + " do not fit W_a " + num::to_string(p.W_a.shape()));
    }
    auto hidden = num::tanh(num::add_bias(enc.projected, num::matmul(state, p.W_a)));
    auto scores = num::reshape(num::matmul(hidden, num::reshape(p.v, {a, 1})), {len});
    auto weights = num::softmax(scores, mask);
    return {weights, num::matmul(weights, enc.annotations)};
}

} // namespace cnmt::seq2seq
