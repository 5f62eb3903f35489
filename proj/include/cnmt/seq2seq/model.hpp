#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnmt/charembed/char_cnn.hpp"
#include "cnmt/corpus/text.hpp"
#include "cnmt/corpus/vocabulary.hpp"
#include "cnmt/seq2seq/attention.hpp"
#include "cnmt/seq2seq/config.hpp"
#include "cnmt/seq2seq/gru.hpp"

namespace cnmt::seq2seq {

struct Vocabularies {
    charembed::CharVocabulary chars;
    corpus::Vocabulary source{corpus::kWordReserved};
    corpus::Vocabulary target{corpus::kWordReserved};
};

/// A source sentence in every form the model may need.
struct SourceSentence {
    corpus::Tokens words;
    std::vector<charembed::CharIds> chars;
    std::vector<int> ids;
};

template <typename T>
struct DecoderStep {
    num::Tensor<T> state;   // H
    num::Tensor<T> weights; // I
    num::Tensor<T> context; // 2H
    num::Tensor<T> logits;  // target vocabulary
};

/// Bidirectional GRU encoder over character-CNN (or word-table) source
/// vectors, additive attention, GRU decoder with an affine output layer.
template <typename T>
class Model {
  public:
    Model(ModelConfig cfg, Vocabularies vocabs, std::uint64_t seed) : cfg_(std::move(cfg)), vocabs_(std::move(vocabs)) {
        sync_size(cfg_.char_vocab_size, vocabs_.chars.size(), "character");
        sync_size(cfg_.source_vocab_size, vocabs_.source.size(), "source");
        sync_size(cfg_.target_vocab_size, vocabs_.target.size(), "target");
        cfg_.validate();
        num::Rng rng(seed);
        const double s = cfg_.init_scale;
        const std::size_t h = cfg_.hidden;
        const std::size_t e = cfg_.source_dim();
        const std::size_t et = cfg_.target_embed_dim;
        const std::size_t vt = vocabs_.target.size();
        if (cfg_.source_embedding == SourceEmbedding::characters) {
            char_cnn_.emplace(cfg_.char_cnn, vocabs_.chars.size(), params_, rng);
        } else {
            src_embed_ = params_.add("src.embed", num::Tensor<T>::zeros({vocabs_.source.size(), e}));
            num::fill_uniform(src_embed_, rng, -s, s);
            for (std::size_t j = 0; j < e; ++j) {
                src_embed_.data()[j] = T(0); // PAD row
            }
        }
        enc_fwd_ = make_gru(params_, "enc.fwd", e, h, rng, s);
        enc_bwd_ = make_gru(params_, "enc.bwd", e, h, rng, s);
        init_W_ = params_.add("dec.init.W", num::Tensor<T>::zeros({h, h}));
        num::fill_uniform(init_W_, rng, -s, s);
        init_b_ = params_.add("dec.init.b", num::Tensor<T>::zeros({h}));
        tgt_embed_ = params_.add("tgt.embed", num::Tensor<T>::zeros({vt, et}));
        num::fill_uniform(tgt_embed_, rng, -s, s);
        attn_ = make_attention(params_, h, 2 * h, cfg_.attention_dim, rng, s);
        dec_gru_ = make_gru(params_, "dec.gru", et + 2 * h, h, rng, s);
        out_W_ = params_.add("out.W", num::Tensor<T>::zeros({h + 2 * h + et, vt}));
        num::fill_uniform(out_W_, rng, -s, s);
        out_b_ = params_.add("out.b", num::Tensor<T>::zeros({vt}));
    }

    const ModelConfig& config() const { return cfg_; }
    const Vocabularies& vocabularies() const { return vocabs_; }
    num::ParamSet<T>& params() { return params_; }
    const num::ParamSet<T>& params() const { return params_; }
    const AttentionParams<T>& attention() const { return attn_; }
    const GruCellParams<T>& encoder_forward() const { return enc_fwd_; }
    const GruCellParams<T>& encoder_backward() const { return enc_bwd_; }
    const GruCellParams<T>& decoder_gru() const { return dec_gru_; }

    SourceSentence prepare_source(const corpus::Tokens& words) const {
        if (words.empty()) {
            throw PreconditionError("empty source sentence");
        }
        SourceSentence s;
        s.words = words;
        s.ids = vocabs_.source.encode(words);
        if (char_cnn_) {
            s.chars.reserve(words.size());
            for (const auto& w : words) {
                s.chars.push_back(charembed::word_to_char_ids(w, vocabs_.chars, cfg_.char_cnn));
            }
        }
        return s;
    }

    /// Target ids followed by EOS.
    std::vector<int> prepare_target(const corpus::Tokens& words) const {
        auto ids = vocabs_.target.encode(words);
        ids.push_back(corpus::Vocabulary::kEos);
        return ids;
    }

    /// I x E source vectors.
    num::Tensor<T> embed_source(const SourceSentence& src) const {
        if (src.words.empty()) {
            throw PreconditionError("empty source sentence");
        }
        if (char_cnn_) {
            return char_cnn_->embed_sentence(src.chars);
        }
        return num::embedding_rows(src_embed_, src.ids, std::size_t{corpus::Vocabulary::kPad});
    }

    EncodedSource<T> encode(const SourceSentence& src) const {
        auto enc = encode_embeddings(embed_source(src));
        enc.words = src.words;
        enc.ids = src.ids;
        return enc;
    }

    /// Forward GRU left to right, backward GRU right to left, both from zero.
    EncodedSource<T> encode_embeddings(const num::Tensor<T>& emb) const {
        if (emb.rank() != 2 || emb.dim(1) != cfg_.source_dim()) {
            throw ShapeError("encode: expected I x " + std::to_string(cfg_.source_dim()) + " embeddings, got " +
                             num::to_string(emb.shape()));
        }
        const std::size_t len = emb.dim(0);
        std::vector<num::Tensor<T>> xs;
        xs.reserve(len);
        for (std::size_t i = 0; i < len; ++i) {
            xs.push_back(num::row(emb, i));
        }
        std::vector<num::Tensor<T>> fwd(len);
        std::vector<num::Tensor<T>> bwd(len);
        auto h = num::Tensor<T>::zeros({cfg_.hidden});
        for (std::size_t i = 0; i < len; ++i) {
            h = gru_cell(xs[i], h, enc_fwd_);
            fwd[i] = h;
        }
        h = num::Tensor<T>::zeros({cfg_.hidden});
        for (std::size_t i = len; i-- > 0;) {
            h = gru_cell(xs[i], h, enc_bwd_);
            bwd[i] = h;
        }
        std::vector<num::Tensor<T>> rows;
        rows.reserve(len);
        for (std::size_t i = 0; i < len; ++i) {
            rows.push_back(num::concat(std::vector<num::Tensor<T>>{fwd[i], bwd[i]}));
        }
        EncodedSource<T> enc;
        enc.annotations = num::stack_rows(rows);
        enc.backward_first = bwd[0];
        enc.projected = project_annotations(enc.annotations, attn_);
        return enc;
    }

    /// tanh(W_init . backward annotation of position 1 + b_init)
    num::Tensor<T> init_state(const EncodedSource<T>& enc) const {
        return num::tanh(num::add_bias(num::matmul(enc.backward_first, init_W_), init_b_));
    }

    DecoderStep<T> decode_step(int prev_target, const num::Tensor<T>& prev_state, const EncodedSource<T>& enc) const {
        auto att = attend(prev_state, enc, attn_);
        auto emb = num::embedding(tgt_embed_, prev_target);
        auto state = gru_cell(num::concat(std::vector<num::Tensor<T>>{emb, att.context}), prev_state, dec_gru_);
        auto features = num::concat(std::vector<num::Tensor<T>>{state, att.context, emb});
        auto logits = num::add_bias(num::matmul(features, out_W_), out_b_);
        return {state, att.weights, att.context, logits};
    }

    /// Teacher-forced cross-entropy of `target` (which must end with EOS).
    num::Tensor<T> sentence_loss(const SourceSentence& src, const std::vector<int>& target,
                                 std::optional<LossNormalization> norm = std::nullopt) const {
        if (target.empty()) {
            throw PreconditionError("sentence_loss: empty target");
        }
        if (target.back() != corpus::Vocabulary::kEos) {
            throw PreconditionError("sentence_loss: target must end with EOS");
        }
        auto enc = encode(src);
        auto state = init_state(enc);
        int prev = corpus::Vocabulary::kBos;
        std::vector<num::Tensor<T>> terms;
        terms.reserve(target.size());
        for (int t : target) {
            auto step = decode_step(prev, state, enc);
            terms.push_back(num::cross_entropy(step.logits, t));
            state = step.state;
            prev = t;
        }
        auto total = num::add_n(terms);
        if (norm.value_or(cfg_.loss_normalization) == LossNormalization::per_token) {
            return num::scale(total, T(1) / static_cast<T>(target.size()));
        }
        return total;
    }

    /// Sum of log-probabilities of `target` under teacher forcing.
    double log_probability(const SourceSentence& src, const std::vector<int>& target) const {
        num::NoGradScope<T> off;
        return -static_cast<double>(sentence_loss(src, target, LossNormalization::sum).item());
    }

  private:
    static void sync_size(std::size_t& configured, std::size_t actual, const char* what) {
        if (configured == 0) {
            configured = actual;
        } else if (configured != actual) {
            throw ConfigError(std::string("dimension mismatch: config expects a ") + what + " vocabulary of " +
                              std::to_string(configured) + ", got " + std::to_string(actual));
        }
    }

    ModelConfig cfg_;
    Vocabularies vocabs_;
    num::ParamSet<T> params_;
    std::optional<charembed::CharCnn<T>> char_cnn_;
    num::Tensor<T> src_embed_;
    GruCellParams<T> enc_fwd_;
    GruCellParams<T> enc_bwd_;
    num::Tensor<T> init_W_;
    num::Tensor<T> init_b_;
    num::Tensor<T> tgt_embed_;
    AttentionParams<T> attn_;
    GruCellParams<T> dec_gru_;
    num::Tensor<T> out_W_;
    num::Tensor<T> out_b_;
};

/// Copies parameter values by name (e.g. a float model into a double one).
template <typename To, typename From>
void copy_parameters(num::ParamSet<To>& to, const num::ParamSet<From>& from) {
    for (auto& p : to.items()) {
        const auto& src = from.get(p.name);
        if (src.shape() != p.tensor.shape()) {
            throw ShapeError("copy_parameters: " + p.name + " is " + num::to_string(src.shape()) + " vs " +
                             num::to_string(p.tensor.shape()));
        }
        auto dst = p.tensor;
        auto out = dst.data();
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = static_cast<To>(src.data()[i]);
        }
    }
}

} // namespace cnmt::seq2seq
