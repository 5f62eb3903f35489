#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cnmt/charembed/char_vocab.hpp"
#include "cnmt/numcore/init.hpp"
#include "cnmt/numcore/ops.hpp"
#include "cnmt/numcore/params.hpp"

namespace cnmt::charembed {

using CharIds = std::vector<int>;

/// Every filter width must fit in a padded word.
inline constexpr std::size_t kMinCharSequence = 7;
inline constexpr int kMaxFilterWidth = 7;

struct CharCnnConfig {
    std::size_t char_embed_dim = 15;
    std::map<int, std::size_t> filters{{1, 20}, {2, 20}, {3, 20}}; // width -> count
    std::size_t highway_layers = 2;
    std::size_t max_word_len = 30;

    std::size_t output_dim() const {
        std::size_t n = 0;
        for (const auto& [w, count] : filters) {
            n += count;
        }
        return n;
    }

    void validate() const {
        if (char_embed_dim == 0) {
            throw ConfigError("char_embed_dim must be positive");
        }
        if (filters.empty()) {
            throw ConfigError("filter spec is empty");
        }
        for (const auto& [w, count] : filters) {
            if (w < 1 || w > kMaxFilterWidth) {
                throw ConfigError("filter width " + std::to_string(w) + " outside 1..7");
            }
            if (count == 0) {
                throw ConfigError("filter width " + std::to_string(w) + " has zero filters");
            }
        }
        if (max_word_len < 3) {
            throw ConfigError("max_word_len must leave room for BOW, one char and EOW");
        }
    }

    /// Widths 1..7, 620 filters in total; character embeddings of 50.
    static CharCnnConfig full() {
        CharCnnConfig c;
        c.char_embed_dim = 50;
        c.filters = {{1, 50}, {2, 75}, {3, 100}, {4, 100}, {5, 100}, {6, 100}, {7, 95}};
        return c;
    }

    static CharCnnConfig desk() { return CharCnnConfig{}; }
};

/// BOW + character ids + EOW, cut to max_word_len, then right-padded with
/// PAD_CHAR to at least kMinCharSequence.
inline CharIds word_to_char_ids(const std::string& word, const CharVocabulary& vocab, const CharCnnConfig& cfg) {
    if (word.empty()) {
        throw PreconditionError("word_to_char_ids: empty word");
    }
    CharIds ids{CharVocabulary::kBow};
    for (const auto& cp : corpus::split_code_points(word)) {
        ids.push_back(vocab.id(cp));
    }
    ids.push_back(CharVocabulary::kEow);
    if (ids.size() > cfg.max_word_len) {
        ids.resize(cfg.max_word_len);
    }
    if (ids.size() < kMinCharSequence) {
        ids.resize(kMinCharSequence, CharVocabulary::kPad);
    }
    return ids;
}

template <typename T>
struct HighwayParams {
    num::Tensor<T> W_T; // transform gate
    num::Tensor<T> b_T;
    num::Tensor<T> W_H; // transform path
    num::Tensor<T> b_H;
};

/// t = sigmoid(x W_T + b_T);  y = t * relu(x W_H + b_H) + (1 - t) * x
template <typename T>
num::Tensor<T> highway(const num::Tensor<T>& x, const HighwayParams<T>& p) {
    const std::size_t n = x.size();
    if (x.rank() != 1 || p.W_T.shape() != num::Shape{n, n} || p.W_H.shape() != num::Shape{n, n} ||
        p.b_T.shape() != num::Shape{n} || p.b_H.shape() != num::Shape{n}) {
        throw ShapeError("highway: input " + num::to_string(x.shape()) + " incompatible with W_T " +
                         num::to_string(p.W_T.shape()) + " / W_H " + num::to_string(p.W_H.shape()));
    }
    auto gate = num::sigmoid(num::add_bias(num::matmul(x, p.W_T), p.b_T));
    auto transformed = num::relu(num::add_bias(num::matmul(x, p.W_H), p.b_H));
    return num::add(num::mul(gate, transformed), num::mul(num::one_minus(gate), x));
}

/// Character-level word embedder: char lookup, one convolution bank per
/// width, tanh, max over time, concatenation in ascending width order, then
/// the highway stack. Parameters live in the model's ParamSet under "char.".
template <typename T>
class CharCnn {
  public:
    CharCnn(const CharCnnConfig& cfg, std::size_t char_vocab_size, num::ParamSet<T>& params, num::Rng& rng)
        : cfg_(cfg) {
        cfg_.validate();
        if (char_vocab_size <= CharVocabulary::kEow) {
            throw ConfigError("character vocabulary must contain the reserved symbols");
        }
        const std::size_t dc = cfg_.char_embed_dim;
        const std::size_t out = cfg_.output_dim();
        embed_ = params.add("char.embed", num::Tensor<T>::zeros({char_vocab_size, dc}));
        num::fill_uniform(embed_, rng, -0.08, 0.08);
        for (std::size_t j = 0; j < dc; ++j) {
            embed_.data()[j] = T(0); // PAD_CHAR row
        }
        for (const auto& [w, count] : cfg_.filters) {
            const std::string stem = "char.conv.w" + std::to_string(w);
            auto k = params.add(stem + ".kernel",
                                num::Tensor<T>::zeros({static_cast<std::size_t>(w), dc, count}));
            num::fill_uniform(k, rng, -0.08, 0.08);
            auto b = params.add(stem + ".bias", num::Tensor<T>::zeros({count}));
            banks_.push_back({static_cast<std::size_t>(w), k, b});
        }
        for (std::size_t l = 0; l < cfg_.highway_layers; ++l) {
            const std::string stem = "char.hw" + std::to_string(l);
            HighwayParams<T> h;
            h.W_T = params.add(stem + ".W_T", num::Tensor<T>::zeros({out, out}));
            h.b_T = params.add(stem + ".b_T", num::Tensor<T>::zeros({out}));
            h.W_H = params.add(stem + ".W_H", num::Tensor<T>::zeros({out, out}));
            h.b_H = params.add(stem + ".b_H", num::Tensor<T>::zeros({out}));
            num::fill_uniform(h.W_T, rng, -0.08, 0.08);
            num::fill_uniform(h.W_H, rng, -0.08, 0.08);
            num::fill_constant(h.b_T, T(-2)); // start near the carry path
            highways_.push_back(h);
        }
    }

    const CharCnnConfig& config() const { return cfg_; }
    std::size_t output_dim() const { return cfg_.output_dim(); }
    const std::vector<HighwayParams<T>>& highways() const { return highways_; }

    num::Tensor<T> embed_word(const CharIds& ids) const {
        if (ids.size() < kMinCharSequence) {
            throw PreconditionError("embed_word: " + std::to_string(ids.size()) + " character ids, need at least " +
                                    std::to_string(kMinCharSequence));
        }
        auto chars = num::embedding_rows(embed_, ids, std::size_t{CharVocabulary::kPad});
        std::vector<num::Tensor<T>> pooled;
        pooled.reserve(banks_.size());
        for (const auto& bank : banks_) {
            pooled.push_back(num::max_over_time(num::tanh(num::conv1d_time(chars, bank.kernel, bank.bias))));
        }
        auto x = num::concat(pooled);
        for (const auto& h : highways_) {
            x = highway(x, h);
        }
        return x;
    }

    /// One row per word. With `cache`, repeated words share one computation.
    num::Tensor<T> embed_sentence(const std::vector<CharIds>& words, bool cache = true) const {
        if (words.empty()) {
            throw PreconditionError("embed_sentence: empty sentence");
        }
        std::vector<num::Tensor<T>> rows;
        rows.reserve(words.size());
        std::map<CharIds, num::Tensor<T>> seen;
        for (const auto& w : words) {
            if (cache) {
                auto it = seen.find(w);
                if (it == seen.end()) {
                    it = seen.emplace(w, embed_word(w)).first;
                }
                rows.push_back(it->second);
            } else {
                rows.push_back(embed_word(w));
            }
        }
        return num::stack_rows(rows);
    }

  private:
    struct Bank {
        std::size_t width;
        num::Tensor<T> kernel;
        num::Tensor<T> bias;
    };

    CharCnnConfig cfg_;
    num::Tensor<T> embed_;
    std::vector<Bank> banks_;
    std::vector<HighwayParams<T>> highways_;
};

} // namespace cnmt::charembed
