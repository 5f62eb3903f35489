#pragma once

#include <cstddef>
#include <vector>

#include "cnmt/corpus/corpus.hpp"
#include "cnmt/numcore/init.hpp"
#include "cnmt/seq2seq/model.hpp"

namespace cnmt::trainer {

/// One training pair in model-ready form. `target` ends with EOS.
struct Example {
    seq2seq::SourceSentence source;
    std::vector<int> target;
};

/// Word vocabularies capped as configured; the character vocabulary keeps
/// every source character.
seq2seq::Vocabularies build_vocabularies(const corpus::ParallelCorpus& corpus, std::size_t source_cap,
                                         std::size_t target_cap);

std::vector<Example> make_examples(const seq2seq::Model<float>& model, const corpus::ParallelCorpus& corpus);

/// Padded grids for a group of examples. Mask entries are 1 at real
/// positions and 0 at padding.
struct Batch {
    std::vector<std::size_t> indices; // into the example list
    std::vector<corpus::Tokens> source_words;
    std::vector<std::vector<charembed::CharIds>> source_chars; // B x I_max, padding words are all PAD
    std::vector<std::vector<int>> source_ids;                   // B x I_max
    std::vector<std::vector<int>> target_ids;                   // B x J_max
    std::vector<std::size_t> source_lengths;
    std::vector<std::size_t> target_lengths;
    std::vector<std::vector<unsigned char>> source_mask;
    std::vector<std::vector<unsigned char>> target_mask;

    std::size_t size() const { return indices.size(); }
    std::size_t target_tokens() const;
};

/// Pads the chosen examples. `extra_padding` widens both grids beyond the
/// longest sentence.
Batch make_batch(const std::vector<Example>& examples, const std::vector<std::size_t>& indices,
                 std::size_t extra_padding = 0);

/// Shuffle, stable-sort by source length, cut into batches of `batch_size`,
/// shuffle the batch order. Every example appears in exactly one batch.
std::vector<Batch> make_batches(const std::vector<Example>& examples, std::size_t batch_size, num::Rng& rng);

/// Sum of teacher-forced cross-entropies over the unmasked target positions
/// of every sentence (a scalar), plus the number of positions counted.
struct BatchLoss {
    num::Tensor<float> total;
    std::size_t tokens = 0;
};

BatchLoss batch_loss(const seq2seq::Model<float>& model, const Batch& batch);

template <typename T>
num::Tensor<T> masked_sentence_loss(const seq2seq::Model<T>& model, const seq2seq::SourceSentence& src,
                                    const std::vector<int>& target_row, const std::vector<unsigned char>& mask) {
    auto enc = model.encode(src);
    auto state = model.init_state(enc);
    int prev = corpus::Vocabulary::kBos;
    std::vector<num::Tensor<T>> terms;
    for (std::size_t j = 0; j < target_row.size(); ++j) {
        if (mask[j] == 0) {
            continue;
        }
        auto step = model.decode_step(prev, state, enc);
        terms.push_back(num::cross_entropy(step.logits, target_row[j]));
        state = step.state;
        prev = target_row[j];
    }
    return num::add_n(terms);
}

} // namespace cnmt::trainer
