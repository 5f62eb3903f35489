#include "cnmt/trainer/batch.hpp"

#include <algorithm>
#include <numeric>

namespace cnmt::trainer {

namespace {

// Fisher-Yates driven by uniform01 so the order is the same on every
// standard library.
template <typename V>
void shuffle(V& items, num::Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(num::uniform01(rng) * static_cast<double>(i));
        std::swap(items[i - 1], items[std::min(j, i - 1)]);
    }
}

} // namespace

seq2seq::Vocabularies build_vocabularies(const corpus::ParallelCorpus& corpus, std::size_t source_cap,
                                         std::size_t target_cap) {
    seq2seq::Vocabularies v;
    v.chars = charembed::CharVocabulary::build(corpus.source);
    v.source = corpus::build_vocab(corpus.source, source_cap);
    v.target = corpus::build_vocab(corpus.target, target_cap);
    return v;
}

std::vector<Example> make_examples(const seq2seq::Model<float>& model, const corpus::ParallelCorpus& corpus) {
    if (corpus.source.size() != corpus.target.size()) {
        throw InputError("parallel corpus sides differ in length");
    }
    std::vector<Example> out;
    out.reserve(corpus.source.size());
    for (std::size_t i = 0; i < corpus.source.size(); ++i) {
        if (corpus.source[i].empty()) {
            throw InputError("empty source sentence at line " + std::to_string(i + 1));
        }
        out.push_back({model.prepare_source(corpus.source[i]), model.prepare_target(corpus.target[i])});
    }
    return out;
}

std::size_t Batch::target_tokens() const {
    std::size_t n = 0;
    for (const auto& row : target_mask) {
        n += static_cast<std::size_t>(std::count(row.begin(), row.end(), 1));
    }
    return n;
}

Batch make_batch(const std::vector<Example>& examples, const std::vector<std::size_t>& indices,
                 std::size_t extra_padding) {
    Batch b;
    b.indices = indices;
    std::size_t max_src = 0;
    std::size_t max_tgt = 0;
    for (auto i : indices) {
        max_src = std::max(max_src, examples.at(i).source.words.size());
        max_tgt = std::max(max_tgt, examples.at(i).target.size());
    }
    max_src += extra_padding;
    max_tgt += extra_padding;
    const charembed::CharIds pad_word(charembed::kMinCharSequence, charembed::CharVocabulary::kPad);
    for (auto i : indices) {
        const auto& ex = examples[i];
        const std::size_t ls = ex.source.words.size();
        const std::size_t lt = ex.target.size();
        b.source_words.push_back(ex.source.words);
        auto chars = ex.source.chars;
        if (!chars.empty()) {
            chars.resize(max_src, pad_word);
        }
        b.source_chars.push_back(std::move(chars));
        auto ids = ex.source.ids;
        ids.resize(max_src, corpus::Vocabulary::kPad);
        b.source_ids.push_back(std::move(ids));
        auto tgt = ex.target;
        tgt.resize(max_tgt, corpus::Vocabulary::kPad);
        b.target_ids.push_back(std::move(tgt));
        b.source_lengths.push_back(ls);
        b.target_lengths.push_back(lt);
        std::vector<unsigned char> sm(max_src, 0);
        std::fill(sm.begin(), sm.begin() + static_cast<std::ptrdiff_t>(ls), 1);
        b.source_mask.push_back(std::move(sm));
        std::vector<unsigned char> tm(max_tgt, 0);
        std::fill(tm.begin(), tm.begin() + static_cast<std::ptrdiff_t>(lt), 1);
        b.target_mask.push_back(std::move(tm));
    }
    return b;
}

std::vector<Batch> make_batches(const std::vector<Example>& examples, std::size_t batch_size, num::Rng& rng) {
    if (examples.empty()) {
        throw ConfigError("cannot batch an empty corpus");
    }
    if (batch_size == 0) {
        throw ConfigError("batch size must be positive");
    }
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return examples[a].source.words.size() < examples[b].source.words.size();
    });
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                            order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    shuffle(groups, rng);
    std::vector<Batch> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        out.push_back(make_batch(examples, g));
    }
    return out;
}

BatchLoss batch_loss(const seq2seq::Model<float>& model, const Batch& batch) {
    std::vector<num::Tensor<float>> sentences;
    sentences.reserve(batch.size());
    std::size_t tokens = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const std::size_t len = batch.source_lengths[b];
        seq2seq::SourceSentence src;
        src.words = batch.source_words[b];
        src.ids.assign(batch.source_ids[b].begin(), batch.source_ids[b].begin() + static_cast<std::ptrdiff_t>(len));
        if (!batch.source_chars[b].empty()) {
            src.chars.assign(batch.source_chars[b].begin(),
                             batch.source_chars[b].begin() + static_cast<std::ptrdiff_t>(len));
        }
        sentences.push_back(masked_sentence_loss(model, src, batch.target_ids[b], batch.target_mask[b]));
        tokens += static_cast<std::size_t>(std::count(batch.target_mask[b].begin(), batch.target_mask[b].end(), 1));
    }
    return {num::add_n(sentences), tokens};
}

} // namespace cnmt::trainer
