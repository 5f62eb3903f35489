#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "cnmt/inference/decode.hpp"

using namespace cnmt;
using namespace cnmt::inference;
using cnmt::corpus::Vocabulary;

namespace {

seq2seq::Vocabularies vocabs(std::size_t target_words) {
    seq2seq::Vocabularies v;
    std::vector<corpus::Tokens> src{{"das", "haus", "ist", "klein", "der", "hund"}};
    v.chars = charembed::CharVocabulary::build(src);
    for (const auto& w : src[0]) {
        v.source.add(w, 1);
    }
    for (std::size_t i = 0; i < target_words; ++i) {
        v.target.add("w" + std::to_string(i), 1);
    }
    return v;
}

seq2seq::ModelConfig small_config() {
    auto c = seq2seq::ModelConfig::desk();
    c.hidden = 12;
    c.attention_dim = 10;
    c.target_embed_dim = 8;
    return c;
}

// Output layer scaled up so an untrained model has peaked, varied
// distributions instead of near-uniform ones.
template <typename T>
void sharpen(seq2seq::Model<T>& m, std::uint64_t seed) {
    num::Rng rng(seed);
    auto W = m.params().get("out.W");
    num::fill_uniform(W, rng, -1.5, 1.5);
    auto b = m.params().get("out.b");
    num::fill_uniform(b, rng, -1.0, 1.0);
}

const std::vector<corpus::Tokens> kSources{
    {"das", "haus"}, {"der", "hund", "ist", "klein"}, {"klein"}, {"ist", "das", "haus", "klein", "hund"}};

} // namespace

TEST(ReplaceUnk, LeavesKnownTokensAlone) {
    auto v = vocabs(3);
    std::vector<int> ids{v.target.id("w1"), v.target.id("w0"), Vocabulary::kEos};
    auto out = replace_unk(ids, {}, {"a", "b"}, v.target);
    EXPECT_EQ(out.tokens, (corpus::Tokens{"w1", "w0"}));
    EXPECT_TRUE(out.replacements.empty());
}

TEST(ReplaceUnk, UsesAttentionArgmax) {
    auto v = vocabs(3);
    std::vector<int> ids{v.target.id("w1"), Vocabulary::kUnk, Vocabulary::kUnk, Vocabulary::kEos};
    std::vector<std::vector<double>> att{{1, 0, 0}, {0.1, 0.8, 0.1}, {0.4, 0.2, 0.4}, {0, 0, 1}};
    corpus::Tokens src{"Merkel", "Obama", "Paris"};
    auto out = replace_unk(ids, att, src, v.target);
    EXPECT_EQ(out.tokens, (corpus::Tokens{"w1", "Obama", "Merkel"}));
    ASSERT_EQ(out.replacements.size(), 2u);
    EXPECT_EQ(out.replacements[0].source_index, 1u);
    EXPECT_EQ(out.replacements[1].source_index, 0u);
    EXPECT_EQ(count_unks({out.tokens}), 0u);
    auto kept = replace_unk(ids, att, src, v.target, false);
    EXPECT_EQ(count_unks({kept.tokens}), 2u);
    EXPECT_EQ(kept.tokens.size(), out.tokens.size());
}

TEST(ReplaceUnk, MissingAttentionIsContractError) {
    auto v = vocabs(3);
    EXPECT_THROW(replace_unk({Vocabulary::kUnk}, {}, {"a"}, v.target), ContractError);
}

TEST(CountUnks, Examples) {
    EXPECT_EQ(count_unks({}), 0u);
    EXPECT_EQ(count_unks({{"a", "b"}}), 0u);
    EXPECT_EQ(count_unks({{"UNK", "a", "UNK"}}), 2u);
}

TEST(Greedy, DeterministicBoundedAndRescorable) {
    seq2seq::Model<float> m(small_config(), vocabs(12), 3);
    sharpen(m, 4);
    DecodeConfig cfg;
    for (const auto& s : kSources) {
        auto src = m.prepare_source(s);
        auto a = greedy_decode(m, src, cfg);
        auto b = greedy_decode(m, src, cfg);
        EXPECT_EQ(a.tokens, b.tokens);
        EXPECT_LE(a.tokens.size(), 3 * s.size());
        EXPECT_EQ(a.attention.size(), a.tokens.size());
        EXPECT_EQ(a.finished, a.tokens.back() == Vocabulary::kEos);
        EXPECT_NEAR(a.logprob, score_tokens(m, src, a.tokens), 1e-5);
        for (int t : a.tokens) {
            EXPECT_NE(t, Vocabulary::kPad);
            EXPECT_NE(t, Vocabulary::kBos);
        }
    }
    EXPECT_THROW(greedy_decode(m, seq2seq::SourceSentence{}, cfg), PreconditionError);
}

TEST(Beam, WidthOneEqualsGreedy) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        seq2seq::Model<float> m(small_config(), vocabs(10), seed);
        sharpen(m, seed + 100);
        DecodeConfig cfg;
        cfg.beam_width = 1;
        for (const auto& s : kSources) {
            auto src = m.prepare_source(s);
            auto beam = beam_decode(m, src, cfg);
            ASSERT_EQ(beam.size(), 1u);
            auto greedy = greedy_decode(m, src, cfg);
            EXPECT_EQ(beam[0].tokens, greedy.tokens);
            EXPECT_EQ(beam[0].logprob, greedy.logprob);
        }
    }
}

TEST(Beam, SortedAndRescorable) {
    seq2seq::Model<float> m(small_config(), vocabs(10), 7);
    sharpen(m, 8);
    DecodeConfig cfg;
    cfg.beam_width = 5;
    for (const auto& s : kSources) {
        auto src = m.prepare_source(s);
        auto hyps = beam_decode(m, src, cfg);
        ASSERT_FALSE(hyps.empty());
        EXPECT_LE(hyps.size(), 5u);
        for (std::size_t i = 1; i < hyps.size(); ++i) {
            EXPECT_GE(hyps[0].score(1.0), hyps[i].score(1.0));
            EXPECT_GE(hyps[i - 1].score(1.0), hyps[i].score(1.0));
        }
        for (const auto& h : hyps) {
            EXPECT_NEAR(h.logprob, score_tokens(m, src, h.tokens), 1e-5);
            EXPECT_EQ(h.attention.size(), h.tokens.size());
        }
    }
}

namespace {

struct Scored {
    std::vector<int> tokens;
    double logprob;
};

// Every sequence over {UNK, EOS, w} that ends at EOS or at the length limit,
// each scored by its own teacher-forced walk.
void enumerate(const seq2seq::Model<double>& m, const seq2seq::EncodedSource<double>& enc,
               const num::Tensor<double>& state, std::vector<int>& prefix, double logprob, std::size_t limit,
               std::vector<Scored>& out) {
    const int prev = prefix.empty() ? Vocabulary::kBos : prefix.back();
    auto step = m.decode_step(prev, state, enc);
    const auto lp = num::log_softmax_values<double>(step.logits.data());
    for (int id : {Vocabulary::kUnk, Vocabulary::kEos, 4}) {
        prefix.push_back(id);
        const double total = logprob + lp[static_cast<std::size_t>(id)];
        if (id == Vocabulary::kEos || prefix.size() == limit) {
            out.push_back({prefix, total});
        } else {
            enumerate(m, enc, step.state, prefix, total, limit, out);
        }
        prefix.pop_back();
    }
}

} // namespace

TEST(Beam, SaturatedWidthMatchesExhaustiveSearch) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        seq2seq::Model<double> m(small_config(), vocabs(1), seed);
        ASSERT_EQ(m.vocabularies().target.size(), 5u);
        sharpen(m, seed * 7);
        for (double norm : {0.0, 1.0}) {
            DecodeConfig cfg;
            cfg.beam_width = 27;
            cfg.max_length = 3;
            cfg.length_norm = norm;
            auto src = m.prepare_source({"das", "haus"});
            auto hyps = beam_decode(m, src, cfg);

            num::NoGradScope<double> off;
            auto enc = m.encode(src);
            std::vector<Scored> all;
            std::vector<int> prefix;
            enumerate(m, enc, m.init_state(enc), prefix, 0.0, 3, all);
            ASSERT_EQ(all.size(), 15u);
            ASSERT_EQ(hyps.size(), all.size());

            std::map<std::vector<int>, double> oracle;
            for (const auto& s : all) {
                oracle[s.tokens] = s.logprob;
            }
            for (const auto& h : hyps) {
                ASSERT_TRUE(oracle.count(h.tokens));
                EXPECT_NEAR(h.logprob, oracle[h.tokens], 1e-10);
            }
            auto score = [&](const Scored& s) { return s.logprob / std::pow(double(s.tokens.size()), norm); };
            auto best = *std::max_element(all.begin(), all.end(),
                                          [&](const Scored& a, const Scored& b) { return score(a) < score(b); });
            EXPECT_EQ(hyps.front().tokens, best.tokens);
            EXPECT_NEAR(hyps.front().score(norm), score(best), 1e-10);
        }
    }
}

TEST(Translate, ThreadsDoNotChangeOutput) {
    seq2seq::Model<float> m(small_config(), vocabs(10), 21);
    sharpen(m, 22);
    std::vector<corpus::Tokens> sources;
    for (int rep = 0; rep < 4; ++rep) {
        sources.insert(sources.end(), kSources.begin(), kSources.end());
    }
    sources.push_back({});
    DecodeConfig cfg;
    cfg.beam_width = 3;
    auto one = translate_all(m, sources, cfg, true, 1);
    auto many = translate_all(m, sources, cfg, true, 3);
    ASSERT_EQ(one.size(), sources.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].tokens, many[i].tokens);
        EXPECT_EQ(one[i].logprob, many[i].logprob);
        EXPECT_EQ(count_unks({one[i].tokens}), 0u);
    }
    EXPECT_TRUE(one.back().tokens.empty());
}
