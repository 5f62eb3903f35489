#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cnmt/charembed/char_cnn.hpp"
#include "gradcheck.hpp"

using namespace cnmt;
using namespace cnmt::charembed;
using cnmt::num::Tensor;

namespace {

CharVocabulary abc_vocab() { return CharVocabulary::build({{"abcdefghij", "klmnop"}}); }

template <typename T>
struct Embedder {
    num::ParamSet<T> params;
    num::Rng rng{42};
    CharCnn<T> cnn;
    explicit Embedder(const CharCnnConfig& cfg = CharCnnConfig::desk(), std::size_t vocab = 20)
        : cnn(cfg, vocab, params, rng) {}
};

std::vector<double> values(const Tensor<double>& t) { return {t.data().begin(), t.data().end()}; }

} // namespace

TEST(WordToCharIds, PadsShortWordsToSeven) {
    auto vocab = abc_vocab();
    auto ids = word_to_char_ids("ab", vocab, CharCnnConfig::desk());
    const int a = vocab.id("a");
    const int b = vocab.id("b");
    EXPECT_EQ(ids, (CharIds{CharVocabulary::kBow, a, b, CharVocabulary::kEow, 0, 0, 0}));
}

TEST(WordToCharIds, UnknownCharacterBecomesUnk) {
    auto vocab = abc_vocab();
    auto ids = word_to_char_ids("aß", vocab, CharCnnConfig::desk());
    EXPECT_EQ(ids[2], CharVocabulary::kUnk);
}

TEST(WordToCharIds, TruncatesLongWords) {
    auto vocab = abc_vocab();
    auto cfg = CharCnnConfig::desk();
    auto ids = word_to_char_ids(std::string(100, 'a'), vocab, cfg);
    EXPECT_EQ(ids.size(), cfg.max_word_len);
    EXPECT_EQ(ids.front(), CharVocabulary::kBow);
    EXPECT_THROW(word_to_char_ids("", vocab, cfg), PreconditionError);
}

TEST(CharCnnConfig, FullFilterSpecSumsTo620) {
    EXPECT_EQ(CharCnnConfig::full().output_dim(), 620u);
    EXPECT_EQ(CharCnnConfig::desk().output_dim(), 60u);
    CharCnnConfig bad;
    bad.filters = {{8, 3}};
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(EmbedWord, DimensionLawDeterminismAndUnseenWords) {
    auto vocab = abc_vocab();
    Embedder<float> e;
    const auto& cfg = e.cnn.config();
    for (const std::string w : {"a", "abc", "abcdefghijklmnop", "zzzz", "Verteidigungszusammenarbeit", "日本語"}) {
        auto v = e.cnn.embed_word(word_to_char_ids(w, vocab, cfg));
        ASSERT_EQ(v.size(), 60u) << w;
        for (float x : v.data()) {
            EXPECT_TRUE(std::isfinite(x));
        }
        auto again = e.cnn.embed_word(word_to_char_ids(w, vocab, cfg));
        EXPECT_TRUE(std::equal(v.data().begin(), v.data().end(), again.data().begin()));
    }
    EXPECT_THROW(e.cnn.embed_word(CharIds{2, 4, 3}), PreconditionError);
}

TEST(EmbedWord, DistinctWordsOfEqualLengthDiffer) {
    auto vocab = abc_vocab();
    Embedder<double> e;
    std::mt19937_64 rng(5);
    const std::string alphabet = "abcdefghij";
    int distinct = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::string w1;
        std::string w2;
        const std::size_t len = 2 + rng() % 8;
        while (w1 == w2) {
            w1.clear();
            w2.clear();
            for (std::size_t i = 0; i < len; ++i) {
                w1 += alphabet[rng() % alphabet.size()];
                w2 += alphabet[rng() % alphabet.size()];
            }
        }
        auto a = e.cnn.embed_word(word_to_char_ids(w1, vocab, e.cnn.config()));
        auto b = e.cnn.embed_word(word_to_char_ids(w2, vocab, e.cnn.config()));
        double dist = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            dist += (a.at(i) - b.at(i)) * (a.at(i) - b.at(i));
        }
        distinct += dist > 0.0 ? 1 : 0;
    }
    EXPECT_EQ(distinct, 100);
}

TEST(Highway, ClosedGateCarriesInput) {
    const std::size_t n = 6;
    num::Rng rng(3);
    HighwayParams<double> p{Tensor<double>::zeros({n, n}), Tensor<double>::zeros({n}), Tensor<double>::zeros({n, n}),
                            Tensor<double>::zeros({n})};
    num::fill_uniform(p.W_T, rng, -1, 1);
    num::fill_uniform(p.W_H, rng, -1, 1);
    num::fill_uniform(p.b_H, rng, -1, 1);
    auto x = Tensor<double>::zeros({n});
    num::fill_uniform(x, rng, -1, 1);
    num::fill_constant(p.b_T, -1e9);
    auto carried = highway(x, p);
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(carried.at(i), x.at(i), 1e-12);
    }
    num::fill_constant(p.b_T, 1e9);
    auto transformed = highway(x, p);
    auto expect = num::relu(num::add_bias(num::matmul(x, p.W_H), p.b_H));
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(transformed.at(i), expect.at(i), 1e-12);
    }
    HighwayParams<double> bad = p;
    bad.W_T = Tensor<double>::zeros({n, n + 1});
    EXPECT_THROW(highway(x, bad), ShapeError);
}

TEST(Highway, TwoStackedLayersGradientCheck) {
    const std::size_t n = 5;
    num::Rng rng(4);
    auto make = [&] {
        HighwayParams<double> p{Tensor<double>::zeros({n, n}), Tensor<double>::zeros({n}),
                                Tensor<double>::zeros({n, n}), Tensor<double>::zeros({n})};
        for (auto* t : {&p.W_T, &p.b_T, &p.W_H, &p.b_H}) {
            num::fill_uniform(*t, rng, -1, 1);
        }
        return p;
    };
    auto h1 = make();
    auto h2 = make();
    auto x = Tensor<double>::zeros({n});
    num::fill_uniform(x, rng, -1, 1);
    auto w = Tensor<double>::zeros({n});
    num::fill_uniform(w, rng, -1, 1);
    auto r = cnmt::testing::grad_check({{"x", x},
                                  {"h1.W_T", h1.W_T},
                                  {"h1.b_T", h1.b_T},
                                  {"h1.W_H", h1.W_H},
                                  {"h1.b_H", h1.b_H},
                                  {"h2.W_T", h2.W_T},
                                  {"h2.W_H", h2.W_H}},
                                 [&] { return num::dot(highway(highway(x, h1), h2), w); });
    EXPECT_LT(r.max_rel_error, 1e-4) << cnmt::testing::describe(r);
}

TEST(EmbedSentence, RowsRepeatsAndCachedPathAgree) {
    auto vocab = abc_vocab();
    Embedder<double> e;
    std::vector<CharIds> words;
    for (const std::string w : {"abc", "de", "abc", "fgh", "de"}) {
        words.push_back(word_to_char_ids(w, vocab, e.cnn.config()));
    }
    auto run = [&](bool cache) {
        e.params.zero_grad();
        num::Tape<double> tape;
        num::TapeScope<double> scope(tape);
        auto m = e.cnn.embed_sentence(words, cache);
        auto w = Tensor<double>::zeros(m.shape());
        num::Rng rng(9);
        num::fill_uniform(w, rng, -1, 1);
        tape.backward(num::sum(num::mul(m, w)));
        std::vector<double> grads;
        for (const auto& p : e.params.items()) {
            grads.insert(grads.end(), p.tensor.grad().begin(), p.tensor.grad().end());
        }
        return std::make_pair(values(m), grads);
    };
    auto [cached, cached_grads] = run(true);
    auto [plain, plain_grads] = run(false);
    ASSERT_EQ(cached.size(), 5u * 60u);
    for (std::size_t j = 0; j < 60; ++j) {
        EXPECT_EQ(cached[j], cached[2 * 60 + j]);
        EXPECT_EQ(cached[60 + j], cached[4 * 60 + j]);
    }
    EXPECT_EQ(cached, plain);
    ASSERT_EQ(cached_grads.size(), plain_grads.size());
    for (std::size_t i = 0; i < cached_grads.size(); ++i) {
        EXPECT_NEAR(cached_grads[i], plain_grads[i], 1e-12);
    }
    EXPECT_THROW(e.cnn.embed_sentence({}), PreconditionError);
}

TEST(CharCnn, PadRowStaysZeroAndUngraded) {
    auto vocab = abc_vocab();
    Embedder<double> e;
    const auto& table = e.params.get("char.embed");
    for (std::size_t j = 0; j < 15; ++j) {
        EXPECT_EQ(table.at(0, j), 0.0);
    }
    num::Tape<double> tape;
    {
        num::TapeScope<double> scope(tape);
        tape.backward(num::sum(e.cnn.embed_word(word_to_char_ids("ab", vocab, e.cnn.config()))));
    }
    for (std::size_t j = 0; j < 15; ++j) {
        EXPECT_EQ(table.grad()[j], 0.0);
    }
}

TEST(CharCnn, FullEmbedderGradientCheck) {
    auto vocab = abc_vocab();
    CharCnnConfig cfg;
    cfg.char_embed_dim = 4;
    cfg.filters = {{1, 3}, {2, 4}, {3, 3}, {5, 2}};
    Embedder<double> e(cfg, vocab.size());
    // Random gate biases so both highway paths carry signal.
    num::Rng rng(17);
    for (const auto& h : e.cnn.highways()) {
        auto b = h.b_T;
        num::fill_uniform(b, rng, -1, 1);
    }
    std::vector<CharIds> words{word_to_char_ids("abca", vocab, cfg), word_to_char_ids("jihgfedcb", vocab, cfg)};
    auto w = Tensor<double>::zeros({2, cfg.output_dim()});
    num::fill_uniform(w, rng, -1, 1);
    auto r = cnmt::testing::grad_check(e.params.items(), [&] { return num::sum(num::mul(e.cnn.embed_sentence(words), w)); });
    EXPECT_TRUE(r.any_nonzero);
    EXPECT_LT(r.max_rel_error, 1e-4) << cnmt::testing::describe(r);
}
