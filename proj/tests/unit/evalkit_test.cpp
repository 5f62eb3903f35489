#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cnmt/corpus/corpus.hpp"
#include "cnmt/errors.hpp"
#include "cnmt/evalkit/bleu.hpp"

using namespace cnmt;
using namespace cnmt::evalkit;
using corpus::Tokens;

namespace {

std::vector<Tokens> lines(std::initializer_list<const char*> text) {
    std::vector<Tokens> out;
    for (const char* t : text) {
        out.push_back(corpus::split_tokens(t));
    }
    return out;
}

std::vector<Tokens> random_corpus(std::mt19937_64& rng, std::size_t n) {
    std::vector<Tokens> out(n);
    for (auto& s : out) {
        const std::size_t len = 1 + rng() % 12;
        for (std::size_t i = 0; i < len; ++i) {
            s.push_back("w" + std::to_string(rng() % 6));
        }
    }
    return out;
}

} // namespace

TEST(Bleu, IdentityIsHundred) {
    auto x = lines({"the cat sat on the mat", "a b c d"});
    auto r = bleu(x, x);
    EXPECT_NEAR(r.bleu, 100.0, 1e-9);
    EXPECT_EQ(r.brevity_penalty, 1.0);
}

TEST(Bleu, NoFourGramMatchIsZero) {
    auto r = bleu(lines({"a b c d e"}), lines({"a b c x d e"}));
    EXPECT_EQ(r.matches[3], 0u);
    EXPECT_GT(r.precisions[0], 0.0);
    EXPECT_EQ(r.bleu, 0.0);
}

TEST(Bleu, ClippingExample) {
    // Unigram "the" is clipped to its single reference occurrence: p1 = 1/4.
    // c = 4 > r = 2 so BP = min(1, e^0.5) = 1, and no bigram matches: BLEU 0.
    auto r = bleu(lines({"the the the the"}), lines({"the cat"}));
    EXPECT_EQ(r.matches[0], 1u);
    EXPECT_EQ(r.totals[0], 4u);
    EXPECT_DOUBLE_EQ(r.precisions[0], 0.25);
    EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
    EXPECT_EQ(r.bleu, 0.0);
}

TEST(Bleu, NonzeroClippedExample) {
    // Matches 6/7, 5/6, 4/5, 3/4 ("the" clipped from 3 to 2); BP 1.
    // BLEU = 100 * (3/7)^(1/4).
    auto r = bleu(lines({"the cat sat on the mat the"}), lines({"the cat sat on the mat"}));
    EXPECT_EQ(r.matches, (std::array<std::size_t, 4>{6, 5, 4, 3}));
    EXPECT_EQ(r.totals, (std::array<std::size_t, 4>{7, 6, 5, 4}));
    EXPECT_NEAR(r.bleu, 80.91067115702212, 1e-9);
}

TEST(Bleu, BrevityPenaltyExample) {
    // Perfect precisions, c = 5, r = 8: BP = exp(1 - 8/5).
    auto r = bleu(lines({"a b c d e"}), lines({"a b c d e f g h"}));
    EXPECT_NEAR(r.brevity_penalty, 0.5488116360940264, 1e-12);
    EXPECT_NEAR(r.bleu, 54.88116360940264, 1e-9);
}

TEST(Bleu, Preconditions) {
    EXPECT_THROW(bleu(lines({"a"}), lines({"a", "b"})), InputError);
    EXPECT_THROW(bleu(lines({"a"}), std::vector<Tokens>{{}}), InputError);
    auto r = bleu(std::vector<Tokens>{{}}, lines({"a b"}));
    EXPECT_EQ(r.bleu, 0.0);
}

TEST(Bleu, Properties) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto refs = random_corpus(rng, 8);
        auto cands = random_corpus(rng, 8);
        const auto base = bleu(cands, refs);
        EXPECT_GE(base.bleu, 0.0);
        EXPECT_LE(base.bleu, 100.0);
        EXPECT_NEAR(bleu(refs, refs).bleu, 100.0, 1e-9);

        auto relabel = [](std::vector<Tokens> c) {
            for (auto& s : c) {
                for (auto& t : s) {
                    t = "x" + t + "y";
                }
            }
            return c;
        };
        EXPECT_NEAR(bleu(relabel(cands), relabel(refs)).bleu, base.bleu, 1e-9);

        auto twice_c = cands;
        twice_c.insert(twice_c.end(), cands.begin(), cands.end());
        auto twice_r = refs;
        twice_r.insert(twice_r.end(), refs.begin(), refs.end());
        EXPECT_NEAR(bleu(twice_c, twice_r).bleu, base.bleu, 1e-9);
    }
}

TEST(Bleu, ShorterCandidatesLowerBrevityPenalty) {
    auto refs = lines({"a b c d e f g h", "p q r s t u"});
    double prev = 2.0;
    for (std::size_t keep : {5u, 4u, 3u, 2u}) {
        std::vector<Tokens> cands;
        for (const auto& r : refs) {
            cands.emplace_back(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(keep));
        }
        const double bp = bleu(cands, refs).brevity_penalty;
        EXPECT_LT(bp, prev);
        prev = bp;
    }
}

TEST(Compare, DeltasMatchIndependentScores) {
    auto refs = lines({"the house is small", "the dog barks loudly at night"});
    auto nn = lines({"the UNK is small", "the dog UNK at night"});
    auto chr = lines({"the house is small", "the dog barks at night"});
    auto c = compare_systems({{"NN", nn}, {"CHAR", chr}}, refs, "NN");
    ASSERT_EQ(c.systems.size(), 2u);
    EXPECT_EQ(c.systems[0].delta_bleu, 0.0);
    EXPECT_EQ(c.systems[0].unk_count, 2u);
    EXPECT_EQ(c.systems[1].unk_count, 0u);
    EXPECT_EQ(c.systems[1].delta_unks, -2);
    EXPECT_DOUBLE_EQ(c.systems[1].delta_bleu, bleu(chr, refs).bleu - bleu(nn, refs).bleu);

    auto more = compare_systems({{"NN", nn}, {"CHAR", chr}, {"ORACLE", refs}}, refs, "NN");
    EXPECT_EQ(more.systems[1].report.bleu, c.systems[1].report.bleu);
    EXPECT_THROW(compare_systems({{"NN", nn}}, refs, "CHAR"), ConfigError);

    auto j = to_json(c);
    EXPECT_EQ(j["systems"][1]["name"], "CHAR");
    const auto table = render_table(c);
    EXPECT_NE(table.find("CHAR"), std::string::npos);
    EXPECT_NE(table.find("baseline: NN"), std::string::npos);
}

TEST(Compare, MisalignedFileIsNamed) {
    const auto dir = std::filesystem::temp_directory_path() / "cnmt_compare_test";
    std::filesystem::create_directories(dir);
    corpus::write_lines((dir / "ref.txt").string(), {"a b", "c d"});
    corpus::write_lines((dir / "good.txt").string(), {"a b", "c d"});
    corpus::write_lines((dir / "short.txt").string(), {"a b"});
    auto ok = compare_files({{"good", (dir / "good.txt").string()}}, (dir / "ref.txt").string(), "good");
    EXPECT_NEAR(ok.systems[0].report.bleu, 0.0, 1e-12); // two-token lines have no 4-grams
    try {
        compare_files({{"good", (dir / "good.txt").string()}, {"short", (dir / "short.txt").string()}},
                      (dir / "ref.txt").string(), "good");
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("short.txt"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}
