#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "cnmt/trainer/trainer.hpp"

using namespace cnmt;
using namespace cnmt::trainer;
namespace fs = std::filesystem;

namespace {

corpus::ParallelCorpus toy_corpus(std::size_t n) {
    const std::vector<std::string> nouns{"haus", "hund", "katze", "baum", "auto", "buch"};
    const std::vector<std::string> en{"house", "dog", "cat", "tree", "car", "book"};
    const std::vector<std::string> adj{"klein", "groß", "alt"};
    const std::vector<std::string> en_adj{"small", "big", "old"};
    corpus::ParallelCorpus c;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = nouns[i % nouns.size()];
        const auto& b = adj[(i / nouns.size()) % adj.size()];
        corpus::Tokens src{"das", a, "ist", b};
        corpus::Tokens tgt{"the", en[i % en.size()], "is", en_adj[(i / nouns.size()) % adj.size()]};
        // Vary lengths so bucketing has something to do.
        for (std::size_t k = 0; k < i % 3; ++k) {
            src.push_back("sehr");
            tgt.insert(tgt.begin() + 3, "very");
        }
        c.source.push_back(src);
        c.target.push_back(tgt);
    }
    return c;
}

TrainConfig small_config() {
    auto c = TrainConfig::desk();
    c.model.hidden = 16;
    c.model.attention_dim = 16;
    c.model.target_embed_dim = 12;
    c.model.char_cnn.filters = {{1, 8}, {2, 8}, {3, 8}};
    c.batch_size = 4;
    c.seed = 5;
    c.adam.learning_rate = 0.01;
    return c;
}

struct Fixture {
    corpus::ParallelCorpus corpus;
    TrainConfig cfg;
    std::unique_ptr<seq2seq::Model<float>> model;
    std::vector<Example> examples;

    explicit Fixture(std::size_t n = 12, TrainConfig c = small_config()) : corpus(toy_corpus(n)), cfg(std::move(c)) {
        model = std::make_unique<seq2seq::Model<float>>(
            cfg.model, build_vocabularies(corpus, cfg.source_vocab_cap, cfg.target_vocab_cap), cfg.seed);
        examples = make_examples(*model, corpus);
    }
};

std::vector<float> flat_params(const seq2seq::Model<float>& m) {
    std::vector<float> out;
    for (const auto& p : m.params().items()) {
        out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
    }
    return out;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("cnmt_trainer_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST(MakeBatches, SizesCoverageAndDeterminism) {
    Fixture s(70);
    num::Rng a(3);
    num::Rng b(3);
    auto batches = make_batches(s.examples, 32, a);
    auto again = make_batches(s.examples, 32, b);
    std::multiset<std::size_t> sizes;
    std::vector<int> seen(70, 0);
    for (std::size_t i = 0; i < batches.size(); ++i) {
        sizes.insert(batches[i].size());
        EXPECT_EQ(batches[i].indices, again[i].indices);
        for (auto idx : batches[i].indices) {
            ++seen[idx];
        }
    }
    EXPECT_EQ(sizes, (std::multiset<std::size_t>{6, 32, 32}));
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    num::Rng empty_rng(1);
    EXPECT_THROW(make_batches({}, 4, empty_rng), ConfigError);
}

TEST(MakeBatches, MasksCountRealTokens) {
    Fixture s(30);
    num::Rng rng(9);
    for (const auto& b : make_batches(s.examples, 7, rng)) {
        std::size_t expected = 0;
        std::size_t src_expected = 0;
        for (auto idx : b.indices) {
            expected += s.examples[idx].target.size();
            src_expected += s.examples[idx].source.words.size();
        }
        EXPECT_EQ(b.target_tokens(), expected);
        std::size_t src_mask = 0;
        for (std::size_t r = 0; r < b.size(); ++r) {
            src_mask += static_cast<std::size_t>(std::count(b.source_mask[r].begin(), b.source_mask[r].end(), 1));
            EXPECT_LE(b.source_lengths[r], b.source_ids[r].size());
            EXPECT_LE(b.target_lengths[r], b.target_ids[r].size());
            for (std::size_t j = b.target_lengths[r]; j < b.target_ids[r].size(); ++j) {
                EXPECT_EQ(b.target_ids[r][j], corpus::Vocabulary::kPad);
            }
        }
        EXPECT_EQ(src_mask, src_expected);
    }
}

TEST(BatchLoss, ExtraPaddingChangesNothing) {
    Fixture s(8);
    std::vector<std::size_t> idx{0, 1, 2, 5};
    auto grads = [&](std::size_t pad) {
        s.model->params().zero_grad();
        num::Tape<float> tape;
        num::TapeScope<float> scope(tape);
        auto l = batch_loss(*s.model, make_batch(s.examples, idx, pad));
        tape.backward(l.total);
        std::vector<float> g;
        for (const auto& p : s.model->params().items()) {
            if (p.tensor.has_grad()) {
                g.insert(g.end(), p.tensor.grad().begin(), p.tensor.grad().end());
            }
        }
        g.push_back(l.total.item());
        g.push_back(static_cast<float>(l.tokens));
        return g;
    };
    EXPECT_EQ(grads(0), grads(4));
}

TEST(Trainer, DeskPresetLossDecreasesOnFixedBatch) {
    Fixture s(8, TrainConfig::desk());
    Trainer t(*s.model, s.cfg);
    auto batch = make_batch(s.examples, {0, 1, 2, 3, 4, 5, 6, 7});
    double prev = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 5; ++step) {
        const auto [loss, tokens] = t.train_step(batch);
        EXPECT_LT(loss / tokens, prev) << "step " << step;
        prev = loss / tokens;
    }
}

TEST(Trainer, MetricsAndDeterministicTrajectories) {
    auto run = [] {
        Fixture s(12);
        Trainer t(*s.model, s.cfg);
        std::vector<EpochMetrics> ms;
        for (int e = 0; e < 3; ++e) {
            ms.push_back(t.train_epoch(s.examples));
        }
        return std::make_pair(ms, flat_params(*s.model));
    };
    auto [a, pa] = run();
    auto [b, pb] = run();
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].loss, b[i].loss);
        EXPECT_EQ(a[i].grad_norm_max, b[i].grad_norm_max);
        EXPECT_DOUBLE_EQ(a[i].perplexity, std::exp(a[i].loss));
        EXPECT_EQ(a[i].batches, 3u);
        EXPECT_EQ(a[i].step, 3 * (i + 1));
    }
    EXPECT_LT(a[2].loss, a[0].loss);
    EXPECT_EQ(pa, pb);
}

TEST(Trainer, NonFiniteLossAborts) {
    Fixture s(4);
    Trainer t(*s.model, s.cfg);
    auto W = s.model->params().get("out.b");
    W.data()[5] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(t.train_epoch(s.examples), NumericalError);
}

TEST(Trainer, EarlyStoppingPatience) {
    Fixture s(4);
    Trainer t(*s.model, s.cfg);
    EXPECT_FALSE(t.observe_dev(3.0));
    EXPECT_FALSE(t.observe_dev(2.0));
    for (int i = 0; i < 4; ++i) {
        EXPECT_FALSE(t.observe_dev(2.5));
    }
    EXPECT_FALSE(t.observe_dev(1.0)); // improvement resets the count
    for (int i = 0; i < 4; ++i) {
        EXPECT_FALSE(t.observe_dev(1.0));
    }
    EXPECT_TRUE(t.observe_dev(1.5));
}

TEST(Checkpoint, RoundTripIsBitExactAndIdempotent) {
    Fixture s(12);
    Trainer t(*s.model, s.cfg);
    t.train_epoch(s.examples);
    const auto dir = scratch("roundtrip");
    const auto path = (dir / "a.cnmt").string();
    save_checkpoint(t.snapshot(), path);
    EXPECT_FALSE(fs::exists(path + ".tmp"));
    auto loaded = load_checkpoint(path);
    save_checkpoint(loaded, (dir / "b.cnmt").string());
    EXPECT_EQ(read_file(path), read_file(dir / "b.cnmt"));
    auto model = build_model(loaded);
    EXPECT_EQ(flat_params(*model), flat_params(*s.model));
    EXPECT_TRUE(model->vocabularies().target == s.model->vocabularies().target);
    EXPECT_EQ(loaded.state.epoch, 1u);
    EXPECT_EQ(loaded.state.step, 3u);
    EXPECT_EQ(loaded.state.optimizer_step, 3u);
    fs::remove_all(dir);
}

TEST(Checkpoint, CorruptionIsRejected) {
    Fixture s(4);
    Trainer t(*s.model, s.cfg);
    const std::string bytes = serialize_checkpoint(t.snapshot());
    using Kind = CheckpointError::Kind;
    auto kind_of = [](const std::string& b) {
        try {
            parse_checkpoint(b);
        } catch (const CheckpointError& e) {
            return e.kind();
        }
        ADD_FAILURE() << "accepted a corrupt checkpoint";
        return Kind::mismatch;
    };
    auto flipped = bytes;
    flipped[0] = 'X';
    EXPECT_EQ(kind_of(flipped), Kind::bad_magic);
    flipped = bytes;
    flipped[4] = 2;
    EXPECT_EQ(kind_of(flipped), Kind::bad_version);
    EXPECT_EQ(kind_of(bytes.substr(0, bytes.size() - 7)), Kind::truncated);
    flipped = bytes;
    flipped[bytes.size() - 3] ^= 0x10;
    EXPECT_EQ(kind_of(flipped), Kind::corrupt_data);
    // Every single-byte flip in the prefix and header is caught.
    const std::size_t header_end = 24 + static_cast<std::size_t>(static_cast<unsigned char>(bytes[8])) +
                                   256 * static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) +
                                   65536 * static_cast<std::size_t>(static_cast<unsigned char>(bytes[10]));
    for (std::size_t i = 0; i < header_end; i += 7) {
        flipped = bytes;
        flipped[i] = static_cast<char>(flipped[i] ^ 0x01);
        EXPECT_THROW(parse_checkpoint(flipped), CheckpointError) << "byte " << i;
    }
    EXPECT_EQ(kind_of(""), Kind::bad_magic);
}

TEST(Checkpoint, MismatchedConfigIsADimensionError) {
    Fixture s(4);
    Trainer t(*s.model, s.cfg);
    auto c = t.snapshot();
    c.train.model.hidden = 32;
    try {
        build_model(c);
        FAIL();
    } catch (const CheckpointError& e) {
        EXPECT_EQ(e.kind(), CheckpointError::Kind::mismatch);
        EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    }
}

TEST(Checkpoint, ResumeMatchesUninterruptedRun) {
    const auto dir = scratch("resume");
    std::vector<EpochMetrics> full;
    std::vector<float> full_params;
    {
        Fixture s(12);
        Trainer t(*s.model, s.cfg);
        for (int e = 0; e < 4; ++e) {
            full.push_back(t.train_epoch(s.examples));
        }
        full_params = flat_params(*s.model);
    }
    {
        Fixture s(12);
        Trainer t(*s.model, s.cfg);
        t.train_epoch(s.examples);
        t.train_epoch(s.examples);
        save_checkpoint(t.snapshot(), (dir / "mid.cnmt").string());
    }
    auto c = load_checkpoint((dir / "mid.cnmt").string());
    auto model = build_model(c);
    Trainer t(*model, c.train);
    t.restore(c);
    auto examples = make_examples(*model, toy_corpus(12));
    for (int e = 2; e < 4; ++e) {
        auto m = t.train_epoch(examples);
        EXPECT_EQ(m.loss, full[static_cast<std::size_t>(e)].loss) << "epoch " << e + 1;
        EXPECT_EQ(m.step, full[static_cast<std::size_t>(e)].step);
    }
    EXPECT_EQ(flat_params(*model), full_params);
    fs::remove_all(dir);
}

TEST(Fit, WritesMetricsAndCheckpoints) {
    const auto dir = scratch("fit");
    Fixture s(12);
    s.cfg.checkpoint_every = 2;
    Trainer t(*s.model, s.cfg);
    std::vector<Example> dev(s.examples.begin(), s.examples.begin() + 3);
    FitOptions opts;
    opts.out_dir = dir.string();
    opts.max_epochs = 3;
    auto r = fit(t, s.examples, &dev, opts);
    EXPECT_EQ(r.epochs.size(), 3u);
    EXPECT_TRUE(fs::exists(dir / "checkpoint.cnmt"));
    EXPECT_TRUE(fs::exists(dir / "best.cnmt"));
    std::ifstream log(dir / "metrics.jsonl");
    std::string line;
    std::size_t n = 0;
    while (std::getline(log, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["epoch"], n + 1);
        EXPECT_TRUE(j.contains("dev_perplexity"));
        ++n;
    }
    EXPECT_EQ(n, 3u);
    EXPECT_EQ(load_checkpoint((dir / "checkpoint.cnmt").string()).state.epoch, 3u);
    fs::remove_all(dir);
}
