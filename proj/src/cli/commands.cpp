#include "cnmt/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cnmt/corpus/corpus.hpp"
#include "cnmt/evalkit/bleu.hpp"
#include "cnmt/inference/decode.hpp"
#include "cnmt/trainer/trainer.hpp"

namespace cnmt::cli {

namespace fs = std::filesystem;

namespace {

fs::path out_dir(const RunConfig& rc) {
    fs::path dir(rc.text("out"));
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

corpus::Truecaser load_truecaser(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read truecasing model " + path.string());
    }
    return corpus::Truecaser::load(in);
}

void save_truecaser(const fs::path& path, const corpus::Truecaser& t) {
    std::ostringstream s;
    t.save(s);
    write_text(path, s.str());
}

std::vector<std::string> joined(const std::vector<corpus::Tokens>& sentences) {
    std::vector<std::string> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) {
        out.push_back(corpus::join(s));
    }
    return out;
}

// Both dev files or neither.
bool dev_requested(const RunConfig& rc) {
    if (rc.has("dev_source") != rc.has("dev_target")) {
        throw ConfigError("dev_source and dev_target must be given together");
    }
    return rc.has("dev_source");
}

} // namespace

void cmd_preprocess(const RunConfig& rc, std::ostream& log) {
    corpus::PreprocessOptions opts;
    if (rc.has("source_lexicon") != rc.has("target_lexicon")) {
        throw ConfigError("source_lexicon and target_lexicon must be given together");
    }
    if (rc.has("source_lexicon")) {
        const auto n = rc.count("lexicon_top_n");
        opts.filter.emplace(corpus::Lexicon::load(rc.text("source_lexicon"), n),
                            corpus::Lexicon::load(rc.text("target_lexicon"), n), rc.real("max_foreign_percent"));
    }
    const std::string sl = rc.text("source_lang");
    const std::string tl = rc.text("target_lang");
    if (sl == tl) {
        throw ConfigError("source_lang and target_lang must differ");
    }
    if (rc.has("truecaser_dir")) {
        const fs::path dir(rc.text("truecaser_dir"));
        opts.source_truecaser = load_truecaser(dir / ("truecase." + sl + ".tsv"));
        opts.target_truecaser = load_truecaser(dir / ("truecase." + tl + ".tsv"));
    }
    const auto result =
        corpus::preprocess(corpus::read_lines(rc.text("raw_source")), corpus::read_lines(rc.text("raw_target")), opts);

    const auto dir = out_dir(rc);
    corpus::write_lines((dir / ("corpus." + sl)).string(), joined(result.corpus.source));
    corpus::write_lines((dir / ("corpus." + tl)).string(), joined(result.corpus.target));
    save_truecaser(dir / ("truecase." + sl + ".tsv"), result.source_truecaser);
    save_truecaser(dir / ("truecase." + tl + ".tsv"), result.target_truecaser);
    nlohmann::json stats;
    stats["input_pairs"] = result.input_pairs;
    stats["kept_pairs"] = result.corpus.size();
    stats["dropped_empty"] = result.dropped_empty;
    stats["dropped_foreign"] = result.dropped_foreign;
    stats["source"] = corpus::corpus_stats(result.corpus.source).to_json();
    stats["target"] = corpus::corpus_stats(result.corpus.target).to_json();
    write_json(dir / "stats.json", stats);
    if (rc.verbosity() > 0) {
        log << "preprocess: kept " << result.corpus.size() << " of " << result.input_pairs << " pairs ("
            << result.dropped_empty << " empty, " << result.dropped_foreign << " foreign)\n";
    }
}

void cmd_build_vocab(const RunConfig& rc, std::ostream& log) {
    const auto cfg = rc.train_config();
    const auto train = corpus::read_parallel(rc.text("train_source"), rc.text("train_target"));
    const auto vocabs = trainer::build_vocabularies(train, cfg.source_vocab_cap, cfg.target_vocab_cap);
    nlohmann::json stats;
    stats["train"]["source"] = corpus::corpus_stats(train.source, &vocabs.source).to_json();
    stats["train"]["target"] = corpus::corpus_stats(train.target, &vocabs.target).to_json();
    if (dev_requested(rc)) {
        const auto dev = corpus::read_parallel(rc.text("dev_source"), rc.text("dev_target"));
        stats["dev"]["source"] = corpus::corpus_stats(dev.source, &vocabs.source).to_json();
        stats["dev"]["target"] = corpus::corpus_stats(dev.target, &vocabs.target).to_json();
    }
    const auto dir = out_dir(rc);
    vocabs.source.save((dir / "source.vocab.tsv").string());
    vocabs.target.save((dir / "target.vocab.tsv").string());
    vocabs.chars.save((dir / "chars.vocab.tsv").string());
    write_json(dir / "stats.json", stats);
    if (rc.verbosity() > 0) {
        log << "build-vocab: " << vocabs.source.size() << " source words, " << vocabs.target.size()
            << " target words, " << vocabs.chars.size() << " characters\n";
    }
}

void cmd_train(const RunConfig& rc, std::ostream& log) {
    const auto train_corpus = corpus::read_parallel(rc.text("train_source"), rc.text("train_target"));
    std::optional<corpus::ParallelCorpus> dev_corpus;
    if (dev_requested(rc)) {
        dev_corpus = corpus::read_parallel(rc.text("dev_source"), rc.text("dev_target"));
    }
    const auto dir = out_dir(rc);

    std::unique_ptr<seq2seq::Model<float>> model;
    std::optional<trainer::Checkpoint> resumed;
    trainer::TrainConfig cfg;
    if (rc.has("resume")) {
        resumed = trainer::load_checkpoint(rc.text("resume"));
        model = trainer::build_model(*resumed);
        cfg = resumed->train;
        if (rc.has("max_epochs")) {
            cfg.max_epochs = rc.count("max_epochs");
        }
        if (rc.verbosity() > 0) {
            log << "train: resuming after epoch " << resumed->state.epoch << " (model and training settings come "
                << "from the checkpoint; only max_epochs may change)\n";
        }
    } else {
        cfg = rc.train_config();
        seq2seq::Vocabularies vocabs;
        if (rc.has("vocab_dir")) {
            const fs::path vd(rc.text("vocab_dir"));
            vocabs.source = corpus::Vocabulary::load((vd / "source.vocab.tsv").string());
            vocabs.target = corpus::Vocabulary::load((vd / "target.vocab.tsv").string());
            vocabs.chars = charembed::CharVocabulary::load((vd / "chars.vocab.tsv").string());
        } else {
            vocabs = trainer::build_vocabularies(train_corpus, cfg.source_vocab_cap, cfg.target_vocab_cap);
        }
        model = std::make_unique<seq2seq::Model<float>>(cfg.model, std::move(vocabs), cfg.seed);
        // A fresh run starts a fresh log so that reruns are comparable.
        fs::remove(dir / "metrics.jsonl");
    }
    trainer::Trainer t(*model, cfg);
    if (resumed) {
        t.restore(*resumed);
    }
    write_json(dir / "config.json",
               {{"model", seq2seq::to_json(model->config())}, {"train", trainer::to_json(t.config())}});

    const auto train = trainer::make_examples(*model, train_corpus);
    std::vector<trainer::Example> dev;
    if (dev_corpus) {
        dev = trainer::make_examples(*model, *dev_corpus);
    }
    trainer::FitOptions opts;
    opts.out_dir = dir.string();
    opts.max_epochs = cfg.max_epochs;
    opts.on_epoch = [&](const trainer::EpochMetrics& m) {
        if (rc.verbosity() > 1 || (rc.verbosity() == 1 && (m.epoch % 10 == 0 || m.epoch == 1))) {
            log << "epoch " << m.epoch << " loss " << std::fixed << std::setprecision(4) << m.loss;
            if (m.dev_loss) {
                log << " dev " << *m.dev_loss;
            }
            log << std::defaultfloat << "\n";
        }
    };
    const auto r = trainer::fit(t, train, dev_corpus ? &dev : nullptr, opts);
    if (rc.verbosity() > 0) {
        log << "train: finished at epoch " << t.state().epoch << (r.early_stopped ? " (early stop)" : "") << "\n";
    }
}

void cmd_translate(const RunConfig& rc, std::ostream& log) {
    const auto decode = rc.decode_config();
    const auto ckpt = trainer::load_checkpoint(rc.text("checkpoint"));
    const auto model = trainer::build_model(ckpt);
    std::vector<corpus::Tokens> sources;
    for (const auto& line : corpus::read_lines(rc.text("input"))) {
        sources.push_back(corpus::split_tokens(line));
    }
    const bool replace = rc.boolean("replace_unk");
    const auto results = inference::translate_all(*model, sources, decode, replace, rc.threads());

    std::vector<std::string> lines;
    std::string sidecar;
    std::vector<corpus::Tokens> outputs;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& tr = results[i];
        lines.push_back(corpus::join(tr.tokens));
        outputs.push_back(tr.tokens);
        nlohmann::json rec;
        rec["line"] = i + 1;
        rec["tokens"] = tr.tokens;
        rec["logprob"] = tr.logprob;
        rec["finished"] = tr.finished;
        rec["attention"] = tr.attention;
        rec["unk_replacements"] = nlohmann::json::array();
        for (const auto& u : tr.replacements) {
            rec["unk_replacements"].push_back(
                {{"position", u.position}, {"source_index", u.source_index}, {"word", u.word}});
        }
        sidecar += rec.dump() + "\n";
    }
    const auto dir = out_dir(rc);
    corpus::write_lines((dir / "translations.txt").string(), lines);
    if (rc.boolean("sidecar")) {
        write_text(dir / "translations.jsonl", sidecar);
    }
    if (rc.verbosity() > 0) {
        log << "translate: " << results.size() << " sentences, "
            << inference::count_unks(outputs, model->vocabularies().target.token(corpus::Vocabulary::kUnk))
            << " UNK tokens in output\n";
    }
}

void cmd_score(const RunConfig& rc, std::ostream& log) {
    const auto hyp = corpus::read_tokenized(rc.text("hypothesis"));
    const auto ref = corpus::read_tokenized(rc.text("reference"));
    if (hyp.size() != ref.size()) {
        throw InputError(rc.text("hypothesis") + " has " + std::to_string(hyp.size()) + " lines but " +
                         rc.text("reference") + " has " + std::to_string(ref.size()));
    }
    const auto report = evalkit::bleu(hyp, ref);
    const auto dir = out_dir(rc);
    write_text(dir / "score.txt", evalkit::render_report(report) + "\n");
    write_json(dir / "score.json", evalkit::to_json(report));
    if (rc.verbosity() > 0) {
        log << evalkit::render_report(report) << "\n";
    }
}

void cmd_compare(const RunConfig& rc, std::ostream& log) {
    std::vector<std::pair<std::string, std::string>> systems;
    std::istringstream in(rc.text("systems"));
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
            throw ConfigError("systems entry '" + item + "' is not NAME=PATH");
        }
        systems.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    const auto cmp = evalkit::compare_files(systems, rc.text("reference"), rc.text("baseline"));
    const auto dir = out_dir(rc);
    write_text(dir / "comparison.txt", evalkit::render_table(cmp));
    write_json(dir / "comparison.json", evalkit::to_json(cmp));
    if (rc.verbosity() > 0) {
        log << evalkit::render_table(cmp);
    }
}

} // namespace cnmt::cli
