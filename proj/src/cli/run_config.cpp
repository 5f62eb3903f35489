#include "cnmt/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cnmt::cli {

namespace {

const std::vector<std::string> kAll{};
const std::vector<std::string> kPre{"preprocess"};
const std::vector<std::string> kVocabTrain{"build-vocab", "train"};
const std::vector<std::string> kTrain{"train"};
const std::vector<std::string> kTranslate{"translate"};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

bool parse_real(const std::string& s, double& out) {
    std::istringstream in(s);
    in >> out;
    return !s.empty() && in && in.peek() == std::char_traits<char>::eof() && std::isfinite(out);
}

bool parse_bool(const std::string& s, bool& out) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (l == "true" || l == "1" || l == "yes" || l == "on") {
        out = true;
        return true;
    }
    if (l == "false" || l == "0" || l == "no" || l == "off") {
        out = false;
        return true;
    }
    return false;
}

std::string join_errors(const std::vector<std::string>& errors) {
    std::string msg;
    for (const auto& e : errors) {
        msg += (msg.empty() ? "" : "; ") + e;
    }
    return msg;
}

// Empty string when valid.
std::string check_value(const Setting& s, const std::string& v) {
    std::uint64_t u = 0;
    double d = 0.0;
    bool b = false;
    switch (s.kind) {
    case ValueKind::text:
    case ValueKind::path:
        return "";
    case ValueKind::count:
    case ValueKind::integer:
        return parse_u64(v, u) ? "" : "expected a non-negative integer";
    case ValueKind::real:
        return parse_real(v, d) ? "" : "expected a finite number";
    case ValueKind::boolean:
        return parse_bool(v, b) ? "" : "expected true or false";
    case ValueKind::choice:
        if (std::find(s.choices.begin(), s.choices.end(), v) != s.choices.end()) {
            return "";
        } else {
            std::string msg = "expected one of";
            for (const auto& c : s.choices) {
                msg += " " + c;
            }
            return msg;
        }
    case ValueKind::filters:
        try {
            parse_filter_spec(v);
            return "";
        } catch (const ConfigError& e) {
            return e.what();
        }
    }
    return "";
}

} // namespace

const std::vector<Setting>& settings() {
    static const std::vector<Setting> table{
        {"seed", ValueKind::integer, "1", "random seed", kAll},
        {"threads", ValueKind::count, "1", "worker threads for per-sentence decoding", kAll},
        {"verbosity", ValueKind::count, "1", "0 quiet, 1 progress, 2 per-epoch detail", kAll},
        {"out", ValueKind::path, "", "output directory; nothing is written elsewhere", kAll, {}, true},

        {"raw_source", ValueKind::path, "", "untokenized source-side text", kPre, {}, true},
        {"raw_target", ValueKind::path, "", "untokenized target-side text", kPre, {}, true},
        {"source_lexicon", ValueKind::path, "", "source-language frequency list (enables the foreign filter)", kPre},
        {"target_lexicon", ValueKind::path, "", "target-language frequency list (enables the foreign filter)", kPre},
        {"lexicon_top_n", ValueKind::count, "2000", "lexicon entries used by the foreign filter", kPre},
        {"max_foreign_percent", ValueKind::real, "5", "drop pairs with more than this percent foreign words", kPre},
        {"source_lang", ValueKind::text, "src", "source language tag used in file names", kPre},
        {"target_lang", ValueKind::text, "tgt", "target language tag used in file names", kPre},
        {"truecaser_dir", ValueKind::path, "", "reuse truecasing models from an earlier preprocess output", kPre},

        {"train_source", ValueKind::path, "", "tokenized training source", kVocabTrain, {}, true},
        {"train_target", ValueKind::path, "", "tokenized training target", kVocabTrain, {}, true},
        {"dev_source", ValueKind::path, "", "tokenized dev source", kVocabTrain},
        {"dev_target", ValueKind::path, "", "tokenized dev target", kVocabTrain},
        {"preset", ValueKind::choice, "desk", "hyperparameter preset", kVocabTrain, {"desk", "full"}},
        {"source_vocab_cap", ValueKind::count, "", "source word vocabulary cap including reserved ids", kVocabTrain},
        {"target_vocab_cap", ValueKind::count, "", "target word vocabulary cap including reserved ids", kVocabTrain},

        {"vocab_dir", ValueKind::path, "", "vocabularies from build-vocab (built from the data when empty)", kTrain},
        {"resume", ValueKind::path, "", "checkpoint to continue training from", kTrain},
        {"source_embedding", ValueKind::choice, "", "source word representation", kTrain, {"characters", "words"}},
        {"filter_spec", ValueKind::filters, "", "character CNN filters as width:count,...", kTrain},
        {"char_embed_dim", ValueKind::count, "", "character embedding width", kTrain},
        {"highway_layers", ValueKind::count, "", "highway layers after pooling", kTrain},
        {"max_word_length", ValueKind::count, "", "characters kept per word", kTrain},
        {"source_word_dim", ValueKind::count, "", "word-table width when source_embedding = words", kTrain},
        {"hidden", ValueKind::count, "", "GRU hidden units", kTrain},
        {"attention_dim", ValueKind::count, "", "attention MLP width", kTrain},
        {"target_embed_dim", ValueKind::count, "", "target embedding width", kTrain},
        {"init_scale", ValueKind::real, "", "uniform init range for non-recurrent weights", kTrain},
        {"loss_normalization", ValueKind::choice, "", "batch objective", kTrain, {"per_token", "sum"}},
        {"batch_size", ValueKind::count, "", "sentences per batch", kTrain},
        {"max_epochs", ValueKind::count, "", "epoch limit", kTrain},
        {"learning_rate", ValueKind::real, "", "Adam step size", kTrain},
        {"clip_norm", ValueKind::real, "", "global gradient norm clip, 0 disables", kTrain},
        {"patience", ValueKind::count, "", "epochs without dev improvement before stopping", kTrain},
        {"checkpoint_every", ValueKind::count, "", "epochs between checkpoints", kTrain},

        {"checkpoint", ValueKind::path, "", "trained model", kTranslate, {}, true},
        {"input", ValueKind::path, "", "tokenized source sentences", kTranslate, {}, true},
        {"beam", ValueKind::count, "5", "beam width, 1 is greedy", kTranslate},
        {"length_norm", ValueKind::real, "1", "hypothesis score = logprob / length^alpha", kTranslate},
        {"max_length_factor", ValueKind::real, "3", "output length limit as a multiple of the source length",
         kTranslate},
        {"replace_unk", ValueKind::boolean, "false", "replace UNK with the most attended source word", kTranslate},
        {"sidecar", ValueKind::boolean, "false", "also write per-sentence JSON records", kTranslate},

        {"hypothesis", ValueKind::path, "", "system output to score", {"score"}, {}, true},
        {"reference", ValueKind::path, "", "reference translations", {"score", "compare"}, {}, true},
        {"systems", ValueKind::text, "", "comma-separated NAME=PATH list", {"compare"}, {}, true},
        {"baseline", ValueKind::text, "", "system the deltas are measured against", {"compare"}, {}, true},
    };
    return table;
}

const Setting* find_setting(const std::string& key) {
    for (const auto& s : settings()) {
        if (s.key == key) {
            return &s;
        }
    }
    return nullptr;
}

std::vector<const Setting*> settings_for(const std::string& command) {
    std::vector<const Setting*> out;
    for (const auto& s : settings()) {
        if (s.commands.empty() || std::find(s.commands.begin(), s.commands.end(), command) != s.commands.end()) {
            out.push_back(&s);
        }
    }
    return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> out;
    std::vector<std::string> errors;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(line_no);
        if (eq == std::string::npos) {
            errors.push_back(where + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            errors.push_back(where + ": empty key");
        } else if (!out.emplace(key, value).second) {
            errors.push_back(where + ": duplicate key " + key);
        }
    }
    if (!errors.empty()) {
        throw ConfigError(join_errors(errors));
    }
    return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

std::map<int, std::size_t> parse_filter_spec(const std::string& spec) {
    std::map<int, std::size_t> out;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        std::uint64_t width = 0;
        std::uint64_t count = 0;
        if (colon == std::string::npos || !parse_u64(trim(item.substr(0, colon)), width) ||
            !parse_u64(trim(item.substr(colon + 1)), count)) {
            throw ConfigError("filter spec entry '" + item + "' is not width:count");
        }
        if (width < 1 || width > charembed::kMaxFilterWidth || count == 0) {
            throw ConfigError("filter spec entry '" + item + "' needs width 1..7 and a positive count");
        }
        if (!out.emplace(static_cast<int>(width), static_cast<std::size_t>(count)).second) {
            throw ConfigError("filter width " + std::to_string(width) + " listed twice");
        }
    }
    if (out.empty()) {
        throw ConfigError("filter spec is empty");
    }
    return out;
}

std::string format_filter_spec(const std::map<int, std::size_t>& filters) {
    std::string out;
    for (const auto& [w, n] : filters) {
        out += (out.empty() ? "" : ",") + std::to_string(w) + ":" + std::to_string(n);
    }
    return out;
}

RunConfig::RunConfig(std::string command, const std::map<std::string, std::string>& file,
                     const std::map<std::string, std::string>& flags)
    : command_(std::move(command)) {
    const auto relevant = settings_for(command_);
    for (const auto* s : relevant) {
        values_[s->key] = s->default_value;
    }
    std::vector<std::string> errors;
    std::string unknown;
    for (const auto& [k, v] : file) {
        if (find_setting(k) == nullptr) {
            unknown += " " + k;
        }
    }
    if (!unknown.empty()) {
        errors.push_back("unknown keys:" + unknown);
    }
    for (const auto* layer : {&file, &flags}) {
        for (const auto& [k, v] : *layer) {
            if (values_.count(k) != 0) {
                values_[k] = v;
            } else if (layer == &flags) {
                errors.push_back("unknown option " + k);
            }
        }
    }
    for (const auto* s : relevant) {
        const auto& v = values_[s->key];
        if (v.empty()) {
            if (s->required) {
                errors.push_back(s->key + ": required");
            }
            continue;
        }
        if (auto problem = check_value(*s, v); !problem.empty()) {
            errors.push_back(s->key + " = '" + v + "': " + problem);
        }
    }
    if (errors.empty() && count("threads") == 0) {
        errors.push_back("threads: must be at least 1");
    }
    if (!errors.empty()) {
        throw ConfigError(join_errors(errors));
    }
}

bool RunConfig::has(const std::string& key) const {
    const auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

std::string RunConfig::text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ContractError("setting " + key + " is not available to " + command_);
    }
    return it->second;
}

std::uint64_t RunConfig::integer(const std::string& key) const {
    std::uint64_t v = 0;
    if (!parse_u64(text(key), v)) {
        throw ConfigError(key + ": expected a non-negative integer");
    }
    return v;
}

std::size_t RunConfig::count(const std::string& key) const { return static_cast<std::size_t>(integer(key)); }

double RunConfig::real(const std::string& key) const {
    double v = 0.0;
    if (!parse_real(text(key), v)) {
        throw ConfigError(key + ": expected a finite number");
    }
    return v;
}

bool RunConfig::boolean(const std::string& key) const {
    bool v = false;
    if (!parse_bool(text(key), v)) {
        throw ConfigError(key + ": expected true or false");
    }
    return v;
}

trainer::TrainConfig RunConfig::train_config() const {
    auto c = trainer::TrainConfig::from_preset(text("preset"));
    c.seed = seed();
    if (has("source_vocab_cap")) {
        c.source_vocab_cap = count("source_vocab_cap");
    }
    if (has("target_vocab_cap")) {
        c.target_vocab_cap = count("target_vocab_cap");
    }
    if (command_ != "train") {
        return c;
    }
    auto& m = c.model;
    if (has("source_embedding")) {
        m.source_embedding = seq2seq::parse_source_embedding(text("source_embedding"));
    }
    if (has("filter_spec")) {
        m.char_cnn.filters = parse_filter_spec(text("filter_spec"));
    }
    const std::pair<const char*, std::size_t*> sizes[] = {
        {"char_embed_dim", &m.char_cnn.char_embed_dim},
        {"highway_layers", &m.char_cnn.highway_layers},
        {"max_word_length", &m.char_cnn.max_word_len},
        {"source_word_dim", &m.source_word_dim},
        {"hidden", &m.hidden},
        {"attention_dim", &m.attention_dim},
        {"target_embed_dim", &m.target_embed_dim},
        {"batch_size", &c.batch_size},
        {"max_epochs", &c.max_epochs},
        {"patience", &c.patience},
        {"checkpoint_every", &c.checkpoint_every},
    };
    for (const auto& [key, field] : sizes) {
        if (has(key)) {
            *field = count(key);
        }
    }
    if (has("init_scale")) {
        m.init_scale = real("init_scale");
    }
    if (has("loss_normalization")) {
        m.loss_normalization = seq2seq::parse_loss_normalization(text("loss_normalization"));
    }
    if (has("learning_rate")) {
        c.adam.learning_rate = real("learning_rate");
    }
    if (has("clip_norm")) {
        c.adam.clip_norm = real("clip_norm");
    }
    m.validate();
    c.validate();
    return c;
}

inference::DecodeConfig RunConfig::decode_config() const {
    inference::DecodeConfig d;
    d.beam_width = count("beam");
    d.length_norm = real("length_norm");
    d.max_length_factor = real("max_length_factor");
    d.validate();
    return d;
}

} // namespace cnmt::cli
