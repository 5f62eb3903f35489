#include "cnmt/seq2seq/config.hpp"

#include <set>

namespace cnmt::seq2seq {

std::string to_string(SourceEmbedding s) { return s == SourceEmbedding::characters ? "characters" : "words"; }

SourceEmbedding parse_source_embedding(const std::string& s) {
    if (s == "characters") {
        return SourceEmbedding::characters;
    }
    if (s == "words") {
        return SourceEmbedding::words;
    }
    throw ConfigError("source_embedding must be 'characters' or 'words', got '" + s + "'");
}

std::string to_string(LossNormalization n) { return n == LossNormalization::per_token ? "per_token" : "sum"; }

LossNormalization parse_loss_normalization(const std::string& s) {
    if (s == "per_token") {
        return LossNormalization::per_token;
    }
    if (s == "sum") {
        return LossNormalization::sum;
    }
    throw ConfigError("loss_normalization must be 'per_token' or 'sum', got '" + s + "'");
}

void ModelConfig::validate() const {
    if (source_embedding == SourceEmbedding::characters) {
        char_cnn.validate();
    } else if (source_word_dim == 0) {
        throw ConfigError("source_word_dim must be positive");
    }
    if (hidden == 0 || attention_dim == 0 || target_embed_dim == 0) {
        throw ConfigError("hidden, attention_dim and target_embed_dim must be positive");
    }
    if (!(init_scale > 0.0)) {
        throw ConfigError("init_scale must be positive");
    }
}

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full() {
    ModelConfig c;
    c.char_cnn = charembed::CharCnnConfig::full();
    c.source_word_dim = 620;
    c.hidden = 1024;
    c.attention_dim = 1024;
    c.target_embed_dim = 620;
    return c;
}

nlohmann::json to_json(const ModelConfig& c) {
    nlohmann::json filters = nlohmann::json::object();
    for (const auto& [w, count] : c.char_cnn.filters) {
        filters[std::to_string(w)] = count;
    }
    return {
        {"source_embedding", to_string(c.source_embedding)},
        {"char_embed_dim", c.char_cnn.char_embed_dim},
        {"filters", filters},
        {"highway_layers", c.char_cnn.highway_layers},
        {"max_word_len", c.char_cnn.max_word_len},
        {"source_word_dim", c.source_word_dim},
        {"hidden", c.hidden},
        {"attention_dim", c.attention_dim},
        {"target_embed_dim", c.target_embed_dim},
        {"loss_normalization", to_string(c.loss_normalization)},
        {"init_scale", c.init_scale},
        {"char_vocab_size", c.char_vocab_size},
        {"source_vocab_size", c.source_vocab_size},
        {"target_vocab_size", c.target_vocab_size},
    };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> keys{
        "source_embedding", "char_embed_dim",     "filters",    "highway_layers",  "max_word_len",
        "source_word_dim",  "hidden",             "attention_dim", "target_embed_dim", "loss_normalization",
        "init_scale",       "char_vocab_size",    "source_vocab_size", "target_vocab_size"};
    if (!j.is_object()) {
        throw ConfigError("model config must be a JSON object");
    }
    for (const auto& [k, v] : j.items()) {
        if (keys.count(k) == 0) {
            throw ConfigError("unknown model config key '" + k + "'");
        }
    }
    for (const auto& k : keys) {
        if (!j.contains(k)) {
            throw ConfigError("model config is missing '" + k + "'");
        }
    }
    try {
        ModelConfig c;
        c.source_embedding = parse_source_embedding(j.at("source_embedding").get<std::string>());
        c.char_cnn.char_embed_dim = j.at("char_embed_dim").get<std::size_t>();
        c.char_cnn.filters.clear();
        for (const auto& [w, count] : j.at("filters").items()) {
            c.char_cnn.filters[std::stoi(w)] = count.get<std::size_t>();
        }
        c.char_cnn.highway_layers = j.at("highway_layers").get<std::size_t>();
        c.char_cnn.max_word_len = j.at("max_word_len").get<std::size_t>();
        c.source_word_dim = j.at("source_word_dim").get<std::size_t>();
        c.hidden = j.at("hidden").get<std::size_t>();
        c.attention_dim = j.at("attention_dim").get<std::size_t>();
        c.target_embed_dim = j.at("target_embed_dim").get<std::size_t>();
        c.loss_normalization = parse_loss_normalization(j.at("loss_normalization").get<std::string>());
        c.init_scale = j.at("init_scale").get<double>();
        c.char_vocab_size = j.at("char_vocab_size").get<std::size_t>();
        c.source_vocab_size = j.at("source_vocab_size").get<std::size_t>();
        c.target_vocab_size = j.at("target_vocab_size").get<std::size_t>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model config: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed filter width in model config");
    }
}

} // namespace cnmt::seq2seq
