#include "cnmt/trainer/config.hpp"

#include <set>

namespace cnmt::trainer {

void TrainConfig::validate() const {
    model.validate();
    if (batch_size == 0 || max_epochs == 0) {
        throw ConfigError("batch_size and max_epochs must be positive");
    }
    if (source_vocab_cap < corpus::Vocabulary::kReserved + 1 || target_vocab_cap < corpus::Vocabulary::kReserved + 1) {
        throw ConfigError("vocabulary caps must leave room for at least one word");
    }
    if (patience == 0) {
        throw ConfigError("patience must be positive");
    }
    if (!(adam.learning_rate > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
        !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
        throw ConfigError("Adam settings out of range");
    }
}

TrainConfig TrainConfig::desk() { return TrainConfig{}; }

TrainConfig TrainConfig::full() {
    TrainConfig c;
    c.preset = "full";
    c.model = seq2seq::ModelConfig::full();
    c.source_vocab_cap = 90000;
    c.target_vocab_cap = 90000;
    c.batch_size = 32;
    return c;
}

TrainConfig TrainConfig::from_preset(const std::string& name) {
    if (name == "desk") {
        return desk();
    }
    if (name == "full") {
        return full();
    }
    throw ConfigError("unknown preset '" + name + "' (expected desk or full)");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"preset", c.preset},
            {"source_vocab_cap", c.source_vocab_cap},
            {"target_vocab_cap", c.target_vocab_cap},
            {"batch_size", c.batch_size},
            {"max_epochs", c.max_epochs},
            {"seed", c.seed},
            {"checkpoint_every", c.checkpoint_every},
            {"patience", c.patience},
            {"learning_rate", c.adam.learning_rate},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"epsilon", c.adam.epsilon},
            {"clip_norm", c.adam.clip_norm}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, const seq2seq::ModelConfig& model) {
    static const std::set<std::string> keys{"preset",     "source_vocab_cap", "target_vocab_cap", "batch_size",
                                            "max_epochs", "seed",             "checkpoint_every", "patience",
                                            "learning_rate", "beta1",         "beta2",            "epsilon",
                                            "clip_norm"};
    if (!j.is_object()) {
        throw ConfigError("training config must be a JSON object");
    }
    for (const auto& [k, v] : j.items()) {
        if (keys.count(k) == 0) {
            throw ConfigError("unknown training config key '" + k + "'");
        }
    }
    try {
        TrainConfig c;
        c.model = model;
        c.preset = j.at("preset").get<std::string>();
        c.source_vocab_cap = j.at("source_vocab_cap").get<std::size_t>();
        c.target_vocab_cap = j.at("target_vocab_cap").get<std::size_t>();
        c.batch_size = j.at("batch_size").get<std::size_t>();
        c.max_epochs = j.at("max_epochs").get<std::size_t>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.checkpoint_every = j.at("checkpoint_every").get<std::size_t>();
        c.patience = j.at("patience").get<std::size_t>();
        c.adam.learning_rate = j.at("learning_rate").get<double>();
        c.adam.beta1 = j.at("beta1").get<double>();
        c.adam.beta2 = j.at("beta2").get<double>();
        c.adam.epsilon = j.at("epsilon").get<double>();
        c.adam.clip_norm = j.at("clip_norm").get<double>();
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed training config: ") + e.what());
    }
}

} // namespace cnmt::trainer
