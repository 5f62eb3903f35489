#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "cnmt/numcore/optim.hpp"
#include "cnmt/seq2seq/config.hpp"
#include "json.hpp"

namespace cnmt::trainer {

/// Training hyperparameters. No dropout: the model has none to switch on.
struct TrainConfig {
    std::string preset = "desk";
    seq2seq::ModelConfig model = seq2seq::ModelConfig::desk();
    std::size_t source_vocab_cap = 200;
    std::size_t target_vocab_cap = 200;
    std::size_t batch_size = 8;
    std::size_t max_epochs = 500;
    std::uint64_t seed = 1;
    std::size_t checkpoint_every = 10; // epochs; the final epoch is always saved
    std::size_t patience = 5;          // epochs without dev improvement
    num::AdamConfig adam;

    void validate() const;

    /// 60-wide source vectors, 64 hidden units, 200-word target vocabulary,
    /// batches of 8.
    static TrainConfig desk();
    /// 620/1024, 90k target vocabulary, batches of 32.
    static TrainConfig full();
    static TrainConfig from_preset(const std::string& name);
};

/// Training fields only; the model config is serialized separately.
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, const seq2seq::ModelConfig& model);

} // namespace cnmt::trainer
