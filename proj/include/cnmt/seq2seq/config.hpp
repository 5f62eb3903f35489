#pragma once

#include <cstddef>
#include <string>

#include "cnmt/charembed/char_cnn.hpp"
#include "cnmt/errors.hpp"
#include "json.hpp"

namespace cnmt::seq2seq {

enum class SourceEmbedding { characters, words };
enum class LossNormalization { per_token, sum };

std::string to_string(SourceEmbedding s);
SourceEmbedding parse_source_embedding(const std::string& s);
std::string to_string(LossNormalization n);
LossNormalization parse_loss_normalization(const std::string& s);

struct ModelConfig {
    SourceEmbedding source_embedding = SourceEmbedding::characters;
    charembed::CharCnnConfig char_cnn = charembed::CharCnnConfig::desk();
    std::size_t source_word_dim = 60; // word-table baseline only
    std::size_t hidden = 64;
    std::size_t attention_dim = 64;
    std::size_t target_embed_dim = 60;
    LossNormalization loss_normalization = LossNormalization::per_token;
    double init_scale = 0.08;

    // Filled in from the vocabularies when a model is built.
    std::size_t char_vocab_size = 0;
    std::size_t source_vocab_size = 0;
    std::size_t target_vocab_size = 0;

    std::size_t source_dim() const {
        return source_embedding == SourceEmbedding::characters ? char_cnn.output_dim() : source_word_dim;
    }

    void validate() const;

    /// 64 hidden units, 60-wide source vectors from filters {1:20, 2:20, 3:20}.
    static ModelConfig desk();
    /// 1024 hidden units, 620-wide embeddings.
    static ModelConfig full();
};

nlohmann::json to_json(const ModelConfig& c);
/// Rejects missing and unknown keys.
ModelConfig model_config_from_json(const nlohmann::json& j);

} // namespace cnmt::seq2seq
