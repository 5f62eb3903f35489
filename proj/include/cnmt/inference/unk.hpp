#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cnmt/corpus/text.hpp"
#include "cnmt/corpus/vocabulary.hpp"

namespace cnmt::inference {

struct UnkReplacement {
    std::size_t position;     // output position
    std::size_t source_index; // aligned source position
    std::string word;
};

struct ReplacedOutput {
    corpus::Tokens tokens;
    std::vector<UnkReplacement> replacements;
};

/// Index of the largest weight; ties go to the lowest index.
std::size_t argmax_alignment(const std::vector<double>& weights);

/// Decodes `ids` (a trailing EOS is dropped) and, when `replace` is set,
/// substitutes every UNK with the source word its attention row peaks on.
/// Needs one attention row per emitted id.
ReplacedOutput replace_unk(const std::vector<int>& ids, const std::vector<std::vector<double>>& attention,
                           const corpus::Tokens& source_words, const corpus::Vocabulary& target, bool replace = true);

/// Number of tokens equal to the UNK surface form.
std::size_t count_unks(const std::vector<corpus::Tokens>& sentences, const std::string& unk = "UNK");

} // namespace cnmt::inference
