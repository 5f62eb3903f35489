#include "cnmt/inference/unk.hpp"

#include "cnmt/errors.hpp"

namespace cnmt::inference {

std::size_t argmax_alignment(const std::vector<double>& weights) {
    if (weights.empty()) {
        throw ContractError("empty attention row");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < weights.size(); ++k) {
        if (weights[k] > weights[best]) {
            best = k;
        }
    }
    return best;
}

ReplacedOutput replace_unk(const std::vector<int>& ids, const std::vector<std::vector<double>>& attention,
                           const corpus::Tokens& source_words, const corpus::Vocabulary& target, bool replace) {
    std::size_t n = ids.size();
    if (n > 0 && ids.back() == corpus::Vocabulary::kEos) {
        --n;
    }
    ReplacedOutput out;
    out.tokens.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!replace || ids[j] != corpus::Vocabulary::kUnk) {
            out.tokens.push_back(target.token(ids[j]));
            continue;
        }
        if (j >= attention.size()) {
            throw ContractError("replace_unk: no attention record for output position " + std::to_string(j));
        }
        const std::size_t k = argmax_alignment(attention[j]);
        if (k >= source_words.size()) {
            throw ContractError("replace_unk: attention row " + std::to_string(j) + " is longer than the source");
        }
        out.tokens.push_back(source_words[k]);
        out.replacements.push_back({j, k, source_words[k]});
    }
    return out;
}

std::size_t count_unks(const std::vector<corpus::Tokens>& sentences, const std::string& unk) {
    std::size_t n = 0;
    for (const auto& s : sentences) {
        for (const auto& t : s) {
            n += t == unk ? 1 : 0;
        }
    }
    return n;
}

} // namespace cnmt::inference
