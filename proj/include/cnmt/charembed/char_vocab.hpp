#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cnmt/corpus/text.hpp"
#include "cnmt/corpus/utf8.hpp"
#include "cnmt/corpus/vocabulary.hpp"

namespace cnmt::charembed {

inline const corpus::ReservedNames kCharReserved{"<pad>", "<unk>", "<bow>", "<eow>"};

/// Code point <-> id map. Ids 0..3 are PAD_CHAR, UNK_CHAR, BOW, EOW. Stored in
/// the same TSV format as word vocabularies.
class CharVocabulary {
  public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBow = 2;
    static constexpr int kEow = 3;

    CharVocabulary() : table_(kCharReserved) {}
    explicit CharVocabulary(corpus::Vocabulary table) : table_(std::move(table)) {}

    /// Every code point of every token, most frequent first. Cap counts the
    /// reserved ids; use corpus::Vocabulary::kUnlimited for no cap.
    static CharVocabulary build(const std::vector<corpus::Tokens>& sentences,
                                std::size_t cap = corpus::Vocabulary::kUnlimited) {
        std::map<std::string, std::uint64_t> counts;
        for (const auto& s : sentences) {
            for (const auto& w : s) {
                for (auto& c : corpus::split_code_points(w)) {
                    ++counts[c];
                }
            }
        }
        return CharVocabulary(corpus::Vocabulary::from_counts(counts, cap, kCharReserved));
    }

    /// Unknown characters map to kUnk.
    int id(const std::string& code_point) const { return table_.id(code_point); }
    std::size_t size() const { return table_.size(); }
    const corpus::Vocabulary& table() const { return table_; }

    void save(const std::string& path) const { table_.save(path); }
    static CharVocabulary load(const std::string& path) {
        return CharVocabulary(corpus::Vocabulary::load(path, kCharReserved));
    }

  private:
    corpus::Vocabulary table_;
};

} // namespace cnmt::charembed
