#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <unordered_set>

#include "cnmt/corpus/text.hpp"

namespace cnmt::corpus {

/// Lowercased top-N entries of a frequency-ordered word list.
class Lexicon {
  public:
    Lexicon() = default;

    /// One word per line, most frequent first. Reads at most top_n entries.
    static Lexicon read(std::istream& in, std::size_t top_n);
    /// ConfigError if the file cannot be opened or holds no entries.
    static Lexicon load(const std::string& path, std::size_t top_n);

    void insert(const std::string& word);
    bool contains(const std::string& word) const;
    bool empty() const { return words_.empty(); }
    std::size_t size() const { return words_.size(); }

  private:
    std::unordered_set<std::string> words_;
};

struct FilterDecision {
    bool keep = true;
    std::size_t source_foreign = 0;
    std::size_t target_foreign = 0;
};

/// Drops a pair when more than max_percent of the tokens on either side are
/// foreign. A token is foreign on one side if the other side's lexicon has it
/// and its own lexicon does not. Exactly max_percent is kept.
class ForeignFilter {
  public:
    ForeignFilter(Lexicon source, Lexicon target, double max_percent = 5.0);

    std::size_t count_foreign(const Tokens& tokens, const Lexicon& own, const Lexicon& other) const;
    FilterDecision decide(const Tokens& source, const Tokens& target) const;

    const Lexicon& source_lexicon() const { return source_; }
    const Lexicon& target_lexicon() const { return target_; }

  private:
    bool over_limit(std::size_t foreign, std::size_t total) const;

    Lexicon source_;
    Lexicon target_;
    double max_percent_;
};

} // namespace cnmt::corpus
