#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cnmt/corpus/filter.hpp"
#include "cnmt/corpus/text.hpp"
#include "cnmt/corpus/truecaser.hpp"
#include "cnmt/corpus/vocabulary.hpp"

namespace cnmt::corpus {

/// Reads a text file as lines (LF or CRLF). InputError if unreadable.
std::vector<std::string> read_lines(const std::string& path);

/// Writes lines with LF endings.
void write_lines(const std::string& path, const std::vector<std::string>& lines);

/// Tokenized file: each line split on spaces.
std::vector<Tokens> read_tokenized(const std::string& path);

struct ParallelCorpus {
    std::vector<Tokens> source;
    std::vector<Tokens> target;
    std::string source_lang = "src";
    std::string target_lang = "tgt";

    std::size_t size() const { return source.size(); }
};

/// Reads two aligned tokenized files; InputError on unequal line counts.
ParallelCorpus read_parallel(const std::string& source_path, const std::string& target_path);

/// Sentences (S), tokens (W), distinct types (V) and, against a reference
/// vocabulary, distinct types it lacks (OOV).
struct CorpusStats {
    std::size_t sentences = 0;
    std::size_t words = 0;
    std::size_t vocabulary = 0;
    std::optional<std::size_t> oov;

    nlohmann::json to_json() const;
};

CorpusStats corpus_stats(const std::vector<Tokens>& set, const Vocabulary* reference = nullptr);

/// Distinct types of `set` that `vocab` does not contain.
std::size_t count_oov_types(const std::vector<Tokens>& set, const Vocabulary& vocab);

struct PreprocessOptions {
    std::optional<ForeignFilter> filter;
    // Learned from the kept sentences when absent.
    std::optional<Truecaser> source_truecaser;
    std::optional<Truecaser> target_truecaser;
};

struct PreprocessResult {
    ParallelCorpus corpus;
    Truecaser source_truecaser;
    Truecaser target_truecaser;
    std::size_t input_pairs = 0;
    std::size_t dropped_foreign = 0;
    std::size_t dropped_empty = 0;
};

/// normalize_punct -> tokenize -> drop empty pairs -> foreign filter ->
/// truecase. Lines are numbered from 1 in error messages.
PreprocessResult preprocess(const std::vector<std::string>& source_lines,
                            const std::vector<std::string>& target_lines, const PreprocessOptions& options);

} // namespace cnmt::corpus
