#include "cnmt/corpus/corpus.hpp"

#include <fstream>
#include <set>

#include "cnmt/corpus/utf8.hpp"
#include "cnmt/errors.hpp"

namespace cnmt::corpus {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    for (const auto& l : lines) {
        out << l << '\n';
    }
}

std::vector<Tokens> read_tokenized(const std::string& path) {
    std::vector<Tokens> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (!is_valid_utf8(line)) {
            throw InputError(path + " line " + std::to_string(line_no) + ": invalid UTF-8");
        }
        out.push_back(split_tokens(line));
    }
    return out;
}

ParallelCorpus read_parallel(const std::string& source_path, const std::string& target_path) {
    ParallelCorpus c;
    c.source = read_tokenized(source_path);
    c.target = read_tokenized(target_path);
    if (c.source.size() != c.target.size()) {
        throw InputError("parallel files differ in length: " + source_path + " has " +
                         std::to_string(c.source.size()) + " lines, " + target_path + " has " +
                         std::to_string(c.target.size()));
    }
    return c;
}

nlohmann::json CorpusStats::to_json() const {
    nlohmann::json j;
    j["sentences"] = sentences;
    j["words"] = words;
    j["vocabulary"] = vocabulary;
    j["oov"] = oov ? nlohmann::json(*oov) : nlohmann::json(nullptr);
    return j;
}

CorpusStats corpus_stats(const std::vector<Tokens>& set, const Vocabulary* reference) {
    CorpusStats s;
    std::set<std::string> types;
    s.sentences = set.size();
    for (const auto& sentence : set) {
        s.words += sentence.size();
        types.insert(sentence.begin(), sentence.end());
    }
    s.vocabulary = types.size();
    if (reference != nullptr) {
        s.oov = count_oov_types(set, *reference);
    }
    return s;
}

std::size_t count_oov_types(const std::vector<Tokens>& set, const Vocabulary& vocab) {
    std::set<std::string> missing;
    for (const auto& sentence : set) {
        for (const auto& t : sentence) {
            if (!vocab.contains(t)) {
                missing.insert(t);
            }
        }
    }
    return missing.size();
}

PreprocessResult preprocess(const std::vector<std::string>& source_lines,
                            const std::vector<std::string>& target_lines, const PreprocessOptions& options) {
    if (source_lines.size() != target_lines.size()) {
        throw InputError("parallel inputs differ in length: " + std::to_string(source_lines.size()) + " vs " +
                         std::to_string(target_lines.size()) + " lines");
    }
    PreprocessResult r;
    r.input_pairs = source_lines.size();
    for (std::size_t i = 0; i < source_lines.size(); ++i) {
        Tokens src = tokenize(normalize_punct(source_lines[i]), i + 1);
        Tokens tgt = tokenize(normalize_punct(target_lines[i]), i + 1);
        if (src.empty() || tgt.empty()) {
            ++r.dropped_empty;
            continue;
        }
        if (options.filter && !options.filter->decide(src, tgt).keep) {
            ++r.dropped_foreign;
            continue;
        }
        r.corpus.source.push_back(std::move(src));
        r.corpus.target.push_back(std::move(tgt));
    }
    r.source_truecaser = options.source_truecaser ? *options.source_truecaser : Truecaser::learn(r.corpus.source);
    r.target_truecaser = options.target_truecaser ? *options.target_truecaser : Truecaser::learn(r.corpus.target);
    for (auto& s : r.corpus.source) {
        s = r.source_truecaser.apply(std::move(s));
    }
    for (auto& t : r.corpus.target) {
        t = r.target_truecaser.apply(std::move(t));
    }
    return r;
}

} // namespace cnmt::corpus
