#include "cnmt/corpus/filter.hpp"

#include <fstream>

#include "cnmt/corpus/utf8.hpp"
#include "cnmt/errors.hpp"

namespace cnmt::corpus {

Lexicon Lexicon::read(std::istream& in, std::size_t top_n) {
    Lexicon lex;
    std::string line;
    std::size_t taken = 0;
    while (taken < top_n && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        lex.insert(line);
        ++taken;
    }
    return lex;
}

Lexicon Lexicon::load(const std::string& path, std::size_t top_n) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open lexicon " + path);
    }
    Lexicon lex = read(in, top_n);
    if (lex.empty()) {
        throw ConfigError("lexicon " + path + " has no entries");
    }
    return lex;
}

void Lexicon::insert(const std::string& word) { words_.insert(to_lower(word)); }

bool Lexicon::contains(const std::string& word) const { return words_.count(to_lower(word)) > 0; }

ForeignFilter::ForeignFilter(Lexicon source, Lexicon target, double max_percent)
    : source_(std::move(source)), target_(std::move(target)), max_percent_(max_percent) {
    if (source_.empty() || target_.empty()) {
        throw ConfigError("foreign filter needs non-empty source and target lexicons");
    }
}

std::size_t ForeignFilter::count_foreign(const Tokens& tokens, const Lexicon& own, const Lexicon& other) const {
    std::size_t n = 0;
    for (const auto& t : tokens) {
        if (other.contains(t) && !own.contains(t)) {
            ++n;
        }
    }
    return n;
}

bool ForeignFilter::over_limit(std::size_t foreign, std::size_t total) const {
    // Both sides are small integers times a percentage; exact in double.
    return 100.0 * static_cast<double>(foreign) > max_percent_ * static_cast<double>(total);
}

FilterDecision ForeignFilter::decide(const Tokens& source, const Tokens& target) const {
    FilterDecision d;
    d.source_foreign = count_foreign(source, source_, target_);
    d.target_foreign = count_foreign(target, target_, source_);
    d.keep = !over_limit(d.source_foreign, source.size()) && !over_limit(d.target_foreign, target.size());
    return d;
}

} // namespace cnmt::corpus
