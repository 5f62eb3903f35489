#include "cnmt/corpus/truecaser.hpp"

#include "cnmt/corpus/utf8.hpp"
#include "cnmt/errors.hpp"

namespace cnmt::corpus {

Truecaser Truecaser::learn(const std::vector<Tokens>& sentences) {
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    for (const auto& sentence : sentences) {
        for (std::size_t i = 1; i < sentence.size(); ++i) {
            ++counts[to_lower(sentence[i])][sentence[i]];
        }
    }
    std::map<std::string, std::string> table;
    for (const auto& [key, forms] : counts) {
        std::size_t best = 0;
        for (const auto& [form, n] : forms) {
            best = std::max(best, n);
        }
        std::size_t winners = 0;
        std::string choice;
        for (const auto& [form, n] : forms) {
            if (n == best) {
                ++winners;
                choice = form;
            }
        }
        table[key] = winners > 1 ? key : choice;
    }
    return Truecaser(std::move(table));
}

Tokens Truecaser::apply(Tokens tokens) const {
    if (!tokens.empty()) {
        if (auto form = lookup(tokens.front())) {
            tokens.front() = *form;
        }
    }
    return tokens;
}

std::optional<std::string> Truecaser::lookup(const std::string& token) const {
    auto it = table_.find(to_lower(token));
    if (it == table_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Truecaser::save(std::ostream& out) const {
    for (const auto& [key, form] : table_) {
        out << key << '\t' << form << '\n';
    }
}

Truecaser Truecaser::load(std::istream& in) {
    std::map<std::string, std::string> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw InputError("truecase model line " + std::to_string(line_no) + ": expected two tab-separated fields");
        }
        table[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return Truecaser(std::move(table));
}

} // namespace cnmt::corpus
