#include "cnmt/corpus/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include "cnmt/errors.hpp"

namespace cnmt::corpus {

Vocabulary::Vocabulary(ReservedNames reserved) : reserved_(std::move(reserved)) {
    for (const auto& name : reserved_) {
        add(name, 0);
    }
}

Vocabulary Vocabulary::from_counts(const std::map<std::string, std::uint64_t>& counts, std::size_t cap,
                                   ReservedNames reserved) {
    if (cap < kReserved + 1) {
        throw ConfigError("vocabulary cap must be at least 5, got " + std::to_string(cap));
    }
    Vocabulary vocab(std::move(reserved));
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    for (const auto& [surface, n] : counts) {
        if (!vocab.contains(surface)) {
            entries.emplace_back(surface, n);
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    const std::size_t keep = std::min(entries.size(), cap - kReserved);
    for (std::size_t i = 0; i < keep; ++i) {
        vocab.add(entries[i].first, entries[i].second);
    }
    return vocab;
}

int Vocabulary::add(const std::string& surface, std::uint64_t frequency) {
    if (ids_.count(surface) > 0) {
        throw ContractError("duplicate vocabulary entry '" + surface + "'");
    }
    const int id = static_cast<int>(surfaces_.size());
    surfaces_.push_back(surface);
    frequencies_.push_back(frequency);
    ids_.emplace(surface, id);
    return id;
}

int Vocabulary::id(const std::string& surface) const {
    auto it = ids_.find(surface);
    return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& surface) const { return ids_.count(surface) > 0; }

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size()) {
        throw IndexError("vocabulary id " + std::to_string(id) + " out of range");
    }
    return surfaces_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::frequency(int id) const {
    token(id);
    return frequencies_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const Tokens& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        out.push_back(id(t));
    }
    return out;
}

Tokens Vocabulary::decode(const std::vector<int>& ids) const {
    Tokens out;
    out.reserve(ids.size());
    for (int i : ids) {
        out.push_back(token(i));
    }
    return out;
}

void Vocabulary::save(std::ostream& out) const {
    for (std::size_t i = 0; i < surfaces_.size(); ++i) {
        out << surfaces_[i] << '\t' << i << '\t' << frequencies_[i] << '\n';
    }
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write vocabulary " + path);
    }
    save(out);
}

Vocabulary Vocabulary::load(std::istream& in, ReservedNames reserved) {
    Vocabulary vocab(reserved);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
            throw InputError("vocabulary row " + std::to_string(row + 1) + ": expected 3 tab-separated fields");
        }
        const std::string surface = line.substr(0, t1);
        std::size_t id = 0;
        std::uint64_t freq = 0;
        try {
            id = std::stoull(line.substr(t1 + 1, t2 - t1 - 1));
            freq = std::stoull(line.substr(t2 + 1));
        } catch (const std::exception&) {
            throw InputError("vocabulary row " + std::to_string(row + 1) + ": bad id or frequency");
        }
        if (id != row) {
            throw InputError("vocabulary row " + std::to_string(row + 1) + ": ids must be dense, got " +
                             std::to_string(id));
        }
        if (row < kReserved) {
            if (surface != reserved[row]) {
                throw InputError("vocabulary row " + std::to_string(row + 1) + ": expected reserved symbol " +
                                 reserved[row]);
            }
            vocab.frequencies_[row] = freq;
        } else {
            if (vocab.contains(surface)) {
                throw InputError("vocabulary row " + std::to_string(row + 1) + ": duplicate entry '" + surface + "'");
            }
            vocab.add(surface, freq);
        }
        ++row;
    }
    if (row < kReserved) {
        throw InputError("vocabulary has fewer than the 4 reserved rows");
    }
    return vocab;
}

Vocabulary Vocabulary::load(const std::string& path, ReservedNames reserved) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open vocabulary " + path);
    }
    return load(in, std::move(reserved));
}

std::map<std::string, std::uint64_t> count_tokens(const std::vector<Tokens>& sentences) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& s : sentences) {
        for (const auto& t : s) {
            ++counts[t];
        }
    }
    return counts;
}

Vocabulary build_vocab(const std::vector<Tokens>& sentences, std::size_t cap) {
    return Vocabulary::from_counts(count_tokens(sentences), cap);
}

} // namespace cnmt::corpus
