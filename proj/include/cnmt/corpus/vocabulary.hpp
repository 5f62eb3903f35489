#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnmt/corpus/text.hpp"

namespace cnmt::corpus {

/// Surface forms of the four reserved ids 0..3.
using ReservedNames = std::array<std::string, 4>;

inline const ReservedNames kWordReserved{"<pad>", "UNK", "<s>", "</s>"};

/// Dense token <-> id map. Ids 0..3 are reserved (PAD, UNK, BOS, EOS for
/// words); the rest follow descending corpus frequency, ties broken by
/// byte-wise comparison of the surface form.
class Vocabulary {
  public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBos = 2;
    static constexpr int kEos = 3;
    static constexpr std::size_t kReserved = 4;
    static constexpr std::size_t kUnlimited = static_cast<std::size_t>(-1);

    explicit Vocabulary(ReservedNames reserved = kWordReserved);

    /// Keeps the cap - 4 most frequent types. ConfigError if cap < 5.
    static Vocabulary from_counts(const std::map<std::string, std::uint64_t>& counts, std::size_t cap,
                                  ReservedNames reserved = kWordReserved);

    /// Appends a new entry; ContractError on duplicates.
    int add(const std::string& surface, std::uint64_t frequency);

    /// Unknown surfaces map to kUnk.
    int id(const std::string& surface) const;
    bool contains(const std::string& surface) const;
    const std::string& token(int id) const;
    std::uint64_t frequency(int id) const;
    std::size_t size() const { return surfaces_.size(); }
    const ReservedNames& reserved() const { return reserved_; }

    std::vector<int> encode(const Tokens& tokens) const;
    Tokens decode(const std::vector<int>& ids) const;

    /// TSV rows: surface, tab, id, tab, frequency. LF endings.
    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static Vocabulary load(std::istream& in, ReservedNames reserved = kWordReserved);
    static Vocabulary load(const std::string& path, ReservedNames reserved = kWordReserved);

    bool operator==(const Vocabulary& other) const {
        return surfaces_ == other.surfaces_ && frequencies_ == other.frequencies_;
    }

  private:
    ReservedNames reserved_;
    std::vector<std::string> surfaces_;
    std::vector<std::uint64_t> frequencies_;
    std::unordered_map<std::string, int> ids_;
};

std::map<std::string, std::uint64_t> count_tokens(const std::vector<Tokens>& sentences);

Vocabulary build_vocab(const std::vector<Tokens>& sentences, std::size_t cap);

} // namespace cnmt::corpus
