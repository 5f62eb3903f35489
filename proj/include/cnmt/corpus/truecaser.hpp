#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cnmt/corpus/text.hpp"

namespace cnmt::corpus {

/// Frequency-of-casing truecaser. For every lowercased type it remembers the
/// surface form seen most often away from sentence-initial position; only
/// the sentence-initial token is ever rewritten.
class Truecaser {
  public:
    Truecaser() = default;
    explicit Truecaser(std::map<std::string, std::string> table) : table_(std::move(table)) {}

    /// Ties between surface forms resolve to the lowercase form.
    static Truecaser learn(const std::vector<Tokens>& sentences);

    Tokens apply(Tokens tokens) const;

    std::optional<std::string> lookup(const std::string& token) const;
    const std::map<std::string, std::string>& table() const { return table_; }

    /// TSV: lowercased form, tab, preferred surface form; sorted by key.
    void save(std::ostream& out) const;
    static Truecaser load(std::istream& in);

  private:
    std::map<std::string, std::string> table_;
};

} // namespace cnmt::corpus
