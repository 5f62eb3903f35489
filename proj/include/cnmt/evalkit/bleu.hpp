#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cnmt/corpus/text.hpp"
#include "json.hpp"

namespace cnmt::evalkit {

inline constexpr int kMaxOrder = 4;

struct BleuReport {
    double bleu = 0.0; // 0..100
    std::array<double, kMaxOrder> precisions{};
    std::array<std::size_t, kMaxOrder> matches{};
    std::array<std::size_t, kMaxOrder> totals{};
    double brevity_penalty = 0.0;
    std::size_t candidate_length = 0;
    std::size_t reference_length = 0;
};

nlohmann::json to_json(const BleuReport& r);

/// Corpus-level BLEU: clipped n-gram precisions for n = 1..4 with uniform
/// weights, BP = min(1, exp(1 - r/c)), no smoothing, single reference.
BleuReport bleu(const std::vector<corpus::Tokens>& candidates, const std::vector<corpus::Tokens>& references);

struct SystemResult {
    std::string name;
    BleuReport report;
    std::size_t unk_count = 0;
    double delta_bleu = 0.0; // vs the baseline
    long long delta_unks = 0;
};

struct SystemComparison {
    std::string baseline;
    std::vector<SystemResult> systems; // input order
};

/// Scores every system independently, then fills deltas against `baseline`,
/// which must be one of the named systems.
SystemComparison compare_systems(const std::vector<std::pair<std::string, std::vector<corpus::Tokens>>>& systems,
                                 const std::vector<corpus::Tokens>& references, const std::string& baseline);

/// As above, reading tokenized files. A file whose line count differs from
/// the references raises InputError naming the file.
SystemComparison compare_files(const std::vector<std::pair<std::string, std::string>>& system_paths,
                               const std::string& reference_path, const std::string& baseline);

std::string render_table(const SystemComparison& c);
std::string render_report(const BleuReport& r);
nlohmann::json to_json(const SystemComparison& c);

} // namespace cnmt::evalkit
