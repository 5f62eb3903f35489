#include "cnmt/evalkit/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "cnmt/corpus/corpus.hpp"
#include "cnmt/errors.hpp"
#include "cnmt/inference/unk.hpp"

namespace cnmt::evalkit {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const corpus::Tokens& t, std::size_t n) {
    NgramCounts counts;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
        ++counts[std::vector<std::string>(t.begin() + static_cast<std::ptrdiff_t>(i),
                                          t.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
    if (s.size() >= width) {
        return s;
    }
    const std::string fill(width - s.size(), ' ');
    return left ? s + fill : fill + s;
}

} // namespace

nlohmann::json to_json(const BleuReport& r) {
    return {{"bleu", r.bleu},
            {"precisions", r.precisions},
            {"matches", r.matches},
            {"totals", r.totals},
            {"brevity_penalty", r.brevity_penalty},
            {"candidate_length", r.candidate_length},
            {"reference_length", r.reference_length}};
}

BleuReport bleu(const std::vector<corpus::Tokens>& candidates, const std::vector<corpus::Tokens>& references) {
    if (candidates.size() != references.size()) {
        throw InputError("bleu: " + std::to_string(candidates.size()) + " candidate lines vs " +
                         std::to_string(references.size()) + " reference lines");
    }
    BleuReport r;
    for (std::size_t line = 0; line < candidates.size(); ++line) {
        const auto& c = candidates[line];
        const auto& ref = references[line];
        r.candidate_length += c.size();
        r.reference_length += ref.size();
        for (int n = 1; n <= kMaxOrder; ++n) {
            const auto cand_counts = ngrams(c, static_cast<std::size_t>(n));
            const auto ref_counts = ngrams(ref, static_cast<std::size_t>(n));
            for (const auto& [gram, count] : cand_counts) {
                r.totals[n - 1] += count;
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) {
                    r.matches[n - 1] += std::min(count, it->second);
                }
            }
        }
    }
    if (r.reference_length == 0) {
        throw InputError("bleu: every reference line is empty");
    }
    bool all_positive = true;
    double log_sum = 0.0;
    for (int n = 0; n < kMaxOrder; ++n) {
        r.precisions[n] = r.totals[n] == 0 ? 0.0 : static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]);
        if (r.precisions[n] > 0.0) {
            log_sum += std::log(r.precisions[n]);
        } else {
            all_positive = false;
        }
    }
    if (r.candidate_length > 0) {
        const double ratio = static_cast<double>(r.reference_length) / static_cast<double>(r.candidate_length);
        r.brevity_penalty = std::min(1.0, std::exp(1.0 - ratio));
    }
    r.bleu = all_positive ? 100.0 * r.brevity_penalty * std::exp(log_sum / kMaxOrder) : 0.0;
    return r;
}

SystemComparison compare_systems(const std::vector<std::pair<std::string, std::vector<corpus::Tokens>>>& systems,
                                 const std::vector<corpus::Tokens>& references, const std::string& baseline) {
    SystemComparison out;
    out.baseline = baseline;
    const SystemResult* base = nullptr;
    for (const auto& [name, candidates] : systems) {
        if (candidates.size() != references.size()) {
            throw InputError("system '" + name + "' has " + std::to_string(candidates.size()) +
                             " lines, references have " + std::to_string(references.size()));
        }
        SystemResult s;
        s.name = name;
        s.report = bleu(candidates, references);
        s.unk_count = inference::count_unks(candidates);
        out.systems.push_back(std::move(s));
    }
    for (const auto& s : out.systems) {
        if (s.name == baseline) {
            base = &s;
        }
    }
    if (base == nullptr) {
        throw ConfigError("baseline system '" + baseline + "' is not among the compared systems");
    }
    const double base_bleu = base->report.bleu;
    const auto base_unks = static_cast<long long>(base->unk_count);
    for (auto& s : out.systems) {
        s.delta_bleu = s.report.bleu - base_bleu;
        s.delta_unks = static_cast<long long>(s.unk_count) - base_unks;
    }
    return out;
}

SystemComparison compare_files(const std::vector<std::pair<std::string, std::string>>& system_paths,
                               const std::string& reference_path, const std::string& baseline) {
    const auto references = corpus::read_tokenized(reference_path);
    std::vector<std::pair<std::string, std::vector<corpus::Tokens>>> systems;
    for (const auto& [name, path] : system_paths) {
        auto lines = corpus::read_tokenized(path);
        if (lines.size() != references.size()) {
            throw InputError(path + ": " + std::to_string(lines.size()) + " lines, reference " + reference_path +
                             " has " + std::to_string(references.size()));
        }
        systems.emplace_back(name, std::move(lines));
    }
    return compare_systems(systems, references, baseline);
}

std::string render_report(const BleuReport& r) {
    std::ostringstream out;
    out << "BLEU = " << fixed(r.bleu) << ", " << fixed(100 * r.precisions[0], 1);
    for (int n = 1; n < kMaxOrder; ++n) {
        out << "/" << fixed(100 * r.precisions[n], 1);
    }
    out << " (BP = " << fixed(r.brevity_penalty, 3) << ", hyp_len = " << r.candidate_length
        << ", ref_len = " << r.reference_length << ")\n";
    return out.str();
}

std::string render_table(const SystemComparison& c) {
    std::size_t name_width = 6;
    for (const auto& s : c.systems) {
        name_width = std::max(name_width, s.name.size());
    }
    std::ostringstream out;
    out << pad("system", name_width, true) << pad("BLEU", 8) << pad("delta", 8) << pad("UNK", 7) << pad("dUNK", 7)
        << pad("BP", 7) << "\n";
    for (const auto& s : c.systems) {
        std::string delta = (s.delta_bleu >= 0 ? "+" : "") + fixed(s.delta_bleu);
        std::string dunk = (s.delta_unks >= 0 ? "+" : "") + std::to_string(s.delta_unks);
        out << pad(s.name, name_width, true) << pad(fixed(s.report.bleu), 8) << pad(delta, 8)
            << pad(std::to_string(s.unk_count), 7) << pad(dunk, 7) << pad(fixed(s.report.brevity_penalty, 3), 7)
            << "\n";
    }
    out << "baseline: " << c.baseline << "\n";
    return out.str();
}

nlohmann::json to_json(const SystemComparison& c) {
    nlohmann::json systems = nlohmann::json::array();
    for (const auto& s : c.systems) {
        systems.push_back({{"name", s.name},
                           {"report", to_json(s.report)},
                           {"unk_count", s.unk_count},
                           {"delta_bleu", s.delta_bleu},
                           {"delta_unks", s.delta_unks}});
    }
    return {{"baseline", c.baseline}, {"systems", systems}};
}

} // namespace cnmt::evalkit
