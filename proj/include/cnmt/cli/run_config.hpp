#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cnmt/inference/decode.hpp"
#include "cnmt/trainer/config.hpp"

namespace cnmt::cli {

enum class ValueKind { text, path, count, integer, real, boolean, filters, choice };

/// One configurable key. An empty default on a model or training key means
/// "take it from the preset".
struct Setting {
    std::string key;
    ValueKind kind;
    std::string default_value;
    std::string help;
    std::vector<std::string> commands{}; // subcommands that read it; empty = all
    std::vector<std::string> choices{};  // for ValueKind::choice
    bool required = false;
};

const std::vector<Setting>& settings();
const Setting* find_setting(const std::string& key);
std::vector<const Setting*> settings_for(const std::string& command);

inline const std::vector<std::string> kCommands{"preprocess", "build-vocab", "train", "translate", "score", "compare"};

/// "key = value" lines; '#' starts a comment, blank lines are skipped.
/// ConfigError on malformed lines and duplicate keys.
std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& origin = "config");
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Parses "1:20,2:20,3:20" (width:count pairs).
std::map<int, std::size_t> parse_filter_spec(const std::string& spec);
std::string format_filter_spec(const std::map<int, std::size_t>& filters);

/// Resolved settings for one subcommand: defaults, then the config file,
/// then command-line flags. Unknown keys, missing required keys and
/// malformed values are reported together in one ConfigError. File keys
/// that belong to other subcommands are ignored.
class RunConfig {
  public:
    RunConfig(std::string command, const std::map<std::string, std::string>& file,
              const std::map<std::string, std::string>& flags);

    const std::string& command() const { return command_; }
    const std::map<std::string, std::string>& values() const { return values_; }

    bool has(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    std::uint64_t integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool boolean(const std::string& key) const;

    std::uint64_t seed() const { return integer("seed"); }
    std::size_t threads() const { return count("threads"); }
    int verbosity() const { return static_cast<int>(count("verbosity")); }

    /// Preset with every explicitly set model or training key applied.
    trainer::TrainConfig train_config() const;
    inference::DecodeConfig decode_config() const;

  private:
    std::string command_;
    std::map<std::string, std::string> values_;
};

} // namespace cnmt::cli
