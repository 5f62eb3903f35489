#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cnmt/cli/run_config.hpp"

namespace cnmt::cli {

// Each command reads only the files named in its settings and writes only
// under the `out` directory. Progress goes to `log`.

/// corpus.<lang> (tokenized, truecased) for both sides, truecase.<lang>.tsv
/// and stats.json.
void cmd_preprocess(const RunConfig& rc, std::ostream& log);

/// source.vocab.tsv, target.vocab.tsv, chars.vocab.tsv and stats.json.
void cmd_build_vocab(const RunConfig& rc, std::ostream& log);

/// config.json, metrics.jsonl, checkpoint.cnmt and (with a dev set)
/// best.cnmt.
void cmd_train(const RunConfig& rc, std::ostream& log);

/// translations.txt, one line per input line, and with `sidecar`
/// translations.jsonl.
void cmd_translate(const RunConfig& rc, std::ostream& log);

/// score.txt and score.json.
void cmd_score(const RunConfig& rc, std::ostream& log);

/// comparison.txt and comparison.json.
void cmd_compare(const RunConfig& rc, std::ostream& log);

/// Full command line, argv[0] excluded. Returns the process exit code:
/// 0 success, 1 usage or configuration, 2 bad input data, 3 numerical abort.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cnmt::cli
