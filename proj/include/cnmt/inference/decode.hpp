#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "cnmt/inference/unk.hpp"
#include "cnmt/seq2seq/model.hpp"

namespace cnmt::inference {

struct DecodeConfig {
    std::size_t beam_width = 5; // 1 = greedy
    double max_length_factor = 3.0;
    std::optional<std::size_t> max_length; // overrides the factor
    double length_norm = 1.0;

    void validate() const {
        if (beam_width == 0) {
            throw ConfigError("beam width must be at least 1");
        }
        if (max_length ? *max_length == 0 : !(max_length_factor > 0.0)) {
            throw ConfigError("maximum output length must be at least 1");
        }
        if (length_norm < 0.0) {
            throw ConfigError("length normalization exponent must be non-negative");
        }
    }

    std::size_t limit(std::size_t source_len) const {
        if (max_length) {
            return *max_length;
        }
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(max_length_factor * source_len)));
    }
};

template <typename T>
struct Hypothesis {
    std::vector<int> tokens; // ends with EOS iff finished
    double logprob = 0.0;
    std::vector<std::vector<double>> attention; // one row per token
    num::Tensor<T> state;
    bool finished = false;

    double score(double length_norm) const {
        if (tokens.empty()) {
            return logprob;
        }
        return logprob / std::pow(static_cast<double>(tokens.size()), length_norm);
    }
};

namespace detail {

// PAD and BOS are never produced.
inline bool emittable(int id) { return id != corpus::Vocabulary::kPad && id != corpus::Vocabulary::kBos; }

template <typename T>
std::vector<double> step_logprobs(const num::Tensor<T>& logits) {
    const auto lp = num::log_softmax_values<T>(logits.data());
    return {lp.begin(), lp.end()};
}

} // namespace detail

/// Highest-probability token at every step (ties: lowest id) until EOS or the
/// length limit.
template <typename T>
Hypothesis<T> greedy_decode(const seq2seq::Model<T>& model, const seq2seq::SourceSentence& src,
                            const DecodeConfig& cfg = {}) {
    cfg.validate();
    num::NoGradScope<T> off;
    auto enc = model.encode(src);
    Hypothesis<T> hyp;
    hyp.state = model.init_state(enc);
    const std::size_t limit = cfg.limit(src.words.size());
    int prev = corpus::Vocabulary::kBos;
    while (hyp.tokens.size() < limit) {
        auto step = model.decode_step(prev, hyp.state, enc);
        const auto lp = detail::step_logprobs(step.logits);
        // Compared as cumulative sums, exactly as beam search ranks them.
        int best = -1;
        double best_total = 0.0;
        for (int id = 0; id < static_cast<int>(lp.size()); ++id) {
            const double total = hyp.logprob + lp[id];
            if (detail::emittable(id) && (best < 0 || total > best_total)) {
                best = id;
                best_total = total;
            }
        }
        hyp.tokens.push_back(best);
        hyp.logprob = best_total;
        hyp.attention.emplace_back(step.weights.data().begin(), step.weights.data().end());
        hyp.state = step.state;
        prev = best;
        if (best == corpus::Vocabulary::kEos) {
            hyp.finished = true;
            break;
        }
    }
    return hyp;
}

/// Beam search. Each step keeps the (width - finished) best extensions by
/// cumulative log-probability; a hypothesis ending in EOS leaves the beam.
/// Hypotheses still open at the length limit are returned unfinished. The
/// result is sorted by logprob / length^length_norm, best first.
template <typename T>
std::vector<Hypothesis<T>> beam_decode(const seq2seq::Model<T>& model, const seq2seq::SourceSentence& src,
                                       const DecodeConfig& cfg = {}) {
    cfg.validate();
    num::NoGradScope<T> off;
    auto enc = model.encode(src);
    const std::size_t k = cfg.beam_width;
    const std::size_t limit = cfg.limit(src.words.size());
    std::vector<Hypothesis<T>> live(1);
    live[0].state = model.init_state(enc);
    std::vector<Hypothesis<T>> finished;

    struct Candidate {
        std::size_t parent;
        int token;
        double logprob;
    };
    for (std::size_t len = 0; len < limit && !live.empty() && finished.size() < k; ++len) {
        const std::size_t width = k - finished.size();
        std::vector<Candidate> cands;
        std::vector<seq2seq::DecoderStep<T>> steps;
        steps.reserve(live.size());
        for (std::size_t i = 0; i < live.size(); ++i) {
            const int prev = live[i].tokens.empty() ? corpus::Vocabulary::kBos : live[i].tokens.back();
            steps.push_back(model.decode_step(prev, live[i].state, enc));
            const auto lp = detail::step_logprobs(steps.back().logits);
            for (int id = 0; id < static_cast<int>(lp.size()); ++id) {
                if (detail::emittable(id)) {
                    cands.push_back({i, id, live[i].logprob + lp[id]});
                }
            }
        }
        // Ties keep expansion order: earlier parent, then lower id.
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& a, const Candidate& b) { return a.logprob > b.logprob; });
        cands.resize(std::min(width, cands.size()));
        std::vector<Hypothesis<T>> next;
        for (const auto& c : cands) {
            Hypothesis<T> h;
            h.tokens = live[c.parent].tokens;
            h.tokens.push_back(c.token);
            h.logprob = c.logprob;
            h.attention = live[c.parent].attention;
            const auto& w = steps[c.parent].weights.data();
            h.attention.emplace_back(w.begin(), w.end());
            h.state = steps[c.parent].state;
            if (c.token == corpus::Vocabulary::kEos) {
                h.finished = true;
                finished.push_back(std::move(h));
            } else {
                next.push_back(std::move(h));
            }
        }
        live = std::move(next);
    }
    for (auto& h : live) {
        if (finished.size() >= k) {
            break;
        }
        finished.push_back(std::move(h));
    }
    std::stable_sort(finished.begin(), finished.end(), [&](const Hypothesis<T>& a, const Hypothesis<T>& b) {
        return a.score(cfg.length_norm) > b.score(cfg.length_norm);
    });
    return finished;
}

/// Independent re-scoring: sum of log-softmax values of `tokens` under
/// teacher forcing (no EOS required).
template <typename T>
double score_tokens(const seq2seq::Model<T>& model, const seq2seq::SourceSentence& src,
                    const std::vector<int>& tokens) {
    num::NoGradScope<T> off;
    auto enc = model.encode(src);
    auto state = model.init_state(enc);
    int prev = corpus::Vocabulary::kBos;
    double total = 0.0;
    for (int t : tokens) {
        auto step = model.decode_step(prev, state, enc);
        total += detail::step_logprobs(step.logits).at(static_cast<std::size_t>(t));
        state = step.state;
        prev = t;
    }
    return total;
}

struct Translation {
    corpus::Tokens tokens;
    std::vector<int> ids;
    double logprob = 0.0;
    bool finished = false;
    std::vector<std::vector<double>> attention;
    std::vector<UnkReplacement> replacements;
};

template <typename T>
Translation translate(const seq2seq::Model<T>& model, const corpus::Tokens& source, const DecodeConfig& cfg,
                      bool replace_unks) {
    auto src = model.prepare_source(source);
    Hypothesis<T> best = cfg.beam_width == 1 ? greedy_decode(model, src, cfg) : beam_decode(model, src, cfg).front();
    auto replaced = replace_unk(best.tokens, best.attention, source, model.vocabularies().target, replace_unks);
    return {std::move(replaced.tokens), best.tokens, best.logprob, best.finished, std::move(best.attention),
            std::move(replaced.replacements)};
}

/// Translates every sentence, spreading sentences over up to `threads`
/// workers. Output order follows input order. Empty inputs yield empty
/// translations.
template <typename T>
std::vector<Translation> translate_all(const seq2seq::Model<T>& model, const std::vector<corpus::Tokens>& sources,
                                       const DecodeConfig& cfg, bool replace_unks, std::size_t threads = 1) {
    cfg.validate();
    std::vector<Translation> out(sources.size());
    std::vector<std::exception_ptr> errors(sources.size());
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < sources.size(); i += stride) {
            if (sources[i].empty()) {
                continue;
            }
            try {
                out[i] = translate(model, sources[i], cfg, replace_unks);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::max<std::size_t>(1, std::min(threads, sources.size()));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(work, t, threads);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

} // namespace cnmt::inference
