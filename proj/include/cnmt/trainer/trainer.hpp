#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cnmt/numcore/optim.hpp"
#include "cnmt/trainer/batch.hpp"
#include "cnmt/trainer/checkpoint.hpp"
#include "cnmt/trainer/config.hpp"
#include "json.hpp"

namespace cnmt::trainer {

struct EpochMetrics {
    std::size_t epoch = 0; // 1-based
    std::size_t step = 0;  // global step after the epoch
    std::size_t batches = 0;
    std::size_t tokens = 0;
    double loss = 0.0; // mean per-token cross-entropy seen during the epoch
    double perplexity = 0.0;
    double grad_norm_mean = 0.0;
    double grad_norm_max = 0.0;
    std::optional<double> dev_loss;
    std::optional<double> dev_perplexity;
    std::vector<double> step_losses; // per-token loss of each batch, in order; not logged
};

nlohmann::json to_json(const EpochMetrics& m);

/// Owns the optimizer and the shuffling RNG for one model. The model is
/// updated in place.
class Trainer {
  public:
    Trainer(seq2seq::Model<float>& model, TrainConfig cfg);

    /// One pass over `data`: fresh batches, one Adam step per batch.
    EpochMetrics train_epoch(const std::vector<Example>& data);

    /// One optimizer step; returns the batch's summed loss and token count.
    std::pair<double, std::size_t> train_step(const Batch& batch, double* grad_norm = nullptr);

    /// Mean per-token cross-entropy, no updates.
    double evaluate(const std::vector<Example>& data) const;

    /// Records a dev score; returns true when patience is exhausted.
    bool observe_dev(double dev_loss);

    const TrainConfig& config() const { return cfg_; }
    const TrainingState& state() const { return state_; }
    seq2seq::Model<float>& model() { return model_; }
    num::Adam<float>& optimizer() { return adam_; }

    Checkpoint snapshot() const;
    /// Takes optimizer state, counters and RNG from a checkpoint of this model.
    void restore(const Checkpoint& c);

  private:
    seq2seq::Model<float>& model_;
    TrainConfig cfg_;
    num::Adam<float> adam_;
    num::Rng rng_;
    TrainingState state_;
};

struct FitOptions {
    std::string out_dir;           // metrics.jsonl and checkpoints; empty = none
    std::size_t max_epochs = 0;    // 0 = config value
    std::function<bool(const EpochMetrics&)> stop_when; // optional early exit
    std::function<void(const EpochMetrics&)> on_epoch;  // progress reporting
};

struct FitResult {
    std::vector<EpochMetrics> epochs;
    bool early_stopped = false;
};

/// Trains until max epochs, dev patience runs out, or stop_when fires.
/// Appends one JSON line per epoch to out_dir/metrics.jsonl and writes
/// out_dir/checkpoint.cnmt every checkpoint_every epochs and at the end
/// (plus best.cnmt when the dev score improves).
FitResult fit(Trainer& trainer, const std::vector<Example>& train, const std::vector<Example>* dev,
              const FitOptions& opts);

} // namespace cnmt::trainer
