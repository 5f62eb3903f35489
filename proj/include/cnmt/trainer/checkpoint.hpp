#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cnmt/errors.hpp"
#include "cnmt/seq2seq/model.hpp"
#include "cnmt/trainer/config.hpp"

// Container layout, all integers little-endian:
//   "CNMT" | u32 version | u64 header length | u64 FNV-1a of header
//   | UTF-8 JSON header | float32 blobs in table order
// The header holds the configs, the vocabularies, training counters and a
// table of {name, shape, offset, length} with offsets relative to the first
// blob byte.

namespace cnmt::trainer {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public InputError {
  public:
    enum class Kind { bad_magic, bad_version, corrupt_header, truncated, corrupt_data, mismatch };
    CheckpointError(Kind kind, const std::string& msg) : InputError(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

struct StoredTensor {
    std::string name;
    num::Shape shape;
    std::vector<float> values;
};

struct TrainingState {
    std::size_t epoch = 0; // completed epochs
    std::size_t step = 0;  // batches trained
    std::uint64_t optimizer_step = 0;
    std::string rng;       // textual engine state
    double best_dev = std::numeric_limits<double>::infinity();
    std::size_t bad_epochs = 0;
};

struct Checkpoint {
    TrainConfig train; // includes the model config
    seq2seq::Vocabularies vocabs;
    std::vector<StoredTensor> tensors; // parameters, then adam.m.*, adam.v.*
    TrainingState state;

    const StoredTensor* find(const std::string& name) const;
};

std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(std::string_view bytes);

/// Writes to "<path>.tmp" and renames over `path`.
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Parameters (and, when present, Adam moments) of a model.
void store_parameters(const seq2seq::Model<float>& model, Checkpoint& c);
void store_optimizer(const num::ParamSet<float>& params, const num::OptimizerState<float>& opt, Checkpoint& c);

/// A model with the checkpoint's config, vocabularies and parameters. Throws
/// CheckpointError(mismatch) when a stored tensor is missing or misshapen.
std::unique_ptr<seq2seq::Model<float>> build_model(const Checkpoint& c);
void restore_optimizer(const Checkpoint& c, const num::ParamSet<float>& params, num::OptimizerState<float>& opt);

} // namespace cnmt::trainer
