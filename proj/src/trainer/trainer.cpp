#include "cnmt/trainer/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cnmt::trainer {

nlohmann::json to_json(const EpochMetrics& m) {
    nlohmann::json j = {{"epoch", m.epoch},
                        {"step", m.step},
                        {"batches", m.batches},
                        {"tokens", m.tokens},
                        {"loss", m.loss},
                        {"perplexity", m.perplexity},
                        {"grad_norm_mean", m.grad_norm_mean},
                        {"grad_norm_max", m.grad_norm_max}};
    if (m.dev_loss) {
        j["dev_loss"] = *m.dev_loss;
        j["dev_perplexity"] = *m.dev_perplexity;
    }
    return j;
}

Trainer::Trainer(seq2seq::Model<float>& model, TrainConfig cfg)
    : model_(model), cfg_(std::move(cfg)), adam_(model.params(), cfg_.adam), rng_(cfg_.seed) {
    cfg_.model = model.config();
    cfg_.validate();
}

std::pair<double, std::size_t> Trainer::train_step(const Batch& batch, double* grad_norm) {
    model_.params().zero_grad();
    num::Tape<float> tape;
    double total = 0.0;
    std::size_t tokens = 0;
    {
        num::TapeScope<float> scope(tape);
        auto loss = batch_loss(model_, batch);
        total = loss.total.item();
        tokens = loss.tokens;
        if (!std::isfinite(total)) {
            std::ostringstream msg;
            msg << "non-finite loss " << total << " at step " << state_.step + 1 << " (epoch " << state_.epoch + 1
                << ", batch of " << batch.size() << " sentences starting at example " << batch.indices.front()
                << ")";
            throw NumericalError(msg.str());
        }
        auto objective = cfg_.model.loss_normalization == seq2seq::LossNormalization::per_token
                             ? num::scale(loss.total, 1.0f / static_cast<float>(tokens))
                             : loss.total;
        tape.backward(objective);
    }
    const double norm = adam_.step(model_.params());
    if (grad_norm != nullptr) {
        *grad_norm = norm;
    }
    ++state_.step;
    return {total, tokens};
}

EpochMetrics Trainer::train_epoch(const std::vector<Example>& data) {
    auto batches = make_batches(data, cfg_.batch_size, rng_);
    EpochMetrics m;
    double loss_sum = 0.0;
    double norm_sum = 0.0;
    for (const auto& b : batches) {
        double norm = 0.0;
        const auto [loss, tokens] = train_step(b, &norm);
        loss_sum += loss;
        m.tokens += tokens;
        m.step_losses.push_back(loss / static_cast<double>(tokens));
        norm_sum += norm;
        m.grad_norm_max = std::max(m.grad_norm_max, norm);
        ++m.batches;
    }
    ++state_.epoch;
    m.epoch = state_.epoch;
    m.step = state_.step;
    m.loss = loss_sum / static_cast<double>(m.tokens);
    m.perplexity = std::exp(m.loss);
    m.grad_norm_mean = norm_sum / static_cast<double>(m.batches);
    return m;
}

double Trainer::evaluate(const std::vector<Example>& data) const {
    if (data.empty()) {
        throw ConfigError("cannot evaluate on an empty set");
    }
    num::NoGradScope<float> off;
    double total = 0.0;
    std::size_t tokens = 0;
    for (const auto& ex : data) {
        total += model_.sentence_loss(ex.source, ex.target, seq2seq::LossNormalization::sum).item();
        tokens += ex.target.size();
    }
    return total / static_cast<double>(tokens);
}

bool Trainer::observe_dev(double dev_loss) {
    if (dev_loss < state_.best_dev) {
        state_.best_dev = dev_loss;
        state_.bad_epochs = 0;
        return false;
    }
    ++state_.bad_epochs;
    return state_.bad_epochs >= cfg_.patience;
}

Checkpoint Trainer::snapshot() const {
    Checkpoint c;
    c.train = cfg_;
    store_parameters(model_, c);
    store_optimizer(model_.params(), adam_.state(), c);
    c.state = state_;
    c.state.optimizer_step = adam_.state().step;
    std::ostringstream rng;
    rng << rng_;
    c.state.rng = rng.str();
    return c;
}

void Trainer::restore(const Checkpoint& c) {
    restore_optimizer(c, model_.params(), adam_.state());
    state_ = c.state;
    std::istringstream rng(c.state.rng);
    rng >> rng_;
    if (!rng) {
        throw CheckpointError(CheckpointError::Kind::corrupt_header, "unreadable RNG state in checkpoint");
    }
}

FitResult fit(Trainer& trainer, const std::vector<Example>& train, const std::vector<Example>* dev,
              const FitOptions& opts) {
    namespace fs = std::filesystem;
    const std::size_t max_epochs = opts.max_epochs > 0 ? opts.max_epochs : trainer.config().max_epochs;
    const std::size_t every = trainer.config().checkpoint_every;
    std::ofstream log;
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        log.open(fs::path(opts.out_dir) / "metrics.jsonl", std::ios::app);
        if (!log) {
            throw InputError("cannot open metrics log in " + opts.out_dir);
        }
    }
    auto save = [&](const char* name) {
        if (!opts.out_dir.empty()) {
            save_checkpoint(trainer.snapshot(), (fs::path(opts.out_dir) / name).string());
        }
    };
    FitResult result;
    while (trainer.state().epoch < max_epochs) {
        auto m = trainer.train_epoch(train);
        bool stop = false;
        if (dev != nullptr && !dev->empty()) {
            const double d = trainer.evaluate(*dev);
            m.dev_loss = d;
            m.dev_perplexity = std::exp(d);
            const bool improved = d < trainer.state().best_dev;
            stop = trainer.observe_dev(d);
            if (improved) {
                save("best.cnmt");
            }
        }
        if (log.is_open()) {
            log << to_json(m).dump() << "\n";
            log.flush();
        }
        result.epochs.push_back(m);
        if (opts.on_epoch) {
            opts.on_epoch(m);
        }
        if (opts.stop_when && opts.stop_when(m)) {
            stop = true;
        }
        result.early_stopped = stop;
        if (stop || trainer.state().epoch >= max_epochs || (every > 0 && m.epoch % every == 0)) {
            save("checkpoint.cnmt");
        }
        if (stop) {
            break;
        }
    }
    return result;
}

} // namespace cnmt::trainer
