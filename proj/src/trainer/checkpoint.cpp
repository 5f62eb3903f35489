#include "cnmt/trainer/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace cnmt::trainer {

namespace {

constexpr char kMagic[4] = {'C', 'N', 'M', 'T'};
constexpr std::size_t kPrefix = 4 + 4 + 8 + 8;

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void put_le(std::string& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    }
    return v;
}

std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << v;
    return s.str();
}

std::string vocab_text(const corpus::Vocabulary& v) {
    std::ostringstream s;
    v.save(s);
    return s.str();
}

corpus::Vocabulary vocab_from_text(const std::string& text, const corpus::ReservedNames& reserved) {
    std::istringstream s(text);
    return corpus::Vocabulary::load(s, reserved);
}

[[noreturn]] void corrupt(const std::string& what) {
    throw CheckpointError(CheckpointError::Kind::corrupt_header, "corrupt checkpoint header: " + what);
}

} // namespace

const StoredTensor* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

std::string serialize_checkpoint(const Checkpoint& c) {
    std::string data;
    nlohmann::json table = nlohmann::json::array();
    for (const auto& t : c.tensors) {
        if (num::numel(t.shape) != t.values.size()) {
            throw ContractError("tensor " + t.name + " holds " + std::to_string(t.values.size()) +
                                " values for shape " + num::to_string(t.shape));
        }
        const std::size_t offset = data.size();
        for (float v : t.values) {
            std::uint32_t bits = 0;
            std::memcpy(&bits, &v, sizeof bits);
            put_le(data, bits, 4);
        }
        table.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"length", data.size() - offset}});
    }
    nlohmann::json state = {{"epoch", c.state.epoch},
                            {"step", c.state.step},
                            {"optimizer_step", c.state.optimizer_step},
                            {"rng", c.state.rng},
                            {"bad_epochs", c.state.bad_epochs}};
    // JSON has no infinity; "no dev score yet" is null.
    state["best_dev"] = std::isfinite(c.state.best_dev) ? nlohmann::json(c.state.best_dev) : nlohmann::json(nullptr);
    nlohmann::json header = {{"model", seq2seq::to_json(c.train.model)},
                             {"train", to_json(c.train)},
                             {"vocab",
                              {{"chars", vocab_text(c.vocabs.chars.table())},
                               {"source", vocab_text(c.vocabs.source)},
                               {"target", vocab_text(c.vocabs.target)}}},
                             {"state", state},
                             {"tensors", table},
                             {"data_bytes", data.size()},
                             {"data_fnv1a", hex(fnv1a(data))}};
    const std::string text = header.dump();
    std::string out(kMagic, 4);
    put_le(out, kCheckpointVersion, 4);
    put_le(out, text.size(), 8);
    put_le(out, fnv1a(text), 8);
    out += text;
    out += data;
    return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
    using Kind = CheckpointError::Kind;
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw CheckpointError(Kind::bad_magic, "not a checkpoint file (missing CNMT magic)");
    }
    const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
    if (version != kCheckpointVersion) {
        throw CheckpointError(Kind::bad_version, "unsupported checkpoint version " + std::to_string(version) +
                                                     " (this build reads version " +
                                                     std::to_string(kCheckpointVersion) + ")");
    }
    if (bytes.size() < kPrefix) {
        corrupt("file ends inside the fixed prefix");
    }
    const std::uint64_t header_len = get_le(bytes, 8, 8);
    const std::uint64_t header_hash = get_le(bytes, 16, 8);
    if (header_len > bytes.size() - kPrefix) {
        corrupt("declared length " + std::to_string(header_len) + " exceeds the file");
    }
    const std::string_view text = bytes.substr(kPrefix, header_len);
    if (fnv1a(text) != header_hash) {
        corrupt("checksum mismatch");
    }
    const std::string_view data = bytes.substr(kPrefix + header_len);

    Checkpoint c;
    try {
        const auto header = nlohmann::json::parse(text);
        const auto model = seq2seq::model_config_from_json(header.at("model"));
        c.train = train_config_from_json(header.at("train"), model);
        const auto& vocab = header.at("vocab");
        c.vocabs.chars =
            charembed::CharVocabulary(vocab_from_text(vocab.at("chars").get<std::string>(), charembed::kCharReserved));
        c.vocabs.source = vocab_from_text(vocab.at("source").get<std::string>(), corpus::kWordReserved);
        c.vocabs.target = vocab_from_text(vocab.at("target").get<std::string>(), corpus::kWordReserved);
        const auto& state = header.at("state");
        c.state.epoch = state.at("epoch").get<std::size_t>();
        c.state.step = state.at("step").get<std::size_t>();
        c.state.optimizer_step = state.at("optimizer_step").get<std::uint64_t>();
        c.state.rng = state.at("rng").get<std::string>();
        c.state.bad_epochs = state.at("bad_epochs").get<std::size_t>();
        c.state.best_dev = state.at("best_dev").is_null() ? std::numeric_limits<double>::infinity()
                                                           : state.at("best_dev").get<double>();
        const auto data_bytes = header.at("data_bytes").get<std::size_t>();
        if (data.size() < data_bytes) {
            throw CheckpointError(Kind::truncated, "truncated checkpoint: " + std::to_string(data.size()) + " of " +
                                                       std::to_string(data_bytes) + " data bytes present");
        }
        if (data.size() > data_bytes) {
            throw CheckpointError(Kind::corrupt_data, "checkpoint has trailing bytes after the tensor data");
        }
        if (hex(fnv1a(data)) != header.at("data_fnv1a").get<std::string>()) {
            throw CheckpointError(Kind::corrupt_data, "checkpoint tensor data checksum mismatch");
        }
        std::size_t expected_offset = 0;
        for (const auto& entry : header.at("tensors")) {
            StoredTensor t;
            t.name = entry.at("name").get<std::string>();
            t.shape = entry.at("shape").get<num::Shape>();
            const auto offset = entry.at("offset").get<std::size_t>();
            const auto length = entry.at("length").get<std::size_t>();
            if (offset != expected_offset || length != 4 * num::numel(t.shape) || offset + length > data.size()) {
                corrupt("bad table entry for " + t.name);
            }
            t.values.resize(num::numel(t.shape));
            for (std::size_t i = 0; i < t.values.size(); ++i) {
                const auto bits = static_cast<std::uint32_t>(get_le(data, offset + 4 * i, 4));
                std::memcpy(&t.values[i], &bits, sizeof bits);
            }
            expected_offset = offset + length;
            c.tensors.push_back(std::move(t));
        }
        if (expected_offset != data_bytes) {
            corrupt("tensor table does not cover the data section");
        }
    } catch (const nlohmann::json::exception& e) {
        corrupt(e.what());
    } catch (const CheckpointError&) {
        throw;
    } catch (const Error& e) {
        corrupt(e.what());
    }
    return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    const std::string bytes = serialize_checkpoint(c);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write checkpoint " + tmp);
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw InputError("short write to " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read checkpoint " + path);
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_checkpoint(bytes);
}

void store_parameters(const seq2seq::Model<float>& model, Checkpoint& c) {
    c.train.model = model.config();
    c.vocabs = model.vocabularies();
    for (const auto& p : model.params().items()) {
        c.tensors.push_back({p.name, p.tensor.shape(), {p.tensor.data().begin(), p.tensor.data().end()}});
    }
}

void store_optimizer(const num::ParamSet<float>& params, const num::OptimizerState<float>& opt, Checkpoint& c) {
    c.state.optimizer_step = opt.step;
    const auto& items = params.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        c.tensors.push_back({"adam.m." + items[i].name, items[i].tensor.shape(), opt.first_moment.at(i)});
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        c.tensors.push_back({"adam.v." + items[i].name, items[i].tensor.shape(), opt.second_moment.at(i)});
    }
}

namespace {

const StoredTensor& require(const Checkpoint& c, const std::string& name, const num::Shape& shape) {
    const auto* t = c.find(name);
    if (t == nullptr) {
        throw CheckpointError(CheckpointError::Kind::mismatch, "checkpoint lacks tensor " + name);
    }
    if (t->shape != shape) {
        throw CheckpointError(CheckpointError::Kind::mismatch, "dimension mismatch for " + name + ": checkpoint " +
                                                                   num::to_string(t->shape) + ", model " +
                                                                   num::to_string(shape));
    }
    return *t;
}

} // namespace

std::unique_ptr<seq2seq::Model<float>> build_model(const Checkpoint& c) {
    std::unique_ptr<seq2seq::Model<float>> model;
    try {
        model = std::make_unique<seq2seq::Model<float>>(c.train.model, c.vocabs, c.train.seed);
    } catch (const ConfigError& e) {
        throw CheckpointError(CheckpointError::Kind::mismatch, e.what());
    }
    for (const auto& p : model->params().items()) {
        const auto& stored = require(c, p.name, p.tensor.shape());
        auto t = p.tensor;
        std::copy(stored.values.begin(), stored.values.end(), t.data().begin());
    }
    return model;
}

void restore_optimizer(const Checkpoint& c, const num::ParamSet<float>& params, num::OptimizerState<float>& opt) {
    const auto& items = params.items();
    opt.step = c.state.optimizer_step;
    opt.first_moment.resize(items.size());
    opt.second_moment.resize(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        opt.first_moment[i] = require(c, "adam.m." + items[i].name, items[i].tensor.shape()).values;
        opt.second_moment[i] = require(c, "adam.v." + items[i].name, items[i].tensor.shape()).values;
    }
}

} // namespace cnmt::trainer
