#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cnmt/numcore/tensor.hpp"

namespace cnmt::num {

template <typename T>
struct NamedTensor {
    std::string name;
    Tensor<T> tensor;
};

/// Trainable tensors in registration order, addressed by stable names
/// ("enc.fwd.W_z", "attn.v", ...).
template <typename T>
class ParamSet {
  public:
    Tensor<T> add(std::string name, Tensor<T> tensor) {
        for (const auto& p : items_) {
            if (p.name == name) {
                throw ContractError("duplicate parameter name " + name);
            }
        }
        tensor.set_requires_grad(true);
        items_.push_back({std::move(name), tensor});
        return tensor;
    }

    const Tensor<T>& get(const std::string& name) const {
        for (const auto& p : items_) {
            if (p.name == name) {
                return p.tensor;
            }
        }
        throw IndexError("no parameter named " + name);
    }

    bool contains(const std::string& name) const {
        for (const auto& p : items_) {
            if (p.name == name) {
                return true;
            }
        }
        return false;
    }

    const std::vector<NamedTensor<T>>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }

    std::size_t total_values() const {
        std::size_t n = 0;
        for (const auto& p : items_) {
            n += p.tensor.size();
        }
        return n;
    }

    void zero_grad() {
        for (auto& p : items_) {
            p.tensor.zero_grad();
        }
    }

  private:
    std::vector<NamedTensor<T>> items_;
};

} // namespace cnmt::num
