#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cnmt/errors.hpp"

namespace cnmt::num {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out += "x";
        }
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

template <typename T>
struct TensorStorage {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad; // empty until something accumulates into it
    bool requires_grad = false;
};

/// Shared handle to a dense row-major array. Copies alias the same storage;
/// use clone() for an independent copy.
template <typename T>
class Tensor {
  public:
    using value_type = T;

    Tensor() = default;

    Tensor(Shape shape, std::vector<T> data, bool requires_grad = false)
        : s_(std::make_shared<TensorStorage<T>>()) {
        for (std::size_t d : shape) {
            if (d == 0) {
                throw ShapeError("tensor dimensions must be positive, got " + to_string(shape));
            }
        }
        if (numel(shape) != data.size()) {
            throw ShapeError("shape " + to_string(shape) + " does not hold " +
                             std::to_string(data.size()) + " values");
        }
        s_->shape = std::move(shape);
        s_->data = std::move(data);
        s_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        const std::size_t n = numel(shape);
        return Tensor(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
    }

    static Tensor scalar(T value, bool requires_grad = false) {
        return Tensor(Shape{}, std::vector<T>{value}, requires_grad);
    }

    static Tensor vector(std::vector<T> values, bool requires_grad = false) {
        const std::size_t n = values.size();
        return Tensor(Shape{n}, std::move(values), requires_grad);
    }

    bool defined() const { return static_cast<bool>(s_); }

    const Shape& shape() const { return s_->shape; }
    std::size_t rank() const { return s_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return s_->shape.at(axis); }
    std::size_t size() const { return s_->data.size(); }

    std::span<const T> data() const { return s_->data; }
    std::span<T> data() { return s_->data; }

    T item() const {
        if (size() != 1) {
            throw ContractError("item() on tensor of shape " + to_string(shape()));
        }
        return s_->data[0];
    }
    T at(std::size_t i) const { return s_->data.at(i); }
    T at(std::size_t i, std::size_t j) const { return s_->data.at(i * s_->shape.at(1) + j); }

    bool requires_grad() const { return s_->requires_grad; }
    void set_requires_grad(bool on) { s_->requires_grad = on; }

    bool has_grad() const { return !s_->grad.empty(); }
    std::span<const T> grad() const { return s_->grad; }

    /// Gradient buffer, zero-allocated on first access.
    std::span<T> grad_mut() const {
        if (s_->grad.empty()) {
            s_->grad.assign(s_->data.size(), T(0));
        }
        return s_->grad;
    }

    void zero_grad() { s_->grad.clear(); }

    Tensor clone() const { return Tensor(s_->shape, s_->data, s_->requires_grad); }

    bool same_storage(const Tensor& other) const { return s_ == other.s_; }

  private:
    std::shared_ptr<TensorStorage<T>> s_;
};

/// Ordered record of backward rules. Ops append to the thread's active tape
/// (see TapeScope) whenever one of their inputs requires a gradient.
template <typename T>
class Tape {
  public:
    void record(std::function<void()> backward_rule) { rules_.push_back(std::move(backward_rule)); }

    std::size_t size() const { return rules_.size(); }

    /// Runs every recorded rule once, newest first. Returns the number of
    /// rules visited.
    std::size_t backward(const Tensor<T>& loss) {
        if (consumed_) {
            throw ContractError("backward called twice on the same tape without reset()");
        }
        if (!loss.defined() || loss.rank() != 0) {
            throw ContractError("backward needs a scalar loss, got shape " +
                                (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
        }
        if (!loss.requires_grad()) {
            throw ContractError("loss was not produced through recorded operations");
        }
        consumed_ = true;
        loss.grad_mut()[0] += T(1);
        std::size_t visited = 0;
        for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) {
            (*it)();
            ++visited;
        }
        return visited;
    }

    void reset() {
        rules_.clear();
        consumed_ = false;
    }

    bool consumed() const { return consumed_; }

  private:
    std::vector<std::function<void()>> rules_;
    bool consumed_ = false;
};

template <typename T>
Tape<T>*& active_tape() {
    static thread_local Tape<T>* tape = nullptr;
    return tape;
}

/// Makes `tape` the recording target for the current thread.
template <typename T>
class TapeScope {
  public:
    explicit TapeScope(Tape<T>& tape) : previous_(active_tape<T>()) { active_tape<T>() = &tape; }
    ~TapeScope() { active_tape<T>() = previous_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

  private:
    Tape<T>* previous_;
};

/// Suspends recording on the current thread (inference).
template <typename T>
class NoGradScope {
  public:
    NoGradScope() : previous_(active_tape<T>()) { active_tape<T>() = nullptr; }
    ~NoGradScope() { active_tape<T>() = previous_; }
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

  private:
    Tape<T>* previous_;
};

} // namespace cnmt::num
