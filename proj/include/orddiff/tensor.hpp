#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "orddiff/common.hpp"
#include "orddiff/rng.hpp"

namespace orddiff {

using Shape = std::vector<size_t>;

inline size_t numel_of(const Shape &s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape &s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// One value buffer plus its (lazily allocated) gradient. Tensors are
// immutable once recorded on the tape; the optimizer mutates parameter
// values only between steps.
template <class T>
struct Node {
    Shape shape;
    std::vector<T> val;
    std::vector<T> grad;  // empty means "no gradient contribution yet"
    bool requires_grad = false;

    void ensure_grad() {
        if (grad.size() != val.size()) grad.assign(val.size(), T(0));
    }
};

template <class T>
using NodePtr = std::shared_ptr<Node<T>>;

// Tape of backward closures, one per recorded op, replayed in reverse.
// No graph is retained across steps: backward() clears the tape.
template <class T>
class Tape {
  public:
    static Tape &instance() {
        static thread_local Tape tape;
        return tape;
    }

    bool recording() const { return recording_; }
    void set_recording(bool on) { recording_ = on; }

    void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

    size_t size() const { return ops_.size(); }

    void backward(const NodePtr<T> &loss) {
        check_contract(loss != nullptr && loss->val.size() == 1,
                       "backward: loss must be a scalar tensor");
        loss->ensure_grad();
        loss->grad[0] = T(1);
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
        ops_.clear();
    }

    void clear() { ops_.clear(); }

  private:
    std::vector<std::function<void()>> ops_;
    bool recording_ = true;
};

// RAII guard: disables tape recording (inference / numeric-check forward).
template <class T>
class NoGrad {
  public:
    NoGrad() : prev_(Tape<T>::instance().recording()) {
        Tape<T>::instance().set_recording(false);
    }
    ~NoGrad() { Tape<T>::instance().set_recording(prev_); }
    NoGrad(const NoGrad &) = delete;
    NoGrad &operator=(const NoGrad &) = delete;

  private:
    bool prev_;
};

template <class T>
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(NodePtr<T> n) : n_(std::move(n)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        auto n = std::make_shared<Node<T>>();
        n->shape = std::move(shape);
        n->val.assign(numel_of(n->shape), T(0));
        n->requires_grad = requires_grad;
        return Tensor(n);
    }

    static Tensor full(Shape shape, T v) {
        Tensor t = zeros(std::move(shape));
        for (auto &x : t.val()) x = v;
        return t;
    }

    static Tensor from(Shape shape, std::vector<T> data, bool requires_grad = false) {
        check_dim(numel_of(shape) == data.size(), "Tensor::from: shape/data size mismatch");
        auto n = std::make_shared<Node<T>>();
        n->shape = std::move(shape);
        n->val = std::move(data);
        n->requires_grad = requires_grad;
        return Tensor(n);
    }

    static Tensor scalar(T v) { return from({1}, {v}); }

    static Tensor randn(Shape shape, Rng &rng, T stddev = T(1), T mean = T(0)) {
        Tensor t = zeros(std::move(shape));
        for (auto &x : t.val()) x = static_cast<T>(rng.normal(double(mean), double(stddev)));
        return t;
    }

    bool defined() const { return n_ != nullptr; }
    const NodePtr<T> &node() const { return n_; }

    const Shape &shape() const { return n_->shape; }
    size_t size() const { return n_->val.size(); }
    size_t dim(size_t i) const { return n_->shape.at(i); }
    size_t rank() const { return n_->shape.size(); }

    std::vector<T> &val() { return n_->val; }
    const std::vector<T> &val() const { return n_->val; }
    std::vector<T> &grad() { return n_->grad; }
    const std::vector<T> &grad() const { return n_->grad; }

    bool requires_grad() const { return n_->requires_grad; }
    void set_requires_grad(bool rg) { n_->requires_grad = rg; }

    T item() const {
        check_contract(size() == 1, "item(): tensor is not scalar");
        return n_->val[0];
    }

    void zero_grad() { n_->grad.clear(); }

  private:
    NodePtr<T> n_;
};

// Seeds d(loss)/d(loss)=1 and replays the tape in reverse.
template <class T>
inline void backward(const Tensor<T> &loss) {
    Tape<T>::instance().backward(loss.node());
}

}  // namespace orddiff
