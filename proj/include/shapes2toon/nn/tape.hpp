#pragma once

#include <deque>
#include <functional>
#include <string>
#include <type_traits>

#include "shapes2toon/nn/tensor.hpp"

namespace s2t::nn {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

template <typename T>
class Tape;

// Handle to a node recorded on a Tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return tape->value(id).shape(); }
};

// Reverse-mode autodiff tape. Nodes are recorded in execution order, so
// walking them backwards is a valid topological order.
//
// A node's gradient can be propagated once; calling backward through a node
// that was already backpropagated throws (re-run the forward pass instead).
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  // Test mode (finite checks after every op) is on by default in 64-bit.
  explicit Tape(bool check_finite = std::is_same_v<T, double>) : check_finite_(check_finite) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value) {
    Node& n = push("constant");
    n.owned = std::move(value);
    check(n);
    return {this, nodes_.size() - 1};
  }

  // Trainable leaf; backward accumulates into p.grad.
  Var<T> parameter(Parameter<T>& p) {
    Node& n = push("parameter");
    n.borrowed = &p.value;
    n.param = &p;
    n.requires_grad = true;
    return {this, nodes_.size() - 1};
  }

  // Read-only leaf; never written through.
  Var<T> frozen(const Parameter<T>& p) {
    Node& n = push("frozen");
    n.borrowed = &p.value;
    return {this, nodes_.size() - 1};
  }

  // Records an op result. `backward` is kept only if some input needs grad.
  Var<T> record(const char* op, Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn backward) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || nodes_.at(in.id).requires_grad;
    Node& n = push(op);
    n.owned = std::move(value);
    n.requires_grad = needs;
    if (needs) n.backward = std::move(backward);
    check(n);
    return {this, nodes_.size() - 1};
  }

  const Tensor<T>& value(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return n.borrowed != nullptr ? *n.borrowed : n.owned;
  }

  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  // Gradient buffer of a node, allocated as zeros on first access.
  // Parameter leaves accumulate straight into Parameter::grad.
  Tensor<T>& grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.param != nullptr) {
      n.touched = true;
      return n.param->grad;
    }
    if (n.grad.empty() && !value(id).empty()) n.grad = Tensor<T>(value(id).shape());
    return n.grad;
  }

  bool has_grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return n.param != nullptr ? n.touched : !n.grad.empty();
  }

  std::size_t size() const { return nodes_.size(); }
  bool check_finite() const { return check_finite_; }

  void backward(Var<T> loss) {
    if (loss.tape != this) throw Error("backward: variable belongs to another tape");
    Node& root = nodes_.at(loss.id);
    if (value(loss.id).numel() != 1) throw ValidationError("backward needs a scalar loss, got " + shape_str(value(loss.id).shape()));
    if (root.consumed) throw Error("backward called twice on the same graph; re-run the forward pass");

    for (auto& n : nodes_) {
      if (n.param == nullptr) continue;
      if (n.param->grad.shape() == n.param->value.shape()) {
        n.param->grad.fill(T(0));
      } else {
        n.param->grad = Tensor<T>(n.param->value.shape());
      }
    }
    if (!root.requires_grad) {
      root.consumed = true;
      return;
    }
    grad(loss.id)[0] = T(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || !has_grad(i)) continue;
      if (n.consumed) throw Error("backward through an already backpropagated node; re-run the forward pass");
      if (n.param == nullptr && n.backward) n.backward(*this, i);
      n.consumed = true;
      n.touched = false;
      n.grad = Tensor<T>();
    }
  }

 private:
  struct Node {
    const char* op = "";
    Tensor<T> owned;
    const Tensor<T>* borrowed = nullptr;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
    bool consumed = false;
    bool touched = false;
    Tensor<T> grad;
    BackwardFn backward;
  };

  Node& push(const char* op) {
    nodes_.emplace_back();
    nodes_.back().op = op;
    return nodes_.back();
  }

  void check(const Node& n) const {
    if (check_finite_ && !n.owned.all_finite()) throw NumericError(std::string("non-finite values produced by ") + n.op);
  }

  std::deque<Node> nodes_;
  bool check_finite_;
};

}  // namespace s2t::nn
