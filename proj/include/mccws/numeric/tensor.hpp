#pragma once

// Dense row-major tensors with tape-free reverse-mode gradients.
//
// Every op that consumes a tensor with requires_grad (while grad mode is on)
// produces a node that remembers its parents and a closure that pushes its
// own gradient back to them. backward() walks the resulting DAG in reverse
// topological order.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mccws {

using Scalar = double;
using Shape = std::vector<std::size_t>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TensorNode {
  Shape shape;
  std::vector<Scalar> data;
  std::vector<Scalar> grad;  // empty until first needed
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  bool is_leaf() const { return !backward_fn; }
  std::span<Scalar> grad_buffer();
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Scalar value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<Scalar> values, bool requires_grad = false);
  static Tensor scalar(Scalar value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t ndim() const { return node_->shape.size(); }
  std::size_t size() const { return node_->data.size(); }
  // 2-D accessors; a 1-D tensor is treated as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<Scalar> data() { return node_->data; }
  std::span<const Scalar> data() const { return node_->data; }
  Scalar& at(std::size_t r, std::size_t c) { return node_->data[r * cols() + c]; }
  Scalar at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }
  Scalar item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<Scalar> grad() { return node_->grad_buffer(); }
  std::span<const Scalar> grad() const { return node_->grad; }
  void zero_grad();

  // Copies the values into a fresh leaf that is detached from any graph.
  Tensor detach() const;
  Tensor clone() const;

  TensorNode* node() const { return node_.get(); }
  const std::shared_ptr<TensorNode>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<TensorNode> node_;
};

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

bool grad_enabled();

// Disables graph recording for the lifetime of the guard (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Populates grad of every requires_grad tensor reachable from `loss`.
// Leaf gradients accumulate across calls; intermediate ones are recomputed.
void backward(const Tensor& loss);

// Throws NumericError naming `what` if any value is NaN or infinite.
void check_finite(std::span<const Scalar> values, const std::string& what);

}  // namespace mccws
