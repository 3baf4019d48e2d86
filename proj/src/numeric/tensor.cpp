#include "mccws/numeric/tensor.hpp"

#include <cmath>
#include <unordered_set>

namespace mccws {

namespace {
thread_local bool g_grad_enabled = true;
}

std::span<Scalar> TensorNode::grad_buffer() {
  if (grad.size() != data.size()) grad.assign(data.size(), Scalar{0});
  return grad;
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0, requires_grad); }

Tensor Tensor::full(Shape shape, Scalar value, bool requires_grad) {
  auto node = std::make_shared<TensorNode>();
  node->data.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<Scalar> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_string(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(Scalar value, bool requires_grad) { return from({1}, {value}, requires_grad); }

std::size_t Tensor::rows() const {
  const auto& s = node_->shape;
  if (s.size() == 1) return 1;
  if (s.size() != 2) throw DimensionError("expected a matrix, got " + shape_string(s));
  return s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = node_->shape;
  if (s.size() == 1) return s[0];
  if (s.size() != 2) throw DimensionError("expected a matrix, got " + shape_string(s));
  return s[1];
}

Scalar Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape()));
  return node_->data[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), Scalar{0});
}

Tensor Tensor::detach() const { return from(shape(), node_->data, false); }

Tensor Tensor::clone() const { return from(shape(), node_->data, node_->requires_grad); }

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void check_finite(std::span<const Scalar> values, const std::string& what) {
  for (Scalar v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in " + what);
  }
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw DimensionError("backward() needs a scalar loss");
  }
  TensorNode* root = loss.node();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  std::vector<std::pair<TensorNode*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorNode* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (TensorNode* node : order) {
    if (!node->is_leaf()) node->grad.assign(node->data.size(), Scalar{0});
  }
  root->grad_buffer()[0] += 1;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* node = *it;
    if (!node->is_leaf()) node->backward_fn(*node);
  }
  for (TensorNode* node : order) {
    if (node->is_leaf()) check_finite(node->grad, "gradient");
  }
}

}  // namespace mccws
