#include "mccws/numeric/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mccws {

Scalar noam_lr(std::int64_t step, std::int64_t d_model, std::int64_t warmup) {
  if (step < 1) throw std::invalid_argument("noam_lr: step must be >= 1");
  if (warmup < 1) throw std::invalid_argument("noam_lr: warmup must be >= 1");
  if (d_model < 1) throw std::invalid_argument("noam_lr: d_model must be >= 1");
  const auto s = static_cast<Scalar>(step);
  const auto w = static_cast<Scalar>(warmup);
  return std::pow(static_cast<Scalar>(d_model), -0.5) * std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

OptimizerState make_optimizer_state(const std::vector<Parameter>& params, AdamConfig config, std::int64_t d_model,
                                    std::int64_t warmup_steps) {
  OptimizerState state;
  state.config = config;
  state.d_model = d_model;
  state.warmup_steps = warmup_steps;
  for (const auto& p : params) {
    state.first_moment.emplace_back(p.value.size(), 0);
    state.second_moment.emplace_back(p.value.size(), 0);
  }
  return state;
}

namespace {

void update_range(Parameter& p, std::vector<Scalar>& m, std::vector<Scalar>& v, const AdamConfig& c, Scalar lr,
                  Scalar bias1, Scalar bias2, std::size_t begin, std::size_t end) {
  auto data = p.value.data();
  const auto grad = std::as_const(p.value).grad();
  for (std::size_t i = begin; i < end; ++i) {
    const Scalar g = grad.empty() ? 0 : grad[i];
    m[i] = c.beta1 * m[i] + (1 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1 - c.beta2) * g * g;
    const Scalar mhat = m[i] / bias1;
    const Scalar vhat = v[i] / bias2;
    data[i] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

}  // namespace

void adam_step(std::vector<Parameter>& params, OptimizerState& state, Scalar lr) {
  if (state.first_moment.size() != params.size()) throw DimensionError("adam_step: optimizer state does not match parameters");
  ++state.step;
  const auto& c = state.config;
  const Scalar bias1 = 1 - std::pow(c.beta1, static_cast<Scalar>(state.step));
  const Scalar bias2 = 1 - std::pow(c.beta2, static_cast<Scalar>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (m.size() != p.value.size()) throw DimensionError("adam_step: moment shape mismatch for " + p.name);
    if (p.frozen) continue;
    if (p.trainable_rows) {
      const std::size_t width = p.value.cols();
      for (std::size_t r : *p.trainable_rows) update_range(p, m, v, c, lr, bias1, bias2, r * width, (r + 1) * width);
    } else {
      update_range(p, m, v, c, lr, bias1, bias2, 0, p.value.size());
    }
  }
}

Scalar clip_grad_norm(std::vector<Parameter>& params, Scalar max_norm) {
  Scalar sq = 0;
  for (const auto& p : params)
    if (!p.frozen)
      for (Scalar g : std::as_const(p.value).grad()) sq += g * g;
  const Scalar norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const Scalar factor = max_norm / norm;
    for (auto& p : params) {
      if (p.frozen || !p.value.has_grad()) continue;
      for (auto& g : p.value.grad()) g *= factor;
    }
  }
  return norm;
}

void zero_grads(std::vector<Parameter>& params) {
  for (auto& p : params) p.value.zero_grad();
}

}  // namespace mccws
