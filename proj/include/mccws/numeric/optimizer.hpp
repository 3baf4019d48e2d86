#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mccws/numeric/tensor.hpp"

namespace mccws {

// A named trainable tensor plus its update mask.
struct Parameter {
  std::string name;
  Tensor value;
  bool frozen = false;
  // When set, only these rows of `value` are updated.
  std::optional<std::vector<std::size_t>> trainable_rows;
};

// Inverse-square-root schedule with linear warmup:
//   d_model^-0.5 * min(step^-0.5, step * warmup^-1.5)
Scalar noam_lr(std::int64_t step, std::int64_t d_model, std::int64_t warmup);

struct AdamConfig {
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.98;
  Scalar epsilon = 1e-9;
};

struct OptimizerState {
  std::int64_t step = 0;
  std::vector<std::vector<Scalar>> first_moment;
  std::vector<std::vector<Scalar>> second_moment;
  AdamConfig config;
  std::int64_t d_model = 256;
  std::int64_t warmup_steps = 4000;
};

OptimizerState make_optimizer_state(const std::vector<Parameter>& params, AdamConfig config, std::int64_t d_model,
                                    std::int64_t warmup_steps);

// One bias-corrected Adam update of every non-frozen parameter from its grad.
// Parameters without a gradient buffer are treated as having zero gradient.
void adam_step(std::vector<Parameter>& params, OptimizerState& state, Scalar lr);

// Scales the gradients of non-frozen parameters so their global L2 norm is at most max_norm; returns the norm before scaling.
Scalar clip_grad_norm(std::vector<Parameter>& params, Scalar max_norm);

void zero_grads(std::vector<Parameter>& params);

}  // namespace mccws
