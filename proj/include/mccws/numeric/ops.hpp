#pragma once

// Differentiable operations on 2-D tensors. Each returns a new tensor and,
// when any input requires a gradient (and grad mode is on), records how to
// propagate the output gradient back to its inputs.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mccws/numeric/kernels.hpp"
#include "mccws/numeric/tensor.hpp"

namespace mccws::ops {

using kernels::Segment;

Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
// Adds a length-n vector to every row of an m x n matrix.
Tensor add_row(const Tensor& x, const Tensor& row);
Tensor scale(const Tensor& x, Scalar factor);
Tensor relu(const Tensor& x);
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Scalar eps = 1e-6);

// log(sum(exp(x))) over all entries; scalar result.
Tensor logsumexp(const Tensor& x);
Tensor sum(const Tensor& x);

// Row i of the result is table[indices[i]]; a negative index yields a zero row.
Tensor gather_rows(const Tensor& table, std::span<const std::int64_t> indices);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);

// Inverted dropout: zeroes entries with probability `rate` and rescales the rest.
Tensor dropout(const Tensor& x, Scalar rate, std::mt19937_64& rng);

// Single-sequence attention softmax(q k^T / sqrt(d_k)) v composed from the
// primitive ops above.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v);

// Fused multi-head self-attention over packed sequences (see kernels::attention).
// `probs`, when given, receives the attention weights.
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::span<const Segment> segments,
                            std::size_t heads, std::vector<Scalar>* probs = nullptr);

// Sum over segments of the linear-chain CRF negative log-likelihood of `gold`.
Tensor crf_nll(const Tensor& emissions, const Tensor& transitions, std::span<const Segment> segments,
               std::span<const int> gold);

// Sum over rows of -log softmax(logits)[label].
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace mccws::ops
