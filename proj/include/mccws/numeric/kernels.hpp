#pragma once

// Raw compute kernels behind the autograd ops.
//
// Two implementations share one interface:
//   kernels::serial  straightforward loops, kept as the reference for tests
//   kernels::omp     cache-friendly loops parallelised with OpenMP
// The model always calls kernels::omp. Both are deterministic: every output
// element is produced by exactly one thread with a fixed summation order.

#include <cstddef>
#include <span>
#include <vector>

#include "mccws/numeric/tensor.hpp"

namespace mccws::kernels {

// Rows [offset, offset + length) of a packed matrix that form one sequence.
struct Segment {
  std::size_t offset = 0;
  std::size_t length = 0;
};

// Offset of each (segment, head) probability block inside the attention
// probability buffer; the final entry is the total buffer size.
std::vector<std::size_t> attention_prob_offsets(std::span<const Segment> segments, std::size_t heads);

namespace serial {
#include "mccws/numeric/kernels_api.inc"
}  // namespace serial

namespace omp {
#include "mccws/numeric/kernels_api.inc"
}  // namespace omp

// Log partition function of one sequence via the forward recursion.
Scalar crf_log_partition(std::span<const Scalar> emissions, std::span<const Scalar> transitions,
                         std::size_t length, std::size_t labels);

}  // namespace mccws::kernels
