// Reference kernels: direct transcriptions of the textbook formulas with no
// blocking, transposition tricks or threading. Tests compare kernels::omp
// against these.

#include <algorithm>
#include <cmath>
#include <limits>

#include "mccws/numeric/kernels.hpp"

namespace mccws::kernels {

std::vector<std::size_t> attention_prob_offsets(std::span<const Segment> segments, std::size_t heads) {
  std::vector<std::size_t> offsets;
  offsets.reserve(segments.size() * heads + 1);
  std::size_t total = 0;
  for (const auto& seg : segments) {
    for (std::size_t h = 0; h < heads; ++h) {
      offsets.push_back(total);
      total += seg.length * seg.length;
    }
  }
  offsets.push_back(total);
  return offsets;
}

namespace {

Scalar log_sum_exp(const Scalar* x, std::size_t n) {
  Scalar mx = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x[i]);
  Scalar s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - mx);
  return mx + std::log(s);
}

}  // namespace

Scalar crf_log_partition(std::span<const Scalar> emissions, std::span<const Scalar> transitions,
                         std::size_t length, std::size_t labels) {
  if (length == 0) throw DimensionError("CRF partition of an empty sequence");
  std::vector<Scalar> alpha(emissions.begin(), emissions.begin() + labels);
  std::vector<Scalar> next(labels), terms(labels);
  for (std::size_t t = 1; t < length; ++t) {
    for (std::size_t y = 0; y < labels; ++y) {
      for (std::size_t p = 0; p < labels; ++p) terms[p] = alpha[p] + transitions[p * labels + y];
      next[y] = emissions[t * labels + y] + log_sum_exp(terms.data(), labels);
    }
    alpha.swap(next);
  }
  return log_sum_exp(alpha.data(), labels);
}

namespace serial {

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, std::span<const Scalar> a,
          std::span<const Scalar> b, std::span<Scalar> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Scalar s = 0;
      for (std::size_t p = 0; p < k; ++p) {
        const Scalar av = trans_a ? a[p * m + i] : a[i * k + p];
        const Scalar bv = trans_b ? b[j * k + p] : b[p * n + j];
        s += av * bv;
      }
      c[i * n + j] = accumulate ? c[i * n + j] + s : s;
    }
  }
}

void softmax_rows(std::span<const Scalar> x, std::span<Scalar> y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const Scalar* xr = x.data() + r * cols;
    Scalar* yr = y.data() + r * cols;
    Scalar mx = *std::max_element(xr, xr + cols);
    Scalar sum = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    for (std::size_t c = 0; c < cols; ++c) yr[c] /= sum;
  }
}

void softmax_rows_backward(std::span<const Scalar> y, std::span<const Scalar> dy, std::span<Scalar> dx,
                           std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < cols; ++i) {
      Scalar s = 0;
      for (std::size_t j = 0; j < cols; ++j) {
        const Scalar jac = y[r * cols + j] * ((i == j ? 1 : 0) - y[r * cols + i]);
        s += jac * dy[r * cols + j];
      }
      dx[r * cols + i] += s;
    }
  }
}

void layer_norm(std::span<const Scalar> x, std::span<const Scalar> gain, std::span<const Scalar> bias,
                Scalar eps, std::size_t rows, std::size_t cols, std::span<Scalar> y, std::span<Scalar> xhat,
                std::span<Scalar> rstd) {
  for (std::size_t r = 0; r < rows; ++r) {
    Scalar mean = 0;
    for (std::size_t c = 0; c < cols; ++c) mean += x[r * cols + c];
    mean /= static_cast<Scalar>(cols);
    Scalar var = 0;
    for (std::size_t c = 0; c < cols; ++c) var += (x[r * cols + c] - mean) * (x[r * cols + c] - mean);
    var /= static_cast<Scalar>(cols);
    rstd[r] = 1 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      xhat[r * cols + c] = (x[r * cols + c] - mean) * rstd[r];
      y[r * cols + c] = gain[c] * xhat[r * cols + c] + bias[c];
    }
  }
}

void layer_norm_backward(std::span<const Scalar> xhat, std::span<const Scalar> rstd,
                         std::span<const Scalar> gain, std::span<const Scalar> dy, std::size_t rows,
                         std::size_t cols, std::span<Scalar> dx, std::span<Scalar> dgain,
                         std::span<Scalar> dbias) {
  const Scalar n = static_cast<Scalar>(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    // dxhat_c = gain_c dy_c;  dx = rstd * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
    Scalar mean_g = 0, mean_gx = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const Scalar g = gain[c] * dy[r * cols + c];
      mean_g += g;
      mean_gx += g * xhat[r * cols + c];
    }
    mean_g /= n;
    mean_gx /= n;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (!dx.empty()) dx[i] += rstd[r] * (gain[c] * dy[i] - mean_g - xhat[i] * mean_gx);
      if (!dgain.empty()) dgain[c] += dy[i] * xhat[i];
      if (!dbias.empty()) dbias[c] += dy[i];
    }
  }
}

void attention(std::span<const Scalar> q, std::span<const Scalar> k, std::span<const Scalar> v,
               std::span<const Segment> segments, std::size_t heads, std::size_t dim, std::span<Scalar> out,
               std::span<Scalar> probs) {
  const std::size_t dk = dim / heads;
  const Scalar scale = 1 / std::sqrt(static_cast<Scalar>(dk));
  const auto offsets = attention_prob_offsets(segments, heads);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [o, n] = segments[s];
    for (std::size_t h = 0; h < heads; ++h) {
      Scalar* p = probs.data() + offsets[s * heads + h];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          Scalar dot = 0;
          for (std::size_t d = 0; d < dk; ++d) dot += q[(o + i) * dim + h * dk + d] * k[(o + j) * dim + h * dk + d];
          p[i * n + j] = dot * scale;
        }
      }
      softmax_rows({p, n * n}, {p, n * n}, n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dk; ++d) {
          Scalar acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += p[i * n + j] * v[(o + j) * dim + h * dk + d];
          out[(o + i) * dim + h * dk + d] = acc;
        }
      }
    }
  }
}

void attention_backward(std::span<const Scalar> q, std::span<const Scalar> k, std::span<const Scalar> v,
                        std::span<const Scalar> probs, std::span<const Scalar> dout,
                        std::span<const Segment> segments, std::size_t heads, std::size_t dim,
                        std::span<Scalar> dq, std::span<Scalar> dk, std::span<Scalar> dv) {
  const std::size_t hd = dim / heads;
  const Scalar scale = 1 / std::sqrt(static_cast<Scalar>(hd));
  const auto offsets = attention_prob_offsets(segments, heads);
  std::vector<Scalar> dp, ds;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [o, n] = segments[s];
    for (std::size_t h = 0; h < heads; ++h) {
      const Scalar* p = probs.data() + offsets[s * heads + h];
      auto col = [&](std::size_t row, std::size_t d) { return (o + row) * dim + h * hd + d; };
      dp.assign(n * n, 0);
      ds.assign(n * n, 0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t d = 0; d < hd; ++d) dp[i * n + j] += dout[col(i, d)] * v[col(j, d)];
      if (!dv.empty()) {
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t d = 0; d < hd; ++d) {
            Scalar acc = 0;
            for (std::size_t i = 0; i < n; ++i) acc += p[i * n + j] * dout[col(i, d)];
            dv[col(j, d)] += acc;
          }
      }
      softmax_rows_backward({p, n * n}, dp, ds, n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < hd; ++d) {
          Scalar aq = 0, ak = 0;
          for (std::size_t j = 0; j < n; ++j) {
            aq += ds[i * n + j] * k[col(j, d)];
            ak += ds[j * n + i] * q[col(j, d)];
          }
          if (!dq.empty()) dq[col(i, d)] += aq * scale;
          if (!dk.empty()) dk[col(i, d)] += ak * scale;
        }
    }
  }
}

void crf_nll(std::span<const Scalar> emissions, std::span<const Scalar> transitions,
             std::span<const Segment> segments, std::span<const int> gold, std::size_t labels,
             std::span<Scalar> nll, std::span<Scalar> d_emissions, std::span<Scalar> d_transitions) {
  const std::size_t L = labels;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [o, n] = segments[s];
    const Scalar* em = emissions.data() + o * L;
    const int* y = gold.data() + o;
    // Forward and backward log-messages.
    std::vector<Scalar> alpha(n * L), beta(n * L, 0), terms(L);
    for (std::size_t c = 0; c < L; ++c) alpha[c] = em[c];
    for (std::size_t t = 1; t < n; ++t)
      for (std::size_t c = 0; c < L; ++c) {
        for (std::size_t p = 0; p < L; ++p) terms[p] = alpha[(t - 1) * L + p] + transitions[p * L + c];
        alpha[t * L + c] = em[t * L + c] + log_sum_exp(terms.data(), L);
      }
    for (std::size_t t = n - 1; t-- > 0;)
      for (std::size_t p = 0; p < L; ++p) {
        for (std::size_t c = 0; c < L; ++c)
          terms[c] = transitions[p * L + c] + em[(t + 1) * L + c] + beta[(t + 1) * L + c];
        beta[t * L + p] = log_sum_exp(terms.data(), L);
      }
    const Scalar log_z = log_sum_exp(alpha.data() + (n - 1) * L, L);

    Scalar gold_score = 0;
    for (std::size_t t = 0; t < n; ++t) {
      gold_score += em[t * L + y[t]];
      if (t > 0) gold_score += transitions[y[t - 1] * L + y[t]];
    }
    nll[s] = log_z - gold_score;

    Scalar* de = d_emissions.data() + o * L;
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t c = 0; c < L; ++c)
        de[t * L + c] = std::exp(alpha[t * L + c] + beta[t * L + c] - log_z) - (static_cast<int>(c) == y[t] ? 1 : 0);

    Scalar* dt = d_transitions.data() + s * L * L;
    std::fill(dt, dt + L * L, Scalar{0});
    for (std::size_t t = 1; t < n; ++t) {
      for (std::size_t p = 0; p < L; ++p)
        for (std::size_t c = 0; c < L; ++c)
          dt[p * L + c] += std::exp(alpha[(t - 1) * L + p] + transitions[p * L + c] + em[t * L + c] +
                                    beta[t * L + c] - log_z);
      dt[y[t - 1] * L + y[t]] -= 1;
    }
  }
}

void viterbi(std::span<const Scalar> emissions, std::span<const Scalar> transitions,
             std::span<const Segment> segments, std::size_t labels, std::span<int> out) {
  const std::size_t L = labels;
  for (const auto& [o, n] : segments) {
    const Scalar* em = emissions.data() + o * L;
    // best[t][c]: best score of positions t..n-1 given label c at t.
    std::vector<Scalar> best(n * L, 0);
    for (std::size_t c = 0; c < L; ++c) best[(n - 1) * L + c] = em[(n - 1) * L + c];
    for (std::size_t t = n - 1; t-- > 0;)
      for (std::size_t c = 0; c < L; ++c) {
        Scalar b = -std::numeric_limits<Scalar>::infinity();
        for (std::size_t d = 0; d < L; ++d) b = std::max(b, transitions[c * L + d] + best[(t + 1) * L + d]);
        best[t * L + c] = em[t * L + c] + b;
      }
    // Forward pass picks the lowest label that stays on an optimal path.
    int prev = -1;
    for (std::size_t t = 0; t < n; ++t) {
      int arg = 0;
      Scalar top = -std::numeric_limits<Scalar>::infinity();
      for (std::size_t c = 0; c < L; ++c) {
        const Scalar v = best[t * L + c] + (prev >= 0 ? transitions[prev * L + c] : 0);
        if (v > top) {
          top = v;
          arg = static_cast<int>(c);
        }
      }
      out[o + t] = arg;
      prev = arg;
    }
  }
}

}  // namespace serial
}  // namespace mccws::kernels
