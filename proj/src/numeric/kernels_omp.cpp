#include <algorithm>
#include <cmath>
#include <limits>

#include "mccws/numeric/kernels.hpp"

namespace mccws::kernels::omp {

namespace {

using Index = std::ptrdiff_t;  // OpenMP loop counters must be signed

inline void axpy(Scalar alpha, const Scalar* __restrict x, Scalar* __restrict y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline Scalar dot(const Scalar* __restrict x, const Scalar* __restrict y, std::size_t n) {
  Scalar s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

inline Scalar lse(const Scalar* x, std::size_t n) {
  Scalar mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  Scalar s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - mx);
  return mx + std::log(s);
}

inline void softmax_row(Scalar* x, std::size_t n) {
  const Scalar mx = *std::max_element(x, x + n);
  Scalar sum = 0;
  for (std::size_t c = 0; c < n; ++c) {
    x[c] = std::exp(x[c] - mx);
    sum += x[c];
  }
  const Scalar inv = 1 / sum;
  for (std::size_t c = 0; c < n; ++c) x[c] *= inv;
}

}  // namespace

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, std::span<const Scalar> a,
          std::span<const Scalar> b, std::span<Scalar> c, bool accumulate) {
  // Row-times-row formulation: C[i,:] += A[i,p] * B[p,:]. The inner loop is a
  // contiguous axpy, so B^T is materialised first when needed.
  std::vector<Scalar> bt;
  const Scalar* bp = b.data();
  if (trans_b) {
    bt.resize(k * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
    bp = bt.data();
  }
  const Scalar* ap = a.data();
  Scalar* cp = c.data();
#pragma omp parallel for schedule(static)
  for (Index ii = 0; ii < static_cast<Index>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Scalar* crow = cp + i * n;
    if (!accumulate) std::fill(crow, crow + n, Scalar{0});
    for (std::size_t p = 0; p < k; ++p) {
      const Scalar av = trans_a ? ap[p * m + i] : ap[i * k + p];
      if (av == 0) continue;
      axpy(av, bp + p * n, crow, n);
    }
  }
}

void softmax_rows(std::span<const Scalar> x, std::span<Scalar> y, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (Index rr = 0; rr < static_cast<Index>(rows); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const Scalar* xr = x.data() + r * cols;
    Scalar* yr = y.data() + r * cols;
    const Scalar mx = *std::max_element(xr, xr + cols);
    Scalar sum = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      yr[c] = std::exp(xr[c] - mx);
      sum += yr[c];
    }
    const Scalar inv = 1 / sum;
    for (std::size_t c = 0; c < cols; ++c) yr[c] *= inv;
  }
}

void softmax_rows_backward(std::span<const Scalar> y, std::span<const Scalar> dy, std::span<Scalar> dx,
                           std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (Index rr = 0; rr < static_cast<Index>(rows); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const Scalar* yr = y.data() + r * cols;
    const Scalar* gr = dy.data() + r * cols;
    Scalar* dr = dx.data() + r * cols;
    const Scalar inner = dot(yr, gr, cols);
    for (std::size_t c = 0; c < cols; ++c) dr[c] += yr[c] * (gr[c] - inner);
  }
}

void layer_norm(std::span<const Scalar> x, std::span<const Scalar> gain, std::span<const Scalar> bias,
                Scalar eps, std::size_t rows, std::size_t cols, std::span<Scalar> y, std::span<Scalar> xhat,
                std::span<Scalar> rstd) {
  const Scalar n = static_cast<Scalar>(cols);
#pragma omp parallel for schedule(static)
  for (Index rr = 0; rr < static_cast<Index>(rows); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const Scalar* xr = x.data() + r * cols;
    Scalar mean = 0;
    for (std::size_t c = 0; c < cols; ++c) mean += xr[c];
    mean /= n;
    Scalar var = 0;
    for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= n;
    const Scalar rs = 1 / std::sqrt(var + eps);
    rstd[r] = rs;
    Scalar* hr = xhat.data() + r * cols;
    Scalar* yr = y.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      hr[c] = (xr[c] - mean) * rs;
      yr[c] = gain[c] * hr[c] + bias[c];
    }
  }
}

void layer_norm_backward(std::span<const Scalar> xhat, std::span<const Scalar> rstd,
                         std::span<const Scalar> gain, std::span<const Scalar> dy, std::size_t rows,
                         std::size_t cols, std::span<Scalar> dx, std::span<Scalar> dgain,
                         std::span<Scalar> dbias) {
  const Scalar n = static_cast<Scalar>(cols);
  if (!dx.empty()) {
#pragma omp parallel for schedule(static)
    for (Index rr = 0; rr < static_cast<Index>(rows); ++rr) {
      const auto r = static_cast<std::size_t>(rr);
      const Scalar* hr = xhat.data() + r * cols;
      const Scalar* gr = dy.data() + r * cols;
      Scalar mean_g = 0, mean_gx = 0;
      for (std::size_t c = 0; c < cols; ++c) {
        const Scalar g = gain[c] * gr[c];
        mean_g += g;
        mean_gx += g * hr[c];
      }
      mean_g /= n;
      mean_gx /= n;
      Scalar* dr = dx.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dr[c] += rstd[r] * (gain[c] * gr[c] - mean_g - hr[c] * mean_gx);
    }
  }
  // Column reductions stay sequential over rows so the sum order is fixed.
  for (std::size_t r = 0; r < rows; ++r) {
    const Scalar* hr = xhat.data() + r * cols;
    const Scalar* gr = dy.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!dgain.empty()) dgain[c] += gr[c] * hr[c];
      if (!dbias.empty()) dbias[c] += gr[c];
    }
  }
}

void attention(std::span<const Scalar> q, std::span<const Scalar> k, std::span<const Scalar> v,
               std::span<const Segment> segments, std::size_t heads, std::size_t dim, std::span<Scalar> out,
               std::span<Scalar> probs) {
  const std::size_t hd = dim / heads;
  const Scalar scale = 1 / std::sqrt(static_cast<Scalar>(hd));
  const auto offsets = attention_prob_offsets(segments, heads);
  const auto jobs = static_cast<Index>(segments.size() * heads);
#pragma omp parallel for schedule(dynamic)
  for (Index job = 0; job < jobs; ++job) {
    const std::size_t s = static_cast<std::size_t>(job) / heads;
    const std::size_t h = static_cast<std::size_t>(job) % heads;
    const auto [o, n] = segments[s];
    Scalar* p = probs.data() + offsets[static_cast<std::size_t>(job)];
    for (std::size_t i = 0; i < n; ++i) {
      const Scalar* qi = q.data() + (o + i) * dim + h * hd;
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = dot(qi, k.data() + (o + j) * dim + h * hd, hd) * scale;
    }
    for (std::size_t i = 0; i < n; ++i) softmax_row(p + i * n, n);
    for (std::size_t i = 0; i < n; ++i) {
      Scalar* oi = out.data() + (o + i) * dim + h * hd;
      std::fill(oi, oi + hd, Scalar{0});
      for (std::size_t j = 0; j < n; ++j) axpy(p[i * n + j], v.data() + (o + j) * dim + h * hd, oi, hd);
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
  const auto jobs = static_cast<Index>(segments.size() * heads);
#pragma omp parallel for schedule(dynamic)
  for (Index job = 0; job < jobs; ++job) {
    const std::size_t s = static_cast<std::size_t>(job) / heads;
    const std::size_t h = static_cast<std::size_t>(job) % heads;
    const auto [o, n] = segments[s];
    const Scalar* p = probs.data() + offsets[static_cast<std::size_t>(job)];
    auto row = [&](const Scalar* base, std::size_t r) { return base + (o + r) * dim + h * hd; };
    auto mrow = [&](Scalar* base, std::size_t r) { return base + (o + r) * dim + h * hd; };

    std::vector<Scalar> ds(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      const Scalar* gi = row(dout.data(), i);
      Scalar inner = 0;
      for (std::size_t j = 0; j < n; ++j) {
        ds[i * n + j] = dot(gi, row(v.data(), j), hd);
        inner += p[i * n + j] * ds[i * n + j];
      }
      for (std::size_t j = 0; j < n; ++j) ds[i * n + j] = p[i * n + j] * (ds[i * n + j] - inner) * scale;
    }
    if (!dv.empty()) {
      for (std::size_t j = 0; j < n; ++j) {
        Scalar* dvj = mrow(dv.data(), j);
        for (std::size_t i = 0; i < n; ++i) axpy(p[i * n + j], row(dout.data(), i), dvj, hd);
      }
    }
    if (!dq.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        Scalar* dqi = mrow(dq.data(), i);
        for (std::size_t j = 0; j < n; ++j) axpy(ds[i * n + j], row(k.data(), j), dqi, hd);
      }
    }
    if (!dk.empty()) {
      for (std::size_t j = 0; j < n; ++j) {
        Scalar* dkj = mrow(dk.data(), j);
        for (std::size_t i = 0; i < n; ++i) axpy(ds[i * n + j], row(q.data(), i), dkj, hd);
      }
    }
  }
}

void crf_nll(std::span<const Scalar> emissions, std::span<const Scalar> transitions,
             std::span<const Segment> segments, std::span<const int> gold, std::size_t labels,
             std::span<Scalar> nll, std::span<Scalar> d_emissions, std::span<Scalar> d_transitions) {
  const std::size_t L = labels;
  const Scalar* tr = transitions.data();
#pragma omp parallel for schedule(dynamic)
  for (Index ss = 0; ss < static_cast<Index>(segments.size()); ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    const auto [o, n] = segments[s];
    const Scalar* em = emissions.data() + o * L;
    const int* y = gold.data() + o;
    std::vector<Scalar> alpha(n * L), beta(n * L, 0), terms(L);
    std::copy(em, em + L, alpha.begin());
    for (std::size_t t = 1; t < n; ++t)
      for (std::size_t c = 0; c < L; ++c) {
        for (std::size_t p = 0; p < L; ++p) terms[p] = alpha[(t - 1) * L + p] + tr[p * L + c];
        alpha[t * L + c] = em[t * L + c] + lse(terms.data(), L);
      }
    for (std::size_t t = n - 1; t-- > 0;)
      for (std::size_t p = 0; p < L; ++p) {
        for (std::size_t c = 0; c < L; ++c) terms[c] = tr[p * L + c] + em[(t + 1) * L + c] + beta[(t + 1) * L + c];
        beta[t * L + p] = lse(terms.data(), L);
      }
    const Scalar log_z = lse(alpha.data() + (n - 1) * L, L);

    Scalar gold_score = em[y[0]];
    for (std::size_t t = 1; t < n; ++t) gold_score += em[t * L + y[t]] + tr[y[t - 1] * L + y[t]];
    nll[s] = log_z - gold_score;

    Scalar* de = d_emissions.data() + o * L;
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t c = 0; c < L; ++c) de[t * L + c] = std::exp(alpha[t * L + c] + beta[t * L + c] - log_z);
      de[t * L + static_cast<std::size_t>(y[t])] -= 1;
    }
    Scalar* dt = d_transitions.data() + s * L * L;
    std::fill(dt, dt + L * L, Scalar{0});
    for (std::size_t t = 1; t < n; ++t) {
      for (std::size_t p = 0; p < L; ++p) {
        const Scalar a = alpha[(t - 1) * L + p] - log_z;
        for (std::size_t c = 0; c < L; ++c) dt[p * L + c] += std::exp(a + tr[p * L + c] + em[t * L + c] + beta[t * L + c]);
      }
      dt[static_cast<std::size_t>(y[t - 1]) * L + static_cast<std::size_t>(y[t])] -= 1;
    }
  }
}

void viterbi(std::span<const Scalar> emissions, std::span<const Scalar> transitions,
             std::span<const Segment> segments, std::size_t labels, std::span<int> out) {
  const std::size_t L = labels;
  const Scalar* tr = transitions.data();
#pragma omp parallel for schedule(dynamic)
  for (Index ss = 0; ss < static_cast<Index>(segments.size()); ++ss) {
    const auto [o, n] = segments[static_cast<std::size_t>(ss)];
    const Scalar* em = emissions.data() + o * L;
    // suffix[t][c]: best score of positions t..n-1 given label c at t.
    std::vector<Scalar> suffix(n * L);
    std::copy(em + (n - 1) * L, em + n * L, suffix.begin() + (n - 1) * L);
    for (std::size_t t = n - 1; t-- > 0;)
      for (std::size_t c = 0; c < L; ++c) {
        Scalar b = tr[c * L] + suffix[(t + 1) * L];
        for (std::size_t d = 1; d < L; ++d) b = std::max(b, tr[c * L + d] + suffix[(t + 1) * L + d]);
        suffix[t * L + c] = em[t * L + c] + b;
      }
    int prev = -1;
    for (std::size_t t = 0; t < n; ++t) {
      int arg = 0;
      Scalar top = -std::numeric_limits<Scalar>::infinity();
      for (std::size_t c = 0; c < L; ++c) {
        const Scalar v = suffix[t * L + c] + (prev >= 0 ? tr[static_cast<std::size_t>(prev) * L + c] : 0);
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

}  // namespace mccws::kernels::omp
