#include "mccws/numeric/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace mccws::ops {

namespace k = kernels::omp;

namespace {

using BackwardFn = std::function<void(TensorNode&)>;

Tensor make_result(Shape shape, std::vector<Scalar> data, std::initializer_list<Tensor> inputs, BackwardFn fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  if (grad_enabled()) {
    const bool needs = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    if (needs) {
      node->requires_grad = true;
      for (const auto& t : inputs) node->parents.push_back(t.node_ptr());
      node->backward_fn = std::move(fn);
    }
  }
  return Tensor(std::move(node));
}

// Gradient buffer of parent i, or an empty span when it needs no gradient.
std::span<Scalar> parent_grad(TensorNode& self, std::size_t i) {
  TensorNode& p = *self.parents[i];
  return p.requires_grad ? p.grad_buffer() : std::span<Scalar>{};
}

std::span<const Scalar> parent_data(TensorNode& self, std::size_t i) { return self.parents[i]->data; }

void require_matrix(const Tensor& t, const char* what) {
  if (!t.defined() || t.ndim() < 1 || t.ndim() > 2) throw DimensionError(std::string(what) + ": expected a matrix");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DimensionError(message);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), kk = a.cols(), n = b.cols();
  require(b.rows() == kk, "matmul: inner dimensions differ (" + shape_string(a.shape()) + " x " +
                              shape_string(b.shape()) + ")");
  std::vector<Scalar> out(m * n);
  k::gemm(false, false, m, n, kk, a.data(), b.data(), out, false);
  return make_result({m, n}, std::move(out), {a, b}, [m, n, kk](TensorNode& self) {
    if (auto ga = parent_grad(self, 0); !ga.empty()) k::gemm(false, true, m, kk, n, self.grad, parent_data(self, 1), ga, true);
    if (auto gb = parent_grad(self, 1); !gb.empty()) k::gemm(true, false, kk, n, m, parent_data(self, 0), self.grad, gb, true);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t m = a.rows(), kk = a.cols(), n = b.rows();
  require(b.cols() == kk, "matmul_nt: inner dimensions differ");
  std::vector<Scalar> out(m * n);
  k::gemm(false, true, m, n, kk, a.data(), b.data(), out, false);
  return make_result({m, n}, std::move(out), {a, b}, [m, n, kk](TensorNode& self) {
    if (auto ga = parent_grad(self, 0); !ga.empty()) k::gemm(false, false, m, kk, n, self.grad, parent_data(self, 1), ga, true);
    if (auto gb = parent_grad(self, 1); !gb.empty()) k::gemm(true, false, n, kk, m, self.grad, parent_data(self, 0), gb, true);
  });
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<Scalar> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.data()[i * n + j];
  return make_result({n, m}, std::move(out), {a}, [m, n](TensorNode& self) {
    auto ga = parent_grad(self, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[j * m + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  std::vector<Scalar> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto g = parent_grad(self, p); !g.empty())
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor add_row(const Tensor& x, const Tensor& row) {
  require_matrix(x, "add_row");
  const std::size_t m = x.rows(), n = x.cols();
  require(row.size() == n, "add_row: row length " + std::to_string(row.size()) + " != " + std::to_string(n));
  std::vector<Scalar> out(x.data().begin(), x.data().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += row.data()[j];
  return make_result(x.shape(), std::move(out), {x, row}, [m, n](TensorNode& self) {
    if (auto gx = parent_grad(self, 0); !gx.empty())
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
    if (auto gr = parent_grad(self, 1); !gr.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gr[j] += self.grad[i * n + j];
  });
}

Tensor scale(const Tensor& x, Scalar factor) {
  std::vector<Scalar> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return make_result(x.shape(), std::move(out), {x}, [factor](TensorNode& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor relu(const Tensor& x) {
  std::vector<Scalar> out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v > 0 ? v : 0;
  return make_result(x.shape(), std::move(out), {x}, [](TensorNode& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (self.data[i] > 0) g[i] += self.grad[i];
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_matrix(x, "linear");
  const std::size_t m = x.rows(), kk = x.cols(), n = weight.cols();
  require(weight.rows() == kk, "linear: input width " + std::to_string(kk) + " vs weight " + shape_string(weight.shape()));
  require(bias.size() == n, "linear: bias length mismatch");
  std::vector<Scalar> out(m * n);
  for (std::size_t i = 0; i < m; ++i) std::copy(bias.data().begin(), bias.data().end(), out.begin() + i * n);
  k::gemm(false, false, m, n, kk, x.data(), weight.data(), out, true);
  return make_result({m, n}, std::move(out), {x, weight, bias}, [m, n, kk](TensorNode& self) {
    if (auto gx = parent_grad(self, 0); !gx.empty()) k::gemm(false, true, m, kk, n, self.grad, parent_data(self, 1), gx, true);
    if (auto gw = parent_grad(self, 1); !gw.empty()) k::gemm(true, false, kk, n, m, parent_data(self, 0), self.grad, gw, true);
    if (auto gb = parent_grad(self, 2); !gb.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[j] += self.grad[i * n + j];
  });
}

Tensor softmax_rows(const Tensor& x) {
  require_matrix(x, "softmax_rows");
  const std::size_t m = x.rows(), n = x.cols();
  std::vector<Scalar> out(m * n);
  k::softmax_rows(x.data(), out, m, n);
  return make_result(x.shape(), std::move(out), {x}, [m, n](TensorNode& self) {
    k::softmax_rows_backward(self.data, self.grad, parent_grad(self, 0), m, n);
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Scalar eps) {
  require_matrix(x, "layer_norm");
  const std::size_t m = x.rows(), n = x.cols();
  if (n < 2) throw DimensionError("layer_norm: rows need at least 2 entries");
  require(gain.size() == n && bias.size() == n, "layer_norm: gain/bias length mismatch");
  std::vector<Scalar> out(m * n);
  auto xhat = std::make_shared<std::vector<Scalar>>(m * n);
  auto rstd = std::make_shared<std::vector<Scalar>>(m);
  k::layer_norm(x.data(), gain.data(), bias.data(), eps, m, n, out, *xhat, *rstd);
  return make_result(x.shape(), std::move(out), {x, gain, bias}, [m, n, xhat, rstd](TensorNode& self) {
    k::layer_norm_backward(*xhat, *rstd, parent_data(self, 1), self.grad, m, n, parent_grad(self, 0),
                           parent_grad(self, 1), parent_grad(self, 2));
  });
}

Tensor logsumexp(const Tensor& x) {
  if (x.size() == 0) throw DimensionError("logsumexp of an empty tensor");
  const auto d = x.data();
  const Scalar mx = *std::max_element(d.begin(), d.end());
  Scalar s = 0;
  for (Scalar v : d) s += std::exp(v - mx);
  const Scalar result = mx + std::log(s);
  return make_result({1}, {result}, {x}, [result](TensorNode& self) {
    auto g = parent_grad(self, 0);
    const auto xd = parent_data(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * std::exp(xd[i] - result);
  });
}

Tensor sum(const Tensor& x) {
  Scalar s = 0;
  for (Scalar v : x.data()) s += v;
  return make_result({1}, {s}, {x}, [](TensorNode& self) {
    auto g = parent_grad(self, 0);
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor gather_rows(const Tensor& table, std::span<const std::int64_t> indices) {
  require_matrix(table, "gather_rows");
  const std::size_t rows = table.rows(), n = table.cols();
  std::vector<Scalar> out(indices.size() * n, 0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto idx = indices[i];
    if (idx < 0) continue;
    require(static_cast<std::size_t>(idx) < rows, "gather_rows: index " + std::to_string(idx) + " out of range");
    const auto src = table.data().subspan(static_cast<std::size_t>(idx) * n, n);
    std::copy(src.begin(), src.end(), out.begin() + i * n);
  }
  std::vector<std::int64_t> idx(indices.begin(), indices.end());
  return make_result({indices.size(), n}, std::move(out), {table}, [idx = std::move(idx), n](TensorNode& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0) continue;
      Scalar* dst = g.data() + static_cast<std::size_t>(idx[i]) * n;
      const Scalar* src = self.grad.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += src[j];
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require(p.rows() == m, "concat_cols: row counts differ");
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<Scalar> out(m * total);
  std::size_t col = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < m; ++i) std::copy_n(p.data().data() + i * w, w, out.data() + i * total + col);
    col += w;
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = {m, total};
  node->data = std::move(out);
  if (grad_enabled() && std::any_of(parts.begin(), parts.end(), [](const Tensor& t) { return t.requires_grad(); })) {
    node->requires_grad = true;
    for (const auto& p : parts) node->parents.push_back(p.node_ptr());
    node->backward_fn = [m, total, widths](TensorNode& self) {
      std::size_t offset = 0;
      for (std::size_t p = 0; p < widths.size(); ++p) {
        const std::size_t w = widths[p];
        if (auto g = parent_grad(self, p); !g.empty())
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < w; ++j) g[i * w + j] += self.grad[i * total + offset + j];
        offset += w;
      }
    };
  }
  return Tensor(std::move(node));
}

Tensor concat_rows(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const std::size_t n = parts[0].cols();
  std::vector<std::size_t> sizes;
  std::vector<Scalar> out;
  for (const auto& p : parts) {
    require(p.cols() == n, "concat_rows: column counts differ");
    sizes.push_back(p.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  const std::size_t m = out.size() / n;
  auto node = std::make_shared<TensorNode>();
  node->shape = {m, n};
  node->data = std::move(out);
  if (grad_enabled() && std::any_of(parts.begin(), parts.end(), [](const Tensor& t) { return t.requires_grad(); })) {
    node->requires_grad = true;
    for (const auto& p : parts) node->parents.push_back(p.node_ptr());
    node->backward_fn = [sizes](TensorNode& self) {
      std::size_t offset = 0;
      for (std::size_t p = 0; p < sizes.size(); ++p) {
        if (auto g = parent_grad(self, p); !g.empty())
          for (std::size_t i = 0; i < sizes[p]; ++i) g[i] += self.grad[offset + i];
        offset += sizes[p];
      }
    };
  }
  return Tensor(std::move(node));
}

Tensor dropout(const Tensor& x, Scalar rate, std::mt19937_64& rng) {
  if (rate <= 0) return x;
  if (rate >= 1) throw std::invalid_argument("dropout rate must be below 1");
  std::bernoulli_distribution keep(1 - rate);
  const Scalar factor = 1 / (1 - rate);
  auto mask = std::make_shared<std::vector<Scalar>>(x.size());
  for (auto& v : *mask) v = keep(rng) ? factor : 0;
  std::vector<Scalar> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * (*mask)[i];
  return make_result(x.shape(), std::move(out), {x}, [mask](TensorNode& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*mask)[i];
  });
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  require(q.cols() == k.cols(), "attention: query and key widths differ");
  require(k.rows() == v.rows(), "attention: key and value row counts differ");
  const Scalar factor = 1 / std::sqrt(static_cast<Scalar>(k.cols()));
  return matmul(softmax_rows(scale(matmul_nt(q, k), factor)), v);
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::span<const Segment> segments,
                            std::size_t heads, std::vector<Scalar>* probs) {
  require(q.shape() == k.shape() && k.shape() == v.shape(), "multi_head_attention: q/k/v shapes differ");
  const std::size_t dim = q.cols();
  require(heads > 0 && dim % heads == 0, "multi_head_attention: width not divisible by head count");
  std::vector<Segment> segs(segments.begin(), segments.end());
  for (const auto& s : segs) require(s.offset + s.length <= q.rows(), "multi_head_attention: segment out of range");
  auto weights = std::make_shared<std::vector<Scalar>>(kernels::attention_prob_offsets(segs, heads).back());
  std::vector<Scalar> out(q.size(), 0);
  k::attention(q.data(), k.data(), v.data(), segs, heads, dim, out, *weights);
  if (probs) *probs = *weights;
  return make_result(q.shape(), std::move(out), {q, k, v},
                     [segs = std::move(segs), heads, dim, weights](TensorNode& self) {
                       k::attention_backward(parent_data(self, 0), parent_data(self, 1), parent_data(self, 2),
                                             *weights, self.grad, segs, heads, dim, parent_grad(self, 0),
                                             parent_grad(self, 1), parent_grad(self, 2));
                     });
}

Tensor crf_nll(const Tensor& emissions, const Tensor& transitions, std::span<const Segment> segments,
               std::span<const int> gold) {
  require_matrix(emissions, "crf_nll");
  const std::size_t labels = emissions.cols();
  require(transitions.size() == labels * labels, "crf_nll: transition matrix must be labels x labels");
  require(gold.size() == emissions.rows(), "crf_nll: gold length " + std::to_string(gold.size()) +
                                               " != emission rows " + std::to_string(emissions.rows()));
  for (const auto& s : segments) {
    require(s.length > 0, "crf_nll: empty sequence");
    require(s.offset + s.length <= emissions.rows(), "crf_nll: segment out of range");
  }
  for (int y : gold) require(y >= 0 && static_cast<std::size_t>(y) < labels, "crf_nll: gold label out of range");

  std::vector<Scalar> nll(segments.size());
  auto d_em = std::make_shared<std::vector<Scalar>>(emissions.size(), 0);
  std::vector<Scalar> d_tr_seg(segments.size() * labels * labels);
  k::crf_nll(emissions.data(), transitions.data(), segments, gold, labels, nll, *d_em, d_tr_seg);
  auto d_tr = std::make_shared<std::vector<Scalar>>(labels * labels, 0);
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (std::size_t i = 0; i < labels * labels; ++i) (*d_tr)[i] += d_tr_seg[s * labels * labels + i];
  Scalar total = 0;
  for (Scalar v : nll) total += v;
  return make_result({1}, {total}, {emissions, transitions}, [d_em, d_tr](TensorNode& self) {
    const Scalar g0 = self.grad[0];
    if (auto ge = parent_grad(self, 0); !ge.empty())
      for (std::size_t i = 0; i < ge.size(); ++i) ge[i] += g0 * (*d_em)[i];
    if (auto gt = parent_grad(self, 1); !gt.empty())
      for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += g0 * (*d_tr)[i];
  });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_matrix(logits, "softmax_cross_entropy");
  const std::size_t m = logits.rows(), n = logits.cols();
  require(labels.size() == m, "softmax_cross_entropy: label count mismatch");
  auto probs = std::make_shared<std::vector<Scalar>>(m * n);
  k::softmax_rows(logits.data(), *probs, m, n);
  Scalar total = 0;
  std::vector<int> y(labels.begin(), labels.end());
  for (std::size_t i = 0; i < m; ++i) {
    require(y[i] >= 0 && static_cast<std::size_t>(y[i]) < n, "softmax_cross_entropy: label out of range");
    const auto row = logits.data().subspan(i * n, n);
    const Scalar mx = *std::max_element(row.begin(), row.end());
    Scalar s = 0;
    for (Scalar v : row) s += std::exp(v - mx);
    total += mx + std::log(s) - row[static_cast<std::size_t>(y[i])];
  }
  return make_result({1}, {total}, {logits}, [probs, y = std::move(y), n](TensorNode& self) {
    auto g = parent_grad(self, 0);
    const Scalar g0 = self.grad[0];
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = 0; j < n; ++j)
        g[i * n + j] += g0 * ((*probs)[i * n + j] - (static_cast<int>(j) == y[i] ? 1 : 0));
  });
}

}  // namespace mccws::ops
