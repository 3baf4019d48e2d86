#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mccws/numeric/tensor.hpp"

namespace mccws::oracle {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1, double hi = 1, bool grad = true) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<Scalar> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

// |a - n| / max(|a|, |n|, floor). The floor keeps rounding noise on
// near-zero gradients (about 1e-10 absolute with h = 1e-5) from dominating.
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Largest relative error between backward() gradients of `loss` and central
// differences, over every entry of every tensor in `inputs`.
inline double gradcheck(const std::function<Tensor()>& loss, std::vector<Tensor> inputs, double h = 1e-5,
                        double floor = 1e-3) {
  for (auto& t : inputs) t.zero_grad();
  backward(loss());
  double worst = 0;
  for (auto& t : inputs) {
    const std::vector<Scalar> analytic(t.grad().begin(), t.grad().end());
    auto data = t.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Scalar saved = data[i];
      Scalar plus, minus;
      {
        NoGradGuard guard;
        data[i] = saved + h;
        plus = loss().item();
        data[i] = saved - h;
        minus = loss().item();
      }
      data[i] = saved;
      worst = std::max(worst, relative_error(analytic[i], (plus - minus) / (2 * h), floor));
    }
  }
  return worst;
}

// Score of a label sequence under a linear-chain CRF (row-major T x L emissions, L x L transitions).
inline double sequence_score(const std::vector<double>& em, const std::vector<double>& tr, std::size_t labels,
                             const std::vector<int>& y) {
  double s = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    s += em[t * labels + static_cast<std::size_t>(y[t])];
    if (t > 0) s += tr[static_cast<std::size_t>(y[t - 1]) * labels + static_cast<std::size_t>(y[t])];
  }
  return s;
}

// Calls f on every sequence in lexicographic order.
inline void for_each_sequence(std::size_t length, std::size_t labels, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> y(length, 0);
  while (true) {
    f(y);
    std::size_t p = length;
    while (p > 0 && static_cast<std::size_t>(++y[p - 1]) == labels) y[--p] = 0;
    if (p == 0) return;
  }
}

inline double brute_log_partition(const std::vector<double>& em, const std::vector<double>& tr, std::size_t length,
                                  std::size_t labels) {
  std::vector<double> scores;
  for_each_sequence(length, labels, [&](const std::vector<int>& y) { scores.push_back(sequence_score(em, tr, labels, y)); });
  const double m = *std::max_element(scores.begin(), scores.end());
  double s = 0;
  for (double x : scores) s += std::exp(x - m);
  return m + std::log(s);
}

// First maximal sequence in lexicographic order.
inline std::vector<int> brute_argmax(const std::vector<double>& em, const std::vector<double>& tr, std::size_t length,
                                     std::size_t labels) {
  std::vector<int> best;
  double best_score = -INFINITY;
  for_each_sequence(length, labels, [&](const std::vector<int>& y) {
    const double s = sequence_score(em, tr, labels, y);
    if (s > best_score) {
      best_score = s;
      best = y;
    }
  });
  return best;
}

}  // namespace mccws::oracle
