#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "mccws/numeric/kernels.hpp"

using namespace mccws;
using kernels::Segment;

namespace {

std::vector<Scalar> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> d(-1, 1);
  std::vector<Scalar> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// A batch of 64 sentences of 20-40 characters, packed.
std::vector<Segment> packed_batch(std::size_t extra = 1) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> len(20, 40);
  std::vector<Segment> segs;
  std::size_t offset = 0;
  for (int i = 0; i < 64; ++i) {
    const std::size_t n = len(rng) + extra;
    segs.push_back({offset, n});
    offset += n;
  }
  return segs;
}

std::size_t rows_of(const std::vector<Segment>& segs) { return segs.back().offset + segs.back().length; }

template <bool Omp>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 2000;
  const auto a = random_values(m * n, 1), b = random_values(n * n, 2);
  std::vector<Scalar> c(m * n);
  for (auto _ : state) {
    if constexpr (Omp) kernels::omp::gemm(false, false, m, n, n, a, b, c, false);
    else kernels::serial::gemm(false, false, m, n, n, a, b, c, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n * n));
}

template <bool Omp>
void BM_Attention(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto segs = packed_batch();
  const std::size_t rows = rows_of(segs);
  const auto q = random_values(rows * dim, 3), k = random_values(rows * dim, 4), v = random_values(rows * dim, 5);
  std::vector<Scalar> out(rows * dim), probs(kernels::attention_prob_offsets(segs, 4).back());
  for (auto _ : state) {
    if constexpr (Omp) kernels::omp::attention(q, k, v, segs, 4, dim, out, probs);
    else kernels::serial::attention(q, k, v, segs, 4, dim, out, probs);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Omp>
void BM_LayerNorm(benchmark::State& state) {
  const auto cols = static_cast<std::size_t>(state.range(0));
  const std::size_t rows = 2000;
  const auto x = random_values(rows * cols, 6), gain = random_values(cols, 7), bias = random_values(cols, 8);
  std::vector<Scalar> y(rows * cols), xhat(rows * cols), rstd(rows);
  for (auto _ : state) {
    if constexpr (Omp) kernels::omp::layer_norm(x, gain, bias, 1e-6, rows, cols, y, xhat, rstd);
    else kernels::serial::layer_norm(x, gain, bias, 1e-6, rows, cols, y, xhat, rstd);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Omp>
void BM_CrfNll(benchmark::State& state) {
  const auto segs = packed_batch(0);
  const std::size_t rows = rows_of(segs);
  const auto em = random_values(rows * 4, 9), tr = random_values(16, 10);
  std::vector<int> gold(rows, 3);
  std::vector<Scalar> nll(segs.size()), dem(rows * 4), dtr(segs.size() * 16);
  for (auto _ : state) {
    if constexpr (Omp) kernels::omp::crf_nll(em, tr, segs, gold, 4, nll, dem, dtr);
    else kernels::serial::crf_nll(em, tr, segs, gold, 4, nll, dem, dtr);
    benchmark::DoNotOptimize(nll.data());
  }
}

template <bool Omp>
void BM_Viterbi(benchmark::State& state) {
  const auto segs = packed_batch(0);
  const std::size_t rows = rows_of(segs);
  const auto em = random_values(rows * 4, 11), tr = random_values(16, 12);
  std::vector<int> out(rows);
  for (auto _ : state) {
    if constexpr (Omp) kernels::omp::viterbi(em, tr, segs, 4, out);
    else kernels::serial::viterbi(em, tr, segs, 4, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_Attention<false>)->Name("attention/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Attention<true>)->Name("attention/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_LayerNorm<false>)->Name("layer_norm/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_LayerNorm<true>)->Name("layer_norm/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_CrfNll<false>)->Name("crf_nll/serial");
BENCHMARK(BM_CrfNll<true>)->Name("crf_nll/omp");
BENCHMARK(BM_Viterbi<false>)->Name("viterbi/serial");
BENCHMARK(BM_Viterbi<true>)->Name("viterbi/omp");

BENCHMARK_MAIN();
