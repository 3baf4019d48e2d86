#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mccws/corpus/corpus.hpp"
#include "mccws/model/layers.hpp"
#include "support.hpp"

using namespace mccws;
using oracle::random_tensor;

namespace {

const std::vector<std::string> kSentence = {"天", "气", "好"};

Vocab small_vocab() {
  Corpus a{"a", "x", {make_sentence({"天气", "好"})}};
  Corpus b{"b", "y", {make_sentence({"天", "气", "好"})}};
  return build_vocab({a, b});
}

ModelConfig small_config() {
  ModelConfig c;
  c.embed_dim = 3;
  c.d_model = 4;
  c.num_layers = 1;
  c.num_heads = 2;
  c.d_ff = 6;
  c.dropout = 0;
  return c;
}

EmbeddingParams random_embedding(const Vocab& v, const ModelConfig& c, std::mt19937_64& rng) {
  return {random_tensor({v.unigrams.size(), c.embed_dim}, rng), random_tensor({v.bigrams.size(), c.embed_dim}, rng),
          random_tensor({2, c.d_model}, rng), random_tensor({3 * c.embed_dim, c.d_model}, rng),
          random_tensor({c.d_model}, rng)};
}

EmbeddingParams zero_embedding(const Vocab& v, const ModelConfig& c) {
  return {Tensor::zeros({v.unigrams.size(), c.embed_dim}), Tensor::zeros({v.bigrams.size(), c.embed_dim}),
          Tensor::zeros({2, c.d_model}), Tensor::zeros({3 * c.embed_dim, c.d_model}), Tensor::zeros({c.d_model})};
}

EncoderLayerParams random_layer(const ModelConfig& c, std::mt19937_64& rng) {
  const std::size_t d = c.d_model, f = c.d_ff;
  return {random_tensor({d, d}, rng), random_tensor({d, d}, rng),  random_tensor({d, d}, rng),
          random_tensor({d, d}, rng), random_tensor({d}, rng, 0.5, 1.5), random_tensor({d}, rng),
          random_tensor({d, f}, rng), random_tensor({f}, rng),     random_tensor({f, d}, rng),
          random_tensor({d}, rng),    random_tensor({d}, rng, 0.5, 1.5), random_tensor({d}, rng)};
}

std::vector<Scalar> row_of(const Tensor& t, std::size_t r) {
  return {t.data().begin() + static_cast<std::ptrdiff_t>(r * t.cols()),
          t.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * t.cols())};
}

void expect_close(const Tensor& a, const Tensor& b, double tol) {
  ASSERT_EQ(a.shape(), b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], tol) << "entry " << i;
}

Tensor unit_layer_norm(const Tensor& x) {
  const std::size_t d = x.cols();
  return ops::layer_norm(x, Tensor::full({d}, 1), Tensor::zeros({d}), 1e-6);
}

Tensor permute_rows(const Tensor& x, const std::vector<std::int64_t>& perm) { return ops::gather_rows(x, perm); }

}  // namespace

// ---------------------------------------------------------------- embedding

TEST(PositionalEncoding, ClosedForm) {
  const auto p0 = positional_encoding(0, 8);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(p0[i], i % 2 == 0 ? 0.0 : 1.0);
  const auto p1 = positional_encoding(1, 256);
  EXPECT_NEAR(p1[0], 0.841471, 1e-6);
  EXPECT_NEAR(p1[1], std::cos(1.0), 1e-15);
  EXPECT_NEAR(p1[2], std::sin(1.0 / std::pow(10000.0, 2.0 / 256)), 1e-15);
  EXPECT_EQ(positional_encoding(3, 5).size(), 5u);
}

TEST(PositionalEncoding, BoundedAndDistinct) {
  std::vector<std::vector<Scalar>> rows;
  for (std::size_t t = 0; t < 300; ++t) {
    rows.push_back(positional_encoding(t, 16));
    for (Scalar v : rows.back()) {
      EXPECT_LE(v, 1.0);
      EXPECT_GE(v, -1.0);
    }
  }
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) EXPECT_NE(rows[a], rows[b]);
}

TEST(FuseCharacter, ZeroTablesGiveZeroVector) {
  const Vocab v = small_vocab();
  const auto c = small_config();
  const Tensor e = fuse_character(zero_embedding(v, c), v, kSentence, 1, true);
  EXPECT_EQ(e.size(), c.d_model);
  for (Scalar x : e.data()) EXPECT_EQ(x, 0.0);
}

TEST(FuseCharacter, MatchesAffineOracleWithPadding) {
  const Vocab v = small_vocab();
  const auto c = small_config();
  std::mt19937_64 rng(3);
  const auto p = random_embedding(v, c, rng);
  const std::size_t d = c.embed_dim;
  auto oracle = [&](std::size_t t, bool bigram) {
    std::vector<Scalar> x(3 * d, 0.0);
    const auto uni = row_of(p.unigram_table, static_cast<std::size_t>(v.unigrams.index(kSentence[t])));
    std::copy(uni.begin(), uni.end(), x.begin());
    if (bigram) {
      const std::string left = t == 0 ? "<BOS>" : kSentence[t - 1];
      const std::string right = t + 1 == kSentence.size() ? "<EOS>" : kSentence[t + 1];
      const auto l = row_of(p.bigram_table, static_cast<std::size_t>(v.bigrams.index(bigram_symbol(left, kSentence[t]))));
      const auto r = row_of(p.bigram_table, static_cast<std::size_t>(v.bigrams.index(bigram_symbol(kSentence[t], right))));
      std::copy(l.begin(), l.end(), x.begin() + static_cast<std::ptrdiff_t>(d));
      std::copy(r.begin(), r.end(), x.begin() + static_cast<std::ptrdiff_t>(2 * d));
    }
    std::vector<Scalar> out(c.d_model);
    for (std::size_t j = 0; j < c.d_model; ++j) {
      out[j] = p.fusion_bias.data()[j];
      for (std::size_t i = 0; i < 3 * d; ++i) out[j] += x[i] * p.fusion_weight.at(i, j);
    }
    return out;
  };
  for (bool bigram : {true, false}) {
    for (std::size_t t = 0; t < kSentence.size(); ++t) {
      const Tensor e = fuse_character(p, v, kSentence, t, bigram);
      const auto want = oracle(t, bigram);
      for (std::size_t j = 0; j < c.d_model; ++j) EXPECT_NEAR(e.data()[j], want[j], 1e-12);
    }
  }
  EXPECT_THROW(fuse_character(p, v, kSentence, 3, true), std::out_of_range);
}

TEST(FuseCharacter, UnknownCharactersUseUnkRow) {
  const Vocab v = small_vocab();
  const auto c = small_config();
  std::mt19937_64 rng(4);
  const auto p = random_embedding(v, c, rng);
  const Tensor a = fuse_character(p, v, {"雨"}, 0, false);
  const Tensor b = fuse_character(p, v, {"雪"}, 0, false);
  expect_close(a, b, 0);
}

TEST(BuildInput, ShapeAndCriterionRow) {
  const Vocab v = small_vocab();
  const auto c = small_config();
  std::mt19937_64 rng(5);
  const auto p = random_embedding(v, c, rng);
  const Tensor h0 = build_input(p, v, c, kSentence, 0);
  const Tensor h1 = build_input(p, v, c, kSentence, 1);
  EXPECT_EQ(h0.shape(), (Shape{4, c.d_model}));
  for (std::size_t j = 0; j < c.d_model; ++j) {
    EXPECT_NEAR(h0.at(0, j), p.criterion_table.at(0, j) + positional_encoding(0, c.d_model)[j], 1e-15);
    EXPECT_NE(h0.at(0, j), h1.at(0, j));
  }
  for (std::size_t t = 1; t < 4; ++t)
    for (std::size_t j = 0; j < c.d_model; ++j) EXPECT_EQ(h0.at(t, j), h1.at(t, j));
  EXPECT_THROW(build_input(p, v, c, kSentence, 2), std::out_of_range);
}

TEST(BuildInput, ZeroEmbeddingsGivePositionEncodings) {
  const Vocab v = small_vocab();
  const auto c = small_config();
  const Tensor h = build_input(zero_embedding(v, c), v, c, kSentence, 1);
  for (std::size_t t = 0; t < 4; ++t) {
    const auto pe = positional_encoding(t, c.d_model);
    for (std::size_t j = 0; j < c.d_model; ++j) EXPECT_NEAR(h.at(t, j), pe[j], 1e-15);
  }
}

TEST(BuildInput, DropoutOnlyWhenActive) {
  const Vocab v = small_vocab();
  const auto c = small_config();
  std::mt19937_64 rng(6);
  const auto p = random_embedding(v, c, rng);
  const Batch batch = make_unlabeled_batch(v, {kSentence}, 0);
  const auto layout = pack_layout(batch);
  const Tensor plain = build_inputs(p, batch, layout, c, {});
  std::mt19937_64 mask_rng(1);
  const Tensor dropped = build_inputs(p, batch, layout, c, {0.5, &mask_rng});
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    if (dropped.data()[i] == 0) ++zeros;
    else EXPECT_NEAR(dropped.data()[i], 2 * plain.data()[i], 1e-12);
  }
  EXPECT_GT(zeros, 0u);
  expect_close(build_inputs(p, batch, layout, c, {0.5, nullptr}), plain, 0);
}

// ------------------------------------------------------------------ encoder

TEST(ScaledDotAttention, IdenticalKeysAverageValues) {
  std::mt19937_64 rng(7);
  const Tensor q = random_tensor({4, 2}, rng, -1, 1, false);
  const Tensor k = Tensor::from({4, 2}, {0.3, -0.2, 0.3, -0.2, 0.3, -0.2, 0.3, -0.2});
  const Tensor val = random_tensor({4, 3}, rng, -1, 1, false);
  const Tensor out = ops::scaled_dot_attention(q, k, val);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t j = 0; j < 3; ++j) {
      double mean = 0;
      for (std::size_t i = 0; i < 4; ++i) mean += val.at(i, j) / 4;
      EXPECT_NEAR(out.at(r, j), mean, 1e-12);
    }
}

TEST(ScaledDotAttention, SaturatesOnDominantKey) {
  const Tensor q = Tensor::from({1, 2}, {1, 0});
  const Tensor k = Tensor::from({3, 2}, {0, 0, 100, 0, 0, 1});
  const Tensor val = Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6});
  const Tensor out = ops::scaled_dot_attention(q, k, val);
  EXPECT_NEAR(out.at(0, 0), 3, 1e-9);
  EXPECT_NEAR(out.at(0, 1), 4, 1e-9);
  EXPECT_THROW(ops::scaled_dot_attention(q, Tensor::zeros({3, 3}), val), DimensionError);
  EXPECT_THROW(ops::scaled_dot_attention(q, k, Tensor::zeros({2, 2})), DimensionError);
}

TEST(ScaledDotAttention, MatchesNaiveLoops) {
  std::mt19937_64 rng(8);
  const Tensor q = random_tensor({4, 2}, rng, -2, 2, false), k = random_tensor({4, 2}, rng, -2, 2, false);
  const Tensor val = random_tensor({4, 2}, rng, -2, 2, false);
  const Tensor out = ops::scaled_dot_attention(q, k, val);
  for (std::size_t i = 0; i < 4; ++i) {
    double w[4], total = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0;
      for (std::size_t c = 0; c < 2; ++c) s += q.at(i, c) * k.at(j, c);
      w[j] = std::exp(s / std::sqrt(2.0));
      total += w[j];
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double o = 0;
      for (std::size_t j = 0; j < 4; ++j) o += w[j] / total * val.at(j, c);
      EXPECT_NEAR(out.at(i, c), o, 1e-10);
    }
  }
}

TEST(MultiHead, ZeroOutputProjectionLeavesNormalizedInput) {
  auto c = small_config();
  std::mt19937_64 rng(9);
  auto layer = random_layer(c, rng);
  layer.output = Tensor::zeros({c.d_model, c.d_model});
  layer.norm1_gain = Tensor::full({c.d_model}, 1);
  layer.norm1_bias = Tensor::zeros({c.d_model});
  const Tensor h = random_tensor({4, c.d_model}, rng, -1, 1, false);
  const Segment seg[] = {{0, 4}};
  const Tensor z = multi_head(h, seg, layer, c, {});
  EXPECT_EQ(z.shape(), h.shape());
  expect_close(z, unit_layer_norm(h), 1e-12);
}

TEST(MultiHead, SingleHeadIsPlainAttentionPlusProjection) {
  auto c = small_config();
  c.num_heads = 1;
  std::mt19937_64 rng(10);
  const auto layer = random_layer(c, rng);
  const Tensor h = random_tensor({5, c.d_model}, rng, -1, 1, false);
  const Segment seg[] = {{0, 5}};
  const Tensor attn = ops::scaled_dot_attention(ops::matmul(h, layer.query), ops::matmul(h, layer.key),
                                                ops::matmul(h, layer.value));
  const Tensor want = ops::layer_norm(ops::add(h, ops::matmul(attn, layer.output)), layer.norm1_gain,
                                      layer.norm1_bias, c.layer_norm_eps);
  expect_close(multi_head(h, seg, layer, c, {}), want, 1e-12);
}

TEST(MultiHead, AttentionRowsAreStochastic) {
  const auto c = small_config();
  std::mt19937_64 rng(11);
  const auto layer = random_layer(c, rng);
  const Tensor h = random_tensor({7, c.d_model}, rng, -3, 3, false);
  const Segment segs[] = {{0, 3}, {3, 4}};
  std::vector<Scalar> probs;
  multi_head(h, segs, layer, c, {}, &probs);
  const auto offsets = kernels::attention_prob_offsets(segs, c.num_heads);
  for (std::size_t h_ = 0; h_ < c.num_heads; ++h_) {
    for (std::size_t s = 0; s < 2; ++s) {
      const std::size_t n = segs[s].length;
      const std::size_t base = offsets[s * c.num_heads + h_];
      for (std::size_t i = 0; i < n; ++i) {
        double total = 0;
        for (std::size_t j = 0; j < n; ++j) total += probs[base + i * n + j];
        EXPECT_NEAR(total, 1.0, 1e-6);
      }
    }
  }
}

TEST(EncoderLayer, ZeroFeedForwardLeavesNormalizedZ) {
  const auto c = small_config();
  std::mt19937_64 rng(12);
  auto layer = random_layer(c, rng);
  layer.ffn_outer_weight = Tensor::zeros({c.d_ff, c.d_model});
  layer.ffn_outer_bias = Tensor::zeros({c.d_model});
  layer.norm2_gain = Tensor::full({c.d_model}, 1);
  layer.norm2_bias = Tensor::zeros({c.d_model});
  const Tensor h = random_tensor({4, c.d_model}, rng, -1, 1, false);
  const Segment seg[] = {{0, 4}};
  expect_close(encoder_layer(h, seg, layer, c, {}), unit_layer_norm(multi_head(h, seg, layer, c, {})), 1e-12);
}

TEST(EncoderLayer, FeedForwardIsPositionWise) {
  const auto c = small_config();
  std::mt19937_64 rng(13);
  const auto layer = random_layer(c, rng);
  const Tensor z = random_tensor({5, c.d_model}, rng, -1, 1, false);
  auto ffn = [&](const Tensor& x) {
    return ops::linear(ops::relu(ops::linear(x, layer.ffn_inner_weight, layer.ffn_inner_bias)), layer.ffn_outer_weight,
                       layer.ffn_outer_bias);
  };
  const std::vector<std::int64_t> perm = {3, 0, 4, 1, 2};
  expect_close(ffn(permute_rows(z, perm)), permute_rows(ffn(z), perm), 1e-14);
}

TEST(EncoderLayer, FiniteOnLargeInputs) {
  const auto c = small_config();
  std::mt19937_64 rng(14);
  const auto layer = random_layer(c, rng);
  const Tensor h = random_tensor({6, c.d_model}, rng, -10, 10, false);
  const Segment seg[] = {{0, 6}};
  const Tensor out = encoder_layer(h, seg, layer, c, {});
  EXPECT_EQ(out.shape(), h.shape());
  for (Scalar x : out.data()) EXPECT_TRUE(std::isfinite(x));
}

TEST(Encode, NoLayersIsIdentity) {
  const auto c = small_config();
  std::mt19937_64 rng(15);
  const Tensor h = random_tensor({4, c.d_model}, rng, -1, 1, false);
  const Segment seg[] = {{0, 4}};
  expect_close(encode(h, seg, {}, c, {}), h, 0);
}

TEST(Encode, PermutationEquivariantWithoutPositions) {
  auto c = small_config();
  c.num_layers = 2;
  c.use_position = false;
  std::mt19937_64 rng(16);
  const std::vector<EncoderLayerParams> layers = {random_layer(c, rng), random_layer(c, rng)};
  const Vocab v = small_vocab();
  const auto p = random_embedding(v, c, rng);
  const Tensor h = build_input(p, v, c, {"天", "气", "好", "天"}, 0);
  const Segment seg[] = {{0, 5}};
  const std::vector<std::int64_t> perm = {0, 3, 1, 4, 2};
  expect_close(encode(permute_rows(h, perm), seg, layers, c, {}), permute_rows(encode(h, seg, layers, c, {}), perm),
               1e-12);
}

TEST(Encode, CriterionChangesEveryCharacterRow) {
  const auto c = small_config();
  std::mt19937_64 rng(17);
  const std::vector<EncoderLayerParams> layers = {random_layer(c, rng)};
  const Vocab v = small_vocab();
  const auto p = random_embedding(v, c, rng);
  const Segment seg[] = {{0, 4}};
  const Tensor a = encode(build_input(p, v, c, kSentence, 0), seg, layers, c, {});
  const Tensor b = encode(build_input(p, v, c, kSentence, 1), seg, layers, c, {});
  for (std::size_t t = 1; t < 4; ++t) EXPECT_NE(row_of(a, t), row_of(b, t));
}

TEST(Encode, PackedBatchMatchesSentencesAlone) {
  const auto c = small_config();
  std::mt19937_64 rng(18);
  const std::vector<EncoderLayerParams> layers = {random_layer(c, rng)};
  const Vocab v = small_vocab();
  const auto p = random_embedding(v, c, rng);
  const std::vector<std::vector<std::string>> rows = {{"天", "气"}, {"好", "天", "气", "好"}};
  Batch batch = make_unlabeled_batch(v, rows, 0);
  batch.criteria[1] = 1;
  const auto layout = pack_layout(batch);
  const Tensor packed = encode(build_inputs(p, batch, layout, c, {}), layout.encoder_segments, layers, c, {});
  std::size_t offset = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor h = build_input(p, v, c, rows[i], i);
    const Segment seg[] = {{0, h.rows()}};
    const Tensor alone = encode(h, seg, layers, c, {});
    for (std::size_t r = 0; r < alone.rows(); ++r)
      for (std::size_t j = 0; j < c.d_model; ++j) EXPECT_NEAR(packed.at(offset + r, j), alone.at(r, j), 1e-12);
    offset += alone.rows();
  }
}

// ------------------------------------------------------------------ decoder

namespace {

CrfParams zero_crf(std::size_t d) {
  return {Tensor::zeros({d, kNumLabels}), Tensor::zeros({kNumLabels}), Tensor::zeros({kNumLabels, kNumLabels})};
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

std::vector<int> ints(const std::vector<Label>& labels) {
  std::vector<int> out;
  for (Label l : labels) out.push_back(static_cast<int>(l));
  return out;
}

}  // namespace

TEST(EmissionScores, ZeroAndAffineOracle) {
  std::mt19937_64 rng(19);
  const Tensor enc = random_tensor({5, 6}, rng, -1, 1, false);
  const Tensor zero = emission_scores(enc, zero_crf(6));
  EXPECT_EQ(zero.shape(), (Shape{5, kNumLabels}));
  for (Scalar x : zero.data()) EXPECT_EQ(x, 0.0);
  const CrfParams p{random_tensor({6, 4}, rng), random_tensor({4}, rng), random_tensor({4, 4}, rng)};
  const Tensor em = emission_scores(enc, p);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t y = 0; y < 4; ++y) {
      double s = p.emission_bias.data()[y];
      for (std::size_t i = 0; i < 6; ++i) s += enc.at(t, i) * p.emission_weight.at(i, y);
      EXPECT_NEAR(em.at(t, y), s, 1e-12);
    }
}

TEST(CrfLogPartition, SmallCases) {
  EXPECT_NEAR(crf_log_partition(Tensor::zeros({1, 4}), Tensor::zeros({4, 4})), std::log(4.0), 1e-12);
  EXPECT_NEAR(crf_log_partition(Tensor::zeros({2, 4}), Tensor::zeros({4, 4})), std::log(16.0), 1e-12);
  EXPECT_THROW(crf_log_partition(Tensor::zeros({0, 4}), Tensor::zeros({4, 4})), DimensionError);
}

TEST(CrfLogPartition, MatchesEnumerationAndNormalizes) {
  std::mt19937_64 rng(20);
  for (std::size_t T = 1; T <= 6; ++T) {
    for (int trial = 0; trial < 3; ++trial) {
      const Tensor em = random_tensor({T, 4}, rng, -3, 3, false), tr = random_tensor({4, 4}, rng, -3, 3, false);
      const double z = crf_log_partition(em, tr);
      EXPECT_NEAR(z, oracle::brute_log_partition(values(em), values(tr), T, 4), 1e-6);
      double total = 0;
      oracle::for_each_sequence(T, 4, [&](const std::vector<int>& y) {
        total += std::exp(oracle::sequence_score(values(em), values(tr), 4, y) - z);
      });
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(CrfNll, Examples) {
  const std::vector<Label> one = {Label::S};
  EXPECT_NEAR(crf_nll(Tensor::zeros({1, 4}), Tensor::zeros({4, 4}), one).item(), std::log(4.0), 1e-12);
  const std::vector<Label> gold = {Label::B, Label::E, Label::S};
  Tensor em = Tensor::zeros({3, 4});
  for (std::size_t t = 0; t < 3; ++t) em.at(t, static_cast<std::size_t>(gold[t])) = 60;
  EXPECT_LT(crf_nll(em, Tensor::zeros({4, 4}), gold).item(), 1e-20);
  EXPECT_THROW(crf_nll(em, Tensor::zeros({4, 4}), one), DimensionError);
}

TEST(CrfNll, NonNegativeAndDifferentiable) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> label(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t T = 1 + static_cast<std::size_t>(trial % 6);
    Tensor em = random_tensor({T, 4}, rng, -4, 4), tr = random_tensor({4, 4}, rng, -4, 4);
    std::vector<Label> gold;
    for (std::size_t t = 0; t < T; ++t) gold.push_back(static_cast<Label>(label(rng)));
    EXPECT_GE(crf_nll(em, tr, gold).item(), 0.0);
    if (trial < 6) {
      EXPECT_LT(oracle::gradcheck([&] { return crf_nll(em, tr, gold); }, {em, tr}), 1e-6);
    }
  }
}

TEST(Viterbi, Examples) {
  Tensor em = Tensor::zeros({4, 4});
  for (std::size_t t = 0; t < 4; ++t) em.at(t, 3) = 10;
  EXPECT_EQ(labels_to_string(viterbi_decode(em, Tensor::zeros({4, 4}))), "SSSS");
  EXPECT_EQ(labels_to_string(viterbi_decode(Tensor::zeros({5, 4}), Tensor::zeros({4, 4}))), "BBBBB");
  EXPECT_TRUE(viterbi_decode(Tensor::zeros({0, 4}), Tensor::zeros({4, 4})).empty());
}

TEST(Viterbi, MatchesEnumeration) {
  std::mt19937_64 rng(22);
  for (std::size_t T = 1; T <= 6; ++T) {
    for (int trial = 0; trial < 5; ++trial) {
      const Tensor em = random_tensor({T, 4}, rng, -2, 2, false), tr = random_tensor({4, 4}, rng, -2, 2, false);
      EXPECT_EQ(ints(viterbi_decode(em, tr)), oracle::brute_argmax(values(em), values(tr), T, 4));
    }
  }
}

TEST(Viterbi, ZeroTransitionsGivePerPositionArgmax) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor em = random_tensor({7, 4}, rng, -2, 2, false);
    EXPECT_EQ(viterbi_decode(em, Tensor::zeros({4, 4})), mlp_decode(em));
  }
}

TEST(Crf, ShiftInvariance) {
  std::mt19937_64 rng(24);
  const Tensor em = random_tensor({5, 4}, rng, -2, 2, false), tr = random_tensor({4, 4}, rng, -2, 2, false);
  Tensor shifted = em.clone();
  for (std::size_t y = 0; y < 4; ++y) shifted.at(2, y) += 3.25;
  EXPECT_EQ(viterbi_decode(em, tr), viterbi_decode(shifted, tr));
  const std::vector<Label> gold = {Label::B, Label::M, Label::E, Label::S, Label::S};
  EXPECT_NEAR(crf_nll(em, tr, gold).item(), crf_nll(shifted, tr, gold).item(), 1e-12);
}

TEST(MlpDecoder, UniformLogitsGiveAllB) {
  EXPECT_EQ(labels_to_string(mlp_decode(Tensor::zeros({3, 4}))), "BBB");
  std::mt19937_64 rng(25);
  const MlpParams p{random_tensor({6, 6}, rng), random_tensor({6}, rng), random_tensor({6, 4}, rng),
                    random_tensor({4}, rng)};
  const Tensor logits = mlp_logits(random_tensor({5, 6}, rng, -1, 1, false), p);
  EXPECT_EQ(mlp_decode(logits).size(), 5u);
  const Tensor probs = ops::softmax_rows(logits);
  for (std::size_t t = 0; t < 5; ++t) {
    double total = 0;
    for (std::size_t y = 0; y < 4; ++y) total += probs.at(t, y);
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}
