#include "mccws/model/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace mccws {

std::string to_string(DecoderKind kind) { return kind == DecoderKind::crf ? "crf" : "mlp"; }

DecoderKind decoder_kind_from_string(const std::string& name) {
  if (name == "crf") return DecoderKind::crf;
  if (name == "mlp") return DecoderKind::mlp;
  throw std::invalid_argument("unknown decoder '" + name + "' (expected crf or mlp)");
}

void ModelConfig::validate() const {
  if (embed_dim == 0) throw std::invalid_argument("embed_dim must be positive");
  if (d_model < 2) throw std::invalid_argument("d_model must be at least 2");
  if (num_heads == 0 || d_model % num_heads != 0) throw std::invalid_argument("d_model must be divisible by num_heads");
  if (d_ff == 0) throw std::invalid_argument("d_ff must be positive");
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("dropout must lie in [0, 1)");
}

// ---------------------------------------------------------------- embedding

std::vector<Scalar> positional_encoding(std::size_t position, std::size_t d_model) {
  std::vector<Scalar> pe(d_model);
  const auto t = static_cast<Scalar>(position);
  for (std::size_t i = 0; 2 * i < d_model; ++i) {
    const Scalar angle = t / std::pow(Scalar{10000}, static_cast<Scalar>(2 * i) / static_cast<Scalar>(d_model));
    pe[2 * i] = std::sin(angle);
    if (2 * i + 1 < d_model) pe[2 * i + 1] = std::cos(angle);
  }
  return pe;
}

Tensor fuse_characters(const EmbeddingParams& params, const Batch& batch, const PackedLayout& layout,
                       bool use_bigram) {
  std::vector<std::int64_t> uni, left, right;
  uni.reserve(layout.char_count);
  left.reserve(layout.char_count);
  right.reserve(layout.char_count);
  for (std::size_t i = 0; i < batch.size; ++i) {
    for (std::size_t t = 0; t < batch.lengths[i]; ++t) {
      uni.push_back(batch.unigrams[i * batch.max_len + t]);
      left.push_back(use_bigram ? batch.bigrams[i * (batch.max_len + 1) + t] : -1);
      right.push_back(use_bigram ? batch.bigrams[i * (batch.max_len + 1) + t + 1] : -1);
    }
  }
  const Tensor parts[] = {ops::gather_rows(params.unigram_table, uni), ops::gather_rows(params.bigram_table, left),
                          ops::gather_rows(params.bigram_table, right)};
  return ops::linear(ops::concat_cols(parts), params.fusion_weight, params.fusion_bias);
}

Tensor fuse_character(const EmbeddingParams& params, const Vocab& vocab, const std::vector<std::string>& chars,
                      std::size_t t, bool use_bigram) {
  if (t >= chars.size()) throw std::out_of_range("fuse_character: position past the sentence end");
  const Batch batch = make_unlabeled_batch(vocab, {chars}, 0);
  const Tensor all = fuse_characters(params, batch, pack_layout(batch), use_bigram);
  const std::int64_t row[] = {static_cast<std::int64_t>(t)};
  return ops::gather_rows(all, row);
}

Tensor build_inputs(const EmbeddingParams& params, const Batch& batch, const PackedLayout& layout,
                    const ModelConfig& config, DropoutContext dropout) {
  const std::size_t criteria = params.criterion_table.rows();
  std::vector<std::int64_t> crit_ids;
  for (std::size_t c : batch.criteria) {
    if (c >= criteria) throw std::out_of_range("criterion index " + std::to_string(c) + " is not in the model");
    crit_ids.push_back(static_cast<std::int64_t>(c));
  }
  const Tensor parts[] = {fuse_characters(params, batch, layout, config.use_bigram),
                          ops::gather_rows(params.criterion_table, crit_ids)};
  const Tensor stacked = ops::concat_rows(parts);

  // Reorder [characters..., criterion tokens...] into per-sentence blocks.
  std::vector<std::int64_t> source(layout.encoder_rows);
  for (std::size_t j = 0; j < layout.char_rows.size(); ++j) source[static_cast<std::size_t>(layout.char_rows[j])] = static_cast<std::int64_t>(j);
  for (std::size_t i = 0; i < layout.criterion_rows.size(); ++i)
    source[static_cast<std::size_t>(layout.criterion_rows[i])] = static_cast<std::int64_t>(layout.char_count + i);
  Tensor h = ops::gather_rows(stacked, source);

  if (config.use_position) {
    const std::size_t d = config.d_model;
    Tensor pe = Tensor::zeros({layout.encoder_rows, d});
    for (const auto& seg : layout.encoder_segments) {
      for (std::size_t p = 0; p < seg.length; ++p) {
        const auto enc = positional_encoding(p, d);
        std::copy(enc.begin(), enc.end(), pe.data().begin() + static_cast<std::ptrdiff_t>((seg.offset + p) * d));
      }
    }
    h = ops::add(h, pe);
  }
  if (dropout.active()) h = ops::dropout(h, dropout.rate, *dropout.rng);
  return h;
}

Tensor build_input(const EmbeddingParams& params, const Vocab& vocab, const ModelConfig& config,
                   const std::vector<std::string>& chars, std::size_t criterion) {
  const Batch batch = make_unlabeled_batch(vocab, {chars}, criterion);
  return build_inputs(params, batch, pack_layout(batch), config, {});
}

// ------------------------------------------------------------------ encoder

Tensor multi_head(const Tensor& h, std::span<const Segment> segments, const EncoderLayerParams& params,
                  const ModelConfig& config, DropoutContext dropout, std::vector<Scalar>* attention) {
  const Tensor q = ops::matmul(h, params.query);
  const Tensor k = ops::matmul(h, params.key);
  const Tensor v = ops::matmul(h, params.value);
  Tensor mixed = ops::matmul(ops::multi_head_attention(q, k, v, segments, config.num_heads, attention), params.output);
  if (dropout.active()) mixed = ops::dropout(mixed, dropout.rate, *dropout.rng);
  return ops::layer_norm(ops::add(h, mixed), params.norm1_gain, params.norm1_bias, config.layer_norm_eps);
}

Tensor encoder_layer(const Tensor& h, std::span<const Segment> segments, const EncoderLayerParams& params,
                     const ModelConfig& config, DropoutContext dropout) {
  const Tensor z = multi_head(h, segments, params, config, dropout);
  Tensor ffn = ops::linear(ops::relu(ops::linear(z, params.ffn_inner_weight, params.ffn_inner_bias)),
                           params.ffn_outer_weight, params.ffn_outer_bias);
  if (dropout.active()) ffn = ops::dropout(ffn, dropout.rate, *dropout.rng);
  return ops::layer_norm(ops::add(z, ffn), params.norm2_gain, params.norm2_bias, config.layer_norm_eps);
}

Tensor encode(const Tensor& h0, std::span<const Segment> segments, std::span<const EncoderLayerParams> layers,
              const ModelConfig& config, DropoutContext dropout) {
  Tensor h = h0;
  for (const auto& layer : layers) h = encoder_layer(h, segments, layer, config, dropout);
  return h;
}

// ------------------------------------------------------------------ decoder

Tensor emission_scores(const Tensor& encoded, const CrfParams& params) {
  return ops::linear(encoded, params.emission_weight, params.emission_bias);
}

Scalar crf_log_partition(const Tensor& emissions, const Tensor& transitions) {
  return kernels::crf_log_partition(emissions.data(), transitions.data(), emissions.rows(), emissions.cols());
}

Tensor crf_nll(const Tensor& emissions, const Tensor& transitions, const std::vector<Label>& gold) {
  if (gold.size() != emissions.rows()) throw DimensionError("crf_nll: gold length differs from emission rows");
  const Segment seg[] = {{0, gold.size()}};
  std::vector<int> y;
  for (Label l : gold) y.push_back(static_cast<int>(l));
  return ops::crf_nll(emissions, transitions, seg, y);
}

std::vector<Label> viterbi_decode(const Tensor& emissions, const Tensor& transitions) {
  const std::size_t n = emissions.rows();
  if (n == 0) return {};
  std::vector<int> out(n);
  const Segment seg[] = {{0, n}};
  kernels::omp::viterbi(emissions.data(), transitions.data(), seg, emissions.cols(), out);
  std::vector<Label> labels;
  for (int y : out) labels.push_back(static_cast<Label>(y));
  return labels;
}

Tensor mlp_logits(const Tensor& encoded, const MlpParams& params) {
  return ops::linear(ops::relu(ops::linear(encoded, params.hidden_weight, params.hidden_bias)), params.output_weight,
                     params.output_bias);
}

std::vector<Label> mlp_decode(const Tensor& logits) {
  std::vector<Label> labels;
  const std::size_t n = logits.cols();
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < n; ++c)
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    labels.push_back(static_cast<Label>(best));
  }
  return labels;
}

}  // namespace mccws
