#pragma once

// The three stages of the segmenter: input embedding (criterion token,
// fused unigram/bigram characters, sinusoidal positions), the post-norm
// Transformer encoder, and the shared BMES decoder (CRF or MLP).

#include <span>
#include <vector>

#include "mccws/corpus/bmes.hpp"
#include "mccws/corpus/vocab.hpp"
#include "mccws/model/batch.hpp"
#include "mccws/model/config.hpp"
#include "mccws/numeric/ops.hpp"

namespace mccws {

using kernels::Segment;

// ---------------------------------------------------------------- embedding

struct EmbeddingParams {
  Tensor unigram_table;    // |V_uni| x d
  Tensor bigram_table;     // |V_bi| x d
  Tensor criterion_table;  // M x d_model
  Tensor fusion_weight;    // 3d x d_model
  Tensor fusion_bias;      // d_model
};

// PE[2i] = sin(t / 10000^(2i/d_model)), PE[2i+1] = cos(t / 10000^(2i/d_model)).
std::vector<Scalar> positional_encoding(std::size_t position, std::size_t d_model);

// Fused representation FC(e_x ++ e_left_bigram ++ e_right_bigram) for every
// character of the batch, in packed character order.
Tensor fuse_characters(const EmbeddingParams& params, const Batch& batch, const PackedLayout& layout,
                       bool use_bigram);

// Fused vector of character t (0-based) of one token sequence.
Tensor fuse_character(const EmbeddingParams& params, const Vocab& vocab, const std::vector<std::string>& chars,
                      std::size_t t, bool use_bigram);

// Packed encoder input: per sentence the criterion row followed by its
// characters, each plus its position encoding, then dropout.
Tensor build_inputs(const EmbeddingParams& params, const Batch& batch, const PackedLayout& layout,
                    const ModelConfig& config, DropoutContext dropout);

// (T+1) x d_model input matrix of one sentence without dropout.
Tensor build_input(const EmbeddingParams& params, const Vocab& vocab, const ModelConfig& config,
                   const std::vector<std::string>& chars, std::size_t criterion);

// ------------------------------------------------------------------ encoder

struct EncoderLayerParams {
  Tensor query, key, value;  // d_model x d_model, head h owns column block h
  Tensor output;             // d_model x d_model
  Tensor norm1_gain, norm1_bias;
  Tensor ffn_inner_weight, ffn_inner_bias;  // d_model x d_ff
  Tensor ffn_outer_weight, ffn_outer_bias;  // d_ff x d_model
  Tensor norm2_gain, norm2_bias;
};

// Z = layer-norm(H + dropout(MultiHead(H) W^O)).
Tensor multi_head(const Tensor& h, std::span<const Segment> segments, const EncoderLayerParams& params,
                  const ModelConfig& config, DropoutContext dropout, std::vector<Scalar>* attention = nullptr);

// H' = layer-norm(Z + dropout(FFN(Z))) with Z = multi_head(H).
Tensor encoder_layer(const Tensor& h, std::span<const Segment> segments, const EncoderLayerParams& params,
                     const ModelConfig& config, DropoutContext dropout);

Tensor encode(const Tensor& h0, std::span<const Segment> segments, std::span<const EncoderLayerParams> layers,
              const ModelConfig& config, DropoutContext dropout);

// ------------------------------------------------------------------ decoder

struct CrfParams {
  Tensor emission_weight;  // d_model x |L|
  Tensor emission_bias;    // |L|
  Tensor transitions;      // |L| x |L|, row = previous label
};

struct MlpParams {
  Tensor hidden_weight, hidden_bias;  // d_model x d_model
  Tensor output_weight, output_bias;  // d_model x |L|
};

Tensor emission_scores(const Tensor& encoded, const CrfParams& params);

// log of the sum over all label sequences of exp(score); T = emissions.rows().
Scalar crf_log_partition(const Tensor& emissions, const Tensor& transitions);

// Negative log-likelihood of gold labels for one sequence.
Tensor crf_nll(const Tensor& emissions, const Tensor& transitions, const std::vector<Label>& gold);

std::vector<Label> viterbi_decode(const Tensor& emissions, const Tensor& transitions);

Tensor mlp_logits(const Tensor& encoded, const MlpParams& params);
// Per-position argmax of the label distribution (lowest label wins ties).
std::vector<Label> mlp_decode(const Tensor& logits);

}  // namespace mccws
