#pragma once

#include <cstddef>
#include <random>
#include <string>

namespace mccws {

enum class DecoderKind { crf, mlp };

std::string to_string(DecoderKind kind);
DecoderKind decoder_kind_from_string(const std::string& name);

struct ModelConfig {
  std::size_t embed_dim = 100;  // unigram/bigram vector size d
  std::size_t d_model = 256;
  std::size_t num_layers = 6;
  std::size_t num_heads = 4;
  std::size_t d_ff = 1024;
  double dropout = 0.2;
  double layer_norm_eps = 1e-6;
  DecoderKind decoder = DecoderKind::crf;
  bool use_bigram = true;
  // Sinusoidal position encodings; switched off only to probe permutation symmetry.
  bool use_position = true;

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

// Dropout rate plus the generator that draws masks; no generator means inference.
struct DropoutContext {
  double rate = 0;
  std::mt19937_64* rng = nullptr;

  bool active() const { return rng != nullptr && rate > 0; }
};

}  // namespace mccws
