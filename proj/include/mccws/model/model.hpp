#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mccws/corpus/vocab.hpp"
#include "mccws/model/batch.hpp"
#include "mccws/model/config.hpp"
#include "mccws/model/layers.hpp"
#include "mccws/numeric/optimizer.hpp"

namespace mccws {

class UnknownCriterionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The unified segmenter: embeddings, encoder stack and one shared decoder,
// together with the vocabulary the embedding tables are indexed by.
class Model {
 public:
  // Randomly initialised model.
  Model(ModelConfig config, Vocab vocab, std::uint64_t seed);
  // Model over existing parameter tensors (e.g. from a checkpoint); names and
  // shapes must match the layout the config implies.
  Model(ModelConfig config, Vocab vocab, std::vector<Parameter> params);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter& parameter(std::string_view name);
  const Parameter& parameter(std::string_view name) const;

  EmbeddingParams embedding() const;
  std::vector<EncoderLayerParams> encoder_layers() const;
  CrfParams crf() const;
  MlpParams mlp() const;

  std::size_t criterion_index(const std::string& name) const;  // throws UnknownCriterionError
  // Appends a criterion with the given embedding row; returns its index.
  std::size_t add_criterion(const std::string& name, const std::vector<Scalar>& row);

  // Encoded character states (criterion rows removed), packed.
  Tensor encode_characters(const Batch& batch, const PackedLayout& layout, DropoutContext dropout) const;
  // Emission scores (CRF) or label logits (MLP) per packed character.
  Tensor label_scores(const Batch& batch, const PackedLayout& layout, DropoutContext dropout) const;
  // Mean over sentences of the per-sentence negative log-likelihood.
  Tensor loss(const Batch& batch, DropoutContext dropout) const;
  std::vector<std::vector<Label>> decode(const Batch& batch) const;

  // Ordered list of the parameter names the config implies.
  static std::vector<std::string> parameter_names(const ModelConfig& config);

 private:
  void index_parameters();
  void check_layout() const;

  ModelConfig config_;
  Vocab vocab_;
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// Uniform [-0.1, 0.1] embedding rows are used for any symbol missing from a pre-trained file.
struct PretrainedCoverage {
  std::size_t file_entries = 0;
  std::size_t unigrams_loaded = 0;
  std::size_t bigrams_loaded = 0;
  std::size_t skipped = 0;  // entries not in the vocabulary
};

// Loads "symbol v1 ... vd" lines (optional "count dim" header) into the
// unigram and bigram tables; a two-character symbol addresses a bigram.
PretrainedCoverage load_pretrained_embeddings(Model& model, const std::string& path);

}  // namespace mccws
