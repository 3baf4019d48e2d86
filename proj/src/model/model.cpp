#include "mccws/model/model.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mccws/corpus/text.hpp"

namespace mccws {

namespace {

struct ParamSpec {
  std::string name;
  Shape shape;
  enum class Init { embedding, glorot, zeros, ones } init;
};

std::vector<ParamSpec> layout_for(const ModelConfig& c, const Vocab& v) {
  using I = ParamSpec::Init;
  const std::size_t d = c.embed_dim, dm = c.d_model, L = kNumLabels;
  std::vector<ParamSpec> specs = {
      {"embedding.unigram", {v.unigrams.size(), d}, I::embedding},
      {"embedding.bigram", {v.bigrams.size(), d}, I::embedding},
      {"embedding.criterion", {v.criteria.size(), dm}, I::embedding},
      {"embedding.fusion.weight", {3 * d, dm}, I::glorot},
      {"embedding.fusion.bias", {dm}, I::zeros},
  };
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    specs.push_back({p + "attention.query", {dm, dm}, I::glorot});
    specs.push_back({p + "attention.key", {dm, dm}, I::glorot});
    specs.push_back({p + "attention.value", {dm, dm}, I::glorot});
    specs.push_back({p + "attention.output", {dm, dm}, I::glorot});
    specs.push_back({p + "norm1.gain", {dm}, I::ones});
    specs.push_back({p + "norm1.bias", {dm}, I::zeros});
    specs.push_back({p + "ffn.inner.weight", {dm, c.d_ff}, I::glorot});
    specs.push_back({p + "ffn.inner.bias", {c.d_ff}, I::zeros});
    specs.push_back({p + "ffn.outer.weight", {c.d_ff, dm}, I::glorot});
    specs.push_back({p + "ffn.outer.bias", {dm}, I::zeros});
    specs.push_back({p + "norm2.gain", {dm}, I::ones});
    specs.push_back({p + "norm2.bias", {dm}, I::zeros});
  }
  if (c.decoder == DecoderKind::crf) {
    specs.push_back({"decoder.crf.emission.weight", {dm, L}, I::glorot});
    specs.push_back({"decoder.crf.emission.bias", {L}, I::zeros});
    specs.push_back({"decoder.crf.transitions", {L, L}, I::zeros});
  } else {
    specs.push_back({"decoder.mlp.hidden.weight", {dm, dm}, I::glorot});
    specs.push_back({"decoder.mlp.hidden.bias", {dm}, I::zeros});
    specs.push_back({"decoder.mlp.output.weight", {dm, L}, I::glorot});
    specs.push_back({"decoder.mlp.output.bias", {L}, I::zeros});
  }
  return specs;
}

}  // namespace

Model::Model(ModelConfig config, Vocab vocab, std::uint64_t seed) : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  for (const auto& spec : layout_for(config_, vocab_)) {
    Tensor t = Tensor::zeros(spec.shape, true);
    switch (spec.init) {
      case ParamSpec::Init::embedding: {
        std::uniform_real_distribution<Scalar> dist(-0.1, 0.1);
        for (auto& x : t.data()) x = dist(rng);
        break;
      }
      case ParamSpec::Init::glorot: {
        const auto fan = static_cast<Scalar>(spec.shape[0] + spec.shape[1]);
        const Scalar limit = std::sqrt(6 / fan);
        std::uniform_real_distribution<Scalar> dist(-limit, limit);
        for (auto& x : t.data()) x = dist(rng);
        break;
      }
      case ParamSpec::Init::ones:
        std::fill(t.data().begin(), t.data().end(), Scalar{1});
        break;
      case ParamSpec::Init::zeros:
        break;
    }
    params_.push_back({spec.name, t, false, std::nullopt});
  }
  index_parameters();
}

Model::Model(ModelConfig config, Vocab vocab, std::vector<Parameter> params)
    : config_(config), vocab_(std::move(vocab)), params_(std::move(params)) {
  config_.validate();
  for (auto& p : params_) p.value.set_requires_grad(true);
  index_parameters();
  check_layout();
}

void Model::index_parameters() {
  by_name_.clear();
  for (std::size_t i = 0; i < params_.size(); ++i) by_name_[params_[i].name] = i;
}

void Model::check_layout() const {
  const auto specs = layout_for(config_, vocab_);
  if (specs.size() != params_.size()) throw DimensionError("parameter count does not match the model config");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].name != params_[i].name || specs[i].shape != params_[i].value.shape()) {
      throw DimensionError("parameter " + params_[i].name + " " + shape_string(params_[i].value.shape()) +
                           " does not match expected " + specs[i].name + " " + shape_string(specs[i].shape));
    }
  }
}

std::vector<std::string> Model::parameter_names(const ModelConfig& config) {
  Vocab empty;
  std::vector<std::string> names;
  for (const auto& s : layout_for(config, empty)) names.push_back(s.name);
  return names;
}

Parameter& Model::parameter(std::string_view name) {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw std::out_of_range("no parameter named " + std::string(name));
  return params_[it->second];
}

const Parameter& Model::parameter(std::string_view name) const {
  return const_cast<Model*>(this)->parameter(name);
}

EmbeddingParams Model::embedding() const {
  return {parameter("embedding.unigram").value, parameter("embedding.bigram").value,
          parameter("embedding.criterion").value, parameter("embedding.fusion.weight").value,
          parameter("embedding.fusion.bias").value};
}

std::vector<EncoderLayerParams> Model::encoder_layers() const {
  std::vector<EncoderLayerParams> layers;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l) + ".";
    auto get = [&](const char* n) { return parameter(p + n).value; };
    layers.push_back({get("attention.query"), get("attention.key"), get("attention.value"), get("attention.output"),
                      get("norm1.gain"), get("norm1.bias"), get("ffn.inner.weight"), get("ffn.inner.bias"),
                      get("ffn.outer.weight"), get("ffn.outer.bias"), get("norm2.gain"), get("norm2.bias")});
  }
  return layers;
}

CrfParams Model::crf() const {
  return {parameter("decoder.crf.emission.weight").value, parameter("decoder.crf.emission.bias").value,
          parameter("decoder.crf.transitions").value};
}

MlpParams Model::mlp() const {
  return {parameter("decoder.mlp.hidden.weight").value, parameter("decoder.mlp.hidden.bias").value,
          parameter("decoder.mlp.output.weight").value, parameter("decoder.mlp.output.bias").value};
}

std::size_t Model::criterion_index(const std::string& name) const {
  if (auto idx = vocab_.criterion_index(name)) return *idx;
  throw UnknownCriterionError("unknown criterion '" + name + "'; known criteria: " + vocab_.criteria_list());
}

std::size_t Model::add_criterion(const std::string& name, const std::vector<Scalar>& row) {
  if (vocab_.criterion_index(name)) throw std::invalid_argument("criterion '" + name + "' already exists");
  if (row.size() != config_.d_model) throw DimensionError("criterion embedding row has the wrong width");
  auto& table = parameter("embedding.criterion");
  const std::size_t m = table.value.rows();
  std::vector<Scalar> values(table.value.data().begin(), table.value.data().end());
  values.insert(values.end(), row.begin(), row.end());
  table.value = Tensor::from({m + 1, config_.d_model}, std::move(values), true);
  return vocab_.add_criterion(name);
}

Tensor Model::encode_characters(const Batch& batch, const PackedLayout& layout, DropoutContext dropout) const {
  const Tensor h0 = build_inputs(embedding(), batch, layout, config_, dropout);
  const auto layers = encoder_layers();
  const Tensor h = encode(h0, layout.encoder_segments, layers, config_, dropout);
  return ops::gather_rows(h, layout.char_rows);
}

Tensor Model::label_scores(const Batch& batch, const PackedLayout& layout, DropoutContext dropout) const {
  const Tensor encoded = encode_characters(batch, layout, dropout);
  return config_.decoder == DecoderKind::crf ? emission_scores(encoded, crf()) : mlp_logits(encoded, mlp());
}

Tensor Model::loss(const Batch& batch, DropoutContext dropout) const {
  if (!batch.labeled()) throw std::invalid_argument("loss needs a labeled batch");
  const PackedLayout layout = pack_layout(batch);
  const Tensor scores = label_scores(batch, layout, dropout);
  std::vector<int> gold;
  gold.reserve(layout.char_count);
  for (std::size_t i = 0; i < batch.size; ++i)
    for (std::size_t t = 0; t < batch.lengths[i]; ++t) gold.push_back(batch.labels[i * batch.max_len + t]);
  const Tensor total = config_.decoder == DecoderKind::crf
                           ? ops::crf_nll(scores, crf().transitions, layout.char_segments, gold)
                           : ops::softmax_cross_entropy(scores, gold);
  return ops::scale(total, 1 / static_cast<Scalar>(batch.size));
}

std::vector<std::vector<Label>> Model::decode(const Batch& batch) const {
  NoGradGuard no_grad;
  const PackedLayout layout = pack_layout(batch);
  const Tensor scores = label_scores(batch, layout, {});
  std::vector<std::vector<Label>> out(batch.size);
  if (config_.decoder == DecoderKind::crf) {
    std::vector<int> labels(layout.char_count);
    kernels::omp::viterbi(scores.data(), crf().transitions.data(), layout.char_segments, kNumLabels, labels);
    for (std::size_t i = 0; i < batch.size; ++i) {
      const auto& seg = layout.char_segments[i];
      for (std::size_t t = 0; t < seg.length; ++t) out[i].push_back(static_cast<Label>(labels[seg.offset + t]));
    }
  } else {
    const auto all = mlp_decode(scores);
    for (std::size_t i = 0; i < batch.size; ++i) {
      const auto& seg = layout.char_segments[i];
      out[i].assign(all.begin() + static_cast<std::ptrdiff_t>(seg.offset),
                    all.begin() + static_cast<std::ptrdiff_t>(seg.offset + seg.length));
    }
  }
  return out;
}

PretrainedCoverage load_pretrained_embeddings(Model& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read embedding file " + path);
  const std::size_t d = model.config().embed_dim;
  auto& uni = model.parameter("embedding.unigram").value;
  auto& bi = model.parameter("embedding.bigram").value;
  PretrainedCoverage cov;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string symbol;
    if (!(fields >> symbol)) continue;
    std::vector<Scalar> values;
    for (Scalar v; fields >> v;) values.push_back(v);
    if (first) {
      first = false;
      // "count dim" header: two integer fields and nothing else.
      if (values.size() == 1 && symbol.find_first_not_of("0123456789") == std::string::npos) continue;
    }
    if (values.size() != d) {
      throw std::runtime_error("embedding file " + path + ": entry '" + symbol + "' has " + std::to_string(values.size()) +
                               " values, expected " + std::to_string(d));
    }
    ++cov.file_entries;
    const auto tokens = split_chars(normalize_width(symbol));
    Tensor* table = nullptr;
    std::optional<std::int64_t> row;
    if (tokens.size() == 1) {
      table = &uni;
      row = model.vocab().unigrams.find(tokens[0]);
    } else if (tokens.size() == 2) {
      table = &bi;
      row = model.vocab().bigrams.find(bigram_symbol(tokens[0], tokens[1]));
    }
    if (!table || !row) {
      ++cov.skipped;
      continue;
    }
    std::copy(values.begin(), values.end(), table->data().begin() + static_cast<std::ptrdiff_t>(*row * static_cast<std::int64_t>(d)));
    (table == &uni ? cov.unigrams_loaded : cov.bigrams_loaded)++;
  }
  return cov;
}

}  // namespace mccws
