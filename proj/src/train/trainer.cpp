#include "mccws/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mccws/corpus/text.hpp"

namespace mccws {

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (dropout < 0 || dropout >= 1) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (warmup_steps < 1) throw std::invalid_argument("warmup_steps must be at least 1");
  if (!(lr_scale > 0)) throw std::invalid_argument("lr_scale must be positive");
  if (constant_lr && !(*constant_lr > 0)) throw std::invalid_argument("constant_lr must be positive");
  if (clip_norm < 0) throw std::invalid_argument("clip_norm must be non-negative");
}

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kGlobalShuffle = 0xffffffffu;
constexpr std::uint64_t kDropoutStream = 0xfffffffeu;

struct DevSet {
  std::size_t criterion = 0;
  std::vector<LabeledSentence> sentences;
};

struct Plan {
  std::vector<const std::vector<LabeledSentence>*> train;
  std::vector<std::size_t> train_criteria;
  std::vector<DevSet> dev;
};

std::vector<std::pair<std::string, double>> dev_scores(const Model& model, const std::vector<DevSet>& dev,
                                                       std::size_t batch_size) {
  static const std::unordered_set<std::string> kNoWords;
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& d : dev) {
    const auto& name = model.vocab().criteria[d.criterion];
    scores.emplace_back(name, evaluate(model, d.sentences, name, kNoWords, batch_size).prf.f1);
  }
  return scores;
}

double macro_of(const std::vector<std::pair<std::string, double>>& scores) {
  if (scores.empty()) return 0;
  std::vector<double> f;
  for (const auto& s : scores) f.push_back(s.second);
  return macro_average(f);
}

TrainResult run_epochs(Model& model, const Plan& plan, const TrainConfig& config,
                       const std::function<bool(std::size_t)>& before_epoch, const EpochCallback& on_epoch) {
  OptimizerState state = make_optimizer_state(model.parameters(), AdamConfig{},
                                              static_cast<std::int64_t>(model.config().d_model), config.warmup_steps);
  auto dropout_rng = seeded(config.seed, kDropoutStream, 0);
  const DropoutContext dropout{config.dropout, &dropout_rng};

  TrainResult result;
  double best = -1;
  auto keep = [&](const std::vector<std::pair<std::string, double>>& scores) {
    std::map<std::string, double> f1(scores.begin(), scores.end());
    result.best = snapshot(model, state.step, std::move(f1));
  };

  if (config.epochs == 0) keep(dev_scores(model, plan.dev, config.batch_size));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch + 1;
    record.pretrained_frozen = before_epoch ? before_epoch(epoch) : false;

    double loss_sum = 0;
    const auto batches =
        make_batches(model.vocab(), plan.train, plan.train_criteria, config.batch_size, config.seed, epoch);
    for (const auto& batch : batches) {
      Tensor loss = model.loss(batch, dropout);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw TrainingDivergedError("non-finite loss " + std::to_string(value) + " at epoch " +
                                    std::to_string(epoch + 1) + ", step " + std::to_string(state.step + 1));
      }
      zero_grads(model.parameters());
      backward(loss);
      if (config.clip_norm > 0) clip_grad_norm(model.parameters(), config.clip_norm);
      const double lr = config.constant_lr ? *config.constant_lr
                                           : config.lr_scale * noam_lr(state.step + 1, state.d_model, state.warmup_steps);
      adam_step(model.parameters(), state, lr);
      result.step_losses.push_back(value);
      loss_sum += value;
    }

    record.step = state.step;
    record.mean_loss = batches.empty() ? 0 : loss_sum / static_cast<double>(batches.size());
    record.dev_f1 = dev_scores(model, plan.dev, config.batch_size);
    record.macro_dev_f1 = macro_of(record.dev_f1);
    // Without dev data the last epoch is kept.
    if (record.macro_dev_f1 > best || plan.dev.empty()) {
      best = record.macro_dev_f1;
      keep(record.dev_f1);
    }
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  zero_grads(model.parameters());
  return result;
}

}  // namespace

std::vector<Batch> make_batches(const Vocab& vocab, const std::vector<const std::vector<LabeledSentence>*>& corpora,
                                const std::vector<std::size_t>& criteria, std::size_t batch_size, std::uint64_t seed,
                                std::size_t epoch) {
  if (corpora.empty()) throw std::invalid_argument("make_batches needs at least one corpus");
  if (criteria.size() != corpora.size()) throw std::invalid_argument("make_batches: one criterion per corpus");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  std::vector<Batch> batches;
  for (std::size_t c = 0; c < corpora.size(); ++c) {
    const auto& sentences = *corpora[c];
    std::vector<const LabeledSentence*> order;
    for (const auto& s : sentences) order.push_back(&s);
    auto rng = seeded(seed, epoch, c);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
      const std::size_t n = std::min(batch_size, order.size() - i);
      Batch b = make_batch(vocab, std::span<const LabeledSentence* const>(order.data() + i, n));
      b.criteria.assign(b.size, criteria[c]);
      batches.push_back(std::move(b));
    }
  }
  auto rng = seeded(seed, epoch, kGlobalShuffle);
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

TrainResult train(const ModelConfig& model_config, const TrainConfig& config, const std::vector<TrainingCorpus>& corpora,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (corpora.empty()) throw std::invalid_argument("train needs at least one corpus");
  ModelConfig mc = model_config;
  mc.decoder = config.decoder;
  mc.use_bigram = config.bigram_enabled;
  mc.dropout = config.dropout;
  mc.validate();

  std::vector<Corpus> for_vocab;
  for (const auto& c : corpora) {
    if (c.train.empty()) throw std::invalid_argument("corpus '" + c.criterion + "' has no training sentences");
    for_vocab.push_back({c.criterion, c.criterion, c.train});
  }
  Model model(mc, build_vocab(for_vocab), config.seed);

  Plan plan;
  for (const auto& c : corpora) {
    const std::size_t id = model.criterion_index(c.criterion);
    plan.train.push_back(&c.train);
    plan.train_criteria.push_back(id);
    if (c.dev.empty()) continue;
    auto it = std::find_if(plan.dev.begin(), plan.dev.end(), [&](const DevSet& d) { return d.criterion == id; });
    if (it == plan.dev.end()) it = plan.dev.insert(plan.dev.end(), DevSet{id, {}});
    it->sentences.insert(it->sentences.end(), c.dev.begin(), c.dev.end());
  }
  std::sort(plan.dev.begin(), plan.dev.end(), [](const DevSet& a, const DevSet& b) { return a.criterion < b.criterion; });

  const bool pretrained = config.pretrained_embeddings.has_value();
  if (pretrained) load_pretrained_embeddings(model, *config.pretrained_embeddings);
  auto before_epoch = [&](std::size_t epoch) {
    const bool frozen = pretrained && epoch < config.freeze_pretrained_epochs;
    model.parameter("embedding.unigram").frozen = frozen;
    model.parameter("embedding.bigram").frozen = frozen;
    return frozen;
  };
  return run_epochs(model, plan, config, before_epoch, on_epoch);
}

TrainResult transfer(const Checkpoint& base, const std::string& criterion,
                     const std::vector<LabeledSentence>& train_sentences,
                     const std::vector<LabeledSentence>& dev_sentences, std::size_t shots, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate();
  if (base.vocab.criterion_index(criterion))
    throw std::invalid_argument("criterion '" + criterion + "' is already known to the base model");
  if (shots > train_sentences.size())
    throw std::invalid_argument("requested " + std::to_string(shots) + " shots but only " +
                                std::to_string(train_sentences.size()) + " training sentences exist");

  Model model = restore(base);
  const Tensor& table = model.parameter("embedding.criterion").value;
  const std::size_t m = table.rows(), d = table.cols();
  std::vector<Scalar> mean(d, 0);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += table.at(r, c) / static_cast<Scalar>(m);
  const std::size_t id = model.add_criterion(criterion, mean);

  for (auto& p : model.parameters()) p.frozen = true;
  auto& row_param = model.parameter("embedding.criterion");
  row_param.frozen = false;
  row_param.trainable_rows = std::vector<std::size_t>{id};

  const std::vector<LabeledSentence> shot_set(train_sentences.begin(),
                                              train_sentences.begin() + static_cast<std::ptrdiff_t>(shots));
  Plan plan;
  if (!shot_set.empty()) {
    plan.train.push_back(&shot_set);
    plan.train_criteria.push_back(id);
  }
  if (!dev_sentences.empty()) plan.dev.push_back({id, dev_sentences});

  TrainConfig cfg = config;
  if (shot_set.empty()) cfg.epochs = 0;
  return run_epochs(model, plan, cfg, {}, on_epoch);
}

std::vector<std::vector<Label>> predict(const Model& model, const std::vector<LabeledSentence>& sentences,
                                        std::size_t criterion, std::size_t batch_size) {
  std::vector<std::vector<Label>> out;
  out.reserve(sentences.size());
  std::vector<const LabeledSentence*> ptrs;
  for (const auto& s : sentences) ptrs.push_back(&s);
  for (std::size_t i = 0; i < ptrs.size(); i += batch_size) {
    const std::size_t n = std::min(batch_size, ptrs.size() - i);
    Batch b = make_batch(model.vocab(), std::span<const LabeledSentence* const>(ptrs.data() + i, n));
    b.criteria.assign(b.size, criterion);
    for (auto& labels : model.decode(b)) out.push_back(std::move(labels));
  }
  return out;
}

namespace {

SpanSet to_spans(const std::vector<Label>& labels) {
  SpanSet spans;
  for (const auto& [s, e] : bmes_to_spans(labels)) spans.push_back({s, e});
  return spans;
}

}  // namespace

EvalRow evaluate(const Model& model, const std::vector<LabeledSentence>& sentences, const std::string& criterion,
                 const std::unordered_set<std::string>& training_words, std::size_t batch_size) {
  const auto predicted = predict(model, sentences, model.criterion_index(criterion), batch_size);
  std::vector<SpanSet> gold, pred;
  std::vector<std::vector<std::string>> gold_words;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    gold.push_back(to_spans(sentences[i].labels));
    pred.push_back(to_spans(predicted[i]));
    gold_words.push_back(sentences[i].words());
  }
  return {criterion, f1(gold, pred), oov_recall(gold_words, pred, training_words)};
}

std::vector<std::string> segment(const Model& model, std::string_view text, const std::string& criterion) {
  const std::size_t id = model.criterion_index(criterion);
  std::vector<std::string> chars;
  for (auto& c : split_chars(normalize_width(text)))
    if (c.find_first_not_of(" \t\r\n\v\f") != std::string::npos) chars.push_back(std::move(c));
  if (chars.empty()) return {};
  const auto tokens = replace_runs_with_surface(chars);
  std::vector<std::string> symbols;
  for (const auto& t : tokens) symbols.push_back(t.token);
  const auto labels = model.decode(make_unlabeled_batch(model.vocab(), {symbols}, id)).front();
  std::vector<std::string> words;
  for (const auto& [s, e] : bmes_to_spans(labels)) {
    std::string w;
    for (std::size_t t = s; t < e; ++t) w += tokens[t].surface;
    words.push_back(std::move(w));
  }
  return words;
}

}  // namespace mccws
