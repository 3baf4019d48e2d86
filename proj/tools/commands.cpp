#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

#include "mccws/analysis/analysis.hpp"
#include "mccws/corpus/corpus.hpp"
#include "mccws/corpus/text.hpp"
#include "mccws/synth/synthetic.hpp"
#include "mccws/train/checkpoint.hpp"
#include "mccws/train/trainer.hpp"

namespace mccws::app {

namespace fs = std::filesystem;

namespace {

std::vector<LabeledSentence> read_split(const CorpusDecl& decl, const std::string& split, bool required = true) {
  const auto path = decl.file(split);
  if (!fs::exists(path)) {
    if (required) throw CorpusError("missing corpus file " + path.string());
    return {};
  }
  return preprocess_corpus(read_raw_corpus(path, decl.name, decl.criterion), false).sentences;
}

std::unordered_set<std::string> training_words(const CorpusDecl& decl) {
  auto words = training_word_set(read_split(decl, "train"));
  for (auto& w : training_word_set(read_split(decl, "dev", false))) words.insert(w);
  return words;
}

void write_stats_row(std::ostream& out, const std::string& corpus, const std::string& split, const CorpusStats& s) {
  out << corpus << '\t' << split << '\t' << s.words << '\t' << s.chars << '\t' << s.word_types << '\t'
      << s.char_types << '\t';
  if (s.oov_rate) out << std::fixed << std::setprecision(2) << 100 * *s.oov_rate << std::defaultfloat;
  out << '\n';
}

}  // namespace

void cmd_preprocess(const PreprocessOptions& options, std::ostream& log) {
  if (!fs::is_directory(options.raw_dir)) throw CorpusError("raw directory " + options.raw_dir.string() + " does not exist");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(options.raw_dir)) {
    const std::string file = entry.path().filename().string();
    constexpr std::string_view suffix = ".train.txt";
    if (file.size() > suffix.size() && file.ends_with(suffix)) names.push_back(file.substr(0, file.size() - suffix.size()));
  }
  if (names.empty()) throw CorpusError("no <name>.train.txt files in " + options.raw_dir.string());
  std::sort(names.begin(), names.end());
  fs::create_directories(options.out_dir);

  std::ofstream stats(options.out_dir / "stats.tsv");
  stats << "corpus\tsplit\twords\tchars\tword_types\tchar_types\toov_rate\n";
  std::vector<Corpus> train_sets;
  for (const auto& name : names) {
    const auto raw_train = read_raw_corpus(options.raw_dir / (name + ".train.txt"), name, name);
    const Corpus full = preprocess_corpus(raw_train, true);
    auto [train, dev] = split_train_dev(full.sentences, options.dev_ratio, options.seed);
    write_segmented(options.out_dir / (name + ".train.txt"), train);
    write_segmented(options.out_dir / (name + ".dev.txt"), dev);
    const auto words = training_word_set(full.sentences);
    write_stats_row(stats, name, "train", corpus_stats(full.sentences));
    const auto test_path = options.raw_dir / (name + ".test.txt");
    if (fs::exists(test_path)) {
      const Corpus test = preprocess_corpus(read_raw_corpus(test_path, name, name), false);
      write_segmented(options.out_dir / (name + ".test.txt"), test.sentences);
      write_stats_row(stats, name, "test", corpus_stats(test.sentences, &words));
    }
    log << "preprocessed " << name << ": " << train.size() << " train, " << dev.size() << " dev sentences\n";
    train_sets.push_back({name, name, std::move(train)});
  }
  const Vocab vocab = build_vocab(train_sets);
  std::ofstream uni(options.out_dir / "unigrams.tsv"), bi(options.out_dir / "bigrams.tsv"),
      crit(options.out_dir / "criteria.tsv");
  vocab.unigrams.write_tsv(uni);
  vocab.bigrams.write_tsv(bi);
  for (std::size_t i = 0; i < vocab.criteria.size(); ++i) crit << vocab.criteria[i] << '\t' << i << '\n';
}

void apply_overrides(RunConfig& config, const TrainOverrides& o) {
  if (o.seed) config.seed = config.train.seed = config.transfer.seed = *o.seed;
  if (o.decoder) config.train.decoder = *o.decoder;
  if (o.no_bigram) config.train.bigram_enabled = false;
  if (o.embeddings) config.train.pretrained_embeddings = *o.embeddings;
}

namespace {

void require_valid(const RunConfig& config) {
  const auto problems = config.problems();
  if (problems.empty()) return;
  std::string joined;
  for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
  throw ConfigError(joined);
}

}  // namespace

void cmd_train(const RunConfig& config, const fs::path& checkpoint, std::ostream& out, std::ostream& log) {
  require_valid(config);
  std::vector<TrainingCorpus> corpora;
  for (const auto& decl : config.corpora)
    corpora.push_back({decl.criterion, read_split(decl, "train"), read_split(decl, "dev", false)});

  out << "epoch\tstep\tloss";
  for (const auto& c : corpora) out << "\tdev_f1_" << c.criterion;
  out << "\tmacro_dev_f1\tpretrained_frozen\n";
  const auto on_epoch = [&](const EpochRecord& r) {
    out << r.epoch << '\t' << r.step << '\t' << std::setprecision(6) << r.mean_loss << std::fixed
        << std::setprecision(2);
    std::map<std::string, double> f(r.dev_f1.begin(), r.dev_f1.end());
    for (const auto& c : corpora) out << '\t' << (f.contains(c.criterion) ? 100 * f[c.criterion] : 0.0);
    out << '\t' << 100 * r.macro_dev_f1 << '\t' << (r.pretrained_frozen ? 1 : 0) << std::defaultfloat << std::endl;
    log << "epoch " << r.epoch << " loss " << r.mean_loss << " dev F1 " << 100 * r.macro_dev_f1 << std::endl;
  };
  const auto result = train(config.model, config.train, corpora, on_epoch);
  if (checkpoint.has_parent_path()) fs::create_directories(checkpoint.parent_path());
  save_checkpoint(result.best, checkpoint);
  log << "saved " << checkpoint.string() << " (step " << result.best.step << ")\n";
}

void cmd_eval(const RunConfig& config, const fs::path& checkpoint, std::ostream& out) {
  const Model model = restore(load_checkpoint(checkpoint));
  EvalReport report;
  for (const auto& decl : config.corpora) {
    if (!model.vocab().criterion_index(decl.criterion))
      throw UnknownCriterionError("checkpoint has no criterion '" + decl.criterion +
                                  "'; known criteria: " + model.vocab().criteria_list());
    report.rows.push_back(evaluate(model, read_split(decl, "test"), decl.criterion, training_words(decl)));
  }
  report.write_tsv(out);
}

void cmd_segment(const fs::path& checkpoint, const std::string& criterion, std::istream& in, std::ostream& out) {
  const Model model = restore(load_checkpoint(checkpoint));
  model.criterion_index(criterion);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out << join_words(segment(model, line, criterion)) << '\n' << std::flush;
  }
}

void cmd_transfer(const RunConfig& config, const fs::path& checkpoint, const std::string& criterion,
                  const std::vector<std::size_t>& shots, std::ostream& out, std::ostream& log) {
  const Checkpoint base = load_checkpoint(checkpoint);
  if (base.vocab.criterion_index(criterion))
    throw std::invalid_argument("criterion '" + criterion + "' is already known to the base model");
  const CorpusDecl& decl = config.corpus_for(criterion);
  const auto train_sentences = read_split(decl, "train");
  const auto dev_sentences = read_split(decl, "dev", false);
  const auto test_sentences = read_split(decl, "test");
  const auto words = training_words(decl);
  fs::create_directories(config.output_dir);

  out << "shots\tdev_f1\ttest_f1\ttest_oov_recall\n";
  for (std::size_t n : shots) {
    const auto result = transfer(base, criterion, train_sentences, dev_sentences, n, config.transfer);
    const auto path = config.output_dir / ("transfer-" + criterion + "-" + std::to_string(n) + ".ckpt");
    save_checkpoint(result.best, path);
    const Model model = restore(result.best);
    const auto row = evaluate(model, test_sentences, criterion, words);
    const auto dev = result.best.dev_f1.find(criterion);
    out << n << '\t' << std::fixed << std::setprecision(2)
        << (dev == result.best.dev_f1.end() ? 0.0 : 100 * dev->second) << '\t' << 100 * row.prf.f1 << '\t'
        << 100 * row.oov.recall << std::defaultfloat << std::endl;
    log << "transfer " << n << " shots -> " << path.string() << '\n';
  }
}

void cmd_analyze_criteria(const fs::path& checkpoint, std::ostream& out, std::ostream& log) {
  const Checkpoint c = load_checkpoint(checkpoint);
  log << "criterion embeddings from checkpoint at step " << c.step << " (best dev)\n";
  out << "criterion\tx\ty\n" << std::setprecision(17);
  for (const auto& p : analyze_criteria(restore(c))) out << p.criterion << '\t' << p.x << '\t' << p.y << '\n';
  out << std::defaultfloat;
}

void cmd_nearest_bigrams(const fs::path& checkpoint, const std::string& query, std::size_t k, std::ostream& out) {
  const Model model = restore(load_checkpoint(checkpoint));
  const auto neighbors = nearest_bigrams(model, query, k);
  out << "rank\tbigram\tcosine\n" << std::fixed << std::setprecision(6);
  std::size_t rank = 0;
  for (const auto& n : neighbors) out << ++rank << '\t' << n.bigram << '\t' << n.similarity << '\n';
  out << std::defaultfloat;
}

void cmd_synth(const SynthOptions& options) {
  SyntheticSuite().write_corpora(options.out_dir, options.criteria, options.train_size, options.test_size,
                                 options.seed);
}

}  // namespace mccws::app
