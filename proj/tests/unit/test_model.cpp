#include <gtest/gtest.h>

#include <bit>
#include <filesystem>
#include <fstream>

#include "mccws/corpus/corpus.hpp"
#include "mccws/model/model.hpp"
#include "mccws/train/checkpoint.hpp"
#include "support.hpp"

using namespace mccws;

namespace {

std::vector<LabeledSentence> tiny_data() {
  return {make_sentence({"天气", "好"}, 0), make_sentence({"天", "气", "好"}, 1), make_sentence({"好", "天气"}, 0)};
}

Vocab tiny_vocab() {
  Corpus a{"a", "x", {make_sentence({"天气", "好"})}};
  Corpus b{"b", "y", {make_sentence({"天", "气", "好"})}};
  return build_vocab({a, b});
}

ModelConfig tiny_config(DecoderKind decoder = DecoderKind::crf) {
  ModelConfig c;
  c.embed_dim = 3;
  c.d_model = 4;
  c.num_layers = 1;
  c.num_heads = 2;
  c.d_ff = 6;
  c.dropout = 0;
  c.decoder = decoder;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mccws_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Model, ParameterLayout) {
  const Model crf(tiny_config(), tiny_vocab(), 1);
  const auto names = Model::parameter_names(tiny_config());
  ASSERT_EQ(names.size(), crf.parameters().size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(crf.parameters()[i].name, names[i]);
  EXPECT_EQ(crf.parameter("embedding.criterion").value.shape(), (Shape{2, 4}));
  EXPECT_EQ(crf.parameter("embedding.fusion.weight").value.shape(), (Shape{9, 4}));
  EXPECT_EQ(crf.parameter("decoder.crf.transitions").value.shape(), (Shape{4, 4}));
  EXPECT_THROW(crf.parameter("decoder.mlp.output.weight"), std::out_of_range);
  for (const auto& p : crf.parameters()) {
    const bool is_table = p.name == "embedding.unigram" || p.name == "embedding.bigram" || p.name == "embedding.criterion";
    if (!is_table) continue;
    for (Scalar x : p.value.data()) {
      EXPECT_LE(std::abs(x), 0.1);
    }
  }
  const Model mlp(tiny_config(DecoderKind::mlp), tiny_vocab(), 1);
  EXPECT_EQ(mlp.parameter("decoder.mlp.output.weight").value.shape(), (Shape{4, 4}));
}

TEST(Model, SeedDeterminesInitialisation) {
  const Model a(tiny_config(), tiny_vocab(), 7), b(tiny_config(), tiny_vocab(), 7), c(tiny_config(), tiny_vocab(), 8);
  const auto& wa = a.parameter("encoder.0.attention.query").value;
  const auto& wb = b.parameter("encoder.0.attention.query").value;
  const auto& wc = c.parameter("encoder.0.attention.query").value;
  EXPECT_TRUE(std::equal(wa.data().begin(), wa.data().end(), wb.data().begin()));
  EXPECT_FALSE(std::equal(wa.data().begin(), wa.data().end(), wc.data().begin()));
}

TEST(Model, RejectsMismatchedParameters) {
  Model m(tiny_config(), tiny_vocab(), 1);
  auto params = m.parameters();
  params.pop_back();
  EXPECT_THROW(Model(tiny_config(), tiny_vocab(), params), std::invalid_argument);
  auto reshaped = m.parameters();
  reshaped[0].value = Tensor::zeros({1, 1});
  EXPECT_THROW(Model(tiny_config(), tiny_vocab(), reshaped), std::invalid_argument);
}

TEST(Model, CriterionLookup) {
  Model m(tiny_config(), tiny_vocab(), 1);
  EXPECT_EQ(m.criterion_index("y"), 1u);
  try {
    m.criterion_index("zz");
    FAIL();
  } catch (const UnknownCriterionError& e) {
    EXPECT_NE(std::string(e.what()).find("x"), std::string::npos);
  }
  const std::vector<Scalar> row = {1, 2, 3, 4};
  const auto before = m.parameter("embedding.criterion").value.clone();
  EXPECT_EQ(m.add_criterion("zz", row), 2u);
  EXPECT_EQ(m.criterion_index("zz"), 2u);
  const auto& after = m.parameter("embedding.criterion").value;
  EXPECT_EQ(after.shape(), (Shape{3, 4}));
  EXPECT_TRUE(std::equal(before.data().begin(), before.data().end(), after.data().begin()));
  EXPECT_EQ(after.at(2, 3), 4.0);
  EXPECT_THROW(m.add_criterion("x", row), std::invalid_argument);
  EXPECT_THROW(m.add_criterion("w", {1, 2}), std::invalid_argument);
}

TEST(Model, LossGradientsMatchFiniteDifferences) {
  for (DecoderKind kind : {DecoderKind::crf, DecoderKind::mlp}) {
    Model m(tiny_config(kind), tiny_vocab(), 3);
    const auto data = tiny_data();
    const Batch batch = make_batch(m.vocab(), data);
    std::vector<Tensor> inputs;
    for (auto& p : m.parameters()) inputs.push_back(p.value);
    EXPECT_LT(oracle::gradcheck([&] { return m.loss(batch, {}); }, inputs), 1e-4) << to_string(kind);
  }
}

TEST(Model, LossIsMeanOfSentenceLosses) {
  Model m(tiny_config(), tiny_vocab(), 4);
  const auto data = tiny_data();
  double total = 0;
  for (const auto& s : data) total += m.loss(make_batch(m.vocab(), std::vector<LabeledSentence>{s}), {}).item();
  EXPECT_NEAR(m.loss(make_batch(m.vocab(), data), {}).item(), total / 3, 1e-12);
}

TEST(Model, DecodeMatchesPerSentenceViterbi) {
  Model m(tiny_config(), tiny_vocab(), 5);
  const auto data = tiny_data();
  const Batch batch = make_batch(m.vocab(), data);
  const auto decoded = m.decode(batch);
  ASSERT_EQ(decoded.size(), 3u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Batch one = make_batch(m.vocab(), std::vector<LabeledSentence>{data[i]});
    const auto layout = pack_layout(one);
    const Tensor em = m.label_scores(one, layout, {});
    EXPECT_EQ(decoded[i], viterbi_decode(em, m.crf().transitions));
    EXPECT_EQ(decoded[i].size(), data[i].chars.size());
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = temp_dir("ckpt");
  Model m(tiny_config(DecoderKind::mlp), tiny_vocab(), 6);
  m.add_criterion("z", {0.1, 1e-300, -3.5, 1.0 / 3});
  const Checkpoint saved = snapshot(m, 42, {{"x", 0.91}, {"y", 0.5}});
  save_checkpoint(saved, dir / "m.ckpt");
  const Checkpoint loaded = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(loaded.step, 42);
  EXPECT_EQ(loaded.dev_f1, saved.dev_f1);
  EXPECT_EQ(loaded.config.decoder, DecoderKind::mlp);
  EXPECT_EQ(loaded.config.d_ff, 6u);
  EXPECT_EQ(loaded.vocab.criteria, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(loaded.vocab.unigrams.size(), m.vocab().unigrams.size());
  EXPECT_EQ(loaded.vocab.bigrams.index(bigram_symbol("天", "气")), m.vocab().bigrams.index(bigram_symbol("天", "气")));
  ASSERT_EQ(loaded.params.size(), m.parameters().size());
  for (std::size_t i = 0; i < loaded.params.size(); ++i) {
    const auto a = m.parameters()[i].value.data();
    const auto b = loaded.params[i].value.data();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j)
      EXPECT_EQ(std::bit_cast<std::uint64_t>(a[j]), std::bit_cast<std::uint64_t>(b[j]));
  }
  const Model back = restore(loaded);
  const auto data = tiny_data();
  EXPECT_EQ(back.decode(make_batch(back.vocab(), data)), m.decode(make_batch(m.vocab(), data)));
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, SnapshotIsIndependentOfModel) {
  Model m(tiny_config(), tiny_vocab(), 7);
  const Checkpoint c = snapshot(m, 0, {});
  m.parameters()[0].value.data()[0] += 1;
  EXPECT_NE(c.params[0].value.data()[0], m.parameters()[0].value.data()[0]);
}

TEST(Checkpoint, BadFilesAreRejected) {
  const auto dir = temp_dir("badckpt");
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
  {
    std::ofstream out(dir / "junk.ckpt", std::ios::binary);
    out << "not a checkpoint at all";
  }
  EXPECT_THROW(load_checkpoint(dir / "junk.ckpt"), CheckpointError);
  Model m(tiny_config(), tiny_vocab(), 8);
  save_checkpoint(snapshot(m, 1, {}), dir / "good.ckpt");
  const auto size = std::filesystem::file_size(dir / "good.ckpt");
  std::filesystem::copy_file(dir / "good.ckpt", dir / "short.ckpt");
  std::filesystem::resize_file(dir / "short.ckpt", size - 8);
  EXPECT_THROW(load_checkpoint(dir / "short.ckpt"), CheckpointError);
  EXPECT_NO_THROW(load_checkpoint(dir / "good.ckpt"));
  std::filesystem::remove_all(dir);
}

TEST(PretrainedEmbeddings, LoadsKnownEntriesAndSkipsOthers) {
  const auto dir = temp_dir("emb");
  {
    std::ofstream out(dir / "vec.txt");
    out << "4 3\n天 1 2 3\n天气 4 5 6\n雨 7 8 9\n天气好 0 0 0\n";
  }
  Model m(tiny_config(), tiny_vocab(), 9);
  const auto cov = load_pretrained_embeddings(m, (dir / "vec.txt").string());
  EXPECT_EQ(cov.file_entries, 4u);
  EXPECT_EQ(cov.unigrams_loaded, 1u);
  EXPECT_EQ(cov.bigrams_loaded, 1u);
  EXPECT_EQ(cov.skipped, 2u);
  const auto& uni = m.parameter("embedding.unigram").value;
  const auto r = static_cast<std::size_t>(m.vocab().unigrams.index("天"));
  EXPECT_EQ(uni.at(r, 0), 1.0);
  EXPECT_EQ(uni.at(r, 2), 3.0);
  const auto& bi = m.parameter("embedding.bigram").value;
  EXPECT_EQ(bi.at(static_cast<std::size_t>(m.vocab().bigrams.index(bigram_symbol("天", "气"))), 1), 5.0);

  {
    std::ofstream out(dir / "bad.txt");
    out << "天 1 2\n";
  }
  EXPECT_THROW(load_pretrained_embeddings(m, (dir / "bad.txt").string()), std::runtime_error);
  EXPECT_THROW(load_pretrained_embeddings(m, (dir / "none.txt").string()), std::runtime_error);
  std::filesystem::remove_all(dir);
}
