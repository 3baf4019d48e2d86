#include "run_config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace mccws::app {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

ModelConfig parse_model(const json& j) {
  check_keys(j, "model",
             {"embed_dim", "d_model", "num_layers", "num_heads", "d_ff", "dropout", "layer_norm_eps", "use_position"});
  ModelConfig m;
  m.embed_dim = j.value("embed_dim", m.embed_dim);
  m.d_model = j.value("d_model", m.d_model);
  m.num_layers = j.value("num_layers", m.num_layers);
  m.num_heads = j.value("num_heads", m.num_heads);
  m.d_ff = j.value("d_ff", m.d_ff);
  m.dropout = j.value("dropout", m.dropout);
  m.layer_norm_eps = j.value("layer_norm_eps", m.layer_norm_eps);
  m.use_position = j.value("use_position", m.use_position);
  return m;
}

TrainConfig parse_train(const json& j, const std::string& where, TrainConfig t) {
  check_keys(j, where,
             {"epochs", "batch_size", "dropout", "warmup_steps", "freeze_pretrained_epochs", "decoder", "bigram",
              "pretrained_embeddings", "lr_scale", "constant_lr", "clip_norm"});
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.dropout = j.value("dropout", t.dropout);
  t.warmup_steps = j.value("warmup_steps", t.warmup_steps);
  t.freeze_pretrained_epochs = j.value("freeze_pretrained_epochs", t.freeze_pretrained_epochs);
  if (j.contains("decoder")) t.decoder = decoder_kind_from_string(j.at("decoder"));
  t.bigram_enabled = j.value("bigram", t.bigram_enabled);
  if (j.contains("pretrained_embeddings")) t.pretrained_embeddings = j.at("pretrained_embeddings").get<std::string>();
  t.lr_scale = j.value("lr_scale", t.lr_scale);
  if (j.contains("constant_lr")) t.constant_lr = j.at("constant_lr").get<double>();
  t.clip_norm = j.value("clip_norm", t.clip_norm);
  return t;
}

Script parse_script(const std::string& s) {
  if (s == "simplified") return Script::simplified;
  if (s == "traditional") return Script::traditional;
  throw ConfigError("script must be simplified or traditional, got '" + s + "'");
}

}  // namespace

std::vector<std::string> RunConfig::problems() const {
  std::vector<std::string> out;
  if (corpora.empty()) out.push_back("no corpora declared");
  std::set<std::string> names, criteria;
  for (const auto& c : corpora) {
    if (c.name.empty()) out.push_back("corpus with an empty name");
    if (!names.insert(c.name).second) out.push_back("duplicate corpus name '" + c.name + "'");
    if (!criteria.insert(c.criterion).second) out.push_back("duplicate criterion '" + c.criterion + "'");
    if (!std::filesystem::is_directory(c.path))
      out.push_back("corpus '" + c.name + "': directory " + c.path.string() + " does not exist");
    else if (!std::filesystem::exists(c.file("train")))
      out.push_back("corpus '" + c.name + "': missing " + c.file("train").string());
  }
  for (const auto* section : {&train, &transfer}) {
    try {
      section->validate();
    } catch (const std::exception& e) {
      out.push_back(std::string(section == &train ? "train" : "transfer") + ": " + e.what());
    }
    if (section->pretrained_embeddings && !std::filesystem::exists(*section->pretrained_embeddings))
      out.push_back("embedding file " + *section->pretrained_embeddings + " does not exist");
  }
  try {
    model.validate();
  } catch (const std::exception& e) {
    out.push_back(std::string("model: ") + e.what());
  }
  return out;
}

const CorpusDecl& RunConfig::corpus_for(const std::string& criterion) const {
  for (const auto& c : corpora)
    if (c.criterion == criterion) return c;
  throw ConfigError("no corpus with criterion '" + criterion + "' in the config");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
    check_keys(j, "config", {"corpora", "model", "train", "transfer", "output_dir", "seed"});
    const auto base = path.parent_path();
    RunConfig rc;
    rc.seed = j.value("seed", rc.seed);
    if (j.contains("output_dir")) rc.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("model")) rc.model = parse_model(j.at("model"));
    if (j.contains("train")) rc.train = parse_train(j.at("train"), "train", rc.train);
    rc.transfer = j.contains("transfer") ? parse_train(j.at("transfer"), "transfer", rc.train) : rc.train;
    rc.train.seed = rc.transfer.seed = rc.seed;
    auto resolve = [&](std::filesystem::path p) { return p.is_relative() ? base / p : p; };
    rc.output_dir = resolve(rc.output_dir);
    for (auto* t : {&rc.train, &rc.transfer})
      if (t->pretrained_embeddings) t->pretrained_embeddings = resolve(*t->pretrained_embeddings).string();
    for (const auto& c : j.value("corpora", json::array())) {
      check_keys(c, "corpora entry", {"name", "criterion", "path", "script"});
      CorpusDecl d;
      d.name = c.at("name");
      d.criterion = c.value("criterion", d.name);
      d.path = c.at("path").get<std::string>();
      d.path = resolve(d.path);
      d.script = parse_script(c.value("script", std::string("simplified")));
      rc.corpora.push_back(d);
    }
    return rc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

}  // namespace mccws::app
