#include "mccws/train/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>

#include "json.hpp"

namespace mccws {

namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic = {'M', 'C', 'C', 'W', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw CheckpointError("truncated checkpoint");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

json config_to_json(const ModelConfig& c) {
  return {{"embed_dim", c.embed_dim},   {"d_model", c.d_model},
          {"num_layers", c.num_layers}, {"num_heads", c.num_heads},
          {"d_ff", c.d_ff},             {"dropout", c.dropout},
          {"layer_norm_eps", c.layer_norm_eps}, {"decoder", to_string(c.decoder)},
          {"use_bigram", c.use_bigram}, {"use_position", c.use_position}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim");
  c.d_model = j.at("d_model");
  c.num_layers = j.at("num_layers");
  c.num_heads = j.at("num_heads");
  c.d_ff = j.at("d_ff");
  c.dropout = j.at("dropout");
  c.layer_norm_eps = j.at("layer_norm_eps");
  c.decoder = decoder_kind_from_string(j.at("decoder"));
  c.use_bigram = j.at("use_bigram");
  c.use_position = j.at("use_position");
  return c;
}

json table_to_json(const SymbolTable& t) {
  json rows = json::array();
  for (std::size_t i = 0; i < t.size(); ++i)
    rows.push_back({t.symbol(static_cast<std::int64_t>(i)), t.frequency(static_cast<std::int64_t>(i))});
  return rows;
}

SymbolTable table_from_json(const json& rows) {
  SymbolTable t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string symbol = rows[i].at(0);
    if (t.add(symbol, rows[i].at(1).get<std::int64_t>()) != static_cast<std::int64_t>(i))
      throw CheckpointError("vocabulary entry '" + symbol + "' is out of order");
  }
  return t;
}

}  // namespace

Checkpoint snapshot(const Model& model, std::int64_t step, std::map<std::string, double> dev_f1) {
  Checkpoint c{model.config(), model.vocab(), {}, step, std::move(dev_f1)};
  for (const auto& p : model.parameters()) c.params.push_back({p.name, p.value.detach(), false, std::nullopt});
  return c;
}

Model restore(const Checkpoint& checkpoint) {
  std::vector<Parameter> params;
  for (const auto& p : checkpoint.params) params.push_back({p.name, p.value.clone(), false, std::nullopt});
  return Model(checkpoint.config, checkpoint.vocab, std::move(params));
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  json directory = json::array();
  std::uint64_t offset = 0;
  for (const auto& p : checkpoint.params) {
    directory.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"offset", offset}, {"dtype", "f64"}});
    offset += p.value.data().size() * sizeof(double);
  }
  const json header = {{"config", config_to_json(checkpoint.config)},
                       {"vocab",
                        {{"unigrams", table_to_json(checkpoint.vocab.unigrams)},
                         {"bigrams", table_to_json(checkpoint.vocab.bigrams)},
                         {"criteria", checkpoint.vocab.criteria}}},
                       {"tensors", directory},
                       {"step", checkpoint.step},
                       {"dev_f1", checkpoint.dev_f1}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : checkpoint.params)
    for (double v : p.value.data()) put_le(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw CheckpointError(path.string() + " is not a checkpoint file");
  if (const auto version = get_le<std::uint32_t>(in); version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto header_size = get_le<std::uint64_t>(in);
  std::string text(header_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) throw CheckpointError("truncated checkpoint");

  try {
    const json header = json::parse(text);
    Checkpoint c;
    c.config = config_from_json(header.at("config"));
    c.vocab.unigrams = table_from_json(header.at("vocab").at("unigrams"));
    c.vocab.bigrams = table_from_json(header.at("vocab").at("bigrams"));
    for (const auto& name : header.at("vocab").at("criteria")) c.vocab.add_criterion(name);
    c.step = header.at("step");
    c.dev_f1 = header.at("dev_f1").get<std::map<std::string, double>>();

    const auto payload_start = in.tellg();
    for (const auto& entry : header.at("tensors")) {
      if (entry.at("dtype") != "f64") throw CheckpointError("unsupported tensor dtype");
      const Shape shape = entry.at("shape").get<Shape>();
      std::vector<Scalar> values(shape_numel(shape));
      in.seekg(payload_start + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
      for (auto& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
      c.params.push_back({entry.at("name"), Tensor::from(shape, std::move(values)), false, std::nullopt});
    }
    return c;
  } catch (const json::exception& e) {
    throw CheckpointError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
}

}  // namespace mccws
