#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mccws/corpus/vocab.hpp"
#include "mccws/model/config.hpp"
#include "mccws/model/model.hpp"
#include "mccws/numeric/optimizer.hpp"

namespace mccws {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ModelConfig config;
  Vocab vocab;
  std::vector<Parameter> params;  // value copies, in model order
  std::int64_t step = 0;
  std::map<std::string, double> dev_f1;  // per criterion, at save time
};

// Deep copy of the model's current parameters.
Checkpoint snapshot(const Model& model, std::int64_t step, std::map<std::string, double> dev_f1);
Model restore(const Checkpoint& checkpoint);

// File layout: "MCCWSCKP", u32 version, u64 header length, JSON header
// (config, vocab, tensor directory of name/shape/offset/dtype, step, dev_f1),
// then every tensor as little-endian float64 at its directory offset.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mccws
