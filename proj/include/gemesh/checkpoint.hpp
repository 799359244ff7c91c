#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "gemesh/model.hpp"

namespace gemesh {

// nlohmann ADL hooks; missing keys keep the target's current values, so
// parsing into a fresh config applies defaults and parsing into a preset
// applies overrides
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct Checkpoint {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::vector<RowMat> params;  // model parameter order
};

// Writes a JSON manifest at `path` (architecture, seed, layout table) and the
// raw parameter values as little-endian doubles in a sibling .bin file the
// manifest points to.
void save_checkpoint(const std::string& path, const Model& model,
                     const std::vector<RowMat>& params, std::uint64_t seed);

// Validates the manifest against the architecture it declares; throws
// BadCheckpoint on any inconsistency.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gemesh
