#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gemesh/checkpoint.hpp"
#include "gemesh/dataset.hpp"
#include "gemesh/harness.hpp"
#include "gemesh/model.hpp"

namespace gemesh {

// Output settings for the eval subcommand.
struct EvalConfig {
  std::vector<std::string> splits{"test_time"};
  bool times_1e3 = false;  // print RMSE scaled by 1000
};

// One document drives the whole pipeline. Sections are all optional; a
// top-level "seed" key seeds both the dataset and the optimizer before the
// sections are applied, so a section-level seed wins. The model section
// accepts a "preset" key (heat, wave, cahn_hilliard) that is expanded
// before the remaining keys are merged as overrides.
struct AppConfig {
  DatasetSpec dataset;
  ModelConfig model;
  TrainConfig optim;
  EvalConfig eval;
};

// nlohmann ADL hooks with merge semantics, like the other config types.
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const EvalConfig& c);
void from_json(const nlohmann::json& j, EvalConfig& c);
void to_json(nlohmann::json& j, const AppConfig& c);
void from_json(const nlohmann::json& j, AppConfig& c);

AppConfig parse_config(const std::string& text);  // ParseError
AppConfig load_config(const std::string& path);   // IoError, ParseError

// Replaces every seed at once (data generation, weight init, sample
// order). Backs the root-seed env var and the --seed flag.
void apply_seed_override(AppConfig& config, std::uint64_t seed);

// FNV-1a over the canonical JSON dump: stable across runs, sensitive to
// every field. Sixteen lowercase hex digits.
std::string config_hash(const AppConfig& config);

}  // namespace gemesh
