#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gemesh/layers.hpp"

namespace gemesh {

enum class Flavor { GemConv, EmanAttention, HermesBlock };

Flavor flavor_from_string(const std::string& name);  // UnknownFlavor on bad names
std::string flavor_to_string(Flavor flavor);

// Architecture knobs. Optimizer settings live with the training harness.
struct ModelConfig {
  Flavor flavor = Flavor::HermesBlock;
  int blocks = 1;       // message blocks (HermesBlock) or conv layers (others)
  int edge_layers = 4;  // convs in each block's edge net (HermesBlock only)
  int node_layers = 3;  // convs in each block's node net (HermesBlock only)
  int history = 5;      // input scalar channels per vertex
  int band_limit = 4;
  int hidden_max_freq = 2;
  int hidden_fields = 12;
  int relu_samples = 101;
  bool self_kernels = true;    // GemConv / EmanAttention self-interaction terms
  bool edge_features = true;   // HermesBlock geometric edge inputs
  bool residual = true;        // HermesBlock, applied where block types match
  bool identity_sigma = false;
  bool predict_delta = false;  // emit the change from the latest input channel
};

// Architecture presets for the bundled surface datasets: heat, wave,
// cahn_hilliard. Desk-scale training defaults, including a reduced
// nonlinearity grid.
ModelConfig preset(const std::string& dataset, Flavor flavor);

// A full predictor: a stack of message-passing layers between pointwise
// nonlinearities, then a linear projection to one scalar channel.
class Model {
 public:
  explicit Model(const ModelConfig& config);
  // blocks hold a pointer to the model-owned sampler
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  const FeatureType& input_type() const { return in_type_; }
  const FeatureType& hidden_type() const { return hidden_type_; }
  const RegularSampler* sampler() const;  // null when the nonlinearity is identity

  long num_params() const { return total_params_; }
  const std::vector<std::string>& param_names() const { return names_; }
  const std::vector<long>& param_sizes() const { return sizes_; }

  // N(0, 1/fan_in) per weight; fan_in counts input columns, times the mesh's
  // mean degree for neighbor kernels. Each parameter draws from its own
  // name-derived stream.
  std::vector<RowMat> init_params(std::uint64_t seed, double mean_degree) const;

  // registers one tape node per parameter, in param order
  std::vector<int> bind(Tape& t, const std::vector<RowMat>& params, bool trainable) const;

  // x is (V, history); the result is (V, 1)
  int forward(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const;

 private:
  ModelConfig config_;
  FeatureType in_type_, hidden_type_;
  RegularSampler sampler_;
  std::vector<GemConvLayer> gem_layers_;
  std::vector<EmanLayer> eman_layers_;
  std::vector<HermesBlockLayer> hermes_blocks_;
  ConvSpec projection_;
  std::vector<std::string> names_;
  std::vector<long> sizes_;
  long total_params_ = 0;

  int sigma(Tape& t, int x) const;
};

}  // namespace gemesh
