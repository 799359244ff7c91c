#include "gemesh/model.hpp"

#include <cmath>

#include "gemesh/errors.hpp"
#include "gemesh/rng.hpp"

namespace gemesh {

Flavor flavor_from_string(const std::string& name) {
  if (name == "gem_conv") return Flavor::GemConv;
  if (name == "eman_attention") return Flavor::EmanAttention;
  if (name == "hermes_block") return Flavor::HermesBlock;
  fail(Err::UnknownFlavor, "unknown layer flavor '" + name + "'");
}

std::string flavor_to_string(Flavor flavor) {
  switch (flavor) {
    case Flavor::GemConv: return "gem_conv";
    case Flavor::EmanAttention: return "eman_attention";
    case Flavor::HermesBlock: return "hermes_block";
  }
  fail(Err::UnknownFlavor, "unknown layer flavor value");
}

ModelConfig preset(const std::string& dataset, Flavor flavor) {
  ModelConfig c;
  c.flavor = flavor;
  c.relu_samples = 31;
  if (dataset == "heat") {
    c.blocks = 1;
    c.edge_layers = 4;
    c.node_layers = 3;
  } else if (dataset == "wave") {
    c.blocks = 2;
    c.edge_layers = 2;
    c.node_layers = 1;
  } else if (dataset == "cahn_hilliard") {
    c.blocks = 1;
    c.edge_layers = 4;
    c.node_layers = 1;
  } else {
    fail(Err::BadConfig, "no preset for dataset '" + dataset + "'");
  }
  // conv and attention stacks have no per-block nets; depth chosen to land
  // near the message-block parameter count
  if (flavor != Flavor::HermesBlock) c.blocks = 4;
  return c;
}

Model::Model(const ModelConfig& config) : config_(config) {
  check(config.history >= 1, Err::BadArchitecture, "history must be at least 1");
  check(config.blocks >= 1, Err::BadArchitecture, "need at least one layer");
  check(config.hidden_fields >= 1 && config.hidden_max_freq >= 0, Err::BadArchitecture,
        "hidden type needs at least one field");
  check(config.band_limit >= 0, Err::BadArchitecture, "band limit must be nonnegative");
  in_type_ = FeatureType::scalars(config.history);
  hidden_type_ = FeatureType::regular(config.hidden_max_freq, config.hidden_fields);
  if (!config.identity_sigma)
    sampler_ = build_regular_sampler(hidden_type_, config.relu_samples);

  auto add_layer_params = [this](const std::string& prefix, const std::vector<std::string>& local,
                                 const std::vector<long>& sizes) {
    for (size_t i = 0; i < local.size(); ++i) {
      names_.push_back(prefix + "." + local[i]);
      sizes_.push_back(sizes[i]);
    }
  };

  for (int b = 0; b < config.blocks; ++b) {
    const FeatureType& in = b == 0 ? in_type_ : hidden_type_;
    const std::string prefix =
        (config.flavor == Flavor::HermesBlock ? "block" : "layer") + std::to_string(b);
    switch (config.flavor) {
      case Flavor::GemConv: {
        gem_layers_.emplace_back(in, hidden_type_, config.band_limit, config.self_kernels);
        add_layer_params(prefix, gem_layers_.back().param_names(),
                         gem_layers_.back().param_sizes());
        break;
      }
      case Flavor::EmanAttention: {
        eman_layers_.emplace_back(in, hidden_type_, hidden_type_, config.band_limit,
                                  config.self_kernels);
        add_layer_params(prefix, eman_layers_.back().param_names(),
                         eman_layers_.back().param_sizes());
        break;
      }
      case Flavor::HermesBlock: {
        const bool with_residual = config.residual && in == hidden_type_;
        hermes_blocks_.emplace_back(in, hidden_type_, config.edge_layers, config.node_layers,
                                    config.band_limit, config.edge_features, with_residual,
                                    config.identity_sigma ? nullptr : &sampler_);
        add_layer_params(prefix, hermes_blocks_.back().param_names(),
                         hermes_blocks_.back().param_sizes());
        break;
      }
    }
  }
  projection_ = make_conv(hidden_type_, FeatureType::scalars(1), KernelKind::Self,
                          config.band_limit);
  names_.push_back("proj");
  sizes_.push_back(projection_.num_params);
  total_params_ = 0;
  for (long s : sizes_) total_params_ += s;
}

const RegularSampler* Model::sampler() const {
  return config_.identity_sigma ? nullptr : &sampler_;
}

std::vector<RowMat> Model::init_params(std::uint64_t seed, double mean_degree) const {
  std::vector<double> fans;
  for (const auto& l : gem_layers_)
    for (double f : l.param_fans(mean_degree)) fans.push_back(f);
  for (const auto& l : eman_layers_)
    for (double f : l.param_fans(mean_degree)) fans.push_back(f);
  for (const auto& l : hermes_blocks_)
    for (double f : l.param_fans(mean_degree)) fans.push_back(f);
  fans.push_back(static_cast<double>(projection_.in_type.dim()));

  std::vector<RowMat> params;
  params.reserve(sizes_.size());
  for (size_t i = 0; i < sizes_.size(); ++i) {
    Rng rng(derive_seed(seed, names_[i]));
    const double stddev = 1.0 / std::sqrt(fans[i]);
    RowMat p(1, sizes_[i]);
    for (long j = 0; j < sizes_[i]; ++j) p(0, j) = rng.normal(0.0, stddev);
    params.push_back(std::move(p));
  }
  return params;
}

std::vector<int> Model::bind(Tape& t, const std::vector<RowMat>& params, bool trainable) const {
  check(params.size() == sizes_.size(), Err::ShapeMismatch,
        "parameter list does not match the model");
  std::vector<int> ids;
  ids.reserve(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    check(params[i].rows() == 1 && params[i].cols() == sizes_[i], Err::ShapeMismatch,
          "parameter '" + names_[i] + "' has the wrong size");
    ids.push_back(trainable ? t.leaf(params[i]) : t.constant(params[i]));
  }
  return ids;
}

int Model::sigma(Tape& t, int x) const {
  if (config_.identity_sigma) return x;
  return regular_relu(t, sampler_, x);
}

int Model::forward(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const {
  check(t.cols(x) == in_type_.dim(), Err::DimensionMismatch,
        "input width does not match the model history");
  check(static_cast<long>(w.size()) == static_cast<long>(sizes_.size()), Err::ShapeMismatch,
        "weight node list does not match the model");
  int h = x;
  size_t wi = 0;
  auto take = [&](size_t n) {
    std::vector<int> slice(w.begin() + wi, w.begin() + wi + n);
    wi += n;
    return slice;
  };
  switch (config_.flavor) {
    case Flavor::GemConv:
      for (const auto& layer : gem_layers_) {
        h = layer.forward(t, plan, h, take(layer.param_sizes().size()));
        h = sigma(t, h);
      }
      break;
    case Flavor::EmanAttention:
      for (const auto& layer : eman_layers_) {
        h = layer.forward(t, plan, h, take(layer.param_sizes().size()));
        h = sigma(t, h);
      }
      break;
    case Flavor::HermesBlock:
      // blocks apply the nonlinearity internally after every conv
      for (const auto& block : hermes_blocks_)
        h = block.forward(t, plan, h, take(block.param_sizes().size()));
      break;
  }
  int out = conv_self(t, projection_, h, w[wi]);
  if (config_.predict_delta) out = t.add(out, t.slice_cols(x, config_.history - 1, 1));
  return out;
}

}  // namespace gemesh
