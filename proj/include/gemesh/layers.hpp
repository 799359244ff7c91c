#pragma once

#include <vector>

#include "gemesh/edge_plan.hpp"
#include "gemesh/feature_type.hpp"
#include "gemesh/kernel_basis.hpp"
#include "gemesh/regular_sampler.hpp"
#include "gemesh/tape.hpp"

namespace gemesh {

// distance as a scalar channel plus the in-plane unit direction as one
// frequency-1 channel, matching EdgePlan::edge_feats columns
FeatureType edge_feature_type();

// A block kernel bound to concrete canonical column layouts. in_cols[p][b]
// is the first column of input copy b of pair p in the canonical layout of
// in_type; out_cols likewise. Weights for the whole conv live in one flat
// (1, num_params) row, pair p's block starting at w_off[p] with shape
// (out_copies, in_copies * basis_dim) row-major.
struct ConvSpec {
  FeatureType in_type, out_type;
  BlockKernel kernel;
  std::vector<std::vector<long>> in_cols, out_cols;
  std::vector<long> w_off;
  long num_params = 0;
};

ConvSpec make_conv(const FeatureType& in, const FeatureType& out, KernelKind kind,
                   int band_limit);

// Dense canonical-layout kernel matrices; reference path for small meshes
// and oracles. w is the flat (1, num_params) weight row.
RowMat self_matrix(const ConvSpec& spec, const RowMat& w);
RowMat neigh_matrix(const ConvSpec& spec, const RowMat& w, double theta);

// Tape ops. Specs and plans are captured by reference and must outlive the
// tape. x rows: vertices for conv_self, directed edges for the others.
int conv_self(Tape& t, const ConvSpec& spec, int x, int w);
int conv_neigh(Tape& t, const EdgePlan& plan, const ConvSpec& spec, int x, int w);
// rotates each irrep block by its frequency times the edge's transport angle
int transport_to_dst(Tape& t, const EdgePlan& plan, const FeatureType& type, int x);
// sample -> relu -> project per field; rows may be vertices or edges
int regular_relu(Tape& t, const RegularSampler& sampler, int x);

// One message-passing layer. Weight node ids are passed in the order given
// by each layer's param_sizes(); all weights are flat (1, n) rows.
struct GemConvLayer {
  ConvSpec neigh, self;
  bool use_self = true;

  GemConvLayer(const FeatureType& in, const FeatureType& out, int band_limit, bool with_self);
  std::vector<long> param_sizes() const;
  std::vector<double> param_fans(double mean_degree) const;
  std::vector<std::string> param_names() const;
  int forward(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const;
};

struct EmanLayer {
  ConvSpec query, key_self, key_neigh, value_self, value_neigh;
  bool use_self = true;
  double scale = 1.0;  // 1/sqrt(C_att)

  EmanLayer(const FeatureType& in, const FeatureType& out, const FeatureType& key,
            int band_limit, bool with_self);
  std::vector<long> param_sizes() const;
  std::vector<double> param_fans(double mean_degree) const;
  std::vector<std::string> param_names() const;
  int forward(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const;
  // attention coefficients, (V + E, 1) with the self rows first, or (E, 1)
  // without self-interaction; exposed for invariance tests
  int attention(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const;
};

// Edge net on [f_dst, transported f_src, edge features], sum aggregation,
// node net on [messages, f]; nonlinearity after every conv. sampler may be
// null for identity nonlinearity.
struct HermesBlockLayer {
  std::vector<ConvSpec> edge_convs, node_convs;
  FeatureType in_type, out_type;
  bool with_edge_feats = true;
  bool residual = false;
  const RegularSampler* sampler = nullptr;  // not owned

  HermesBlockLayer(const FeatureType& in, const FeatureType& hidden, int n_edge, int n_node,
                   int band_limit, bool edge_feats, bool with_residual,
                   const RegularSampler* sigma);
  std::vector<long> param_sizes() const;
  std::vector<double> param_fans(double mean_degree) const;
  std::vector<std::string> param_names() const;
  int forward(Tape& t, const EdgePlan& plan, int x, const std::vector<int>& w) const;
};

}  // namespace gemesh
