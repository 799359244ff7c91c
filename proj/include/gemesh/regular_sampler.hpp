#pragma once

#include <Eigen/Dense>

#include "gemesh/feature_type.hpp"

namespace gemesh {

// Sampling pair for pointwise nonlinearities on regular feature types. Each
// field's coefficients [a0, a1, b1, ..., aF, bF] describe the band-limited
// function f(phi) = a0 + sum_n (a_n cos n*phi + b_n sin n*phi); S evaluates it
// on the equispaced grid phi_k = 2*pi*k/N and P recovers the coefficients.
// P*S = I exactly whenever N > 2F, so the pair is lossless on band-limited
// input; rotating the coefficients shifts the sampled function, which is what
// makes a sampled pointwise nonlinearity approximately equivariant.
struct RegularSampler {
  FeatureType type;
  int samples = 0;   // N
  int max_freq = 0;  // F
  int fields = 0;
  Eigen::MatrixXd synthesis;  // N x (2F+1)
  Eigen::MatrixXd analysis;   // (2F+1) x N
};

RegularSampler build_regular_sampler(const FeatureType& type, int samples);

// Reference nonlinearity (synthesize, relu, analyze per field) for a single
// feature row. The training path uses a fused batched version of the same map.
Eigen::RowVectorXd regular_relu_reference(const RegularSampler& sampler,
                                          const Eigen::RowVectorXd& x);

}  // namespace gemesh
