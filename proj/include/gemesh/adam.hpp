#pragma once

#include <vector>

#include "gemesh/tape.hpp"

namespace gemesh {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;  // L2 term added to the gradient before the moments
};

// First/second moment accumulators, one per parameter tensor.
struct AdamState {
  long t = 0;
  std::vector<RowMat> m;
  std::vector<RowMat> v;
  void reset(const std::vector<RowMat>& params);
};

// One bias-corrected update in place. grads must match params in count and shape.
void adam_step(std::vector<RowMat>& params, const std::vector<RowMat>& grads, AdamState& state,
               const AdamConfig& config);

// Half-cosine decay from base_lr to 0, stepped once per epoch.
double cosine_lr(double base_lr, int epoch, int total_epochs);

}  // namespace gemesh
