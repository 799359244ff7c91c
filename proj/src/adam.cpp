#include "gemesh/adam.hpp"

#include <cmath>

#include "gemesh/errors.hpp"

namespace gemesh {

void AdamState::reset(const std::vector<RowMat>& params) {
  t = 0;
  m.clear();
  v.clear();
  m.reserve(params.size());
  v.reserve(params.size());
  for (const RowMat& p : params) {
    m.push_back(RowMat::Zero(p.rows(), p.cols()));
    v.push_back(RowMat::Zero(p.rows(), p.cols()));
  }
}

void adam_step(std::vector<RowMat>& params, const std::vector<RowMat>& grads, AdamState& state,
               const AdamConfig& config) {
  check(params.size() == grads.size() && params.size() == state.m.size(), Err::ShapeMismatch,
        "optimizer state does not match the parameter list");
  ++state.t;
  double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (size_t i = 0; i < params.size(); ++i) {
    check(grads[i].rows() == params[i].rows() && grads[i].cols() == params[i].cols(),
          Err::ShapeMismatch, "gradient shape does not match its parameter");
    RowMat g = grads[i] + config.weight_decay * params[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g.cwiseProduct(g);
    RowMat mhat = state.m[i] / bc1;
    RowMat vhat = state.v[i] / bc2;
    RowMat denom = vhat.cwiseSqrt() + RowMat::Constant(vhat.rows(), vhat.cols(), config.eps);
    params[i] -= config.lr * mhat.cwiseQuotient(denom);
  }
}

double cosine_lr(double base_lr, int epoch, int total_epochs) {
  check(total_epochs > 0 && epoch >= 0 && epoch < total_epochs, Err::BadConfig,
        "cosine schedule epoch out of range");
  double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return base_lr * 0.5 * (1.0 + std::cos(M_PI * frac));
}

}  // namespace gemesh
