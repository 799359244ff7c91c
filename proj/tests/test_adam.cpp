#include "gemesh/adam.hpp"

#include <doctest.h>

#include <cmath>

#include "gemesh/errors.hpp"

using namespace gemesh;

TEST_CASE("first step matches the closed form") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.0;
  std::vector<RowMat> params = {RowMat::Constant(1, 1, 1.0)};
  std::vector<RowMat> grads = {RowMat::Constant(1, 1, 0.5)};
  AdamState st;
  st.reset(params);
  adam_step(params, grads, st, cfg);

  // With zeroed moments the bias-corrected first step is lr * g / (|g| + eps).
  double want = 1.0 - 0.1 * (0.5 / (0.5 + 1e-8));
  CHECK(params[0](0, 0) == doctest::Approx(want).epsilon(1e-15));
  CHECK(st.t == 1);
  CHECK(st.m[0](0, 0) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(st.v[0](0, 0) == doctest::Approx(0.001 * 0.25).epsilon(1e-15));
}

TEST_CASE("second step matches a hand-rolled update") {
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.0;
  std::vector<RowMat> params = {RowMat::Constant(1, 2, 2.0)};
  std::vector<RowMat> g1 = {(RowMat(1, 2) << 0.3, -0.7).finished()};
  std::vector<RowMat> g2 = {(RowMat(1, 2) << -0.1, 0.4).finished()};
  AdamState st;
  st.reset(params);
  adam_step(params, g1, st, cfg);
  adam_step(params, g2, st, cfg);

  double m = 0, v = 0, x = 2.0;
  double gs[2] = {0.3, -0.1};
  for (int t = 1; t <= 2; ++t) {
    double g = gs[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    double mh = m / (1.0 - std::pow(0.9, t));
    double vh = v / (1.0 - std::pow(0.999, t));
    x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
  }
  CHECK(params[0](0, 0) == doctest::Approx(x).epsilon(1e-14));
}

TEST_CASE("weight decay contributes to the gradient before the moments") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 1e-5;
  std::vector<RowMat> params = {RowMat::Constant(1, 1, 2.0)};
  std::vector<RowMat> grads = {RowMat::Zero(1, 1)};
  AdamState st;
  st.reset(params);
  adam_step(params, grads, st, cfg);
  // effective gradient 2e-5; first step is nearly a full lr move in its direction
  double g = 2e-5;
  double want = 2.0 - 0.1 * (g / (g + 1e-8));
  CHECK(params[0](0, 0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(st.m[0](0, 0) == doctest::Approx(0.1 * g).epsilon(1e-12));
}

TEST_CASE("adam drives a quadratic toward its minimum") {
  AdamConfig cfg;
  cfg.lr = 0.05;
  cfg.weight_decay = 0.0;
  std::vector<RowMat> params = {(RowMat(1, 2) << 3.0, -2.0).finished()};
  AdamState st;
  st.reset(params);
  for (int i = 0; i < 400; ++i) {
    std::vector<RowMat> grads = {2.0 * params[0]};
    adam_step(params, grads, st, cfg);
  }
  CHECK(params[0].cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("cosine schedule endpoints and midpoint") {
  CHECK(cosine_lr(0.4, 0, 100) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(cosine_lr(0.4, 50, 100) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(cosine_lr(0.4, 99, 100) < 0.4 * 0.001);
  CHECK(cosine_lr(0.4, 99, 100) > 0.0);
  bool threw = false;
  try {
    cosine_lr(0.4, 100, 100);
  } catch (const Error& e) {
    threw = e.code() == Err::BadConfig;
  }
  CHECK(threw);
}

TEST_CASE("mismatched state is rejected") {
  AdamConfig cfg;
  std::vector<RowMat> params = {RowMat::Zero(2, 2)};
  std::vector<RowMat> grads = {RowMat::Zero(2, 2)};
  AdamState st;  // never reset
  bool threw = false;
  try {
    adam_step(params, grads, st, cfg);
  } catch (const Error& e) {
    threw = e.code() == Err::ShapeMismatch;
  }
  CHECK(threw);
}
