#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gemesh/errors.hpp"
#include "gemesh/regular_sampler.hpp"
#include "gemesh/rng.hpp"

using namespace gemesh;

namespace {

// direct evaluation of the band-limited function described by one field
double field_eval(const Eigen::RowVectorXd& coeffs, double phi) {
  double v = coeffs[0];
  int max_freq = static_cast<int>((coeffs.size() - 1) / 2);
  for (int n = 1; n <= max_freq; ++n) {
    v += coeffs[2 * n - 1] * std::cos(n * phi) + coeffs[2 * n] * std::sin(n * phi);
  }
  return v;
}

}  // namespace

TEST_CASE("four-sample pair for one frequency matches hand values") {
  RegularSampler rs = build_regular_sampler(FeatureType::regular(1, 1), 4);
  Eigen::MatrixXd s_expected(4, 3);
  s_expected << 1, 1, 0, 1, 0, 1, 1, -1, 0, 1, 0, -1;
  Eigen::MatrixXd p_expected(3, 4);
  p_expected << 0.25, 0.25, 0.25, 0.25, 0.5, 0, -0.5, 0, 0, 0.5, 0, -0.5;
  CHECK((rs.synthesis - s_expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((rs.analysis - p_expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("analysis after synthesis is the identity whenever samples exceed bandwidth") {
  for (int max_freq : {0, 1, 2, 4}) {
    for (int n : {2 * max_freq + 1, 2 * max_freq + 2, 11, 101}) {
      if (n <= 2 * max_freq) continue;
      RegularSampler rs = build_regular_sampler(FeatureType::regular(max_freq, 1), n);
      Eigen::MatrixXd prod = rs.analysis * rs.synthesis;
      CHECK((prod - Eigen::MatrixXd::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }
}

TEST_CASE("rotated coefficients sample to the shifted function") {
  FeatureType t = FeatureType::regular(2, 1);
  RegularSampler rs = build_regular_sampler(t, 9);
  Rng rng(5);
  Eigen::RowVectorXd x(t.dim());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.normal();
  double g = 1.1;
  Eigen::RowVectorXd xr = rep_apply(t, g, x);
  for (int k = 0; k < rs.samples; ++k) {
    double phi = 2.0 * std::numbers::pi * k / rs.samples;
    double sampled = (rs.synthesis.row(k) * xr.transpose())(0, 0);
    CHECK(sampled == doctest::Approx(field_eval(x, phi - g)).epsilon(1e-12));
  }
}

TEST_CASE("pointwise relu on pure scalars is exact") {
  FeatureType t = FeatureType::scalars(3);
  RegularSampler rs = build_regular_sampler(t, 7);
  Eigen::RowVectorXd x(3);
  x << -2.0, 0.5, 3.0;
  Eigen::RowVectorXd y = regular_relu_reference(rs, x);
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(0.5));
  CHECK(y[2] == doctest::Approx(3.0));
}

TEST_CASE("nonlinearity equivariance defect shrinks as samples grow") {
  FeatureType t = FeatureType::regular(2, 2);
  Rng rng(17);
  double defect[3] = {0, 0, 0};
  int grids[3] = {11, 101, 1001};
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::RowVectorXd x(t.dim());
    for (int i = 0; i < x.size(); ++i) x[i] = rng.normal();
    double g = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int gi = 0; gi < 3; ++gi) {
      RegularSampler rs = build_regular_sampler(t, grids[gi]);
      Eigen::RowVectorXd lhs = regular_relu_reference(rs, rep_apply(t, g, x));
      Eigen::RowVectorXd rhs = rep_apply(t, g, regular_relu_reference(rs, x));
      defect[gi] += (lhs - rhs).norm() / std::max(rhs.norm(), 1e-12);
    }
  }
  CHECK(defect[1] < defect[0]);
  CHECK(defect[2] < defect[1]);
  CHECK(defect[1] / 40 < 0.05);
}

TEST_CASE("sampler rejects unusable configurations") {
  CHECK_THROWS_AS(build_regular_sampler(FeatureType({0, 2}), 11), Error);
  CHECK_THROWS_AS(build_regular_sampler(FeatureType::regular(2, 1), 4), Error);
  CHECK_THROWS_AS(build_regular_sampler(FeatureType::regular(1, 1), 2), Error);
  try {
    build_regular_sampler(FeatureType({1, 0}), 11);
    FAIL("expected NotRegularDecomposable");
  } catch (const Error& e) {
    CHECK(e.code() == Err::NotRegularDecomposable);
  }
  try {
    build_regular_sampler(FeatureType::regular(3, 1), 6);
    FAIL("expected Undersampled");
  } catch (const Error& e) {
    CHECK(e.code() == Err::Undersampled);
  }
}
