#include "gemesh/regular_sampler.hpp"

#include <cmath>
#include <numbers>

#include "gemesh/errors.hpp"

namespace gemesh {

RegularSampler build_regular_sampler(const FeatureType& type, int samples) {
  RegularSampler rs;
  rs.type = type;
  check(type.is_regular(&rs.max_freq, &rs.fields), Err::NotRegularDecomposable,
        "nonlinearity input type is not a sum of regular fields: " + type.describe());
  check(samples > 2 * rs.max_freq, Err::Undersampled,
        "need more than " + std::to_string(2 * rs.max_freq) + " samples for max frequency " +
            std::to_string(rs.max_freq) + ", got " + std::to_string(samples));
  rs.samples = samples;
  int c = 2 * rs.max_freq + 1;
  rs.synthesis.resize(samples, c);
  rs.analysis.resize(c, samples);
  for (int k = 0; k < samples; ++k) {
    double phi = 2.0 * std::numbers::pi * k / samples;
    rs.synthesis(k, 0) = 1.0;
    rs.analysis(0, k) = 1.0 / samples;
    for (int n = 1; n <= rs.max_freq; ++n) {
      double cn = std::cos(n * phi), sn = std::sin(n * phi);
      rs.synthesis(k, 2 * n - 1) = cn;
      rs.synthesis(k, 2 * n) = sn;
      rs.analysis(2 * n - 1, k) = 2.0 * cn / samples;
      rs.analysis(2 * n, k) = 2.0 * sn / samples;
    }
  }
  return rs;
}

Eigen::RowVectorXd regular_relu_reference(const RegularSampler& rs, const Eigen::RowVectorXd& x) {
  check(x.size() == rs.type.dim(), Err::DimensionMismatch, "regular_relu: feature dim mismatch");
  int c = 2 * rs.max_freq + 1;
  Eigen::RowVectorXd out(x.size());
  for (int f = 0; f < rs.fields; ++f) {
    Eigen::VectorXd coeffs = x.segment(f * c, c).transpose();
    Eigen::VectorXd vals = (rs.synthesis * coeffs).cwiseMax(0.0);
    out.segment(f * c, c) = (rs.analysis * vals).transpose();
  }
  return out;
}

}  // namespace gemesh
