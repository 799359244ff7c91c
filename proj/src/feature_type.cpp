#include "gemesh/feature_type.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gemesh/errors.hpp"

namespace gemesh {

Eigen::MatrixXd irrep_matrix(int n, double g) {
  check(n >= 0, Err::IndexOutOfRange, "irrep frequency must be nonnegative");
  if (n == 0) return Eigen::MatrixXd::Identity(1, 1);
  double c = std::cos(n * g), s = std::sin(n * g);
  Eigen::MatrixXd m(2, 2);
  m << c, -s, s, c;
  return m;
}

FeatureType::FeatureType(std::vector<int> slot_freqs) : freqs_(std::move(slot_freqs)) {
  offsets_.resize(freqs_.size());
  for (size_t i = 0; i < freqs_.size(); ++i) {
    check(freqs_[i] >= 0, Err::IndexOutOfRange, "irrep frequency must be nonnegative");
    offsets_[i] = dim_;
    dim_ += irrep_dim(freqs_[i]);
  }
  std::map<int, int> copies;
  for (int n : freqs_) ++copies[n];
  int off = 0;
  for (auto [n, c] : copies) {
    blocks_.push_back({n, c, off});
    off += c * irrep_dim(n);
  }
  perm_.reserve(dim_);
  for (const Block& b : blocks_) {
    for (size_t s = 0; s < freqs_.size(); ++s) {
      if (freqs_[s] != b.freq) continue;
      for (int d = 0; d < irrep_dim(b.freq); ++d) perm_.push_back(offsets_[s] + d);
    }
  }
  inv_perm_.resize(dim_);
  for (int j = 0; j < dim_; ++j) inv_perm_[perm_[j]] = j;
}

FeatureType FeatureType::regular(int max_freq, int fields) {
  check(max_freq >= 0 && fields > 0, Err::IndexOutOfRange, "regular type needs max_freq >= 0, fields > 0");
  std::vector<int> freqs;
  freqs.reserve(static_cast<size_t>(fields) * (max_freq + 1));
  for (int f = 0; f < fields; ++f) {
    for (int n = 0; n <= max_freq; ++n) freqs.push_back(n);
  }
  return FeatureType(std::move(freqs));
}

FeatureType FeatureType::concat(const FeatureType& other) const {
  std::vector<int> freqs = freqs_;
  freqs.insert(freqs.end(), other.freqs_.begin(), other.freqs_.end());
  return FeatureType(std::move(freqs));
}

int FeatureType::max_freq() const {
  return blocks_.empty() ? -1 : blocks_.back().freq;
}

int FeatureType::multiplicity(int n) const {
  for (const Block& b : blocks_) {
    if (b.freq == n) return b.copies;
  }
  return 0;
}

bool FeatureType::is_regular(int* max_freq_out, int* fields_out) const {
  if (freqs_.empty()) return false;
  size_t period = freqs_.size();
  for (size_t i = 1; i < freqs_.size(); ++i) {
    if (freqs_[i] == 0) {
      period = i;
      break;
    }
  }
  if (freqs_.size() % period != 0) return false;
  for (size_t i = 0; i < freqs_.size(); ++i) {
    if (freqs_[i] != static_cast<int>(i % period)) return false;
  }
  if (max_freq_out) *max_freq_out = static_cast<int>(period) - 1;
  if (fields_out) *fields_out = static_cast<int>(freqs_.size() / period);
  return true;
}

std::string FeatureType::describe() const {
  int mf = 0, fields = 0;
  std::string inner;
  if (is_regular(&mf, &fields)) {
    for (int n = 0; n <= mf; ++n) {
      if (n) inner += "+";
      inner += "r" + std::to_string(n);
    }
    if (fields == 1) return inner;
    return std::to_string(fields) + "*(" + inner + ")";
  }
  std::string out;
  for (auto [n, count] : run_lengths()) {
    if (!out.empty()) out += " + ";
    if (count > 1) out += std::to_string(count) + "*";
    out += "r" + std::to_string(n);
  }
  return out.empty() ? "empty" : out;
}

std::vector<std::pair<int, int>> FeatureType::run_lengths() const {
  std::vector<std::pair<int, int>> runs;
  for (int n : freqs_) {
    if (!runs.empty() && runs.back().first == n) {
      ++runs.back().second;
    } else {
      runs.push_back({n, 1});
    }
  }
  return runs;
}

FeatureType FeatureType::from_run_lengths(const std::vector<std::pair<int, int>>& runs) {
  std::vector<int> freqs;
  for (auto [n, count] : runs) {
    check(count > 0, Err::BadCheckpoint, "run length must be positive");
    for (int i = 0; i < count; ++i) freqs.push_back(n);
  }
  return FeatureType(std::move(freqs));
}

void rep_apply_in_place(const FeatureType& type, double g, Eigen::Ref<Eigen::RowVectorXd> x) {
  check(x.size() == type.dim(), Err::DimensionMismatch, "rep_apply: feature dim mismatch");
  for (int s = 0; s < type.slots(); ++s) {
    int n = type.freq(s);
    if (n == 0) continue;
    double c = std::cos(n * g), si = std::sin(n * g);
    int o = type.offset(s);
    double a = x[o], b = x[o + 1];
    x[o] = c * a - si * b;
    x[o + 1] = si * a + c * b;
  }
}

Eigen::RowVectorXd rep_apply(const FeatureType& type, double g, const Eigen::RowVectorXd& x) {
  Eigen::RowVectorXd out = x;
  rep_apply_in_place(type, g, out);
  return out;
}

}  // namespace gemesh
