#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace gemesh {

inline int irrep_dim(int n) { return n == 0 ? 1 : 2; }

// Rotation matrix of the frequency-n irrep at angle g: 1x1 identity for n=0,
// 2x2 rotation by n*g otherwise.
Eigen::MatrixXd irrep_matrix(int n, double g);

// An ordered direct sum of planar rotation irreps. Slot order is the memory
// layout of a feature row: slot k occupies irrep_dim(freq(k)) consecutive
// columns. Canonical constructors interleave by field (one copy of each
// frequency per field, ascending within the field), which keeps every field's
// coefficients contiguous.
class FeatureType {
 public:
  FeatureType() = default;
  explicit FeatureType(std::vector<int> slot_freqs);

  // fields copies of [0, 1, ..., max_freq]
  static FeatureType regular(int max_freq, int fields);
  static FeatureType scalars(int count) { return regular(0, count); }

  FeatureType concat(const FeatureType& other) const;

  int dim() const { return dim_; }
  int slots() const { return static_cast<int>(freqs_.size()); }
  int freq(int slot) const { return freqs_[slot]; }
  int offset(int slot) const { return offsets_[slot]; }
  int max_freq() const;
  int multiplicity(int n) const;

  bool operator==(const FeatureType& o) const { return freqs_ == o.freqs_; }
  bool operator!=(const FeatureType& o) const { return !(*this == o); }

  // Irrep-major view: all frequency-0 copies first, then frequency 1, etc.
  // Copies of equal frequency keep their slot order.
  struct Block {
    int freq = 0;
    int copies = 0;
    int offset = 0;  // column offset in the irrep-major layout
    int cols() const { return copies * irrep_dim(freq); }
  };
  const std::vector<Block>& blocks() const { return blocks_; }

  // Column permutations between the two layouts, in the convention
  // out.col(j) = in.col(perm[j]).
  const std::vector<int>& cols_to_irrep_major() const { return perm_; }
  const std::vector<int>& cols_from_irrep_major() const { return inv_perm_; }

  // True when the slot list is some number of fields times [0..max_freq].
  bool is_regular(int* max_freq_out = nullptr, int* fields_out = nullptr) const;

  std::string describe() const;

  // (frequency, run length) pairs over consecutive equal-frequency slots
  std::vector<std::pair<int, int>> run_lengths() const;
  static FeatureType from_run_lengths(const std::vector<std::pair<int, int>>& runs);

 private:
  std::vector<int> freqs_;
  std::vector<int> offsets_;
  std::vector<Block> blocks_;
  std::vector<int> perm_, inv_perm_;
  int dim_ = 0;
};

// Apply the type's rotation representation at angle g to a feature row
// (canonical layout).
void rep_apply_in_place(const FeatureType& type, double g, Eigen::Ref<Eigen::RowVectorXd> x);
Eigen::RowVectorXd rep_apply(const FeatureType& type, double g, const Eigen::RowVectorXd& x);

}  // namespace gemesh
