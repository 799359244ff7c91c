#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "gemesh/feature_type.hpp"

namespace gemesh {

// Neigh kernels weight messages from neighbors and depend on the neighbor's
// direction angle theta; Self kernels weight a vertex's own feature and are
// constant. Both are constrained so that applying the kernel commutes with
// gauge changes.
enum class KernelKind { Neigh, Self };

// Solved basis of the equivariance-constrained kernel space for one pair of
// irrep frequencies. Each element is a matrix-valued trigonometric polynomial
//   K(theta) = C_0 + sum_{f=1..B} (Cc_f cos f*theta + Cs_f sin f*theta)
// with C matrices of shape (irrep_dim(n_out) x irrep_dim(n_in)). Elements are
// orthonormal under the theta-averaged Frobenius inner product, deterministic
// in order, and sign-fixed so each element's first nonzero coefficient is
// positive.
struct PairBasis {
  int n_in = 0, n_out = 0;
  int band_limit = 0;
  KernelKind kind = KernelKind::Neigh;
  // elements[k][c]: coefficient matrix c in the order [C_0, Cc_1, Cs_1, ...].
  // Self bases store only [C_0].
  std::vector<std::vector<Eigen::MatrixXd>> elements;

  int dim() const { return static_cast<int>(elements.size()); }
  Eigen::MatrixXd eval(int k, double theta) const;
};

// Numeric nullspace solve on an equispaced (theta, g) grid of 8B+9 points per
// axis, SVD cutoff 1e-8 relative to the largest singular value.
PairBasis solve_kernel_basis(int n_in, int n_out, KernelKind kind, int band_limit);

// Residual max over a grid of the constraint defect for one element; test and
// diagnostics helper.
double kernel_constraint_residual(const PairBasis& basis, int k, int grid = 64);

// Memoizes solved pair bases. Single-threaded use.
class KernelBasisCache {
 public:
  const PairBasis& get(int n_in, int n_out, KernelKind kind, int band_limit);

 private:
  std::map<std::tuple<int, int, int, int>, std::unique_ptr<PairBasis>> cache_;
};

KernelBasisCache& kernel_cache();

// Kernel space between two feature types: one solved pair basis per
// (n_in, n_out) frequency pair with nonzero dimension, plus copy counts.
// The weight tensor for a pair has shape (out_copies, in_copies * dim) with
// columns grouped by input copy (basis index fastest).
struct BlockKernel {
  FeatureType rho_in, rho_out;
  KernelKind kind = KernelKind::Neigh;
  int band_limit = 0;
  struct Pair {
    int n_in = 0, n_out = 0;
    int in_copies = 0, out_copies = 0;
    const PairBasis* basis = nullptr;
  };
  std::vector<Pair> pairs;  // ascending (n_in, n_out)

  int num_params() const;
};

BlockKernel block_kernel(const FeatureType& rho_in, const FeatureType& rho_out, KernelKind kind,
                         int band_limit, KernelBasisCache& cache = kernel_cache());

// Dense kernel matrix at angle theta in irrep-major layouts on both sides;
// oracle and test helper. pair_weights[i] matches pairs[i].
Eigen::MatrixXd assemble_block_kernel(const BlockKernel& bk,
                                      const std::vector<Eigen::MatrixXd>& pair_weights,
                                      double theta);

}  // namespace gemesh
