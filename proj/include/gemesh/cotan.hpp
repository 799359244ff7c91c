#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gemesh/mesh.hpp"

namespace gemesh {

using Vec = Eigen::VectorXd;

// Discrete Laplace-Beltrami operator: cotangent edge weights with barycentric
// vertex areas,
//
//   (L u)_p = 1 / (2 A_p) * sum_q w_pq (u_q - u_p)
//
// where w_pq sums the cotangents of the angles opposite edge pq (one term on
// boundary edges). Weights are stored per directed-edge slot aligned with the
// mesh CSR, so w_pq == w_qp holds bitwise. The operator copies everything it
// needs; the mesh may be discarded afterwards.
class CotanOperator {
 public:
  explicit CotanOperator(const Mesh& mesh);

  int num_vertices() const { return static_cast<int>(areas_.size()); }
  const Vec& vertex_areas() const { return areas_; }
  double total_area() const { return areas_.sum(); }
  // weight of the undirected edge behind directed slot e (mesh CSR order)
  double slot_weight(int e) const { return weights_[e]; }

  // L u
  Vec apply(const Vec& u) const;
  // (W u)_p = sum_q w_pq (u_q - u_p), i.e. apply without the area scaling.
  // W is symmetric and annihilates constants, which makes it the right
  // building block for mass-conserving implicit solves.
  Vec apply_weights(const Vec& u) const;

 private:
  std::vector<int> offsets_;
  std::vector<int> nbrs_;
  std::vector<double> weights_;
  Vec areas_;
};

}  // namespace gemesh
