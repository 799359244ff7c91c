#include "gemesh/cotan.hpp"

#include <cmath>
#include <string>

#include "gemesh/errors.hpp"

namespace gemesh {

CotanOperator::CotanOperator(const Mesh& mesh) {
  const int V = mesh.num_vertices();
  offsets_ = mesh.nbr_offsets;
  nbrs_ = mesh.nbrs;
  weights_.assign(nbrs_.size(), 0.0);
  areas_ = Vec::Zero(V);

  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int corner = 0; corner < 3; ++corner) {
      const int i = mesh.faces(f, corner);
      const int j = mesh.faces(f, (corner + 1) % 3);
      const int k = mesh.faces(f, (corner + 2) % 3);
      const Eigen::Vector3d a = mesh.vertices.row(j) - mesh.vertices.row(i);
      const Eigen::Vector3d b = mesh.vertices.row(k) - mesh.vertices.row(i);
      const double cross = a.cross(b).norm();
      check(cross > 1e-12 * a.norm() * b.norm(), Err::DegenerateFace,
            "face " + std::to_string(f) + " has a vanishing angle at vertex " +
                std::to_string(i));
      const double cot = a.dot(b) / cross;
      // the angle at i weights the opposite edge jk, once per incident face
      weights_[mesh.slot_of(j, k)] += cot;
      weights_[mesh.slot_of(k, j)] += cot;
      if (corner == 0) {
        const double face_area = 0.5 * cross;
        areas_(i) += face_area / 3.0;
        areas_(j) += face_area / 3.0;
        areas_(k) += face_area / 3.0;
      }
    }
  }
}

Vec CotanOperator::apply(const Vec& u) const {
  Vec out = apply_weights(u);
  out.array() /= 2.0 * areas_.array();
  return out;
}

Vec CotanOperator::apply_weights(const Vec& u) const {
  check(u.size() == areas_.size(), Err::DimensionMismatch,
        "field has " + std::to_string(u.size()) + " entries, mesh has " +
            std::to_string(areas_.size()) + " vertices");
  const int V = num_vertices();
  Vec out(V);
  for (int p = 0; p < V; ++p) {
    double s = 0.0;
    for (int e = offsets_[p]; e < offsets_[p + 1]; ++e) {
      s += weights_[e] * (u(nbrs_[e]) - u(p));
    }
    out(p) = s;
  }
  return out;
}

}  // namespace gemesh
