#include "gemesh/edge_plan.hpp"

#include <cmath>

namespace gemesh {

EdgePlan::EdgePlan(const Mesh& mesh, const TangentGeometry& geom) {
  num_vertices = mesh.vertices.rows();
  num_edges = static_cast<long>(mesh.nbrs.size());
  src.resize(num_edges);
  dst.resize(num_edges);
  for (long p = 0; p < num_vertices; ++p) {
    for (int e = mesh.nbr_offsets[p]; e < mesh.nbr_offsets[p + 1]; ++e) {
      src[e] = mesh.nbrs[e];
      dst[e] = static_cast<int>(p);
    }
  }
  by_dst = Tape::ScatterPlan::build(dst, static_cast<int>(num_vertices));

  std::vector<int> groups(num_vertices + num_edges);
  for (long p = 0; p < num_vertices; ++p) groups[p] = static_cast<int>(p);
  for (long e = 0; e < num_edges; ++e) groups[num_vertices + e] = dst[e];
  attn_groups = Tape::ScatterPlan::build(std::move(groups), static_cast<int>(num_vertices));

  theta = Eigen::Map<const Eigen::VectorXd>(geom.theta.data(), num_edges);
  transport = Eigen::Map<const Eigen::VectorXd>(geom.transport.data(), num_edges);
  edge_feats = edge_feature_table(mesh, geom);
  mean_degree = mesh.mean_degree();
}

const EdgePlan::Rotation& EdgePlan::rotation(int freq) const {
  auto it = rotations_.find(freq);
  if (it != rotations_.end()) return it->second;
  Rotation rot;
  rot.c = (static_cast<double>(freq) * transport.array()).cos();
  rot.s = (static_cast<double>(freq) * transport.array()).sin();
  return rotations_.emplace(freq, std::move(rot)).first->second;
}

const RowMat& EdgePlan::basis_table(const PairBasis& basis) const {
  auto it = tables_.find(&basis);
  if (it != tables_.end()) return it->second;
  int d_out = irrep_dim(basis.n_out);
  int d_in = irrep_dim(basis.n_in);
  RowMat table(num_edges, static_cast<long>(basis.dim()) * d_out * d_in);
  for (long e = 0; e < num_edges; ++e) {
    for (int k = 0; k < basis.dim(); ++k) {
      Eigen::MatrixXd m = basis.eval(k, theta[e]);
      for (int r = 0; r < d_out; ++r)
        for (int c = 0; c < d_in; ++c) table(e, (k * d_out + r) * d_in + c) = m(r, c);
    }
  }
  return tables_.emplace(&basis, std::move(table)).first->second;
}

}  // namespace gemesh
