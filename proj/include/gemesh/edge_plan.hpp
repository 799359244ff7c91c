#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "gemesh/geometry.hpp"
#include "gemesh/kernel_basis.hpp"
#include "gemesh/mesh.hpp"
#include "gemesh/tape.hpp"

namespace gemesh {

// Message-passing schedule for one mesh: directed edges in the mesh's CSR
// slot order (edge e carries the message src[e] -> dst[e]), with the
// destination-gauge angles and transport rotations copied out of the
// geometry, plus memoized per-edge kernel-basis evaluations shared by every
// layer operating on the mesh. Layers hold plans by reference; a plan must
// outlive any tape built against it.
struct EdgePlan {
  long num_vertices = 0;
  long num_edges = 0;             // directed
  std::vector<int> src, dst;
  Tape::ScatterPlan by_dst;       // edge rows -> vertex rows
  Tape::ScatterPlan attn_groups;  // (vertex rows ++ edge rows) grouped per vertex
  Eigen::VectorXd theta;          // direction angle of src at dst
  Eigen::VectorXd transport;      // gauge angle src -> dst
  RowMat edge_feats;              // per edge [distance, cos theta, sin theta]
  double mean_degree = 0.0;

  EdgePlan(const Mesh& mesh, const TangentGeometry& geom);

  struct Rotation {
    Eigen::VectorXd c, s;  // cos/sin of freq * transport per edge
  };
  const Rotation& rotation(int freq) const;

  // Per-edge basis evaluation, row e laid out [(k, r, c)] with c fastest:
  // entry (k*d_out + r)*d_in + c holds element k of the pair at theta[e],
  // component (r, c).
  const RowMat& basis_table(const PairBasis& basis) const;

 private:
  mutable std::map<int, Rotation> rotations_;
  mutable std::map<const PairBasis*, RowMat> tables_;
};

}  // namespace gemesh
