#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gemesh/mesh.hpp"

namespace gemesh {

enum class ReferenceChoice { LowestIndex, FirstNeighbor };

// Per-vertex tangent frames plus per-directed-edge angles. Directed edges
// share the mesh's CSR slots: slot e under vertex p describes neighbor
// q = mesh.nbrs[e], with theta[e] the angle of q in p's frame and
// transport[e] the angle g_{q->p} that carries features from q's gauge into
// p's gauge.
struct TangentGeometry {
  Eigen::Matrix<double, Eigen::Dynamic, 3> normals;
  Eigen::Matrix<double, Eigen::Dynamic, 3> e1, e2;
  std::vector<int> reference;  // reference neighbor vertex id per vertex
  std::vector<double> theta;
  std::vector<double> transport;
};

// Unit normals as the normalized mean of incident face normals.
Eigen::Matrix<double, Eigen::Dynamic, 3> vertex_normals(const Mesh& mesh);

// (x_v - x_b) projected into the tangent plane at b.
Eigen::Vector3d log_map(const Eigen::Vector3d& x_b, const Eigen::Vector3d& n_b,
                        const Eigen::Vector3d& x_v);

// Frames and neighbor angles; transporters left empty.
TangentGeometry build_frames(const Mesh& mesh,
                             ReferenceChoice choice = ReferenceChoice::LowestIndex);

// Angle of q's frame seen from p's frame after rotating q's tangent plane
// onto p's: features move between gauges as f_p = rho(g_{q->p}) f_q.
double parallel_transporter(const Mesh& mesh, const TangentGeometry& geom, int q, int p);

// Fills geom.transport for every directed edge.
void build_transporters(const Mesh& mesh, TangentGeometry& geom);

// build_frames + build_transporters
TangentGeometry build_geometry(const Mesh& mesh,
                               ReferenceChoice choice = ReferenceChoice::LowestIndex);

// Re-anchors the frame at p on a different neighbor. Returns the angle phi
// the frame rotated by (the old theta of the new reference). Angles and
// transporters touching p are updated in place.
double gauge_change(const Mesh& mesh, TangentGeometry& geom, int p, int new_reference);

// Per-directed-edge geometric features [|log_p(x_q)|, cos theta, sin theta];
// the angle pair transforms like a frequency-1 irrep at the target vertex.
Eigen::MatrixXd edge_feature_table(const Mesh& mesh, const TangentGeometry& geom);

}  // namespace gemesh
