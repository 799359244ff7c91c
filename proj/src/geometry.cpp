#include "gemesh/geometry.hpp"

#include <cmath>
#include <numbers>

#include "gemesh/errors.hpp"
#include "gemesh/rng.hpp"

namespace gemesh {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a == kTwoPi) a = 0.0;
  return a;
}

Eigen::Vector3d log_map_raw(const Eigen::Vector3d& x_b, const Eigen::Vector3d& n_b,
                            const Eigen::Vector3d& x_v) {
  Eigen::Vector3d d = x_v - x_b;
  return d - n_b.dot(d) * n_b;
}

bool log_is_zero(const Eigen::Vector3d& x_b, const Eigen::Vector3d& x_v,
                 const Eigen::Vector3d& log) {
  double ref = (x_v - x_b).norm();
  return log.norm() <= 1e-12 * ref || ref == 0.0;
}

// minimal rotation taking unit vector a to unit vector b
Eigen::Matrix3d minimal_rotation(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  double c = a.dot(b);
  check(c > -1.0 + 1e-10, Err::AntipodalNormals,
        "normals are (nearly) opposite; transport rotation is ambiguous");
  Eigen::Vector3d ax = a.cross(b);
  double s2 = ax.squaredNorm();
  if (s2 < 1e-30) return Eigen::Matrix3d::Identity();
  Eigen::Matrix3d k;
  k << 0, -ax.z(), ax.y(), ax.z(), 0, -ax.x(), -ax.y(), ax.x(), 0;
  return Eigen::Matrix3d::Identity() + k + k * k * ((1.0 - c) / s2);
}

}  // namespace

Eigen::Matrix<double, Eigen::Dynamic, 3> vertex_normals(const Mesh& mesh) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> acc =
      Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(mesh.num_vertices(), 3);
  double scale = std::max(mesh.bbox_diag(), 1e-300);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    Eigen::Vector3d a = mesh.vertices.row(mesh.faces(f, 0));
    Eigen::Vector3d b = mesh.vertices.row(mesh.faces(f, 1));
    Eigen::Vector3d c = mesh.vertices.row(mesh.faces(f, 2));
    Eigen::Vector3d n = (b - a).cross(c - a);
    check(n.norm() > 1e-14 * scale * scale, Err::DegenerateFace,
          "face " + std::to_string(f) + " has (near) zero area");
    n.normalize();
    for (int k = 0; k < 3; ++k) acc.row(mesh.faces(f, k)) += n;
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double len = acc.row(v).norm();
    check(len > 1e-12, Err::ZeroNormal,
          "face normals cancel at vertex " + std::to_string(v));
    acc.row(v) /= len;
  }
  return acc;
}

Eigen::Vector3d log_map(const Eigen::Vector3d& x_b, const Eigen::Vector3d& n_b,
                        const Eigen::Vector3d& x_v) {
  Eigen::Vector3d out = log_map_raw(x_b, n_b, x_v);
  check(!log_is_zero(x_b, x_v, out), Err::ZeroLog,
        "tangent projection vanishes; displacement is parallel to the normal");
  return out;
}

TangentGeometry build_frames(const Mesh& mesh, ReferenceChoice choice) {
  TangentGeometry geom;
  geom.normals = vertex_normals(mesh);
  geom.e1.resize(mesh.num_vertices(), 3);
  geom.e2.resize(mesh.num_vertices(), 3);
  geom.reference.resize(mesh.num_vertices());
  geom.theta.assign(mesh.nbrs.size(), 0.0);

  for (int p = 0; p < mesh.num_vertices(); ++p) {
    Eigen::Vector3d x_p = mesh.vertices.row(p);
    Eigen::Vector3d n_p = geom.normals.row(p);

    int ref_slot = -1;
    for (int e = mesh.nbr_offsets[p]; e < mesh.nbr_offsets[p + 1]; ++e) {
      Eigen::Vector3d x_q = mesh.vertices.row(mesh.nbrs[e]);
      Eigen::Vector3d lg = log_map_raw(x_p, n_p, x_q);
      if (!log_is_zero(x_p, x_q, lg)) {
        ref_slot = e;
        break;
      }
      check(choice == ReferenceChoice::LowestIndex, Err::ZeroLog,
            "first neighbor of vertex " + std::to_string(p) + " projects to zero");
    }
    check(ref_slot >= 0, Err::ZeroLog,
          "every neighbor of vertex " + std::to_string(p) + " projects to zero");

    int ref = mesh.nbrs[ref_slot];
    geom.reference[p] = ref;
    Eigen::Vector3d e1 = log_map_raw(x_p, n_p, mesh.vertices.row(ref)).normalized();
    Eigen::Vector3d e2 = n_p.cross(e1);
    geom.e1.row(p) = e1;
    geom.e2.row(p) = e2;

    for (int e = mesh.nbr_offsets[p]; e < mesh.nbr_offsets[p + 1]; ++e) {
      if (e == ref_slot) continue;  // stays exactly 0
      Eigen::Vector3d lg = log_map_raw(x_p, n_p, mesh.vertices.row(mesh.nbrs[e]));
      geom.theta[e] = wrap_angle(std::atan2(e2.dot(lg), e1.dot(lg)));
    }
  }
  return geom;
}

double parallel_transporter(const Mesh& mesh, const TangentGeometry& geom, int q, int p) {
  check(mesh.slot_of(p, q) >= 0, Err::NotANeighbor,
        std::to_string(q) + " is not a neighbor of " + std::to_string(p));
  Eigen::Matrix3d r = minimal_rotation(geom.normals.row(q), geom.normals.row(p));
  Eigen::Vector3d moved = r * geom.e1.row(q).transpose();
  return wrap_angle(std::atan2(moved.dot(geom.e2.row(p)), moved.dot(geom.e1.row(p))));
}

void build_transporters(const Mesh& mesh, TangentGeometry& geom) {
  geom.transport.assign(mesh.nbrs.size(), 0.0);
  for (int p = 0; p < mesh.num_vertices(); ++p) {
    for (int e = mesh.nbr_offsets[p]; e < mesh.nbr_offsets[p + 1]; ++e) {
      geom.transport[e] = parallel_transporter(mesh, geom, mesh.nbrs[e], p);
    }
  }
}

TangentGeometry build_geometry(const Mesh& mesh, ReferenceChoice choice) {
  TangentGeometry geom = build_frames(mesh, choice);
  build_transporters(mesh, geom);
  return geom;
}

double gauge_change(const Mesh& mesh, TangentGeometry& geom, int p, int new_reference) {
  int ref_slot = mesh.slot_of(p, new_reference);
  check(ref_slot >= 0, Err::NotANeighbor,
        std::to_string(new_reference) + " is not a neighbor of " + std::to_string(p));
  double phi = geom.theta[ref_slot];
  geom.reference[p] = new_reference;
  if (phi == 0.0) return 0.0;

  Eigen::Vector3d n = geom.normals.row(p);
  Eigen::Vector3d e1 = std::cos(phi) * geom.e1.row(p) + std::sin(phi) * geom.e2.row(p);
  e1.normalize();
  geom.e1.row(p) = e1;
  geom.e2.row(p) = n.cross(e1);

  for (int e = mesh.nbr_offsets[p]; e < mesh.nbr_offsets[p + 1]; ++e) {
    geom.theta[e] = wrap_angle(geom.theta[e] - phi);
    if (!geom.transport.empty()) {
      geom.transport[e] = wrap_angle(geom.transport[e] - phi);
    }
  }
  geom.theta[ref_slot] = 0.0;

  if (!geom.transport.empty()) {
    for (int e = mesh.nbr_offsets[p]; e < mesh.nbr_offsets[p + 1]; ++e) {
      int back = mesh.slot_of(mesh.nbrs[e], p);
      geom.transport[back] = wrap_angle(geom.transport[back] + phi);
    }
  }
  return phi;
}

Eigen::MatrixXd edge_feature_table(const Mesh& mesh, const TangentGeometry& geom) {
  Eigen::MatrixXd out(static_cast<long>(mesh.nbrs.size()), 3);
  for (int p = 0; p < mesh.num_vertices(); ++p) {
    Eigen::Vector3d x_p = mesh.vertices.row(p);
    Eigen::Vector3d n_p = geom.normals.row(p);
    for (int e = mesh.nbr_offsets[p]; e < mesh.nbr_offsets[p + 1]; ++e) {
      Eigen::Vector3d lg = log_map_raw(x_p, n_p, mesh.vertices.row(mesh.nbrs[e]));
      out(e, 0) = lg.norm();
      out(e, 1) = std::cos(geom.theta[e]);
      out(e, 2) = std::sin(geom.theta[e]);
    }
  }
  return out;
}

Mesh perturb_roughness(const Mesh& mesh, double scale, uint64_t seed) {
  check(scale >= 0.0, Err::BadConfig, "perturb_roughness: negative scale");
  Eigen::Matrix<double, Eigen::Dynamic, 3> moved = mesh.vertices;
  if (scale > 0.0) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> normals = vertex_normals(mesh);
    Rng rng(seed);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      moved.row(v) += rng.normal(0.0, scale) * normals.row(v);
    }
  }
  return make_mesh(std::move(moved), mesh.faces);
}

}  // namespace gemesh
