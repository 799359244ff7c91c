#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gemesh/errors.hpp"
#include "gemesh/feature_type.hpp"
#include "gemesh/geometry.hpp"
#include "gemesh/mesh.hpp"
#include "gemesh/rng.hpp"

using namespace gemesh;

namespace {

constexpr double kPi = std::numbers::pi;

// planar fan: center vertex 0 at the origin with 4 ring neighbors in z=0
Mesh planar_fan() {
  Eigen::Matrix<double, Eigen::Dynamic, 3> v(5, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0, -1, 0, 0, 0, -1, 0;
  Eigen::Matrix<int, Eigen::Dynamic, 3> f(4, 3);
  f << 0, 1, 2, 0, 2, 3, 0, 3, 4, 0, 4, 1;
  return make_mesh(v, f);
}

double wrap(double a) {
  a = std::fmod(a, 2 * kPi);
  return a < 0 ? a + 2 * kPi : a;
}

// angular distance to zero mod 2*pi
double mod_defect(double a) {
  double w = wrap(a);
  return std::min(w, 2 * kPi - w);
}

}  // namespace

TEST_CASE("vertex normals: flat fan, tetra apex, octahedron corner") {
  Mesh fan = planar_fan();
  Eigen::Matrix<double, Eigen::Dynamic, 3> n = vertex_normals(fan);
  CHECK((n.row(0) - Eigen::RowVector3d(0, 0, 1)).norm() < 1e-15);

  Mesh tet = tetrahedron();
  Eigen::Matrix<double, Eigen::Dynamic, 3> tn = vertex_normals(tet);
  CHECK((tn.row(0) - Eigen::RowVector3d(0, 0, 1)).norm() < 1e-14);

  Mesh oct = octahedron();
  Eigen::Matrix<double, Eigen::Dynamic, 3> on = vertex_normals(oct);
  CHECK((on.row(0) - Eigen::RowVector3d(1, 0, 0)).norm() < 1e-14);
  CHECK((on.row(4) - Eigen::RowVector3d(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("log map removes the normal component") {
  Eigen::Vector3d out = log_map({0, 0, 0}, {0, 0, 1}, {1, 0, 2});
  CHECK((out - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);

  // in-plane displacement is returned unchanged
  Eigen::Vector3d flat = log_map({1, 1, 0}, {0, 0, 1}, {2, 3, 0});
  CHECK((flat - Eigen::Vector3d(1, 2, 0)).norm() == 0.0);

  try {
    log_map({0, 0, 0}, {0, 0, 1}, {0, 0, 5});
    FAIL("expected ZeroLog");
  } catch (const Error& e) {
    CHECK(e.code() == Err::ZeroLog);
  }
}

TEST_CASE("frames are orthonormal with zero reference angle") {
  for (const Mesh& m : {icosphere(1), uv_sphere(8, 5), grid_patch(4, 4),
                        perturb_roughness(icosphere(1), 0.05, 3)}) {
    TangentGeometry geom = build_frames(m);
    for (int p = 0; p < m.num_vertices(); ++p) {
      CHECK(std::abs(geom.e1.row(p).norm() - 1.0) < 1e-12);
      CHECK(std::abs(geom.e2.row(p).norm() - 1.0) < 1e-12);
      CHECK(std::abs(geom.e1.row(p).dot(geom.e2.row(p))) < 1e-12);
      Eigen::RowVector3d cross = geom.normals.row(p).cross(geom.e1.row(p));
      CHECK((geom.e2.row(p) - cross).norm() < 1e-12);
      CHECK(std::abs(geom.e1.row(p).dot(geom.normals.row(p))) < 1e-12);

      int ref_slot = m.slot_of(p, geom.reference[p]);
      REQUIRE(ref_slot >= 0);
      CHECK(geom.theta[ref_slot] == 0.0);
      // lowest-index convention: reference is the first usable neighbor
      CHECK(geom.reference[p] == m.neighbor(p, 0));
      for (int e = m.nbr_offsets[p]; e < m.nbr_offsets[p + 1]; ++e) {
        CHECK(geom.theta[e] >= 0.0);
        CHECK(geom.theta[e] < 2 * kPi);
      }
    }
  }
}

TEST_CASE("planar right angle appears in the neighbor angles") {
  Mesh fan = planar_fan();
  TangentGeometry geom = build_frames(fan);
  // at the center, reference is vertex 1 at +x; vertex 2 sits at +y
  CHECK(geom.reference[0] == 1);
  CHECK((geom.e1.row(0) - Eigen::RowVector3d(1, 0, 0)).norm() < 1e-15);
  CHECK((geom.e2.row(0) - Eigen::RowVector3d(0, 1, 0)).norm() < 1e-15);
  CHECK(geom.theta[fan.slot_of(0, 2)] == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(geom.theta[fan.slot_of(0, 3)] == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(geom.theta[fan.slot_of(0, 4)] == doctest::Approx(3 * kPi / 2).epsilon(1e-14));
}

TEST_CASE("transporter between coplanar frames measures the frame rotation") {
  Mesh quad = grid_patch(2, 2);
  TangentGeometry geom;
  geom.normals.setZero(4, 3);
  geom.e1.setZero(4, 3);
  geom.e2.setZero(4, 3);
  for (int i = 0; i < 4; ++i) geom.normals.row(i) << 0, 0, 1;

  int q = 0, p = 1;
  geom.e1.row(q) << 1, 0, 0;
  geom.e2.row(q) << 0, 1, 0;

  for (double phi : {0.0, 0.3, kPi / 2, 2.2, 5.9}) {
    // frame at p rotated by +phi relative to q's
    geom.e1.row(p) << std::cos(phi), std::sin(phi), 0;
    geom.e2.row(p) << -std::sin(phi), std::cos(phi), 0;
    double g = parallel_transporter(quad, geom, q, p);
    CHECK(mod_defect(g + phi) < 1e-12);  // g = -phi mod 2*pi
  }
}

TEST_CASE("transporters are antisymmetric across every edge") {
  for (const Mesh& m : {icosphere(1), perturb_roughness(icosphere(1), 0.08, 5),
                        uv_sphere(10, 7), grid_patch(5, 4)}) {
    TangentGeometry geom = build_geometry(m);
    for (int p = 0; p < m.num_vertices(); ++p) {
      for (int e = m.nbr_offsets[p]; e < m.nbr_offsets[p + 1]; ++e) {
        int q = m.nbrs[e];
        double fwd = geom.transport[e];
        double bwd = geom.transport[m.slot_of(q, p)];
        CHECK(mod_defect(fwd + bwd) < 1e-10);
        CHECK(fwd >= 0.0);
        CHECK(fwd < 2 * kPi);
      }
    }
  }
}

TEST_CASE("antipodal normals are rejected, non-neighbors are rejected") {
  Mesh quad = grid_patch(2, 2);
  TangentGeometry geom;
  geom.normals.setZero(4, 3);
  geom.e1.setZero(4, 3);
  geom.e2.setZero(4, 3);
  geom.normals.row(0) << 0, 0, 1;
  geom.normals.row(1) << 0, 0, -1;
  geom.e1.row(0) << 1, 0, 0;
  geom.e2.row(0) << 0, 1, 0;
  geom.e1.row(1) << 1, 0, 0;
  geom.e2.row(1) << 0, -1, 0;
  try {
    parallel_transporter(quad, geom, 0, 1);
    FAIL("expected AntipodalNormals");
  } catch (const Error& e) {
    CHECK(e.code() == Err::AntipodalNormals);
  }

  Mesh fan = planar_fan();
  TangentGeometry fg = build_geometry(fan);
  try {
    parallel_transporter(fan, fg, 1, 3);  // opposite ring vertices, not adjacent
    FAIL("expected NotANeighbor");
  } catch (const Error& e) {
    CHECK(e.code() == Err::NotANeighbor);
  }
}

TEST_CASE("gauge change updates frames, angles and transporters coherently") {
  Mesh m = perturb_roughness(icosphere(1), 0.05, 11);
  TangentGeometry geom = build_geometry(m);
  Rng rng(99);

  // identity change
  TangentGeometry copy = geom;
  double phi0 = gauge_change(m, copy, 3, geom.reference[3]);
  CHECK(phi0 == 0.0);
  CHECK((copy.e1 - geom.e1).cwiseAbs().maxCoeff() == 0.0);

  for (int trial = 0; trial < 30; ++trial) {
    int p = static_cast<int>(rng.below(m.num_vertices()));
    int slot = m.nbr_offsets[p] + static_cast<int>(rng.below(m.degree(p)));
    int new_ref = m.nbrs[slot];
    TangentGeometry changed = geom;
    double phi = gauge_change(m, changed, p, new_ref);

    CHECK(changed.reference[p] == new_ref);
    CHECK(changed.theta[m.slot_of(p, new_ref)] == 0.0);
    CHECK(std::abs(changed.e1.row(p).norm() - 1.0) < 1e-12);
    Eigen::RowVector3d cross = changed.normals.row(p).cross(changed.e1.row(p));
    CHECK((changed.e2.row(p) - cross).norm() < 1e-12);

    // frame rotated by phi in the old frame's coordinates
    double c = geom.e1.row(p).dot(changed.e1.row(p));
    double s = geom.e2.row(p).dot(changed.e1.row(p));
    CHECK(mod_defect(std::atan2(s, c) - phi) < 1e-10);

    // fresh geometry from the rotated frame agrees with the incremental update
    for (int e = m.nbr_offsets[p]; e < m.nbr_offsets[p + 1]; ++e) {
      int q = m.nbrs[e];
      double fresh = parallel_transporter(m, changed, q, p);
      CHECK(mod_defect(changed.transport[e] - fresh) < 1e-10);
      double fresh_back = parallel_transporter(m, changed, p, q);
      CHECK(mod_defect(changed.transport[m.slot_of(q, p)] - fresh_back) < 1e-10);
    }
  }
}

TEST_CASE("transport commutes with gauge changes on both endpoints") {
  Mesh m = perturb_roughness(icosphere(1), 0.06, 21);
  TangentGeometry geom = build_geometry(m);
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    int p = static_cast<int>(rng.below(m.num_vertices()));
    int e = m.nbr_offsets[p] + static_cast<int>(rng.below(m.degree(p)));
    int q = m.nbrs[e];

    Eigen::RowVectorXd f(2);
    f << rng.normal(), rng.normal();
    FeatureType rho1({1});

    // transport first, then change both gauges
    Eigen::RowVectorXd at_p = rep_apply(rho1, geom.transport[e], f);
    TangentGeometry changed = geom;
    int new_ref_p = m.nbrs[m.nbr_offsets[p] + static_cast<int>(rng.below(m.degree(p)))];
    int new_ref_q = m.nbrs[m.nbr_offsets[q] + static_cast<int>(rng.below(m.degree(q)))];
    double phi_p = gauge_change(m, changed, p, new_ref_p);
    double phi_q = gauge_change(m, changed, q, new_ref_q);
    Eigen::RowVectorXd lhs = rep_apply(rho1, -phi_p, at_p);

    // change gauges first, then transport the re-expressed feature
    Eigen::RowVectorXd f_new = rep_apply(rho1, -phi_q, f);
    Eigen::RowVectorXd rhs = rep_apply(rho1, changed.transport[e], f_new);

    CHECK((lhs - rhs).norm() < 1e-10);
  }
}

TEST_CASE("edge features measure log length and neighbor direction") {
  Mesh fan = planar_fan();
  TangentGeometry geom = build_geometry(fan);
  Eigen::MatrixXd feats = edge_feature_table(fan, geom);
  REQUIRE(feats.rows() == static_cast<long>(fan.nbrs.size()));
  int e12 = fan.slot_of(0, 2);
  CHECK(feats(e12, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(feats(e12, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(feats(e12, 2) == doctest::Approx(1.0).epsilon(1e-14));

  // the direction pair rotates like a frequency-1 feature under gauge change
  TangentGeometry changed = geom;
  double phi = gauge_change(fan, changed, 0, 3);
  Eigen::MatrixXd feats2 = edge_feature_table(fan, changed);
  FeatureType rho1({1});
  for (int e = fan.nbr_offsets[0]; e < fan.nbr_offsets[1]; ++e) {
    Eigen::RowVectorXd pair = feats.block(e, 1, 1, 2);
    Eigen::RowVectorXd expected = rep_apply(rho1, -phi, pair);
    CHECK((feats2.block(e, 1, 1, 2) - expected).norm() < 1e-12);
    CHECK(feats2(e, 0) == doctest::Approx(feats(e, 0)).epsilon(1e-14));
  }
}

TEST_CASE("geometry construction is bitwise deterministic") {
  Mesh m = perturb_roughness(icosphere(1), 0.04, 8);
  TangentGeometry a = build_geometry(m);
  TangentGeometry b = build_geometry(m);
  CHECK((a.normals - b.normals).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.e1 - b.e1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.e2 - b.e2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.reference == b.reference);
  CHECK(a.theta == b.theta);
  CHECK(a.transport == b.transport);
}
