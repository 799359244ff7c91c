#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "gemesh/errors.hpp"
#include "gemesh/mesh.hpp"

using namespace gemesh;

namespace {

Err code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a gemesh::Error");
  return Err::IoError;
}

}  // namespace

TEST_CASE("smallest OFF mesh loads with derived edges") {
  Mesh m = parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_faces() == 1);
  CHECK(m.num_edges() == 3);
  CHECK(m.has_boundary());
  CHECK(m.degree(0) == 2);
  CHECK(m.slot_of(0, 1) >= 0);
  CHECK(m.slot_of(1, 2) >= 0);
}

TEST_CASE("OFF parser accepts comments and flags malformed input") {
  Mesh m = parse_off("# hello\nOFF # header\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
  CHECK(m.num_vertices() == 3);

  CHECK(code_of([] { parse_off("3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"); }) == Err::ParseError);
  CHECK(code_of([] { parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 zebra\n3 0 1 2\n"); }) ==
        Err::ParseError);
  CHECK(code_of([] { parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"); }) ==
        Err::ParseError);
  CHECK(code_of([] {
          parse_off("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
        }) == Err::NonTriangular);
}

TEST_CASE("OBJ parser handles index variants") {
  std::string obj =
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\n"
      "f 1/1/1 2//1 3\n";
  Mesh m = parse_obj(obj);
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_faces() == 1);

  // negative indices count back from the latest vertex
  Mesh m2 = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  CHECK(m2.num_faces() == 1);

  CHECK(code_of([] { parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n"); }) ==
        Err::NonTriangular);
  CHECK(code_of([] { parse_obj("v 0 0 0\nv 1 0 0\nf 1 2 5\n"); }) == Err::ParseError);
}

TEST_CASE("tetrahedron is closed and manifold") {
  Mesh m = tetrahedron();
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_faces() == 4);
  CHECK(m.num_edges() == 6);
  CHECK_FALSE(m.has_boundary());
  for (signed char c : m.edge_face_count) CHECK(c == 2);
  for (int v = 0; v < 4; ++v) CHECK(m.degree(v) == 3);
}

TEST_CASE("validation rejects broken connectivity") {
  // edge (0,1) in three faces
  Eigen::Matrix<double, Eigen::Dynamic, 3> v(5, 3);
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, -1, 0;
  Eigen::Matrix<int, Eigen::Dynamic, 3> f(3, 3);
  f << 0, 1, 2, 0, 1, 3, 0, 1, 4;
  CHECK(code_of([&] { make_mesh(v, f); }) == Err::NonManifold);

  // unreferenced vertex
  Eigen::Matrix<double, Eigen::Dynamic, 3> v2(4, 3);
  v2 << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 5, 5;
  Eigen::Matrix<int, Eigen::Dynamic, 3> f2(1, 3);
  f2 << 0, 1, 2;
  CHECK(code_of([&] { make_mesh(v2, f2); }) == Err::IsolatedVertex);

  // repeated vertex in a face
  Eigen::Matrix<int, Eigen::Dynamic, 3> f3(1, 3);
  f3 << 0, 1, 1;
  CHECK(code_of([&] { make_mesh(v2, f3); }) == Err::DegenerateFace);

  // zero-area face: three collinear points
  Eigen::Matrix<double, Eigen::Dynamic, 3> v4(3, 3);
  v4 << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  Eigen::Matrix<int, Eigen::Dynamic, 3> f4(1, 3);
  f4 << 0, 1, 2;
  CHECK(code_of([&] { make_mesh(v4, f4); }) == Err::DegenerateFace);
}

TEST_CASE("winding is repaired when possible and rejected when not") {
  // tetrahedron with one face reversed still loads consistently
  Mesh good = tetrahedron();
  Eigen::Matrix<int, Eigen::Dynamic, 3> flipped = good.faces;
  std::swap(flipped(2, 1), flipped(2, 2));
  Mesh fixed = make_mesh(good.vertices, flipped);
  // consistency: each interior edge traversed once per direction
  std::map<std::pair<int, int>, int> dir;
  for (int f = 0; f < fixed.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      ++dir[{fixed.faces(f, k), fixed.faces(f, (k + 1) % 3)}];
    }
  }
  for (const auto& [e, n] : dir) {
    CHECK(n == 1);
    CHECK(dir.count({e.second, e.first}) == 1);
  }

  // five-triangle band with a half twist admits no consistent winding
  Eigen::Matrix<double, Eigen::Dynamic, 3> v(5, 3);
  for (int i = 0; i < 5; ++i) {
    double a = 2.0 * 3.14159265358979 * i / 5.0;
    v.row(i) << std::cos(a), std::sin(a), 0.1 * i;
  }
  Eigen::Matrix<int, Eigen::Dynamic, 3> f(5, 3);
  f << 0, 1, 2, 1, 2, 3, 2, 3, 4, 3, 4, 0, 4, 0, 1;
  CHECK(code_of([&] { make_mesh(v, f); }) == Err::NonOrientable);
}

TEST_CASE("generated spheres hit the expected sizes") {
  CHECK(icosphere(0).num_vertices() == 12);
  CHECK(icosphere(1).num_vertices() == 42);
  CHECK(icosphere(2).num_vertices() == 162);
  CHECK(icosphere(3).num_vertices() == 642);
  CHECK_FALSE(icosphere(2).has_boundary());
  // closed surface: V - E + F = 2
  Mesh s = icosphere(2);
  CHECK(s.num_vertices() - s.num_edges() + s.num_faces() == 2);

  Mesh uv = uv_sphere(30, 28);
  CHECK(uv.num_vertices() == 2 + 30 * 28);
  CHECK_FALSE(uv.has_boundary());
  CHECK(uv.num_vertices() - uv.num_edges() + uv.num_faces() == 2);

  // radius scales every vertex
  Mesh big = icosphere(1, 2.5);
  for (int i = 0; i < big.num_vertices(); ++i) {
    CHECK(big.vertices.row(i).norm() == doctest::Approx(2.5).epsilon(1e-12));
  }
}

TEST_CASE("grid patch has boundary and frozen mean edge length") {
  Mesh g = grid_patch(2, 2);
  CHECK(g.num_vertices() == 4);
  CHECK(g.num_faces() == 2);
  CHECK(g.num_edges() == 5);
  CHECK(g.has_boundary());
  CHECK(g.mean_edge_length() == doctest::Approx((4.0 + std::sqrt(2.0)) / 5.0).epsilon(1e-14));

  Mesh g2 = grid_patch(5, 4, 0.5);
  CHECK(g2.num_vertices() == 20);
  CHECK(g2.has_boundary());
}

TEST_CASE("perturb_roughness is seeded and keeps connectivity") {
  Mesh base = icosphere(1);
  Mesh same = perturb_roughness(base, 0.0, 7);
  CHECK((same.vertices - base.vertices).cwiseAbs().maxCoeff() == 0.0);

  Mesh a = perturb_roughness(base, 0.05, 7);
  Mesh b = perturb_roughness(base, 0.05, 7);
  Mesh c = perturb_roughness(base, 0.05, 8);
  CHECK((a.vertices - b.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.vertices - c.vertices).cwiseAbs().maxCoeff() > 0.0);
  CHECK((a.faces - base.faces).cwiseAbs().maxCoeff() == 0);
  CHECK((a.vertices - base.vertices).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("OFF save and load round-trips bitwise") {
  namespace fs = std::filesystem;
  Mesh m = perturb_roughness(icosphere(1), 0.03, 12);
  fs::path tmp = fs::temp_directory_path() / "gemesh_roundtrip.off";
  save_off(m, tmp.string());
  Mesh back = load_mesh(tmp.string());
  CHECK(back.num_vertices() == m.num_vertices());
  CHECK((back.vertices - m.vertices).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.faces - m.faces).cwiseAbs().maxCoeff() == 0);
  fs::remove(tmp);

  CHECK(code_of([] { load_mesh("/nonexistent/path/mesh.off"); }) == Err::IoError);

  fs::path odd = fs::temp_directory_path() / "gemesh_unknown.stl";
  std::ofstream(odd) << "solid nothing\n";
  CHECK(code_of([&] { load_mesh(odd.string()); }) == Err::ParseError);
  fs::remove(odd);
}
