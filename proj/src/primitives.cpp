#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "gemesh/errors.hpp"
#include "gemesh/mesh.hpp"

namespace gemesh {

namespace {

Mesh from_lists(const std::vector<Eigen::RowVector3d>& v, const std::vector<Eigen::RowVector3i>& f) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> vm(v.size(), 3);
  for (size_t i = 0; i < v.size(); ++i) vm.row(i) = v[i];
  Eigen::Matrix<int, Eigen::Dynamic, 3> fm(f.size(), 3);
  for (size_t i = 0; i < f.size(); ++i) fm.row(i) = f[i];
  return make_mesh(std::move(vm), std::move(fm));
}

}  // namespace

Mesh tetrahedron() {
  // apex on the z axis above an equilateral base in z=0
  std::vector<Eigen::RowVector3d> v = {{0, 0, 1}};
  for (int k = 0; k < 3; ++k) {
    double a = 2.0 * std::numbers::pi * k / 3.0;
    v.push_back({std::cos(a), std::sin(a), 0.0});
  }
  std::vector<Eigen::RowVector3i> f = {{1, 3, 2}, {0, 1, 2}, {0, 2, 3}, {0, 3, 1}};
  return from_lists(v, f);
}

Mesh octahedron() {
  std::vector<Eigen::RowVector3d> v = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                       {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
  std::vector<Eigen::RowVector3i> f = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                       {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return from_lists(v, f);
}

Mesh icosphere(int subdivisions, double radius) {
  check(subdivisions >= 0 && subdivisions <= 8, Err::BadConfig, "icosphere subdivision depth");
  check(radius > 0, Err::BadConfig, "icosphere radius");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::RowVector3d> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Eigen::RowVector3i> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Eigen::RowVector3d m = (v[a] + v[b]).normalized();
      v.push_back(m);
      int id = static_cast<int>(v.size()) - 1;
      midpoint[key] = id;
      return id;
    };
    std::vector<Eigen::RowVector3i> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      int a = tri[0], b = tri[1], c = tri[2];
      int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v) p *= radius;
  return from_lists(v, f);
}

Mesh uv_sphere(int n_slices, int n_rings, double radius) {
  check(n_slices >= 3 && n_rings >= 1, Err::BadConfig, "uv_sphere needs >=3 slices, >=1 ring");
  check(radius > 0, Err::BadConfig, "uv_sphere radius");
  std::vector<Eigen::RowVector3d> v;
  v.push_back({0, 0, radius});   // north pole: 0
  for (int r = 1; r <= n_rings; ++r) {
    double polar = std::numbers::pi * r / (n_rings + 1);
    double z = std::cos(polar), rho = std::sin(polar);
    for (int s = 0; s < n_slices; ++s) {
      double a = 2.0 * std::numbers::pi * s / n_slices;
      v.push_back({radius * rho * std::cos(a), radius * rho * std::sin(a), radius * z});
    }
  }
  int south = static_cast<int>(v.size());
  v.push_back({0, 0, -radius});

  auto ring_vertex = [&](int r, int s) { return 1 + r * n_slices + (s % n_slices); };
  std::vector<Eigen::RowVector3i> f;
  for (int s = 0; s < n_slices; ++s) {
    f.push_back({0, ring_vertex(0, s), ring_vertex(0, s + 1)});
  }
  for (int r = 0; r + 1 < n_rings; ++r) {
    for (int s = 0; s < n_slices; ++s) {
      int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      f.push_back({a, c, d});
      f.push_back({a, d, b});
    }
  }
  for (int s = 0; s < n_slices; ++s) {
    f.push_back({south, ring_vertex(n_rings - 1, s + 1), ring_vertex(n_rings - 1, s)});
  }
  return from_lists(v, f);
}

Mesh grid_patch(int nx, int ny, double spacing) {
  check(nx >= 2 && ny >= 2, Err::BadConfig, "grid_patch needs at least 2x2 vertices");
  check(spacing > 0, Err::BadConfig, "grid_patch spacing");
  std::vector<Eigen::RowVector3d> v;
  v.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) v.push_back({i * spacing, j * spacing, 0.0});
  }
  auto at = [&](int i, int j) { return j * nx + i; };
  std::vector<Eigen::RowVector3i> f;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      f.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      f.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  return from_lists(v, f);
}

}  // namespace gemesh
