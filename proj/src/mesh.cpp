#include "gemesh/mesh.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "gemesh/errors.hpp"

namespace gemesh {

int Mesh::slot_of(int p, int q) const {
  auto lo = nbrs.begin() + nbr_offsets[p];
  auto hi = nbrs.begin() + nbr_offsets[p + 1];
  auto it = std::lower_bound(lo, hi, q);
  if (it == hi || *it != q) return -1;
  return static_cast<int>(it - nbrs.begin());
}

bool Mesh::has_boundary() const {
  for (signed char c : edge_face_count) {
    if (c == 1) return true;
  }
  return false;
}

double Mesh::mean_edge_length() const {
  double total = 0.0;
  for (int e = 0; e < num_edges(); ++e) {
    total += (vertices.row(edges(e, 0)) - vertices.row(edges(e, 1))).norm();
  }
  return num_edges() ? total / num_edges() : 0.0;
}

double Mesh::bbox_diag() const {
  if (vertices.rows() == 0) return 0.0;
  Eigen::RowVector3d lo = vertices.colwise().minCoeff();
  Eigen::RowVector3d hi = vertices.colwise().maxCoeff();
  return (hi - lo).norm();
}

namespace {

// Flips faces so all windings agree across shared edges; NonOrientable if no
// consistent assignment exists.
void orient_faces(Eigen::Matrix<int, Eigen::Dynamic, 3>& faces,
                  const std::map<std::pair<int, int>, std::vector<int>>& edge_to_faces) {
  const int nf = static_cast<int>(faces.rows());
  std::vector<signed char> state(nf, 0);  // 0 unvisited, 1 keep, -1 flip
  auto directed_has = [&](int f, int a, int b, bool flipped) {
    for (int k = 0; k < 3; ++k) {
      int u = faces(f, k), v = faces(f, (k + 1) % 3);
      if (flipped) std::swap(u, v);
      if (u == a && v == b) return true;
    }
    return false;
  };
  for (int seed = 0; seed < nf; ++seed) {
    if (state[seed]) continue;
    state[seed] = 1;
    std::deque<int> queue{seed};
    while (!queue.empty()) {
      int f = queue.front();
      queue.pop_front();
      bool f_flipped = state[f] < 0;
      for (int k = 0; k < 3; ++k) {
        int a = faces(f, k), b = faces(f, (k + 1) % 3);
        if (f_flipped) std::swap(a, b);
        auto it = edge_to_faces.find(std::minmax(a, b));
        for (int g : it->second) {
          if (g == f) continue;
          // consistent winding means g traverses the shared edge as (b, a)
          bool needs_flip = directed_has(g, a, b, false);
          signed char want = needs_flip ? -1 : 1;
          if (state[g] == 0) {
            state[g] = want;
            queue.push_back(g);
          } else {
            check(state[g] == want, Err::NonOrientable,
                  "no consistent face winding across edge (" + std::to_string(a) + "," +
                      std::to_string(b) + ")");
          }
        }
      }
    }
  }
  for (int f = 0; f < nf; ++f) {
    if (state[f] < 0) std::swap(faces(f, 1), faces(f, 2));
  }
}

// Every vertex's incident faces must form one fan (single open chain or
// single cycle) around it.
void check_vertex_fans(int nv, const Eigen::Matrix<int, Eigen::Dynamic, 3>& faces) {
  std::vector<std::vector<std::pair<int, int>>> wedges(nv);
  for (int f = 0; f < faces.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int v = faces(f, k), a = faces(f, (k + 1) % 3), b = faces(f, (k + 2) % 3);
      wedges[v].push_back({a, b});
    }
  }
  for (int v = 0; v < nv; ++v) {
    const auto& ws = wedges[v];
    std::map<int, int> next;
    std::set<int> targets;
    for (auto [a, b] : ws) {
      check(!next.count(a), Err::NonManifold,
            "two faces leave vertex " + std::to_string(v) + " through the same wedge");
      next[a] = b;
      targets.insert(b);
    }
    int start = -1;
    for (auto& [a, b] : next) {
      if (!targets.count(a)) {
        check(start < 0, Err::NonManifold, "vertex " + std::to_string(v) + " has a split fan");
        start = a;
      }
    }
    if (start < 0) start = next.begin()->first;  // closed fan
    size_t steps = 0;
    int cur = start;
    while (steps < ws.size() && next.count(cur)) {
      cur = next[cur];
      ++steps;
    }
    check(steps == ws.size(), Err::NonManifold,
          "faces around vertex " + std::to_string(v) + " are not a single fan");
  }
}

}  // namespace

Mesh make_mesh(Eigen::Matrix<double, Eigen::Dynamic, 3> vertices,
               Eigen::Matrix<int, Eigen::Dynamic, 3> faces) {
  const int nv = static_cast<int>(vertices.rows());
  const int nf = static_cast<int>(faces.rows());

  Eigen::RowVector3d lo = nv ? Eigen::RowVector3d(vertices.colwise().minCoeff())
                             : Eigen::RowVector3d::Zero();
  Eigen::RowVector3d hi = nv ? Eigen::RowVector3d(vertices.colwise().maxCoeff())
                             : Eigen::RowVector3d::Zero();
  double scale = std::max((hi - lo).norm(), 1e-300);

  for (int f = 0; f < nf; ++f) {
    int a = faces(f, 0), b = faces(f, 1), c = faces(f, 2);
    for (int idx : {a, b, c}) {
      check(idx >= 0 && idx < nv, Err::ParseError,
            "face " + std::to_string(f) + " references vertex " + std::to_string(idx));
    }
    check(a != b && b != c && a != c, Err::DegenerateFace,
          "face " + std::to_string(f) + " repeats a vertex");
    Eigen::Vector3d u = vertices.row(b) - vertices.row(a);
    Eigen::Vector3d w = vertices.row(c) - vertices.row(a);
    double area2 = u.cross(w).norm();
    check(area2 > 1e-14 * scale * scale, Err::DegenerateFace,
          "face " + std::to_string(f) + " has (near) zero area");
  }

  std::map<std::pair<int, int>, std::vector<int>> edge_to_faces;
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(faces(f, k), faces(f, (k + 1) % 3));
      edge_to_faces[key].push_back(f);
    }
  }
  for (const auto& [e, fs] : edge_to_faces) {
    check(fs.size() <= 2, Err::NonManifold,
          "edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ") borders " +
              std::to_string(fs.size()) + " faces");
  }

  orient_faces(faces, edge_to_faces);
  check_vertex_fans(nv, faces);

  Mesh m;
  m.vertices = std::move(vertices);
  m.faces = std::move(faces);

  m.edges.resize(static_cast<long>(edge_to_faces.size()), 2);
  m.edge_face_count.resize(edge_to_faces.size());
  std::vector<std::vector<int>> adj(nv);
  long e = 0;
  for (const auto& [key, fs] : edge_to_faces) {
    m.edges(e, 0) = key.first;
    m.edges(e, 1) = key.second;
    m.edge_face_count[e] = static_cast<signed char>(fs.size());
    adj[key.first].push_back(key.second);
    adj[key.second].push_back(key.first);
    ++e;
  }

  m.nbr_offsets.resize(nv + 1, 0);
  for (int v = 0; v < nv; ++v) {
    check(!adj[v].empty(), Err::IsolatedVertex, "vertex " + std::to_string(v) + " has no faces");
    std::sort(adj[v].begin(), adj[v].end());
    m.nbr_offsets[v + 1] = m.nbr_offsets[v] + static_cast<int>(adj[v].size());
    m.nbrs.insert(m.nbrs.end(), adj[v].begin(), adj[v].end());
  }
  return m;
}

}  // namespace gemesh
