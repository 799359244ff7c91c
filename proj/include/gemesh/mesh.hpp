#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace gemesh {

// Validated triangle mesh. Faces are consistently wound; every undirected
// edge borders one or two faces; every vertex touches a face. Neighbor lists
// are CSR with ascending vertex ids, so directed-edge slot
// e in [nbr_offsets[p], nbr_offsets[p+1]) means "neighbor nbrs[e] of p".
struct Mesh {
  Eigen::Matrix<double, Eigen::Dynamic, 3> vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3> faces;
  std::vector<int> nbr_offsets;  // size V+1
  std::vector<int> nbrs;
  Eigen::Matrix<int, Eigen::Dynamic, 2> edges;  // undirected, i<j, lexicographic
  std::vector<signed char> edge_face_count;     // per undirected edge: 1 or 2

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_faces() const { return static_cast<int>(faces.rows()); }
  int num_edges() const { return static_cast<int>(edges.rows()); }
  int degree(int v) const { return nbr_offsets[v + 1] - nbr_offsets[v]; }
  int neighbor(int v, int k) const { return nbrs[nbr_offsets[v] + k]; }
  // directed-edge slot of neighbor q at vertex p, or -1
  int slot_of(int p, int q) const;

  bool has_boundary() const;
  double mean_edge_length() const;
  double bbox_diag() const;
  double mean_degree() const {
    return num_vertices() ? static_cast<double>(nbrs.size()) / num_vertices() : 0.0;
  }
};

// Validates connectivity, reorients faces to a consistent winding where the
// surface allows it, and builds adjacency.
Mesh make_mesh(Eigen::Matrix<double, Eigen::Dynamic, 3> vertices,
               Eigen::Matrix<int, Eigen::Dynamic, 3> faces);

Mesh load_mesh(const std::string& path);
Mesh parse_off(const std::string& text);
Mesh parse_obj(const std::string& text);
void save_off(const Mesh& mesh, const std::string& path);

// Built-in shapes (unit scale unless noted). Sphere triangulations are
// centered at the origin.
Mesh tetrahedron();
Mesh octahedron();
Mesh icosphere(int subdivisions, double radius = 1.0);
Mesh uv_sphere(int n_slices, int n_rings, double radius = 1.0);
Mesh grid_patch(int nx, int ny, double spacing = 1.0);

// Displaces each vertex along its normal by an independent N(0, scale^2)
// draw; connectivity is unchanged and the result is revalidated.
Mesh perturb_roughness(const Mesh& mesh, double scale, uint64_t seed);

}  // namespace gemesh
