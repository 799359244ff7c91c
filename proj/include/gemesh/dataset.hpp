#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "gemesh/mesh.hpp"
#include "gemesh/pde.hpp"

namespace gemesh {

enum class Split { Train, TestTime, TestInit, TestMesh };

Split split_from_string(const std::string& name);  // BadConfig on bad names
std::string split_to_string(Split split);

// A mesh either comes from a file (.off/.obj) or from a builtin spec:
//   tetrahedron | octahedron | icosphere:S | uv_sphere:SLICESxRINGS |
//   grid:NXxNY | perturb:SCALE:SEED:<inner spec>
Mesh resolve_mesh(const std::string& name);

struct MeshSource {
  std::string name;
  bool test_mesh = false;  // held out entirely; all its runs land in test_mesh
};

struct DatasetSpec {
  std::string pde = "heat";  // heat | wave | cahn_hilliard
  std::vector<MeshSource> meshes;
  int trajectories_per_mesh = 5;
  int test_init_trajectories = 2;  // trailing runs per train mesh, held out
  int t_max = 200;                 // frames run 0..t_max
  int history = 5;
  int train_end = 149;   // last frame index train samples may supervise
  int train_targets = 3; // supervised rollout length per train sample
  std::uint64_t seed = 0;
  // equation parameters; dt for heat/wave comes from the stability estimate
  double alpha = 1.0;
  double speed = 1.0;
  double mobility = 1.0;
  double lambda_lo = 0.01, lambda_hi = 0.02;  // drawn per run
  double ch_dt = 5e-6;
  double dt_safety = 0.5;
};

// nlohmann ADL hooks; missing keys keep the target's current values. Mesh
// entries parse from either "name" strings or {name, test_mesh} objects.
void to_json(nlohmann::json& j, const DatasetSpec& s);
void from_json(const nlohmann::json& j, DatasetSpec& s);

// One supervised window: inputs are frames t-H+1..t, targets t+1..t+targets.
struct Sample {
  int trajectory = 0;
  int t = 0;
  int targets = 1;
};

// Index arithmetic for one trajectory of num_frames rows. Train samples
// supervise train_targets steps with every target index <= train_end;
// test_time samples one step with the target past train_end; test_init and
// test_mesh samples one step anywhere the history fits. WindowTooShort when
// nothing fits.
std::vector<Sample> make_samples(int num_frames, int history, Split split,
                                 int train_end, int train_targets = 3);

// Simulates every run in the spec and writes a self-contained directory:
// m<i>.off mesh copies, m<i>_t<j>.gmt frames with .json sidecars, and a
// manifest.json tying them together (written last, so its presence marks a
// complete dataset). Any failure removes the partial output. Reruns with the
// same spec produce byte-identical files.
void generate(const DatasetSpec& spec, const std::string& out_dir);

struct LoadedTrajectory {
  int mesh_index = 0;
  bool test_mesh = false;
  bool test_init = false;
  double dt = 0.0;
  Frames frames;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<Mesh> meshes;
  std::vector<LoadedTrajectory> trajectories;

  // every sample of the split across all trajectories, in stored order
  std::vector<Sample> samples(Split split) const;
};

Dataset load_dataset(const std::string& dir);

}  // namespace gemesh
