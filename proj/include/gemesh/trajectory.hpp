#pragma once

#include <json.hpp>
#include <string>

#include "gemesh/pde.hpp"

namespace gemesh {

// Trajectory container format, one file per simulated run:
//   bytes 0..3   magic "GMT1"
//   u32          version (1)
//   u64          vertex count V
//   u64          frame count T (rows)
//   f64          dt between frames
//   T * V * f64  fields, row-major by time
// All integers and doubles are little-endian. Writes are byte-deterministic,
// so regenerating a dataset reproduces files bit for bit.
void save_trajectory(const std::string& path, const Frames& frames, double dt);
Frames load_trajectory(const std::string& path, double* dt_out = nullptr);

// Sidecar metadata (mesh path, equation name, solver parameters, seeds,
// scheme notes) lives next to the binary as <stem>.json.
std::string trajectory_meta_path(const std::string& trajectory_path);
void save_trajectory_meta(const std::string& trajectory_path,
                          const nlohmann::json& meta);
nlohmann::json load_trajectory_meta(const std::string& trajectory_path);

}  // namespace gemesh
