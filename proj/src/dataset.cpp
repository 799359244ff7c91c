#include "gemesh/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "gemesh/cotan.hpp"
#include "gemesh/errors.hpp"
#include "gemesh/rng.hpp"
#include "gemesh/trajectory.hpp"

namespace gemesh {

namespace fs = std::filesystem;
using nlohmann::json;

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "test_time") return Split::TestTime;
  if (name == "test_init") return Split::TestInit;
  if (name == "test_mesh") return Split::TestMesh;
  fail(Err::BadConfig, "unknown split '" + name + "'");
}

std::string split_to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::TestTime: return "test_time";
    case Split::TestInit: return "test_init";
    case Split::TestMesh: return "test_mesh";
  }
  fail(Err::BadConfig, "invalid split value");
}

namespace {

int parse_int(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    check(used == s.size(), Err::BadConfig, what + ": trailing junk in '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Err::BadConfig, what + ": '" + s + "' is not an integer");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    check(used == s.size(), Err::BadConfig, what + ": trailing junk in '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Err::BadConfig, what + ": '" + s + "' is not a number");
  }
}

}  // namespace

Mesh resolve_mesh(const std::string& name) {
  const auto colon = name.find(':');
  const std::string head = name.substr(0, colon);
  if (head == "tetrahedron" && colon == std::string::npos) return tetrahedron();
  if (head == "octahedron" && colon == std::string::npos) return octahedron();
  if (head == "icosphere" && colon != std::string::npos) {
    return icosphere(parse_int(name.substr(colon + 1), "icosphere subdivisions"));
  }
  if ((head == "uv_sphere" || head == "grid") && colon != std::string::npos) {
    const std::string rest = name.substr(colon + 1);
    const auto x = rest.find('x');
    check(x != std::string::npos, Err::BadConfig,
          head + " spec needs AxB, got '" + rest + "'");
    const int a = parse_int(rest.substr(0, x), head);
    const int b = parse_int(rest.substr(x + 1), head);
    return head == "grid" ? grid_patch(a, b) : uv_sphere(a, b);
  }
  if (head == "perturb" && colon != std::string::npos) {
    const std::string rest = name.substr(colon + 1);
    const auto c1 = rest.find(':');
    check(c1 != std::string::npos, Err::BadConfig,
          "perturb spec is perturb:SCALE:SEED:<mesh>");
    const auto c2 = rest.find(':', c1 + 1);
    check(c2 != std::string::npos, Err::BadConfig,
          "perturb spec is perturb:SCALE:SEED:<mesh>");
    const double scale = parse_double(rest.substr(0, c1), "perturb scale");
    const int seed = parse_int(rest.substr(c1 + 1, c2 - c1 - 1), "perturb seed");
    return perturb_roughness(resolve_mesh(rest.substr(c2 + 1)), scale,
                             static_cast<std::uint64_t>(seed));
  }
  return load_mesh(name);
}

std::vector<Sample> make_samples(int num_frames, int history, Split split,
                                 int train_end, int train_targets) {
  check(history >= 1, Err::BadConfig, "history must be at least 1");
  check(train_targets >= 1, Err::BadConfig, "train_targets must be at least 1");
  const int last_frame = num_frames - 1;
  std::vector<Sample> out;
  if (split == Split::Train) {
    const int last_t = std::min(train_end, last_frame) - train_targets;
    for (int t = history - 1; t <= last_t; ++t) out.push_back({0, t, train_targets});
  } else {
    // single-step targets; test_time starts where the train window ends
    int first_target = history;
    if (split == Split::TestTime) first_target = std::max(history, train_end + 1);
    for (int t = first_target - 1; t + 1 <= last_frame; ++t) out.push_back({0, t, 1});
  }
  check(!out.empty(), Err::WindowTooShort,
        split_to_string(split) + ": no sample fits in " +
            std::to_string(num_frames) + " frames with history " +
            std::to_string(history));
  return out;
}

namespace {

void validate(const DatasetSpec& spec) {
  check(spec.pde == "heat" || spec.pde == "wave" || spec.pde == "cahn_hilliard",
        Err::BadConfig, "unknown pde '" + spec.pde + "'");
  check(!spec.meshes.empty(), Err::BadConfig, "dataset needs at least one mesh");
  check(spec.trajectories_per_mesh >= 1, Err::BadConfig,
        "need at least one trajectory per mesh");
  check(spec.test_init_trajectories >= 0 &&
            spec.test_init_trajectories < spec.trajectories_per_mesh,
        Err::BadConfig, "test-init runs must leave at least one training run");
  check(spec.history >= 1, Err::BadConfig, "history must be at least 1");
  check(spec.t_max >= spec.history, Err::BadConfig,
        "t_max must cover at least one history window");
  check(spec.train_end >= 0 && spec.train_end <= spec.t_max, Err::BadConfig,
        "train_end must lie within 0..t_max");
  check(spec.history - 1 + spec.train_targets <= spec.train_end, Err::BadConfig,
        "history and rollout targets do not fit in the train window");
  check(spec.lambda_lo > 0 && spec.lambda_hi >= spec.lambda_lo, Err::BadConfig,
        "interface coefficient range must be positive and ordered");
}

Vec initial_field(const DatasetSpec& spec, const Mesh& mesh, std::uint64_t seed,
                  double* lambda_out) {
  if (spec.pde == "heat") return gaussian_bump_init(mesh, 0.20, seed);
  if (spec.pde == "wave") return gaussian_bump_init(mesh, 0.025, seed);
  // phase field: interface coefficient first, then per-vertex concentrations
  // from a mean inside the stable band of the double well
  Rng rng(seed);
  *lambda_out = rng.uniform(spec.lambda_lo, spec.lambda_hi);
  Vec c0(mesh.num_vertices());
  for (int i = 0; i < c0.size(); ++i) c0(i) = rng.normal(0.2, 0.05);
  return c0;
}

}  // namespace

void to_json(json& j, const DatasetSpec& s) {
  json meshes = json::array();
  for (const auto& m : s.meshes) {
    meshes.push_back({{"name", m.name}, {"test_mesh", m.test_mesh}});
  }
  j = json{{"pde", s.pde},
           {"meshes", meshes},
           {"trajectories_per_mesh", s.trajectories_per_mesh},
           {"test_init_trajectories", s.test_init_trajectories},
           {"t_max", s.t_max},
           {"history", s.history},
           {"train_end", s.train_end},
           {"train_targets", s.train_targets},
           {"seed", s.seed},
           {"alpha", s.alpha},
           {"speed", s.speed},
           {"mobility", s.mobility},
           {"lambda_lo", s.lambda_lo},
           {"lambda_hi", s.lambda_hi},
           {"ch_dt", s.ch_dt},
           {"dt_safety", s.dt_safety}};
}

void from_json(const json& j, DatasetSpec& s) {
  s.pde = j.value("pde", s.pde);
  if (j.contains("meshes")) {
    s.meshes.clear();
    for (const auto& m : j.at("meshes")) {
      if (m.is_string()) {
        s.meshes.push_back({m.get<std::string>(), false});
      } else {
        s.meshes.push_back(
            {m.at("name").get<std::string>(), m.value("test_mesh", false)});
      }
    }
  }
  s.trajectories_per_mesh = j.value("trajectories_per_mesh", s.trajectories_per_mesh);
  s.test_init_trajectories = j.value("test_init_trajectories", s.test_init_trajectories);
  s.t_max = j.value("t_max", s.t_max);
  s.history = j.value("history", s.history);
  s.train_end = j.value("train_end", s.train_end);
  s.train_targets = j.value("train_targets", s.train_targets);
  s.seed = j.value("seed", s.seed);
  s.alpha = j.value("alpha", s.alpha);
  s.speed = j.value("speed", s.speed);
  s.mobility = j.value("mobility", s.mobility);
  s.lambda_lo = j.value("lambda_lo", s.lambda_lo);
  s.lambda_hi = j.value("lambda_hi", s.lambda_hi);
  s.ch_dt = j.value("ch_dt", s.ch_dt);
  s.dt_safety = j.value("dt_safety", s.dt_safety);
}

void generate(const DatasetSpec& spec, const std::string& out_dir) {
  validate(spec);
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  const auto emit = [&](const fs::path& p) { written.push_back(p); };

  try {
    json manifest{{"format", "gemesh-dataset"},
                  {"version", 1},
                  {"spec", json(spec)},
                  {"split_convention",
                   "train targets <= train_end; test_time targets > train_end"}};
    json mesh_records = json::array();
    json run_records = json::array();

    for (size_t i = 0; i < spec.meshes.size(); ++i) {
      const Mesh mesh = resolve_mesh(spec.meshes[i].name);
      const std::string mesh_file = "m" + std::to_string(i) + ".off";
      save_off(mesh, (fs::path(out_dir) / mesh_file).string());
      emit(fs::path(out_dir) / mesh_file);

      const CotanOperator op(mesh);
      double dt = spec.ch_dt;
      json mesh_rec{{"file", mesh_file},
                    {"source", spec.meshes[i].name},
                    {"test_mesh", spec.meshes[i].test_mesh},
                    {"vertices", mesh.num_vertices()}};
      if (spec.pde == "heat" || spec.pde == "wave") {
        const StableDt s = spec.pde == "heat"
                               ? stable_dt_heat(op, spec.alpha, spec.dt_safety)
                               : stable_dt_wave(op, spec.speed, spec.dt_safety);
        dt = s.dt;
        mesh_rec["lambda_max"] = s.lambda_max;
        mesh_rec["dt_estimate_stalled"] = s.stalled;
      }
      mesh_rec["dt"] = dt;
      mesh_records.push_back(mesh_rec);

      for (int r = 0; r < spec.trajectories_per_mesh; ++r) {
        const std::string stem = "m" + std::to_string(i) + "_t" + std::to_string(r);
        const std::uint64_t run_seed = derive_seed(spec.seed, stem);
        double lambda = 0.0;
        const Vec u0 = initial_field(spec, mesh, run_seed, &lambda);

        Frames frames;
        json params{{"dt", dt}};
        std::string notes;
        if (spec.pde == "heat") {
          frames = simulate_heat(op, u0, spec.alpha, dt, spec.t_max);
          params["alpha"] = spec.alpha;
          notes = "forward Euler; dt from the power-iteration stability estimate";
        } else if (spec.pde == "wave") {
          frames = simulate_wave(op, u0, Vec::Zero(mesh.num_vertices()),
                                 spec.speed, dt, spec.t_max);
          params["speed"] = spec.speed;
          notes = "first-order forward Euler, displacement updated with the "
                  "stale velocity; dt from the power-iteration stability estimate";
        } else {
          frames = simulate_cahn_hilliard(op, u0, spec.mobility, lambda, dt,
                                          spec.t_max);
          params["mobility"] = spec.mobility;
          params["lambda"] = lambda;
          notes = "semi-implicit splitting: implicit interface term via a "
                  "conjugate-gradient solve, explicit well term";
        }

        const fs::path traj_path = fs::path(out_dir) / (stem + ".gmt");
        save_trajectory(traj_path.string(), frames, dt);
        emit(traj_path);
        save_trajectory_meta(traj_path.string(),
                             json{{"mesh", mesh_file},
                                  {"pde", spec.pde},
                                  {"params", params},
                                  {"seed", run_seed},
                                  {"notes", notes}});
        emit(fs::path(trajectory_meta_path(traj_path.string())));

        const bool is_test_init =
            !spec.meshes[i].test_mesh &&
            r >= spec.trajectories_per_mesh - spec.test_init_trajectories;
        run_records.push_back({{"file", stem + ".gmt"},
                               {"mesh", static_cast<int>(i)},
                               {"index", r},
                               {"test_mesh", spec.meshes[i].test_mesh},
                               {"test_init", is_test_init},
                               {"seed", run_seed},
                               {"params", params}});
      }
    }

    manifest["meshes"] = mesh_records;
    manifest["trajectories"] = run_records;
    const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
    std::ofstream out(manifest_path, std::ios::trunc);
    check(out.good(), Err::IoError, "cannot write " + manifest_path.string());
    out << manifest.dump(2) << "\n";
    out.flush();
    check(out.good(), Err::IoError, "short write to " + manifest_path.string());
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw;
  }
}

Dataset load_dataset(const std::string& dir) {
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream in(manifest_path);
  check(in.good(), Err::IoError, "cannot read " + manifest_path.string());
  json manifest = json::parse(in, nullptr, false);
  check(!manifest.is_discarded(), Err::ParseError,
        manifest_path.string() + " is not valid JSON");
  check(manifest.value("format", "") == "gemesh-dataset" &&
            manifest.value("version", 0) == 1,
        Err::ParseError, manifest_path.string() + " is not a dataset manifest");

  Dataset data;
  from_json(manifest.at("spec"), data.spec);
  for (const auto& m : manifest.at("meshes")) {
    data.meshes.push_back(
        load_mesh((fs::path(dir) / m.at("file").get<std::string>()).string()));
  }
  for (const auto& r : manifest.at("trajectories")) {
    LoadedTrajectory traj;
    traj.mesh_index = r.at("mesh").get<int>();
    traj.test_mesh = r.at("test_mesh").get<bool>();
    traj.test_init = r.at("test_init").get<bool>();
    check(traj.mesh_index >= 0 &&
              traj.mesh_index < static_cast<int>(data.meshes.size()),
          Err::ParseError, "trajectory references a missing mesh");
    traj.frames = load_trajectory(
        (fs::path(dir) / r.at("file").get<std::string>()).string(), &traj.dt);
    check(traj.frames.cols() == data.meshes[traj.mesh_index].num_vertices(),
          Err::ShapeMismatch, "frame width does not match its mesh");
    data.trajectories.push_back(std::move(traj));
  }
  return data;
}

std::vector<Sample> Dataset::samples(Split split) const {
  std::vector<Sample> out;
  for (size_t i = 0; i < trajectories.size(); ++i) {
    const LoadedTrajectory& traj = trajectories[i];
    bool wanted = false;
    switch (split) {
      case Split::Train:
      case Split::TestTime: wanted = !traj.test_mesh && !traj.test_init; break;
      case Split::TestInit: wanted = !traj.test_mesh && traj.test_init; break;
      case Split::TestMesh: wanted = traj.test_mesh; break;
    }
    if (!wanted) continue;
    for (Sample s : make_samples(static_cast<int>(traj.frames.rows()), spec.history,
                                 split, spec.train_end, spec.train_targets)) {
      s.trajectory = static_cast<int>(i);
      out.push_back(s);
    }
  }
  check(!out.empty(), Err::WindowTooShort,
        "split " + split_to_string(split) + " has no trajectories");
  return out;
}

}  // namespace gemesh
