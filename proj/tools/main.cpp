#include <CLI11.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gemesh/checkpoint.hpp"
#include "gemesh/config.hpp"
#include "gemesh/dataset.hpp"
#include "gemesh/errors.hpp"
#include "gemesh/harness.hpp"
#include "gemesh/model.hpp"
#include "gemesh/rng.hpp"
#include "gemesh/tape.hpp"
#include "gemesh/trajectory.hpp"

using namespace gemesh;
using nlohmann::json;

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("GEMESH_SEED");
  if (!v) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  check(end != v && *end == '\0' && errno == 0, Err::BadConfig,
        "GEMESH_SEED must be an unsigned integer");
  return s;
}

// precedence: config value < --seed flag < GEMESH_SEED
std::uint64_t resolve_seed(std::uint64_t base, const std::optional<std::uint64_t>& flag) {
  std::uint64_t seed = flag.value_or(base);
  if (const auto env = env_seed()) seed = *env;
  return seed;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  check(out.good(), Err::IoError, "cannot write " + path);
  out << text;
  out.flush();
  check(out.good(), Err::IoError, "short write to " + path);
}

std::string csv_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// fingerprint covering the architecture, the data recipe, and the seed
std::string run_hash(const DatasetSpec& dataset, const ModelConfig& model,
                     std::uint64_t seed) {
  AppConfig app;
  app.dataset = dataset;
  app.model = model;
  app.optim.seed = seed;
  return config_hash(app);
}

int run_generate(const std::string& config_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed_flag) {
  AppConfig cfg = load_config(config_path);
  cfg.dataset.seed = resolve_seed(cfg.dataset.seed, seed_flag);
  generate(cfg.dataset, out_dir);
  json report{{"out", out_dir},
              {"pde", cfg.dataset.pde},
              {"meshes", cfg.dataset.meshes.size()},
              {"trajectories",
               cfg.dataset.meshes.size() * cfg.dataset.trajectories_per_mesh},
              {"frames_per_trajectory", cfg.dataset.t_max + 1},
              {"seed", cfg.dataset.seed}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_path, std::string log_path,
              const std::optional<std::uint64_t>& seed_flag) {
  AppConfig cfg = load_config(config_path);
  cfg.optim.seed = resolve_seed(cfg.optim.seed, seed_flag);

  const Dataset data = load_dataset(data_dir);
  const Model model(cfg.model);
  MeshPlans plans(data);
  const TrainResult result = train_model(model, data, plans, cfg.optim);

  save_checkpoint(out_path, model, result.params, cfg.optim.seed);
  if (log_path.empty()) log_path = out_path + ".loss.csv";
  std::string csv = "epoch,loss,lr\n";
  for (const EpochLog& e : result.log) {
    csv += std::to_string(e.epoch) + "," + csv_double(e.mean_loss) + "," +
           csv_double(e.lr) + "\n";
  }
  write_text(log_path, csv);

  json report{{"checkpoint", out_path},
              {"loss_log", log_path},
              {"epochs", result.log.size()},
              {"num_params", model.num_params()},
              {"wall_seconds", result.wall_seconds},
              {"seed", cfg.optim.seed},
              {"config_hash", run_hash(data.spec, cfg.model, cfg.optim.seed)}};
  if (!result.log.empty()) report["final_loss"] = result.log.back().mean_loss;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& data_dir,
             std::vector<std::string> splits, const std::string& out_prefix,
             bool times_1e3) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Model model(ckpt.config);
  const Dataset data = load_dataset(data_dir);
  MeshPlans plans(data);
  if (splits.empty()) splits = {"test_time"};

  const double scale = times_1e3 ? 1e3 : 1.0;
  json rows = json::array();
  std::string csv = "split,seed,rmse,n_samples\n";
  for (const std::string& name : splits) {
    const SplitMetrics m =
        evaluate_model(model, ckpt.params, data, plans, split_from_string(name));
    rows.push_back(json{{"split", m.split},
                        {"rmse", m.rmse * scale},
                        {"persistence", m.persistence * scale},
                        {"mean_field", m.mean_field * scale},
                        {"n_samples", m.n_samples},
                        {"wall_seconds", m.wall_seconds}});
    csv += m.split + "," + std::to_string(ckpt.seed) + "," +
           csv_double(m.rmse * scale) + "," + std::to_string(m.n_samples) + "\n";
  }

  json report{{"splits", rows},
              {"seed", ckpt.seed},
              {"scale", times_1e3 ? "1e-3" : "1"},
              {"config_hash", run_hash(data.spec, ckpt.config, ckpt.seed)}};
  if (!out_prefix.empty()) {
    write_text(out_prefix + ".json", report.dump(2) + "\n");
    write_text(out_prefix + ".csv", csv);
    report["metrics_json"] = out_prefix + ".json";
    report["metrics_csv"] = out_prefix + ".csv";
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_rollout(const std::string& ckpt_path, const std::string& data_dir,
                int trajectory, int steps, const std::string& out_path,
                const std::string& curve_path) {
  check(steps >= 0, Err::BadConfig, "steps must be nonnegative");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Model model(ckpt.config);
  const Dataset data = load_dataset(data_dir);
  check(trajectory >= 0 && trajectory < static_cast<int>(data.trajectories.size()),
        Err::BadConfig,
        "trajectory index out of range: the dataset has " +
            std::to_string(data.trajectories.size()));
  const LoadedTrajectory& ref = data.trajectories[trajectory];
  MeshPlans plans(data);

  const int num_frames = model.config().history + steps;
  const RolloutResult result = rollout_model(model, ckpt.params, plans.plan(ref.mesh_index),
                                             ref.frames, num_frames);

  save_trajectory(out_path, result.predicted, ref.dt);
  if (!curve_path.empty()) {
    std::string csv = "step,rmse\n";
    for (size_t k = 0; k < result.rmse.size(); ++k) {
      csv += std::to_string(k + 1) + "," + csv_double(result.rmse[k]) + "\n";
    }
    write_text(curve_path, csv);
  }

  json report{{"out", out_path},
              {"frames", result.predicted.rows()},
              {"predicted_steps", result.rmse.size()},
              {"truncated", result.truncated}};
  if (!result.rmse.empty()) report["final_rmse"] = result.rmse.back();
  std::cout << report.dump(2) << "\n";

  if (result.truncated) {
    json err{{"error", err_name(Err::NonFinitePrediction)},
             {"message", "rollout truncated after " +
                             std::to_string(result.rmse.size()) +
                             " steps; partial outputs were written"}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}

int run_equicheck(const std::string& ckpt_path, const std::string& config_path,
                  const std::string& mesh_spec, int trials,
                  const std::optional<std::uint64_t>& seed_flag) {
  check(!ckpt_path.empty() || !config_path.empty(), Err::BadConfig,
        "pass a checkpoint or a config");
  const Mesh mesh = resolve_mesh(mesh_spec);

  json report{{"mesh", mesh_spec}, {"vertices", mesh.num_vertices()}, {"trials", trials}};
  double defect = 0.0;
  if (!ckpt_path.empty()) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Model model(ckpt.config);
    const std::uint64_t seed = resolve_seed(ckpt.seed, seed_flag);
    defect = equivariance_check(model, ckpt.params, mesh, trials, seed);
    report["seed"] = seed;
  } else {
    AppConfig cfg = load_config(config_path);
    cfg.optim.seed = resolve_seed(cfg.optim.seed, seed_flag);
    const Model model(cfg.model);
    const std::vector<RowMat> params = model.init_params(
        derive_seed(cfg.optim.seed, "init"), mesh.mean_degree());
    defect = equivariance_check(model, params, mesh, trials, cfg.optim.seed);
    report["seed"] = cfg.optim.seed;
  }
  report["max_relative_defect"] = defect;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_gradcheck(std::vector<std::string> flavors, const std::string& mesh_spec,
                  const std::optional<std::uint64_t>& seed_flag) {
  if (flavors.empty()) flavors = {"gem_conv", "eman_attention", "hermes_block"};
  const std::uint64_t seed = resolve_seed(0, seed_flag);
  const Mesh mesh = resolve_mesh(mesh_spec);
  const EdgePlan plan(mesh, build_geometry(mesh));
  const double tolerance = 1e-5;

  json checks = json::array();
  double worst = 0.0;
  for (const std::string& name : flavors) {
    ModelConfig cfg;
    cfg.flavor = flavor_from_string(name);
    cfg.blocks = 1;
    cfg.edge_layers = 1;
    cfg.node_layers = 1;
    cfg.history = 3;
    cfg.band_limit = 2;
    cfg.hidden_max_freq = 1;
    cfg.hidden_fields = 3;
    cfg.relu_samples = 11;
    const Model model(cfg);

    // moderate weight scale keeps the sampled relus off their flat spots
    Rng rng(derive_seed(seed, "gradcheck/" + name));
    std::vector<RowMat> leaves;
    RowMat x(mesh.num_vertices(), cfg.history);
    for (long i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    leaves.push_back(x);
    for (long n : model.param_sizes()) {
      RowMat w(1, n);
      for (long i = 0; i < n; ++i) w(0, i) = rng.normal(0.0, 0.4);
      leaves.push_back(w);
    }
    RowMat pick(mesh.num_vertices(), 1);
    for (long i = 0; i < pick.size(); ++i) pick(i, 0) = rng.normal();

    const auto f = [&](Tape& t, const std::vector<int>& ids) {
      const std::vector<int> w(ids.begin() + 1, ids.end());
      return t.sum(t.mul(model.forward(t, plan, ids[0], w), t.constant(pick)));
    };
    const double err = grad_check(f, leaves);
    worst = std::max(worst, err);
    checks.push_back(json{{"flavor", name}, {"max_rel_error", err}});
  }

  const bool pass = worst <= tolerance;
  json report{{"checks", checks},
              {"mesh", mesh_spec},
              {"seed", seed},
              {"tolerance", tolerance},
              {"max_rel_error", worst},
              {"pass", pass}};
  std::cout << report.dump(2) << "\n";
  if (!pass) {
    json err{{"error", "gradcheck_failed"},
             {"message", "max relative gradient error " + std::to_string(worst) +
                             " exceeds " + std::to_string(tolerance)}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gauge-equivariant mesh networks: data, training, evaluation"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_path, log_path, ckpt_path, out_prefix;
  std::string mesh_spec = "icosphere:1";
  std::string curve_path;
  std::vector<std::string> splits, flavors;
  std::optional<std::uint64_t> seed_flag;
  int trajectory = 0, steps = 50, trials = 5;
  bool times_1e3 = false;

  CLI::App* cmd_generate = app.add_subcommand("generate", "simulate a dataset to a directory");
  cmd_generate->add_option("--config", config_path, "config JSON")->required();
  cmd_generate->add_option("--out", out_path, "output directory")->required();
  cmd_generate->add_option("--seed", seed_flag, "root seed override");

  CLI::App* cmd_train = app.add_subcommand("train", "fit a model on a generated dataset");
  cmd_train->add_option("--config", config_path, "config JSON")->required();
  cmd_train->add_option("--data", data_dir, "dataset directory")->required();
  cmd_train->add_option("--out", out_path, "checkpoint path")->required();
  cmd_train->add_option("--log", log_path, "per-epoch loss CSV (default: <out>.loss.csv)");
  cmd_train->add_option("--seed", seed_flag, "root seed override");

  CLI::App* cmd_eval = app.add_subcommand("eval", "one-step RMSE against the stored baselines");
  cmd_eval->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
  cmd_eval->add_option("--data", data_dir, "dataset directory")->required();
  cmd_eval->add_option("--split", splits, "splits to score (default: test_time)");
  cmd_eval->add_option("--out", out_prefix, "write PREFIX.json and PREFIX.csv");
  cmd_eval->add_flag("--times-1e3", times_1e3, "report values scaled by 1000");

  CLI::App* cmd_rollout = app.add_subcommand("rollout", "autoregressive prediction from seed frames");
  cmd_rollout->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
  cmd_rollout->add_option("--data", data_dir, "dataset directory")->required();
  cmd_rollout->add_option("--trajectory", trajectory, "reference trajectory index");
  cmd_rollout->add_option("--steps", steps, "number of predicted frames");
  cmd_rollout->add_option("--out", out_path, "predicted trajectory (GMT1)")->required();
  cmd_rollout->add_option("--curve", curve_path, "per-step RMSE CSV");

  CLI::App* cmd_equicheck = app.add_subcommand("equicheck", "measure the gauge-change defect");
  cmd_equicheck->add_option("--checkpoint", ckpt_path, "trained checkpoint");
  cmd_equicheck->add_option("--config", config_path, "config JSON (fresh weights)");
  cmd_equicheck->add_option("--mesh", mesh_spec, "mesh spec or file");
  cmd_equicheck->add_option("--trials", trials, "random gauge assignments");
  cmd_equicheck->add_option("--seed", seed_flag, "root seed override");

  CLI::App* cmd_gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  cmd_gradcheck->add_option("--flavor", flavors, "layer flavors (default: all)");
  cmd_gradcheck->add_option("--mesh", mesh_spec, "mesh spec or file")->default_val("octahedron");
  cmd_gradcheck->add_option("--seed", seed_flag, "root seed override");

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(cmd_generate))
      return run_generate(config_path, out_path, seed_flag);
    if (app.got_subcommand(cmd_train))
      return run_train(config_path, data_dir, out_path, log_path, seed_flag);
    if (app.got_subcommand(cmd_eval))
      return run_eval(ckpt_path, data_dir, splits, out_prefix, times_1e3);
    if (app.got_subcommand(cmd_rollout))
      return run_rollout(ckpt_path, data_dir, trajectory, steps, out_path, curve_path);
    if (app.got_subcommand(cmd_equicheck))
      return run_equicheck(ckpt_path, config_path, mesh_spec, trials, seed_flag);
    if (app.got_subcommand(cmd_gradcheck))
      return run_gradcheck(flavors, mesh_spec, seed_flag);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return e.get_exit_code();
  } catch (const Error& e) {
    std::cerr << json{{"error", err_name(e.code())}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
}
