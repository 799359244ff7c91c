#include <chrono>
#include <cmath>

#include "gemesh/errors.hpp"
#include "gemesh/harness.hpp"
#include "gemesh/rng.hpp"

namespace gemesh {

namespace {

RowMat input_window(const Frames& frames, int t, int history) {
  RowMat win(frames.cols(), history);
  for (int h = 0; h < history; ++h) {
    win.col(h) = frames.row(t - history + 1 + h).transpose();
  }
  return win;
}

Vec forward_once(const Model& model, const std::vector<RowMat>& params,
                 const EdgePlan& plan, const RowMat& window) {
  Tape t;
  const std::vector<int> w = model.bind(t, params, false);
  const int pred = model.forward(t, plan, t.constant(window), w);
  return t.val(pred).col(0);
}

}  // namespace

SplitMetrics evaluate_predictor(const Dataset& data, MeshPlans& plans, Split split,
                                const Predictor& predictor) {
  const auto start = std::chrono::steady_clock::now();
  const int history = data.spec.history;

  double model_sq = 0.0, persist_sq = 0.0, mean_sq = 0.0;
  long entries = 0, n_samples = 0;
  for (const Sample& sample : data.samples(split)) {
    const LoadedTrajectory& traj = data.trajectories.at(sample.trajectory);
    const RowMat window = input_window(traj.frames, sample.t, history);
    const Vec target = traj.frames.row(sample.t + 1).transpose();
    const Vec last = window.col(history - 1);
    const Vec& areas = plans.areas(traj.mesh_index);

    const Vec pred = predictor(traj.mesh_index, window);
    check(pred.size() == target.size(), Err::ShapeMismatch,
          "prediction width does not match the mesh");
    const double field_mean = areas.dot(last) / areas.sum();

    model_sq += (pred - target).squaredNorm();
    persist_sq += (last - target).squaredNorm();
    mean_sq += (Vec::Constant(target.size(), field_mean) - target).squaredNorm();
    entries += target.size();
    ++n_samples;
  }

  SplitMetrics out;
  out.split = split_to_string(split);
  out.rmse = std::sqrt(model_sq / static_cast<double>(entries));
  out.persistence = std::sqrt(persist_sq / static_cast<double>(entries));
  out.mean_field = std::sqrt(mean_sq / static_cast<double>(entries));
  out.n_samples = n_samples;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SplitMetrics evaluate_model(const Model& model, const std::vector<RowMat>& params,
                            const Dataset& data, MeshPlans& plans, Split split) {
  check(model.config().history == data.spec.history, Err::ShapeMismatch,
        "model history differs from the dataset's");
  return evaluate_predictor(
      data, plans, split, [&](int mesh_index, const RowMat& window) {
        return forward_once(model, params, plans.plan(mesh_index), window);
      });
}

RolloutResult rollout_model(const Model& model, const std::vector<RowMat>& params,
                            const EdgePlan& plan, const Frames& reference,
                            int num_frames) {
  const int history = model.config().history;
  check(num_frames >= history, Err::WindowTooShort,
        "rollout needs at least the history frames");
  check(num_frames <= reference.rows(), Err::WindowTooShort,
        "reference trajectory is shorter than the requested rollout");
  check(reference.cols() == plan.num_vertices, Err::ShapeMismatch,
        "reference frame width does not match the mesh");

  RolloutResult out;
  out.predicted.resize(num_frames, reference.cols());
  out.predicted.topRows(history) = reference.topRows(history);

  RowMat window = input_window(reference, history - 1, history);
  int produced = history;
  for (int row = history; row < num_frames; ++row) {
    const Vec pred = forward_once(model, params, plan, window);
    if (!pred.allFinite()) {
      out.truncated = true;
      break;
    }
    out.predicted.row(row) = pred;
    out.rmse.push_back(
        std::sqrt((pred - reference.row(row).transpose()).squaredNorm() /
                  static_cast<double>(pred.size())));
    ++produced;
    // the two blocks overlap, so go through a temporary
    window.leftCols(history - 1) = window.rightCols(history - 1).eval();
    window.col(history - 1) = pred;
  }
  out.predicted.conservativeResize(produced, Eigen::NoChange);
  return out;
}

TangentGeometry random_gauges(const Mesh& mesh, std::uint64_t seed) {
  TangentGeometry geom = build_geometry(mesh);
  Rng rng(seed);
  for (int p = 0; p < mesh.num_vertices(); ++p) {
    const int pick = static_cast<int>(rng.below(mesh.degree(p)));
    gauge_change(mesh, geom, p, mesh.neighbor(p, pick));
  }
  return geom;
}

double equivariance_check(const Model& model, const std::vector<RowMat>& params,
                          const Mesh& mesh, int trials, std::uint64_t seed) {
  check(trials >= 1, Err::BadConfig, "need at least one trial");
  const EdgePlan base_plan(mesh, build_geometry(mesh));
  const int history = model.config().history;

  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, "input/" + std::to_string(trial)));
    RowMat x(mesh.num_vertices(), history);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();

    const Vec before = forward_once(model, params, base_plan, x);
    const EdgePlan moved_plan(
        mesh, random_gauges(mesh, derive_seed(seed, "gauge/" + std::to_string(trial))));
    const Vec after = forward_once(model, params, moved_plan, x);

    const double denom = before.norm();
    check(denom > 0.0, Err::BadConfig,
          "model output vanished; the defect ratio is undefined");
    worst = std::max(worst, (after - before).norm() / denom);
  }
  return worst;
}

}  // namespace gemesh
