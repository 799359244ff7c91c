#include <chrono>
#include <cmath>

#include "gemesh/adam.hpp"
#include "gemesh/errors.hpp"
#include "gemesh/harness.hpp"
#include "gemesh/rng.hpp"

namespace gemesh {

const EdgePlan& MeshPlans::plan(int mesh_index) {
  auto& slot = plans_.at(mesh_index);
  if (!slot) {
    const Mesh& mesh = data_->meshes.at(mesh_index);
    slot = std::make_unique<EdgePlan>(mesh, build_geometry(mesh));
  }
  return *slot;
}

const Vec& MeshPlans::areas(int mesh_index) {
  auto& slot = areas_.at(mesh_index);
  if (!slot) {
    slot = std::make_unique<Vec>(
        CotanOperator(data_->meshes.at(mesh_index)).vertex_areas());
  }
  return *slot;
}

double MeshPlans::train_mean_degree() const {
  double sum = 0.0;
  int count = 0;
  for (size_t i = 0; i < data_->meshes.size(); ++i) {
    bool trains = false;
    for (const auto& traj : data_->trajectories) {
      if (traj.mesh_index == static_cast<int>(i) && !traj.test_mesh) trains = true;
    }
    if (!trains) continue;
    sum += data_->meshes[i].mean_degree();
    ++count;
  }
  check(count > 0, Err::BadConfig, "no training meshes in the dataset");
  return sum / count;
}

namespace {

RowMat input_window(const Frames& frames, int t, int history) {
  RowMat win(frames.cols(), history);
  for (int h = 0; h < history; ++h) {
    win.col(h) = frames.row(t - history + 1 + h).transpose();
  }
  return win;
}

}  // namespace

TrainResult train_model(const Model& model, const Dataset& data, MeshPlans& plans,
                        const TrainConfig& config) {
  check(model.config().history == data.spec.history, Err::ShapeMismatch,
        "model history differs from the dataset's");
  check(config.epochs >= 0 && config.lr > 0.0, Err::BadConfig,
        "epochs must be nonnegative and the learning rate positive");
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  result.params =
      model.init_params(derive_seed(config.seed, "init"), plans.train_mean_degree());

  std::vector<Sample> samples = data.samples(Split::Train);
  AdamConfig adam{config.lr, 0.9, 0.999, 1e-8, config.weight_decay};
  AdamState state;
  state.reset(result.params);

  const int history = data.spec.history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng order(derive_seed(config.seed, "order/" + std::to_string(epoch)));
    order.shuffle(samples);
    adam.lr = config.cosine_schedule ? cosine_lr(config.lr, epoch, config.epochs)
                                     : config.lr;

    double loss_sum = 0.0;
    for (size_t s = 0; s < samples.size(); ++s) {
      const Sample& sample = samples[s];
      const LoadedTrajectory& traj = data.trajectories.at(sample.trajectory);
      const EdgePlan& plan = plans.plan(traj.mesh_index);

      Tape t;
      const std::vector<int> w = model.bind(t, result.params, true);
      int x = t.constant(input_window(traj.frames, sample.t, history));
      int loss = -1;
      for (int k = 1; k <= sample.targets; ++k) {
        const int pred = model.forward(t, plan, x, w);
        const int target =
            t.constant(traj.frames.row(sample.t + k).transpose());
        const int step_loss = t.sqrt_op(t.mse(pred, target));
        loss = loss < 0 ? step_loss : t.add(loss, step_loss);
        if (k < sample.targets) {
          x = t.concat_cols({t.slice_cols(x, 1, history - 1), pred});
        }
      }

      const double value = t.val(loss)(0, 0);
      check(std::isfinite(value), Err::NonFiniteLoss,
            "epoch " + std::to_string(epoch) + ", sample " + std::to_string(s));
      loss_sum += value;

      t.backward(loss);
      std::vector<RowMat> grads;
      grads.reserve(w.size());
      for (int id : w) grads.push_back(t.grad(id));
      adam_step(result.params, grads, state, adam);
    }
    result.log.push_back(
        {epoch, loss_sum / static_cast<double>(samples.size()), adam.lr});
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace gemesh
