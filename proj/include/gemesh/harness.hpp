#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gemesh/dataset.hpp"
#include "gemesh/edge_plan.hpp"
#include "gemesh/model.hpp"

namespace gemesh {

// Message-passing schedules and vertex areas for a dataset's meshes, built on
// first use. Layers keep plan references, so this must outlive any tape.
class MeshPlans {
 public:
  explicit MeshPlans(const Dataset& data) : data_(&data) {
    plans_.resize(data.meshes.size());
    areas_.resize(data.meshes.size());
  }

  const EdgePlan& plan(int mesh_index);
  const Vec& areas(int mesh_index);
  // mean neighbor count over the meshes that carry training runs
  double train_mean_degree() const;

 private:
  const Dataset* data_;
  std::vector<std::unique_ptr<EdgePlan>> plans_;
  std::vector<std::unique_ptr<Vec>> areas_;
};

struct TrainConfig {
  double lr = 1e-4;
  int epochs = 100;
  double weight_decay = 1e-5;
  bool cosine_schedule = false;  // half-cosine decay to zero over the epochs
  std::uint64_t seed = 0;        // weight init and sample order
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<RowMat> params;
  std::vector<EpochLog> log;
  double wall_seconds = 0.0;
};

// Adam over single samples: each step rolls the model forward train_targets
// steps feeding predictions back, sums the per-step root-mean-square errors,
// and backpropagates through the whole rollout. Zero epochs returns the
// freshly initialized parameters untouched.
TrainResult train_model(const Model& model, const Dataset& data, MeshPlans& plans,
                        const TrainConfig& config);

struct SplitMetrics {
  std::string split;
  double rmse = 0.0;         // pooled over every target entry in the split
  double persistence = 0.0;  // predict the last input frame
  double mean_field = 0.0;   // predict the area-weighted mean of it
  long n_samples = 0;
  double wall_seconds = 0.0;
};

// One-step evaluation of an arbitrary predictor (mesh index + input window of
// H columns -> next frame). Baselines and trained models share this path so
// identical predictions produce identical metrics, bit for bit.
using Predictor = std::function<Vec(int mesh_index, const RowMat& window)>;
SplitMetrics evaluate_predictor(const Dataset& data, MeshPlans& plans, Split split,
                                const Predictor& predictor);
SplitMetrics evaluate_model(const Model& model, const std::vector<RowMat>& params,
                            const Dataset& data, MeshPlans& plans, Split split);

struct RolloutResult {
  Frames predicted;           // history seed rows, then model predictions
  std::vector<double> rmse;   // one entry per predicted frame vs the reference
  bool truncated = false;     // a non-finite prediction ended the run early
};

// Autoregressive rollout seeded with the reference's first H frames, running
// until the predicted trajectory holds num_frames rows. num_frames == H means
// nothing to predict: empty curve.
RolloutResult rollout_model(const Model& model, const std::vector<RowMat>& params,
                            const EdgePlan& plan, const Frames& reference,
                            int num_frames);

// Geometry with every vertex re-gauged to a reference neighbor drawn at
// random. Features and outputs of an equivariant model must not care.
TangentGeometry random_gauges(const Mesh& mesh, std::uint64_t seed);

// Max over trials of |out_regauged - out| / |out| on random scalar inputs.
// Inputs and outputs are rotation-invariant channels, so re-gauging should
// change nothing; the defect measures the nonlinearity's sampling error.
double equivariance_check(const Model& model, const std::vector<RowMat>& params,
                          const Mesh& mesh, int trials, std::uint64_t seed);

}  // namespace gemesh
