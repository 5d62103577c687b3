// Copyright 2026 The Kinoplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "kinoplan/core.hpp"

namespace kinoplan {

// Fully connected ReLU network mapping (start, goal[, condition]) to a
// transition-cost prediction cost_scale * sigmoid(z). Input rows are laid
// out [start | goal | condition].
//
// Inference runs a fixed-order packed kernel whose per-row result does not
// depend on how the batch is split: predicting a batch and predicting its
// rows one by one give bitwise identical values. Training touches the
// Eigen-side weights; call repack() (train_mlp does) before predicting.
class Mlp {
 public:
  Mlp() = default;
  // hidden_layers hidden ReLU layers of hidden_width units plus a linear
  // scalar output. Weights are He-uniform, biases zero.
  Mlp(int state_dim, int condition_dim, int hidden_width, int hidden_layers,
      Rng& rng);

  int state_dim() const { return state_dim_; }
  int condition_dim() const { return condition_dim_; }
  int input_dim() const { return 2 * state_dim_ + condition_dim_; }
  int layer_count() const { return static_cast<int>(w_.size()); }
  std::vector<int> layer_sizes() const;  // input, hiddens..., 1

  double cost_scale() const { return cost_scale_; }
  void set_cost_scale(double s);
  // Wall time spent training, < 0 when never trained.
  double train_seconds() const { return train_seconds_; }
  void set_train_seconds(double s) { train_seconds_ = s; }

  // Layer l weights have shape (out_dim x in_dim); biases (out_dim).
  const std::vector<Batch>& weights() const { return w_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }
  std::vector<Batch>& mutable_weights() { return w_; }
  std::vector<Eigen::VectorXd>& mutable_biases() { return b_; }

  // Rebuilds the packed inference tables from the Eigen-side weights.
  void repack();

  // out(i) = cost_scale * sigmoid(z(inputs.row(i))).
  void predict_batch(const Eigen::Ref<const Batch>& inputs,
                     Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd predict_batch(const Eigen::Ref<const Batch>& inputs) const;
  double predict_pair(const State& start, const State& goal,
                      const Eigen::VectorXd& condition) const;

  // Split-input fast path: row i is (starts.row(i), goal, condition).
  // Bitwise identical to assembling the rows and calling predict_batch.
  void predict_to_goal(const Eigen::Ref<const Batch>& starts,
                       const State& goal, const Eigen::VectorXd& condition,
                       Eigen::Ref<Eigen::VectorXd> out) const;

  // Pre-sigmoid scores z, a strictly increasing function of the predicted
  // cost; cheaper when only the ordering matters.
  void score_to_goal(const Eigen::Ref<const Batch>& starts, const State& goal,
                     const Eigen::VectorXd& condition,
                     Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  struct PackedLayer {
    int in = 0, out = 0, pout = 0;     // pout: out padded to the vector width
    std::vector<double> w;             // column i at [i * pout], zero padded
    std::vector<double> b;             // pout, zero padded
  };

  static std::vector<int> layer_sizes_impl(int input, int width, int hidden);
  void forward(const double* const* rows, int count, double* z) const;
  template <int R>
  void forward_rows(const double* const* rows, double* z) const;
  void scores_to_goal_impl(const Eigen::Ref<const Batch>& starts,
                           const State& goal,
                           const Eigen::VectorXd& condition, bool apply_out,
                           Eigen::Ref<Eigen::VectorXd> out) const;

  friend Mlp load_mlp(const std::string& path);

  int state_dim_ = 0, condition_dim_ = 0;
  double cost_scale_ = 1.0;
  double train_seconds_ = -1.0;
  std::vector<Batch> w_;
  std::vector<Eigen::VectorXd> b_;
  std::vector<PackedLayer> packed_;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 256;
  double val_fraction = 0.1;
  std::uint64_t seed = 1;
  // Stop after the first epoch that crosses this wall time; 0 disables.
  double time_budget_seconds = 0;
  // Targets are costs scaled by cost_scale and clamped to
  // [target_clamp, 1 - target_clamp] before the logit transform.
  double target_clamp = 1e-4;
};

struct EpochStats {
  int epoch = 0;  // 0 is the untrained snapshot
  double wall_seconds = 0;
  double train_mse = 0;  // cost-space MSE
  double val_mse = 0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  double train_seconds = 0;
};

// Minibatch SGD with momentum on the logit-space squared error
// (z - logit(clamped target))^2; reported losses are cost-space MSE.
// cost_scale must be set on the model beforehand. Repacks on return.
TrainResult train_mlp(Mlp& model, const Eigen::Ref<const Batch>& inputs,
                      const Eigen::Ref<const Eigen::VectorXd>& costs,
                      const TrainConfig& cfg);

// Mean logit-space loss over the batch and its gradients (same shapes as
// weights()/biases()). Returns the loss.
double mlp_loss_and_gradients(const Mlp& model,
                              const Eigen::Ref<const Batch>& inputs,
                              const Eigen::Ref<const Eigen::VectorXd>& costs,
                              double target_clamp,
                              std::vector<Batch>& grad_w,
                              std::vector<Eigen::VectorXd>& grad_b);
double mlp_loss(const Mlp& model, const Eigen::Ref<const Batch>& inputs,
                const Eigen::Ref<const Eigen::VectorXd>& costs,
                double target_clamp);

// Text header plus a base64 payload of the raw little-endian float64
// weights. Round trips bit for bit.
void save_mlp(const Mlp& model, const std::string& path);
Mlp load_mlp(const std::string& path);

// Exposed for tests.
std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

}  // namespace kinoplan
