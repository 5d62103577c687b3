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

#include "kinoplan/estimator.hpp"

#include <limits>

namespace kinoplan {

double CostEstimator::estimate(const State& start, const State& goal) const {
  Batch one(1, start.size());
  one.row(0) = start;
  Eigen::VectorXd out(1);
  estimate_batch(one, goal, out);
  return out(0);
}

EuclideanEstimator::EuclideanEstimator(const DynamicsSpec& spec) : spec_(spec) {}

void EuclideanEstimator::estimate_batch(const Eigen::Ref<const Batch>& starts,
                                        const State& goal,
                                        Eigen::Ref<Eigen::VectorXd> out) const {
  if (starts.cols() != spec_.state_dim() || goal.size() != spec_.state_dim())
    throw ContractViolation("euclidean estimator: dimension mismatch");
  if (out.size() != starts.rows())
    throw ContractViolation("euclidean estimator: output size mismatch");
  for (int r = 0; r < starts.rows(); ++r)
    out(r) = weighted_distance(spec_, starts.row(r), goal);
}

LearnedEstimator::LearnedEstimator(Mlp model, Eigen::VectorXd condition)
    : model_(std::move(model)), condition_(std::move(condition)) {
  if (condition_.size() != model_.condition_dim())
    throw ContractViolation("learned estimator: condition dimension mismatch");
}

void LearnedEstimator::estimate_batch(const Eigen::Ref<const Batch>& starts,
                                      const State& goal,
                                      Eigen::Ref<Eigen::VectorXd> out) const {
  model_.predict_to_goal(starts, goal, condition_, out);
}

void LearnedEstimator::score_batch(const Eigen::Ref<const Batch>& starts,
                                   const State& goal,
                                   Eigen::Ref<Eigen::VectorXd> out) const {
  model_.score_to_goal(starts, goal, condition_, out);
}

namespace {

// Scratch for estimator outputs; queries are single threaded per tree.
thread_local Eigen::VectorXd tl_scores;
thread_local std::vector<int> tl_ids;

int argmin_first(const Eigen::VectorXd& v, int n) {
  int best = -1;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    if (v(i) < best_v) {
      best_v = v(i);
      best = i;
    }
  }
  return best;
}

}  // namespace

int nearest_by_estimator(const SearchTree& tree, const CostEstimator& est,
                         const State& goal) {
  const Eigen::Ref<const Batch> starts = tree.gather_active(tl_ids);
  const int n = static_cast<int>(starts.rows());
  if (n == 0) return -1;
  if (tl_scores.size() < n) tl_scores.resize(n);
  est.score_batch(starts, goal, tl_scores.head(n));
  const int row = argmin_first(tl_scores, n);
  return row < 0 ? -1 : tl_ids[row];
}

int best_by_estimator(const SearchTree& tree, const CostEstimator& est,
                      const std::vector<int>& candidates, const State& goal) {
  const int n = static_cast<int>(candidates.size());
  if (n == 0) return -1;
  Batch starts(n, tree.spec().state_dim());
  for (int i = 0; i < n; ++i)
    starts.row(i) = tree.states_matrix().row(candidates[i]);
  if (tl_scores.size() < n) tl_scores.resize(n);
  est.score_batch(starts, goal, tl_scores.head(n));
  const int row = argmin_first(tl_scores, n);
  return row < 0 ? -1 : candidates[row];
}

}  // namespace kinoplan
