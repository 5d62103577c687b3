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

#include <memory>

#include "kinoplan/mlp.hpp"
#include "kinoplan/search_tree.hpp"

namespace kinoplan {

// Batched transition-cost estimate from many start states to one goal
// state. Estimates are nonnegative; lower means the transition is believed
// cheaper.
class CostEstimator {
 public:
  virtual ~CostEstimator() = default;

  virtual int state_dim() const = 0;

  virtual void estimate_batch(const Eigen::Ref<const Batch>& starts,
                              const State& goal,
                              Eigen::Ref<Eigen::VectorXd> out) const = 0;

  // Any strictly increasing transform of the estimates; overridden when a
  // cheaper order-preserving score exists. Used for argmin-only queries.
  virtual void score_batch(const Eigen::Ref<const Batch>& starts,
                           const State& goal,
                           Eigen::Ref<Eigen::VectorXd> out) const {
    estimate_batch(starts, goal, out);
  }

  double estimate(const State& start, const State& goal) const;
};

// Weighted Euclidean distance of the spec's metric; the baseline estimator.
class EuclideanEstimator : public CostEstimator {
 public:
  explicit EuclideanEstimator(const DynamicsSpec& spec);
  int state_dim() const override { return spec_.state_dim(); }
  void estimate_batch(const Eigen::Ref<const Batch>& starts, const State& goal,
                      Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  DynamicsSpec spec_;
};

// Learned transition-cost model with a fixed condition vector (for
// condition-free models pass an empty vector).
class LearnedEstimator : public CostEstimator {
 public:
  LearnedEstimator(Mlp model, Eigen::VectorXd condition);

  int state_dim() const override { return model_.state_dim(); }
  const Mlp& model() const { return model_; }
  const Eigen::VectorXd& condition() const { return condition_; }

  void estimate_batch(const Eigen::Ref<const Batch>& starts, const State& goal,
                      Eigen::Ref<Eigen::VectorXd> out) const override;
  // Pre-sigmoid scores; same argmin, skips the per-row exp.
  void score_batch(const Eigen::Ref<const Batch>& starts, const State& goal,
                   Eigen::Ref<Eigen::VectorXd> out) const override;

 private:
  Mlp model_;
  Eigen::VectorXd condition_;
};

// One batched query over every active node (assembled in id order), argmin
// with ties to the lowest id; -1 when nothing is active.
int nearest_by_estimator(const SearchTree& tree, const CostEstimator& est,
                         const State& goal);

// Ranks the given candidate node ids by the estimator (one batch); returns
// the id with the smallest estimate, ties to the lowest id. -1 on empty.
int best_by_estimator(const SearchTree& tree, const CostEstimator& est,
                      const std::vector<int>& candidates, const State& goal);

}  // namespace kinoplan
