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

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "kinoplan/environment.hpp"
#include "kinoplan/estimator.hpp"

namespace kinoplan {

enum class PlannerKind { kRrt, kAnytimeRrt, kAoRrt, kSst, kSstStar };
const char* planner_name(PlannerKind kind);
PlannerKind planner_from_name(const std::string& name);

enum class EstimatorKind { kEuclidean, kLearned };
const char* estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

struct ExpandParams {
  int candidates = 10;  // (control, duration) pairs per expansion
  double duration_lo = 0.1, duration_hi = 1.0;
  double goal_bias = 0.05;
};

struct SstParams {
  double delta_bn = 0.4;  // selection ball radius
  double delta_s = 0.2;   // witness region radius
  double shrink = 0.9;    // per-round radius decay (SST* only)
};

struct PlannerConfig {
  ExpandParams expand;
  SstParams sst;
  double anytime_epsilon = 0.1;  // gate <- (1 - eps) * best after a solution
  double ao_cost_weight = 1.0;   // weight of the cost axis in AO selection
  // SST-family ball selection: false picks the node with the lowest
  // cost-to-come inside the ball (empty ball falls back to the metric
  // nearest); true ranks the ball by the estimator instead (empty ball falls
  // back to the estimator-nearest node). The other planners always select
  // through the estimator and ignore this.
  bool sst_select_by_estimator = false;
  // Exactly one of the two termination modes is active: a positive
  // iteration_cap makes the run deterministic and ignores the wall clock;
  // otherwise budget_seconds applies.
  double budget_seconds = 30.0;
  long iteration_cap = 0;
  std::uint64_t seed = 0;
};

struct SolutionEvent {
  double cost = 0;
  double wall_seconds = 0;
  long iteration = 0;
};

struct PlanStats {
  long iterations = 0;
  int nodes = 0;         // nodes of the final tree, tombstones included
  int active_nodes = 0;
  long rejected_collision = 0;
  long rejected_cost = 0;
  long rejected_bounds = 0;
  long rejected_witness = 0;  // SST region rejections
  int witnesses = 0;
  int episodes = 0;  // restarts (anytime episodes / SST* rounds), else 1
};

struct PlanResult {
  bool success = false;
  double cost = std::numeric_limits<double>::infinity();

  // Root-to-goal node states (one per row) and the per-edge controls and
  // durations; replaying each control for its duration from the previous
  // state reproduces the states.
  Batch path_states;
  std::vector<Control> path_controls;
  std::vector<double> path_durations;

  // Every strict improvement, in order; events.front() is the first
  // solution.
  std::vector<SolutionEvent> events;
  PlanStats stats;

  // The search tree at termination (the last episode's / round's tree for
  // the restarting planners), kept for export and replay checks.
  std::shared_ptr<const SearchTree> tree;

  double time_to_first() const {
    return events.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : events.front().wall_seconds;
  }
  long iteration_of_first() const {
    return events.empty() ? -1 : events.front().iteration;
  }
};

struct ExpandOutcome {
  enum class Status { kAdded, kRejectedBounds, kRejectedCollision,
                      kRejectedCost };
  Status status = Status::kRejectedBounds;
  int node = -1;
};

// One expansion attempt: draw a target (goal-biased), pick the tree node
// with the smallest estimate to the target, try `candidates` sampled
// (control, duration) pairs from it, keep the endpoint closest to the
// target in the weighted metric, then gate on collisions and on
// cost-to-come < cost_gate before inserting. The RNG consumes: one bias
// draw, the target draws, then per candidate control_dim + 1 draws.
ExpandOutcome expand_tree(SearchTree& tree, const Environment& env,
                          const DynamicsSpec& spec, const CostEstimator& est,
                          const ExpandParams& params, Rng& rng,
                          double cost_gate);

PlanResult plan_rrt(const Environment& env, const DynamicsSpec& spec,
                    const CostEstimator& est, const PlannerConfig& cfg);
PlanResult plan_anytime_rrt(const Environment& env, const DynamicsSpec& spec,
                            const CostEstimator& est, const PlannerConfig& cfg);
PlanResult plan_ao_rrt(const Environment& env, const DynamicsSpec& spec,
                       const CostEstimator& est, const PlannerConfig& cfg);
PlanResult plan_sst(const Environment& env, const DynamicsSpec& spec,
                    const CostEstimator& est, const PlannerConfig& cfg);
PlanResult plan_sst_star(const Environment& env, const DynamicsSpec& spec,
                         const CostEstimator& est, const PlannerConfig& cfg);

PlanResult plan(PlannerKind kind, const Environment& env,
                const DynamicsSpec& spec, const CostEstimator& est,
                const PlannerConfig& cfg);

// Writes the solution path (states, then controls with durations) as text.
void save_plan_result(const PlanResult& result, const std::string& path);

}  // namespace kinoplan
