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

#include <optional>
#include <string>
#include <vector>

#include "kinoplan/dynamics.hpp"

namespace kinoplan {

// Columnar set of (start, goal[, condition]) -> cost samples. Costs above
// cost_cap are stored clamped to cost_cap with the clamped flag set.
struct Dataset {
  ModelKind kind = ModelKind::kDubins;
  int state_dim = 0;
  int condition_dim = 0;
  double cost_cap = 0;
  Batch starts, goals, conditions;  // one row per sample
  Eigen::VectorXd costs;
  std::vector<std::uint8_t> clamped;

  int size() const { return static_cast<int>(costs.size()); }
};

// Rows [start | goal | condition], the network input layout.
Batch dataset_inputs(const Dataset& ds);

struct OracleOptions {
  long budget = 20000;     // tree expansion iterations
  double goal_tol = 0.2;   // weighted-metric goal ball radius
  int candidates = 10;
  double duration_lo = 0.1, duration_hi = 1.0;
  double goal_bias = 0.05;
  // Refinement stage: simulated-annealing edits of the best control
  // schedule found by the tree, accepting by duration plus a rising
  // penalty on goal-ball violation. 0 disables the stage.
  long refine_trials = 20000;
  // Working goal ball for the tree stage (clamped up to goal_tol). The
  // refinement stage tightens the endpoint back into the goal_tol ball, so
  // the tree only has to land in this looser region.
  double tree_tol = 0.75;
};

// Obstacle-free sampling-based estimate of the transition cost. Stage one
// grows a tree from `start` for the full budget; insertions already
// costlier than the incumbent solution are skipped. Stage two anneals the
// cheapest schedule reaching the working ball (or the closest approach
// when none does), shrinking both the duration and the goal miss until the
// endpoint sits inside the goal_tol ball. Returns the cheapest feasible
// duration found, or nullopt when neither stage reaches the ball. Zero iff
// start is already in the ball.
std::optional<double> oracle_cost_sampled(const DynamicsSpec& spec,
                                          const State& start,
                                          const State& goal,
                                          const OracleOptions& opts, Rng& rng);

struct DataGenConfig {
  long count = 10000;
  // Dubins only: draw the turn-rate limit per sample from an equispaced
  // grid and expose it as a one-dimensional condition input.
  bool condition_turn_rate = false;
  int condition_grid = 15;
  double condition_lo = 0.5;
  double condition_hi = kPi;

  enum class Oracle { kAnalytic, kSampled };
  Oracle oracle = Oracle::kAnalytic;
  OracleOptions oracle_opts;

  double cap_quantile = 0.99;
  std::uint64_t seed = 0;
};

struct DataGenReport {
  long attempts = 0;
  long failures = 0;  // pairs the oracle could not solve (redrawn)
  long clamped = 0;   // costs clamped down to cost_cap
};

// Draws start/goal pairs uniformly over the spec's bounds and labels them
// with the chosen oracle. Pairs the oracle cannot solve are redrawn; once
// attempts reach twice the requested count with a failure rate above 50%
// generation aborts with a ContractViolation diagnostic. The analytic
// oracle requires a Dubins spec.
Dataset generate_dataset(const DynamicsSpec& spec, const DataGenConfig& cfg,
                         DataGenReport* report = nullptr);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace kinoplan
