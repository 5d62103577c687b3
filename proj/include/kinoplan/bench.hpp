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

#include "kinoplan/dataset.hpp"
#include "kinoplan/planners.hpp"

namespace kinoplan {

// Trial sweep over the full (planner x estimator x seed) cross product.
// Seed index s maps to derive_seed(base_seed, s) in every cell, so the
// estimator arms run on paired seeds. With iteration_cap > 0 the wall clock
// never influences a trial and the emitted files are reproducible
// byte-for-byte; wall-time columns are replaced by iteration columns.
struct BenchConfig {
  std::vector<PlannerKind> planners;
  std::vector<EstimatorKind> estimators;
  int seeds = 20;
  std::uint64_t base_seed = 0;
  double budget_seconds = 30.0;
  long iteration_cap = 0;
  int workers = 1;
  int curve_points = 50;
  PlannerConfig planner;  // shared expansion / SST / AO knobs
  std::string out_dir;    // empty skips file emission
  // Echoed into the manifest so results carry their provenance.
  std::string scene_path;
  std::string model_path;
};

struct TrialRecord {
  PlannerKind planner{};
  EstimatorKind estimator{};
  int seed_index = 0;
  std::uint64_t seed = 0;
  bool success = false;
  double time_to_solution = std::numeric_limits<double>::quiet_NaN();
  long first_iteration = -1;
  double cost = std::numeric_limits<double>::infinity();
  long iterations = 0;
  int nodes = 0;
};

// Mean and std are over successful trials only; failures count toward the
// success percentage alone. std is the sample standard deviation (0 with
// fewer than two successes). In iteration-cap mode the time stats are over
// first-solution iteration counts instead of wall seconds.
struct CellSummary {
  PlannerKind planner{};
  EstimatorKind estimator{};
  int trials = 0;
  int successes = 0;
  double success_pct = 0;
  double mean_time = 0;
  double std_time = 0;
};

struct BenchResult {
  std::vector<TrialRecord> trials;      // cross-product order
  std::vector<CellSummary> summaries;   // one per (planner, estimator)
};

// Runs the sweep (workers > 1 runs trials concurrently; estimators and the
// environment are shared read-only) and, when out_dir is set, writes
// manifest.txt, model.cfg, trials.csv, summary.csv, and curves.csv.
// curves.csv holds the fraction of solved trials per cell at curve_points
// uniform grid points over the budget. The learned estimator may be null
// when it is not in the estimator list.
BenchResult run_bench(const Environment& env, const DynamicsSpec& spec,
                      const CostEstimator* euclidean,
                      const CostEstimator* learned, const BenchConfig& cfg);

struct CumulativeConfig {
  PlannerKind planner = PlannerKind::kRrt;
  int episodes = 5;
  std::uint64_t base_seed = 0;
  double budget_seconds = 60.0;
  long iteration_cap = 0;
  double training_seconds = 0;  // sunk cost echoed into the output
  PlannerConfig planner_cfg;
  std::string out_path;  // empty skips file emission
};

struct EpisodeRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  bool standard_success = false;
  bool learned_success = false;
  double t_standard = 0;
  double t_learned = 0;
  double diff = 0;        // t_standard - t_learned
  double cumulative = 0;  // prefix sum of diff
};

// Paired episodes: both arms replay the same per-episode seed. A failed arm
// is charged the full budget (a lower bound on its true solution time, so
// the reported benefit is conservative).
std::vector<EpisodeRecord> run_cumulative_benefit(const Environment& env,
                                                  const DynamicsSpec& spec,
                                                  const CostEstimator& standard,
                                                  const CostEstimator& learned,
                                                  const CumulativeConfig& cfg);

struct CostfieldConfig {
  State origin;  // query anchor; estimates run grid point -> origin
  int axis_a = 0;
  int axis_b = 2;
  int resolution = 20;
  long oracle_budget = 0;  // > 0 adds a sampled-oracle column
  std::uint64_t seed = 0;
  std::string out_path;  // empty skips file emission
};

struct CostfieldRow {
  double a = 0, b = 0;
  double predicted = 0;
  double oracle = std::numeric_limits<double>::quiet_NaN();
};

// Sweeps axes (axis_a, axis_b) of the origin state over their bounds on a
// resolution x resolution grid and records the estimator's cost from each
// grid state to the origin.
std::vector<CostfieldRow> run_costfield(const DynamicsSpec& spec,
                                        const CostEstimator& est,
                                        const CostfieldConfig& cfg);

double mean_of(const std::vector<double>& v);
double sample_std_of(const std::vector<double>& v);
double median_of(std::vector<double> v);  // NaN on empty

}  // namespace kinoplan
