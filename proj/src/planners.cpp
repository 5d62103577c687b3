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

#include "kinoplan/planners.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>

namespace kinoplan {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RunClock {
  Clock::time_point t0;
  double budget_seconds = 0;
  long iteration_cap = 0;
  long iterations = 0;

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }
  // With a positive iteration cap the wall clock never terminates the run,
  // so capped runs are reproducible end to end.
  bool exhausted() const {
    if (iteration_cap > 0) return iterations >= iteration_cap;
    return elapsed() >= budget_seconds;
  }
};

RunClock start_clock(const PlannerConfig& cfg) {
  return RunClock{Clock::now(), cfg.budget_seconds, cfg.iteration_cap, 0};
}

using SelectFn = std::function<int(const State&)>;
using InsertFn = std::function<int(const WitnessCandidate&)>;

enum class Reject { kNone, kBounds, kCollision, kCost, kWitness };

struct StepResult {
  int node = -1;
  Reject reject = Reject::kNone;
};

// One expansion attempt; the select hook picks the node to grow from, the
// insert hook may still veto the candidate (SST witness test). Gate order:
// candidate set empty (bounds), collision, cost gate, insert veto.
StepResult expand_once(SearchTree& tree, const Environment& env,
                       const DynamicsSpec& spec, const ExpandParams& ep,
                       Rng& rng, double cost_gate, const SelectFn& select,
                       const InsertFn& insert) {
  const bool biased = rng.uniform() < ep.goal_bias;
  const State target =
      biased ? goal_sample(env, spec, rng) : sample_state(spec, rng);

  const int from = select(target);
  if (from < 0) return {-1, Reject::kBounds};
  const State origin = tree.node(from).state;

  Trajectory best;
  double best_d = kInf;
  for (int k = 0; k < ep.candidates; ++k) {
    const Control u = sample_control(spec, rng);
    const double dur = rng.uniform(ep.duration_lo, ep.duration_hi);
    Trajectory tr = propagate(spec, origin, u, dur);
    if (tr.length() < 2) continue;  // left the state bounds immediately
    const double d = weighted_distance(spec, tr.end_state(), target);
    if (d < best_d) {
      best_d = d;
      best = std::move(tr);
    }
  }
  if (!(best_d < kInf)) return {-1, Reject::kBounds};

  if (!trajectory_valid(env, spec, best)) return {-1, Reject::kCollision};

  const double cost = tree.node(from).cost_to_come + best.duration;
  if (cost >= cost_gate) return {-1, Reject::kCost};

  WitnessCandidate cand;
  cand.parent = from;
  cand.state = best.end_state();
  cand.control = best.control;
  cand.duration = best.duration;
  cand.edge_cost = best.duration;
  const int id = insert(cand);
  if (id < 0) return {-1, Reject::kWitness};
  return {id, Reject::kNone};
}

void count_reject(PlanStats& stats, Reject r) {
  switch (r) {
    case Reject::kBounds: ++stats.rejected_bounds; break;
    case Reject::kCollision: ++stats.rejected_collision; break;
    case Reject::kCost: ++stats.rejected_cost; break;
    case Reject::kWitness: ++stats.rejected_witness; break;
    case Reject::kNone: break;
  }
}

void fill_path(PlanResult& out, const SearchTree& tree, int goal_id) {
  const std::vector<int> ids = tree.path_from_root(goal_id);
  out.path_states.resize(static_cast<int>(ids.size()),
                         tree.spec().state_dim());
  out.path_controls.clear();
  out.path_durations.clear();
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
    const TreeNode& n = tree.node(ids[static_cast<size_t>(i)]);
    out.path_states.row(i) = n.state.transpose();
    if (i > 0) {
      out.path_controls.push_back(n.control);
      out.path_durations.push_back(n.duration);
    }
  }
}

// Start already satisfies the goal: a zero-cost single-node solution.
bool trivial_start(const Environment& env, const DynamicsSpec& spec,
                   PlanResult& out) {
  if (!goal_reached(env, spec, env.start)) return false;
  out.success = true;
  out.cost = 0;
  out.path_states.resize(1, spec.state_dim());
  out.path_states.row(0) = env.start.transpose();
  out.events.push_back({0.0, 0.0, 0});
  out.stats.nodes = 1;
  out.stats.active_nodes = 1;
  out.stats.episodes = 1;
  return true;
}

InsertFn plain_insert(SearchTree& tree) {
  return [&tree](const WitnessCandidate& c) {
    return tree.insert(c.parent, c.state, c.control, c.duration, c.edge_cost);
  };
}

SelectFn estimator_select(const SearchTree& tree, const CostEstimator& est) {
  return [&tree, &est](const State& target) {
    return nearest_by_estimator(tree, est, target);
  };
}

PlanResult run_rrt(const Environment& env, const DynamicsSpec& spec,
                   const CostEstimator& est, const PlannerConfig& cfg) {
  PlanResult out;
  if (trivial_start(env, spec, out)) return out;

  RunClock clock = start_clock(cfg);
  Rng rng(cfg.seed);
  SearchTree tree(spec, env.start, /*build_index=*/false);
  const SelectFn select = estimator_select(tree, est);
  const InsertFn insert = plain_insert(tree);

  while (!clock.exhausted()) {
    ++clock.iterations;
    const StepResult step =
        expand_once(tree, env, spec, cfg.expand, rng, kInf, select, insert);
    count_reject(out.stats, step.reject);
    if (step.node < 0) continue;
    if (goal_reached(env, spec, tree.node(step.node).state)) {
      out.success = true;
      out.cost = tree.node(step.node).cost_to_come;
      out.events.push_back({out.cost, clock.elapsed(), clock.iterations});
      fill_path(out, tree, step.node);
      break;
    }
  }
  out.stats.iterations = clock.iterations;
  out.stats.nodes = tree.size();
  out.stats.active_nodes = tree.active_count();
  out.stats.episodes = 1;
  out.tree = std::make_shared<SearchTree>(std::move(tree));
  return out;
}

PlanResult run_anytime(const Environment& env, const DynamicsSpec& spec,
                       const CostEstimator& est, const PlannerConfig& cfg) {
  PlanResult out;
  if (trivial_start(env, spec, out)) return out;

  RunClock clock = start_clock(cfg);
  Rng rng(cfg.seed);
  double best = kInf;
  double gate = kInf;
  int episodes = 0;
  std::optional<SearchTree> tree;

  while (!clock.exhausted()) {
    tree.emplace(spec, env.start, /*build_index=*/false);
    ++episodes;
    const SelectFn select = estimator_select(*tree, est);
    const InsertFn insert = plain_insert(*tree);
    while (!clock.exhausted()) {
      ++clock.iterations;
      const StepResult step =
          expand_once(*tree, env, spec, cfg.expand, rng, gate, select, insert);
      count_reject(out.stats, step.reject);
      if (step.node < 0) continue;
      if (goal_reached(env, spec, tree->node(step.node).state)) {
        // The gate guarantees this beats (1 - eps) * previous best.
        best = tree->node(step.node).cost_to_come;
        out.events.push_back({best, clock.elapsed(), clock.iterations});
        fill_path(out, *tree, step.node);
        gate = (1.0 - cfg.anytime_epsilon) * best;
        break;  // restart with a fresh tree and the tightened gate
      }
    }
  }
  out.success = best < kInf;
  out.cost = best;
  out.stats.iterations = clock.iterations;
  if (tree) {
    out.stats.nodes = tree->size();
    out.stats.active_nodes = tree->active_count();
    out.tree = std::make_shared<SearchTree>(std::move(*tree));
  }
  out.stats.episodes = episodes;
  return out;
}

PlanResult run_ao(const Environment& env, const DynamicsSpec& spec,
                  const CostEstimator& est, const PlannerConfig& cfg) {
  PlanResult out;
  if (trivial_start(env, spec, out)) return out;

  RunClock clock = start_clock(cfg);
  Rng rng(cfg.seed);
  SearchTree tree(spec, env.start, /*build_index=*/false);
  double c_star = kInf;

  std::vector<int> ids;
  Eigen::VectorXd vals;
  // Until a first solution exists selection is plain nearest-by-estimator
  // (and consumes no extra draws), so the run is indistinguishable from RRT
  // up to that point. Afterwards every target gets a cost coordinate drawn
  // from U(0, c*) and selection minimizes
  //   estimate(node -> target) + w_c * |cost(node) - c_t| / c*.
  const SelectFn select = [&](const State& target) -> int {
    if (!(c_star < kInf)) return nearest_by_estimator(tree, est, target);
    const double c_t = rng.uniform(0.0, c_star);
    const Eigen::Ref<const Batch> pts = tree.gather_active(ids);
    if (ids.empty()) return -1;
    vals.resize(pts.rows());
    est.estimate_batch(pts, target, vals);
    int best_id = -1;
    double best_v = kInf;
    for (size_t i = 0; i < ids.size(); ++i) {
      const double v =
          vals[static_cast<Eigen::Index>(i)] +
          cfg.ao_cost_weight *
              std::abs(tree.node(ids[i]).cost_to_come - c_t) / c_star;
      if (v < best_v) {
        best_v = v;
        best_id = ids[i];
      }
    }
    return best_id;
  };
  const InsertFn insert = plain_insert(tree);

  while (!clock.exhausted()) {
    ++clock.iterations;
    const StepResult step =
        expand_once(tree, env, spec, cfg.expand, rng, c_star, select, insert);
    count_reject(out.stats, step.reject);
    if (step.node < 0) continue;
    if (goal_reached(env, spec, tree.node(step.node).state)) {
      c_star = tree.node(step.node).cost_to_come;
      out.events.push_back({c_star, clock.elapsed(), clock.iterations});
      fill_path(out, tree, step.node);
      // Children tombstone before parents so whole branches prune eagerly.
      for (int id = tree.size() - 1; id >= 0; --id) {
        const TreeNode& n = tree.node(id);
        if (n.active && n.cost_to_come >= c_star) tree.deactivate(id);
      }
    }
  }
  out.success = c_star < kInf;
  out.cost = c_star;
  out.stats.iterations = clock.iterations;
  out.stats.nodes = tree.size();
  out.stats.active_nodes = tree.active_count();
  out.stats.episodes = 1;
  out.tree = std::make_shared<SearchTree>(std::move(tree));
  return out;
}

struct SstRound {
  bool found = false;
  int goal_node = -1;
  double cost = kInf;
};

// Runs one SST search on the given (fresh) tree and witness set until a
// solution passes the cost gate or the shared clock runs out.
SstRound run_sst_round(const Environment& env, const DynamicsSpec& spec,
                       const CostEstimator& est, const PlannerConfig& cfg,
                       double delta_bn, double cost_gate, RunClock& clock,
                       Rng& rng, PlanStats& stats, SearchTree& tree,
                       WitnessSet& witnesses) {
  witnesses.add(env.start, 0);  // the root represents its own region
  std::vector<int> ball;

  const SelectFn select = [&](const State& target) -> int {
    tree.near_euclidean_indexed(target, delta_bn, ball);
    if (cfg.sst_select_by_estimator) {
      if (ball.empty()) return nearest_by_estimator(tree, est, target);
      return best_by_estimator(tree, est, ball, target);
    }
    if (ball.empty()) return tree.nearest_euclidean_indexed(target);
    int best_id = -1;
    double best_c = kInf;
    for (int id : ball) {  // ball ids ascend, so ties keep the lowest id
      const double c = tree.node(id).cost_to_come;
      if (c < best_c) {
        best_c = c;
        best_id = id;
      }
    }
    return best_id;
  };
  const InsertFn insert = [&](const WitnessCandidate& cand) {
    return sst_witness_update(witnesses, tree, cand).inserted;
  };

  SstRound round;
  while (!clock.exhausted()) {
    ++clock.iterations;
    const StepResult step = expand_once(tree, env, spec, cfg.expand, rng,
                                        cost_gate, select, insert);
    count_reject(stats, step.reject);
    if (step.node < 0) continue;
    if (goal_reached(env, spec, tree.node(step.node).state)) {
      round.found = true;
      round.goal_node = step.node;
      round.cost = tree.node(step.node).cost_to_come;
      return round;
    }
  }
  return round;
}

PlanResult run_sst(const Environment& env, const DynamicsSpec& spec,
                   const CostEstimator& est, const PlannerConfig& cfg) {
  PlanResult out;
  if (trivial_start(env, spec, out)) return out;

  RunClock clock = start_clock(cfg);
  Rng rng(cfg.seed);
  SearchTree tree(spec, env.start, /*build_index=*/true);
  WitnessSet witnesses(spec, cfg.sst.delta_s);
  const SstRound round =
      run_sst_round(env, spec, est, cfg, cfg.sst.delta_bn, kInf, clock, rng,
                    out.stats, tree, witnesses);
  if (round.found) {
    out.success = true;
    out.cost = round.cost;
    out.events.push_back({round.cost, clock.elapsed(), clock.iterations});
    fill_path(out, tree, round.goal_node);
  }
  out.stats.iterations = clock.iterations;
  out.stats.nodes = tree.size();
  out.stats.active_nodes = tree.active_count();
  out.stats.witnesses = witnesses.size();
  out.stats.episodes = 1;
  out.tree = std::make_shared<SearchTree>(std::move(tree));
  return out;
}

PlanResult run_sst_star(const Environment& env, const DynamicsSpec& spec,
                        const CostEstimator& est, const PlannerConfig& cfg) {
  PlanResult out;
  if (trivial_start(env, spec, out)) return out;

  RunClock clock = start_clock(cfg);
  Rng rng(cfg.seed);
  double best = kInf;
  double delta_bn = cfg.sst.delta_bn;
  double delta_s = cfg.sst.delta_s;
  int rounds = 0;

  while (!clock.exhausted()) {
    SearchTree tree(spec, env.start, /*build_index=*/true);
    WitnessSet witnesses(spec, delta_s);
    ++rounds;
    // The gate makes any round solution a strict improvement on best.
    const SstRound round = run_sst_round(env, spec, est, cfg, delta_bn, best,
                                         clock, rng, out.stats, tree,
                                         witnesses);
    if (round.found) {
      best = round.cost;
      out.events.push_back({best, clock.elapsed(), clock.iterations});
      fill_path(out, tree, round.goal_node);
    }
    out.stats.nodes = tree.size();
    out.stats.active_nodes = tree.active_count();
    out.stats.witnesses = witnesses.size();
    out.tree = std::make_shared<SearchTree>(std::move(tree));
    delta_bn *= cfg.sst.shrink;
    delta_s *= cfg.sst.shrink;
  }
  out.success = best < kInf;
  out.cost = best;
  out.stats.iterations = clock.iterations;
  out.stats.episodes = rounds;
  return out;
}

}  // namespace

const char* planner_name(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::kRrt: return "rrt";
    case PlannerKind::kAnytimeRrt: return "anytime-rrt";
    case PlannerKind::kAoRrt: return "ao-rrt";
    case PlannerKind::kSst: return "sst";
    case PlannerKind::kSstStar: return "sst-star";
  }
  return "?";
}

PlannerKind planner_from_name(const std::string& name) {
  for (PlannerKind k : {PlannerKind::kRrt, PlannerKind::kAnytimeRrt,
                        PlannerKind::kAoRrt, PlannerKind::kSst,
                        PlannerKind::kSstStar}) {
    if (name == planner_name(k)) return k;
  }
  throw std::invalid_argument(
      "unknown planner '" + name +
      "' (expected rrt|anytime-rrt|ao-rrt|sst|sst-star)");
}

const char* estimator_name(EstimatorKind kind) {
  return kind == EstimatorKind::kEuclidean ? "euclidean" : "learned";
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "euclidean") return EstimatorKind::kEuclidean;
  if (name == "learned") return EstimatorKind::kLearned;
  throw std::invalid_argument("unknown estimator '" + name +
                              "' (expected euclidean|learned)");
}

ExpandOutcome expand_tree(SearchTree& tree, const Environment& env,
                          const DynamicsSpec& spec, const CostEstimator& est,
                          const ExpandParams& params, Rng& rng,
                          double cost_gate) {
  const SelectFn select = estimator_select(tree, est);
  const InsertFn insert = plain_insert(tree);
  const StepResult r =
      expand_once(tree, env, spec, params, rng, cost_gate, select, insert);
  ExpandOutcome outcome;
  outcome.node = r.node;
  switch (r.reject) {
    case Reject::kNone:
      outcome.status = ExpandOutcome::Status::kAdded;
      break;
    case Reject::kBounds:
    case Reject::kWitness:  // plain insertion never vetoes
      outcome.status = ExpandOutcome::Status::kRejectedBounds;
      break;
    case Reject::kCollision:
      outcome.status = ExpandOutcome::Status::kRejectedCollision;
      break;
    case Reject::kCost:
      outcome.status = ExpandOutcome::Status::kRejectedCost;
      break;
  }
  return outcome;
}

PlanResult plan_rrt(const Environment& env, const DynamicsSpec& spec,
                    const CostEstimator& est, const PlannerConfig& cfg) {
  return run_rrt(env, spec, est, cfg);
}

PlanResult plan_anytime_rrt(const Environment& env, const DynamicsSpec& spec,
                            const CostEstimator& est,
                            const PlannerConfig& cfg) {
  return run_anytime(env, spec, est, cfg);
}

PlanResult plan_ao_rrt(const Environment& env, const DynamicsSpec& spec,
                       const CostEstimator& est, const PlannerConfig& cfg) {
  return run_ao(env, spec, est, cfg);
}

PlanResult plan_sst(const Environment& env, const DynamicsSpec& spec,
                    const CostEstimator& est, const PlannerConfig& cfg) {
  return run_sst(env, spec, est, cfg);
}

PlanResult plan_sst_star(const Environment& env, const DynamicsSpec& spec,
                         const CostEstimator& est, const PlannerConfig& cfg) {
  return run_sst_star(env, spec, est, cfg);
}

PlanResult plan(PlannerKind kind, const Environment& env,
                const DynamicsSpec& spec, const CostEstimator& est,
                const PlannerConfig& cfg) {
  switch (kind) {
    case PlannerKind::kRrt: return plan_rrt(env, spec, est, cfg);
    case PlannerKind::kAnytimeRrt: return plan_anytime_rrt(env, spec, est, cfg);
    case PlannerKind::kAoRrt: return plan_ao_rrt(env, spec, est, cfg);
    case PlannerKind::kSst: return plan_sst(env, spec, est, cfg);
    case PlannerKind::kSstStar: return plan_sst_star(env, spec, est, cfg);
  }
  throw std::invalid_argument("unknown planner kind");
}

void save_plan_result(const PlanResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "cost " << result.cost << "\n";
  out << "states " << result.path_states.rows() << " "
      << result.path_states.cols() << "\n";
  for (Eigen::Index i = 0; i < result.path_states.rows(); ++i) {
    for (Eigen::Index j = 0; j < result.path_states.cols(); ++j) {
      if (j) out << " ";
      out << result.path_states(i, j);
    }
    out << "\n";
  }
  out << "edges " << result.path_controls.size() << "\n";
  for (size_t i = 0; i < result.path_controls.size(); ++i) {
    const Control& u = result.path_controls[i];
    for (Eigen::Index j = 0; j < u.size(); ++j) out << u[j] << " ";
    out << result.path_durations[i] << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace kinoplan
