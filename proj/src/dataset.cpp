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

#include "kinoplan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kinoplan/dubins.hpp"
#include "kinoplan/search_tree.hpp"

namespace kinoplan {

Batch dataset_inputs(const Dataset& ds) {
  const int d = ds.state_dim, c = ds.condition_dim;
  Batch x(ds.size(), 2 * d + c);
  x.block(0, 0, ds.size(), d) = ds.starts;
  x.block(0, d, ds.size(), d) = ds.goals;
  if (c > 0) x.block(0, 2 * d, ds.size(), c) = ds.conditions;
  return x;
}

namespace {

// Simulated-annealing refinement of a piecewise-constant control schedule.
// Score is total duration plus a rising penalty on the endpoint's miss of
// the goal ball, so early trials may break feasibility to delete detours
// while late trials must hold the endpoint inside the ball. Only the
// edited suffix is re-propagated; intermediate states are cached.
class ScheduleRefiner {
 public:
  ScheduleRefiner(const DynamicsSpec& spec, const State& start,
                  const State& goal, const OracleOptions& opts)
      : spec_(spec),
        start_(start),
        goal_(goal),
        opts_(opts),
        prop_(spec),
        x_(spec.state_dim()),
        base_(spec.state_dim()),
        xbest_(spec.state_dim()),
        bridge_u_(spec.control_dim()) {}

  void seed(const SearchTree& tree, int leaf) {
    for (int id = leaf; id > 0; id = tree.node(id).parent) {
      u_.push_back(tree.node(id).control);
      tau_.push_back(tree.node(id).duration);
    }
    std::reverse(u_.begin(), u_.end());
    std::reverse(tau_.begin(), tau_.end());
  }

  void run(long trials, Rng& rng);
  void polish(long evals, Rng& rng);

  std::optional<double> best() const {
    if (std::isinf(best_cost_)) return std::nullopt;
    return best_cost_;
  }

 private:
  enum Move {
    kNudgeControl0,
    kNudgeControl1,
    kNudgeTau0,
    kNudgeTau1,
    kSnapControl,
    kDelete,
    kInsert,
    kSplit,
    kMerge,
    kSteer,
    kReplan,
  };
  static constexpr int kMoveCount = 11;
  static constexpr int kMaxSegments = 96;
  static constexpr int kSteerProbes = 8;
  static constexpr int kBridgeSegments = 4;

  int size() const { return static_cast<int>(u_.size()); }
  double tau_cap() const { return 2.0 * opts_.duration_hi; }

  double total_tau() const {
    double s = 0;
    for (int i = 0; i < size(); ++i) s += tau_[i];
    return s;
  }

  // Best-of-kSteerProbes single segment from `base` toward the goal: half
  // the probe controls are drawn at box vertices/midpoints (time-optimal
  // controls tend to live at the box faces), half uniformly; half the
  // durations scale with the remaining distance so precise landings stay
  // reachable. Returns false when every probe exits bounds; otherwise
  // leaves the winner in (out_u, out_tau) and its endpoint in xbest_.
  bool probe_segment(const State& base, Rng& rng, Control& out_u,
                     double& out_tau) {
    const double base_d = weighted_distance(spec_, base, goal_);
    const double short_hi =
        std::clamp(base_d, 2.0 * spec_.dt, opts_.duration_hi);
    double best_d = std::numeric_limits<double>::infinity();
    for (int p = 0; p < kSteerProbes; ++p) {
      Control cu = sample_control(spec_, rng);
      if (rng.uniform() < 0.5) {
        for (int d = 0; d < spec_.control_dim(); ++d) {
          const int which = rng.uniform_int(3);
          cu(d) = which == 0 ? spec_.control_lo(d)
                : which == 1
                    ? 0.5 * (spec_.control_lo(d) + spec_.control_hi(d))
                    : spec_.control_hi(d);
        }
      }
      const double ct =
          rng.uniform() < 0.5
              ? rng.uniform(opts_.duration_lo, opts_.duration_hi)
              : rng.uniform(spec_.dt, short_hi);
      x_ = base;
      bool exited = false;
      prop_.advance(x_, cu, ct, &exited);
      if (exited) continue;
      const double d = weighted_distance(spec_, x_, goal_);
      if (d < best_d) {
        best_d = d;
        out_u = cu;
        out_tau = ct;
        xbest_ = x_;
      }
    }
    return !std::isinf(best_d);
  }

  // Re-propagates segments [from, size()) starting at pre_[from] into the
  // scratch rows; returns endpoint distance to goal, or -1 when a segment
  // exits the state bounds.
  double replay(int from) {
    x_ = pre_[from];
    scratch_len_ = 0;
    for (int i = from; i < size(); ++i) {
      if (tau_[i] > 0) {
        bool exited = false;
        prop_.advance(x_, u_[i], tau_[i], &exited);
        if (exited) return -1.0;
      }
      put(scratch_, scratch_len_++, x_);
    }
    return weighted_distance(spec_, x_, goal_);
  }

  void commit(int from) {
    for (int j = 0; j < scratch_len_; ++j) put(pre_, from + 1 + j, scratch_[j]);
    pre_len_ = from + 1 + scratch_len_;
  }

  static void put(std::vector<State>& v, int i, const State& x) {
    if (i < static_cast<int>(v.size()))
      v[i] = x;
    else
      v.push_back(x);
  }

  const DynamicsSpec& spec_;
  const State& start_;
  const State& goal_;
  const OracleOptions& opts_;
  Propagator prop_;
  State x_;
  std::vector<Control> u_;
  std::vector<double> tau_;
  std::vector<State> pre_;  // pre_[i]: state entering segment i
  int pre_len_ = 0;
  std::vector<State> scratch_;
  int scratch_len_ = 0;
  Control merge_spare_u_;
  double merge_spare_tau_ = 0;
  Control retail_u_;
  double retail_tau_ = 0;
  std::vector<Control> saved_u_;
  std::vector<double> saved_tau_;
  State base_, xbest_;
  Control bridge_u_;
  double best_cost_ = std::numeric_limits<double>::infinity();
  std::vector<Control> best_u_;
  std::vector<double> best_tau_;
};

void ScheduleRefiner::run(long trials, Rng& rng) {
  const double tol = opts_.goal_tol;
  put(pre_, 0, start_);
  pre_len_ = 1;
  double dist = replay(0);
  if (dist < 0) {
    // A re-propagated tree path cannot exit bounds, but stay safe: fall
    // back to the empty schedule.
    u_.clear();
    tau_.clear();
    dist = replay(0);
  }
  commit(0);
  double cost = total_tau();
  if (dist <= tol && cost < best_cost_) {
    best_cost_ = cost;
    best_u_ = u_;
    best_tau_ = tau_;
  }

  // Several annealing rounds; each re-tempers and restarts from the best
  // feasible schedule so far, which shakes the search out of local minima.
  const int rounds = 3;
  const long round_len = std::max<long>(1, trials / rounds);

  for (long t = 0; t < trials; ++t) {
    if (t % round_len == 0 && t > 0 && !best_u_.empty()) {
      u_ = best_u_;
      tau_ = best_tau_;
      dist = replay(0);
      commit(0);
      cost = total_tau();
    }
    const double frac =
        static_cast<double>(t % round_len) / static_cast<double>(round_len);
    const double lambda = 2.0 * std::pow(1000.0, frac);
    const double temp = 0.5 * std::pow(0.004, frac);
    const double scale = 0.5 * std::pow(0.01, frac);

    int mv = rng.uniform_int(kMoveCount);
    if (size() == 0)
      mv = kSteer;
    else if (mv == kSteer && dist <= tol)
      mv = kNudgeControl0;
    else if ((mv == kInsert || mv == kSplit) && size() >= kMaxSegments)
      mv = kNudgeTau0;
    else if (mv == kMerge && size() < 2)
      mv = kNudgeTau0;

    // Suffix edits re-propagate less, so bias the pick toward the tail.
    const auto pick = [&]() {
      const int n = size();
      if (n <= 3 || rng.uniform() < 0.5) return rng.uniform_int(n);
      return n - 1 - rng.uniform_int(3);
    };

    // Apply the move, remembering enough to undo it.
    int from = 0;
    int undo_index = -1;
    double undo_tau = 0;
    Control undo_u;
    enum {
      kUndoValues,
      kUndoErase,
      kUndoReinsert,
      kUndoUnmerge,
      kUndoRetail,
      kUndoReplan,
    } undo_kind = kUndoValues;
    switch (mv) {
      case kNudgeControl0:
      case kNudgeControl1:
      case kSnapControl: {
        const int i = pick();
        const int d = rng.uniform_int(spec_.control_dim());
        undo_index = i;
        undo_u = u_[i];
        undo_tau = tau_[i];
        const double lo = spec_.control_lo(d), hi = spec_.control_hi(d);
        if (mv == kSnapControl) {
          const int which = rng.uniform_int(3);
          u_[i](d) = which == 0 ? lo : which == 1 ? 0.5 * (lo + hi) : hi;
        } else {
          u_[i](d) = std::clamp(
              u_[i](d) + rng.uniform(-scale, scale) * (hi - lo), lo, hi);
        }
        from = i;
        break;
      }
      case kNudgeTau0:
      case kNudgeTau1: {
        const int i = pick();
        undo_index = i;
        undo_u = u_[i];
        undo_tau = tau_[i];
        tau_[i] = std::clamp(
            tau_[i] + rng.uniform(-scale, scale) * opts_.duration_hi, 0.0,
            tau_cap());
        from = i;
        break;
      }
      case kDelete: {
        const int i = pick();
        undo_index = i;
        undo_u = u_[i];
        undo_tau = tau_[i];
        undo_kind = kUndoReinsert;
        u_.erase(u_.begin() + i);
        tau_.erase(tau_.begin() + i);
        from = i;
        break;
      }
      case kInsert: {
        const int i = rng.uniform_int(size() + 1);
        undo_index = i;
        undo_kind = kUndoErase;
        u_.insert(u_.begin() + i, sample_control(spec_, rng));
        tau_.insert(tau_.begin() + i,
                    rng.uniform(opts_.duration_lo, opts_.duration_hi));
        from = i;
        break;
      }
      case kSplit: {
        const int i = pick();
        undo_index = i;
        undo_tau = tau_[i];
        undo_kind = kUndoUnmerge;
        const Control uc = u_[i];
        const double half = 0.5 * tau_[i];
        tau_[i] = half;
        u_.insert(u_.begin() + i, uc);
        tau_.insert(tau_.begin() + i, half);
        from = i;
        break;
      }
      case kMerge: {
        const int i = std::min(pick(), size() - 2);
        undo_index = i;
        undo_u = u_[i];
        undo_tau = tau_[i];
        merge_spare_u_ = u_[i + 1];
        merge_spare_tau_ = tau_[i + 1];
        const double total = tau_[i] + tau_[i + 1];
        if (total > 0)
          u_[i] = (tau_[i] * u_[i] + tau_[i + 1] * u_[i + 1]) / total;
        tau_[i] = std::min(total, tau_cap());
        u_.erase(u_.begin() + i + 1);
        tau_.erase(tau_.begin() + i + 1);
        undo_kind = kUndoValues;  // plus re-insert of the spare below
        from = i;
        break;
      }
      case kReplan: {
        // Drop a suffix and rebuild it as a greedy bridge re-aimed at the
        // goal. Accepted bridges are genuine cost cuts with the endpoint
        // still in the ball, which single-segment edits cannot achieve
        // once the violation penalty has risen.
        const int n = size();
        const int i = n - 1 - rng.uniform_int(std::min(n, 8));
        saved_u_.assign(u_.begin() + i, u_.end());
        saved_tau_.assign(tau_.begin() + i, tau_.end());
        u_.resize(i);
        tau_.resize(i);
        base_ = pre_[i];
        for (int s = 0; s < kBridgeSegments && size() < kMaxSegments; ++s) {
          if (weighted_distance(spec_, base_, goal_) <= tol) break;
          double bt = 0;
          if (!probe_segment(base_, rng, bridge_u_, bt)) break;
          u_.push_back(bridge_u_);
          tau_.push_back(bt);
          base_ = xbest_;
        }
        undo_index = i;
        undo_kind = kUndoReplan;
        from = i;
        break;
      }
      case kSteer:
      default: {
        // Greedy repair: extend (or re-aim the tail of) the schedule with
        // the best probe segment.
        const bool replace = size() >= 1 && rng.uniform() < 0.5;
        if (replace) {
          retail_u_ = u_.back();
          retail_tau_ = tau_.back();
          u_.pop_back();
          tau_.pop_back();
        }
        double steer_tau = 0;
        if (!probe_segment(pre_[size()], rng, bridge_u_, steer_tau)) {
          if (replace) {
            u_.push_back(retail_u_);
            tau_.push_back(retail_tau_);
          }
          continue;
        }
        undo_index = size();
        undo_kind = replace ? kUndoRetail : kUndoErase;
        u_.push_back(bridge_u_);
        tau_.push_back(steer_tau);
        from = size() - 1;
        break;
      }
    }

    const double nd = replay(from);
    bool take = false;
    const double ncost = total_tau();
    if (nd >= 0) {
      const double sc = cost + lambda * std::max(0.0, dist - tol);
      const double sn = ncost + lambda * std::max(0.0, nd - tol);
      const double delta = sn - sc;
      take = delta <= 0 || rng.uniform() < std::exp(-delta / temp);
    }
    if (take) {
      commit(from);
      dist = nd;
      cost = ncost;
      if (dist <= tol && cost < best_cost_) {
        best_cost_ = cost;
        best_u_ = u_;
        best_tau_ = tau_;
      }
      continue;
    }
    switch (undo_kind) {
      case kUndoValues:
        u_[undo_index] = undo_u;
        tau_[undo_index] = undo_tau;
        if (mv == kMerge) {
          u_.insert(u_.begin() + undo_index + 1, merge_spare_u_);
          tau_.insert(tau_.begin() + undo_index + 1, merge_spare_tau_);
        }
        break;
      case kUndoErase:
        u_.erase(u_.begin() + undo_index);
        tau_.erase(tau_.begin() + undo_index);
        break;
      case kUndoReinsert:
        u_.insert(u_.begin() + undo_index, undo_u);
        tau_.insert(tau_.begin() + undo_index, undo_tau);
        break;
      case kUndoUnmerge:
        u_.erase(u_.begin() + undo_index);
        tau_[undo_index] = undo_tau;
        break;
      case kUndoRetail:
        u_.back() = retail_u_;
        tau_.back() = retail_tau_;
        break;
      case kUndoReplan:
        u_.resize(undo_index);
        tau_.resize(undo_index);
        u_.insert(u_.end(), saved_u_.begin(), saved_u_.end());
        tau_.insert(tau_.end(), saved_tau_.begin(), saved_tau_.end());
        break;
    }
  }
}

// Restart polish. Time-optimal trajectories under box control bounds are
// close to bang-bang with few switches, so a short word of box-vertex
// controls usually contains an optimal schedule once its durations are
// tuned; a duration annealed to zero drops its letter, so a length-6 word
// only needs to cover the optimal control sequence as a subsequence. Each
// restart draws a fresh word and anneals durations only.
void ScheduleRefiner::polish(long evals, Rng& rng) {
  const double tol = opts_.goal_tol;
  const int word_len = 6;
  const long per_restart = 500;
  const int cdim = spec_.control_dim();
  long used = 0;
  while (used < evals) {
    u_.assign(word_len, Control(cdim));
    tau_.assign(word_len, 0.0);
    for (int i = 0; i < word_len; ++i) {
      for (int d = 0; d < cdim; ++d) {
        const double lo = spec_.control_lo(d), hi = spec_.control_hi(d);
        const int which = rng.uniform_int(3);
        u_[i](d) = which == 0 ? lo : which == 1 ? 0.5 * (lo + hi) : hi;
      }
      tau_[i] = rng.uniform(0.0, opts_.duration_hi);
    }
    put(pre_, 0, start_);
    pre_len_ = 1;
    double dist = replay(0);
    ++used;
    if (dist < 0) continue;
    commit(0);
    double cost = total_tau();
    if (dist <= tol && cost < best_cost_) {
      best_cost_ = cost;
      best_u_ = u_;
      best_tau_ = tau_;
    }
    for (long e = 0; e < per_restart && used < evals; ++e, ++used) {
      const double frac =
          static_cast<double>(e) / static_cast<double>(per_restart);
      const double lambda = 10.0 * std::pow(200.0, frac);
      const double temp = 0.2 * std::pow(0.005, frac);
      const double scale = 0.5 * std::pow(0.004, frac);
      const int i = rng.uniform_int(word_len);
      const double old = tau_[i];
      tau_[i] = std::clamp(
          old + rng.uniform(-scale, scale) * opts_.duration_hi, 0.0,
          tau_cap());
      const double nd = replay(i);
      bool take = false;
      const double ncost = total_tau();
      if (nd >= 0) {
        const double sc = cost + lambda * std::max(0.0, dist - tol);
        const double sn = ncost + lambda * std::max(0.0, nd - tol);
        const double delta = sn - sc;
        take = delta <= 0 || rng.uniform() < std::exp(-delta / temp);
      }
      if (take) {
        commit(i);
        dist = nd;
        cost = ncost;
        if (dist <= tol && cost < best_cost_) {
          best_cost_ = cost;
          best_u_ = u_;
          best_tau_ = tau_;
        }
      } else {
        tau_[i] = old;
      }
    }
  }
}

}  // namespace

std::optional<double> oracle_cost_sampled(const DynamicsSpec& spec,
                                          const State& start,
                                          const State& goal,
                                          const OracleOptions& opts,
                                          Rng& rng) {
  if (start.size() != spec.state_dim() || goal.size() != spec.state_dim())
    throw ContractViolation("oracle: dimension mismatch");
  if (opts.budget < 1 || opts.goal_tol <= 0 || opts.candidates < 1 ||
      opts.refine_trials < 0 || opts.tree_tol <= 0)
    throw ContractViolation("oracle: bad options");

  if (weighted_distance(spec, start, goal) <= opts.goal_tol) return 0.0;

  const double work_tol = opts.refine_trials > 0
                              ? std::max(opts.goal_tol, opts.tree_tol)
                              : opts.goal_tol;

  SearchTree tree(spec, start);
  double best = std::numeric_limits<double>::infinity();
  int best_id = -1;
  PropagationEnd chosen;
  Control chosen_u(spec.control_dim());
  for (long iter = 0; iter < opts.budget; ++iter) {
    const bool to_goal = rng.uniform() < opts.goal_bias;
    const State target = to_goal ? goal : sample_state(spec, rng);
    const int sel = tree.nearest_euclidean_indexed(target);

    chosen.duration = 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < opts.candidates; ++j) {
      const Control u = sample_control(spec, rng);
      const double dur = rng.uniform(opts.duration_lo, opts.duration_hi);
      PropagationEnd end =
          propagate_endpoint(spec, tree.node(sel).state, u, dur);
      if (end.duration == 0.0) continue;
      const double d = weighted_distance(spec, end.state, target);
      if (d < best_d) {
        best_d = d;
        chosen = std::move(end);
        chosen_u = u;
      }
    }
    if (chosen.duration == 0.0) continue;

    const double cost = tree.node(sel).cost_to_come + chosen.duration;
    if (cost >= best) continue;
    const int id = tree.insert(sel, chosen.state, chosen_u, chosen.duration,
                               chosen.duration);
    if (weighted_distance(spec, tree.node(id).state, goal) <= work_tol) {
      best = cost;
      best_id = id;
    }
  }

  if (opts.refine_trials <= 0) {
    if (std::isinf(best)) return std::nullopt;
    return best;
  }

  if (best_id < 0) {
    // No ball hit; refine from the closest approach instead.
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < tree.size(); ++i) {
      const double d = weighted_distance(spec, tree.node(i).state, goal);
      if (d < dmin) {
        dmin = d;
        best_id = i;
      }
    }
  }

  ScheduleRefiner refiner(spec, tree.node(0).state, goal, opts);
  refiner.seed(tree, best_id);
  refiner.run(opts.refine_trials, rng);
  refiner.polish(opts.refine_trials / 2, rng);
  return refiner.best();
}

namespace {

DynamicsSpec with_turn_rate(const DynamicsSpec& spec, double omega) {
  DubinsParams p = std::get<DubinsParams>(spec.params);
  p.turn_rate_limit = omega;
  DynamicsSpec out = make_dubins_spec(
      p, spec.state_lo.head<2>(), spec.state_hi.head<2>(), spec.dt);
  out.weights = spec.weights;
  return out;
}

}  // namespace

Dataset generate_dataset(const DynamicsSpec& spec, const DataGenConfig& cfg,
                         DataGenReport* report) {
  if (cfg.count < 1) throw ContractViolation("generate_dataset: count < 1");
  if (cfg.oracle == DataGenConfig::Oracle::kAnalytic &&
      spec.kind != ModelKind::kDubins)
    throw ContractViolation("generate_dataset: analytic oracle needs dubins");
  if (cfg.condition_turn_rate &&
      (spec.kind != ModelKind::kDubins || cfg.condition_grid < 2))
    throw ContractViolation("generate_dataset: bad condition config");
  if (cfg.cap_quantile <= 0 || cfg.cap_quantile > 1)
    throw ContractViolation("generate_dataset: bad cap quantile");

  Rng rng(cfg.seed);
  const int d = spec.state_dim();
  const int c = cfg.condition_turn_rate ? 1 : 0;

  Dataset ds;
  ds.kind = spec.kind;
  ds.state_dim = d;
  ds.condition_dim = c;
  ds.starts.resize(cfg.count, d);
  ds.goals.resize(cfg.count, d);
  ds.conditions.resize(cfg.count, c);
  ds.costs.resize(cfg.count);
  ds.clamped.assign(cfg.count, 0);

  long collected = 0, attempts = 0, failures = 0;
  while (collected < cfg.count) {
    ++attempts;
    if (attempts >= 2 * cfg.count && failures * 2 > attempts) {
      std::ostringstream msg;
      msg << "generate_dataset: oracle failure rate "
          << (100.0 * failures / attempts) << "% after " << attempts
          << " attempts; loosen the oracle budget/tolerance";
      throw ContractViolation(msg.str());
    }

    DynamicsSpec sample_spec = spec;
    double omega = 0;
    if (cfg.condition_turn_rate) {
      const int idx = rng.uniform_int(cfg.condition_grid);
      omega = cfg.condition_lo + idx * (cfg.condition_hi - cfg.condition_lo) /
                                     (cfg.condition_grid - 1);
      sample_spec = with_turn_rate(spec, omega);
    }
    const State start = sample_state(sample_spec, rng);
    const State goal = sample_state(sample_spec, rng);

    double cost = 0;
    if (cfg.oracle == DataGenConfig::Oracle::kAnalytic) {
      cost = dubins_transition_cost(std::get<DubinsParams>(sample_spec.params),
                                    start, goal);
    } else {
      const auto sampled =
          oracle_cost_sampled(sample_spec, start, goal, cfg.oracle_opts, rng);
      if (!sampled) {
        ++failures;
        continue;
      }
      cost = *sampled;
    }

    ds.starts.row(collected) = start;
    ds.goals.row(collected) = goal;
    if (c > 0) ds.conditions(collected, 0) = omega;
    ds.costs(collected) = cost;
    ++collected;
  }

  // Nearest-rank quantile cap; everything above is clamped and flagged.
  std::vector<double> sorted(ds.costs.data(), ds.costs.data() + ds.size());
  std::sort(sorted.begin(), sorted.end());
  long rank = static_cast<long>(std::ceil(cfg.cap_quantile * ds.size())) - 1;
  rank = std::max(0L, std::min<long>(rank, ds.size() - 1));
  ds.cost_cap = sorted[rank];
  if (ds.cost_cap <= 0) ds.cost_cap = 1.0;
  long clamped = 0;
  for (int i = 0; i < ds.size(); ++i) {
    if (ds.costs(i) > ds.cost_cap) {
      ds.costs(i) = ds.cost_cap;
      ds.clamped[i] = 1;
      ++clamped;
    }
  }
  if (report) *report = DataGenReport{attempts, failures, clamped};
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out.precision(17);
  out << "dataset v1\n";
  out << "model = " << model_name(ds.kind) << "\n";
  out << "state_dim = " << ds.state_dim << "\n";
  out << "condition_dim = " << ds.condition_dim << "\n";
  out << "cost_cap = " << ds.cost_cap << "\n";
  out << "count = " << ds.size() << "\n";
  for (int i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.state_dim; ++j) out << ds.starts(i, j) << " ";
    for (int j = 0; j < ds.state_dim; ++j) out << ds.goals(i, j) << " ";
    for (int j = 0; j < ds.condition_dim; ++j) out << ds.conditions(i, j) << " ";
    out << ds.costs(i) << " " << static_cast<int>(ds.clamped[i]) << "\n";
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  if (!std::getline(in, line) || line != "dataset v1")
    throw ParseError(path, 1, "expected `dataset v1` header");

  Dataset ds;
  long count = -1;
  int lineno = 1;
  while (count < 0 && std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string key, eq;
    ss >> key >> eq;
    if (eq != "=") throw ParseError(path, lineno, "expected key = value");
    if (key == "model") {
      std::string name;
      ss >> name;
      ds.kind = model_from_name(name);
    } else if (key == "state_dim") ss >> ds.state_dim;
    else if (key == "condition_dim") ss >> ds.condition_dim;
    else if (key == "cost_cap") ss >> ds.cost_cap;
    else if (key == "count") ss >> count;
    else throw ParseError(path, lineno, "unknown key: " + key);
    if (!ss) throw ParseError(path, lineno, "bad value for " + key);
  }
  if (count < 0 || ds.state_dim < 1 || ds.condition_dim < 0)
    throw ParseError(path, 0, "incomplete header");

  ds.starts.resize(count, ds.state_dim);
  ds.goals.resize(count, ds.state_dim);
  ds.conditions.resize(count, ds.condition_dim);
  ds.costs.resize(count);
  ds.clamped.assign(count, 0);
  for (long i = 0; i < count; ++i) {
    if (!std::getline(in, line))
      throw ParseError(path, lineno, "unexpected end of file");
    ++lineno;
    std::istringstream ss(line);
    for (int j = 0; j < ds.state_dim; ++j) ss >> ds.starts(i, j);
    for (int j = 0; j < ds.state_dim; ++j) ss >> ds.goals(i, j);
    for (int j = 0; j < ds.condition_dim; ++j) ss >> ds.conditions(i, j);
    int flag = 0;
    double cost = 0;
    ss >> cost >> flag;
    if (!ss) throw ParseError(path, lineno, "malformed sample row");
    ds.costs(i) = cost;
    ds.clamped[i] = static_cast<std::uint8_t>(flag != 0);
  }
  return ds;
}

}  // namespace kinoplan
