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

#include "kinoplan/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace kinoplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest round-trip formatting, locale independent.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string joined_names(const std::vector<PlannerKind>& ks) {
  std::string s;
  for (size_t i = 0; i < ks.size(); ++i) {
    if (i) s += ",";
    s += planner_name(ks[i]);
  }
  return s;
}

std::string joined_names(const std::vector<EstimatorKind>& ks) {
  std::string s;
  for (size_t i = 0; i < ks.size(); ++i) {
    if (i) s += ",";
    s += estimator_name(ks[i]);
  }
  return s;
}

void write_manifest(const BenchConfig& cfg, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "scene = " << (cfg.scene_path.empty() ? "-" : cfg.scene_path) << "\n";
  out << "model = " << (cfg.model_path.empty() ? "-" : cfg.model_path) << "\n";
  out << "planners = " << joined_names(cfg.planners) << "\n";
  out << "estimators = " << joined_names(cfg.estimators) << "\n";
  out << "seeds = " << cfg.seeds << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
  out << "budget_seconds = " << fmt(cfg.budget_seconds) << "\n";
  out << "iteration_cap = " << cfg.iteration_cap << "\n";
  out << "workers = " << cfg.workers << "\n";
  out << "curve_points = " << cfg.curve_points << "\n";
  out << "candidates = " << cfg.planner.expand.candidates << "\n";
  out << "goal_bias = " << fmt(cfg.planner.expand.goal_bias) << "\n";
  out << "duration_lo = " << fmt(cfg.planner.expand.duration_lo) << "\n";
  out << "duration_hi = " << fmt(cfg.planner.expand.duration_hi) << "\n";
  out << "anytime_epsilon = " << fmt(cfg.planner.anytime_epsilon) << "\n";
  out << "ao_cost_weight = " << fmt(cfg.planner.ao_cost_weight) << "\n";
  out << "sst_delta_bn = " << fmt(cfg.planner.sst.delta_bn) << "\n";
  out << "sst_delta_s = " << fmt(cfg.planner.sst.delta_s) << "\n";
  out << "sst_shrink = " << fmt(cfg.planner.sst.shrink) << "\n";
  finish_out(out, path);
}

void write_trials(const BenchConfig& cfg, const std::vector<TrialRecord>& ts,
                  const std::string& path) {
  const bool iter_mode = cfg.iteration_cap > 0;
  std::ofstream out = open_out(path);
  out << "planner,estimator,seed_index,seed,success,"
      << (iter_mode ? "first_iteration" : "time_to_solution")
      << ",cost,iterations,nodes\n";
  for (const TrialRecord& t : ts) {
    out << planner_name(t.planner) << "," << estimator_name(t.estimator) << ","
        << t.seed_index << "," << t.seed << "," << (t.success ? 1 : 0) << ",";
    if (t.success) {
      if (iter_mode) {
        out << t.first_iteration;
      } else {
        out << fmt(t.time_to_solution);
      }
    }
    out << "," << fmt(t.cost) << "," << t.iterations << "," << t.nodes << "\n";
  }
  finish_out(out, path);
}

void write_summary(const BenchConfig& cfg, const std::vector<CellSummary>& ss,
                   const std::string& path) {
  const bool iter_mode = cfg.iteration_cap > 0;
  std::ofstream out = open_out(path);
  out << "planner,estimator,trials,successes,success_pct,"
      << (iter_mode ? "mean_first_iteration,std_first_iteration"
                    : "mean_time,std_time")
      << "\n";
  for (const CellSummary& s : ss) {
    out << planner_name(s.planner) << "," << estimator_name(s.estimator) << ","
        << s.trials << "," << s.successes << "," << fmt(s.success_pct) << ",";
    if (s.successes > 0) {
      out << fmt(s.mean_time) << "," << fmt(s.std_time);
    } else {
      out << ",";
    }
    out << "\n";
  }
  finish_out(out, path);
}

void write_curves(const BenchConfig& cfg, const std::vector<TrialRecord>& ts,
                  const std::string& path) {
  const bool iter_mode = cfg.iteration_cap > 0;
  const double total =
      iter_mode ? static_cast<double>(cfg.iteration_cap) : cfg.budget_seconds;
  std::ofstream out = open_out(path);
  out << "planner,estimator,point," << (iter_mode ? "iteration" : "time")
      << ",solved_fraction\n";
  for (PlannerKind p : cfg.planners) {
    for (EstimatorKind e : cfg.estimators) {
      std::vector<double> firsts;
      int cell_trials = 0;
      for (const TrialRecord& t : ts) {
        if (t.planner != p || t.estimator != e) continue;
        ++cell_trials;
        if (t.success)
          firsts.push_back(iter_mode ? static_cast<double>(t.first_iteration)
                                     : t.time_to_solution);
      }
      for (int k = 0; k < cfg.curve_points; ++k) {
        const double g = total * (k + 1) / cfg.curve_points;
        long solved = 0;
        for (double f : firsts) solved += (f <= g) ? 1 : 0;
        const double frac =
            cell_trials ? static_cast<double>(solved) / cell_trials : 0.0;
        out << planner_name(p) << "," << estimator_name(e) << "," << k << ","
            << fmt(g) << "," << fmt(frac) << "\n";
      }
    }
  }
  finish_out(out, path);
}

}  // namespace

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BenchResult run_bench(const Environment& env, const DynamicsSpec& spec,
                      const CostEstimator* euclidean,
                      const CostEstimator* learned, const BenchConfig& cfg) {
  if (cfg.planners.empty()) throw ContractViolation("bench: no planners");
  if (cfg.estimators.empty()) throw ContractViolation("bench: no estimators");
  if (cfg.seeds < 1) throw ContractViolation("bench: seeds must be >= 1");
  if (cfg.curve_points < 1) throw ContractViolation("bench: curve_points < 1");
  if (cfg.iteration_cap <= 0 && !(cfg.budget_seconds > 0))
    throw ContractViolation("bench: no budget and no iteration cap");
  if (!euclidean) throw ContractViolation("bench: euclidean estimator missing");
  for (EstimatorKind e : cfg.estimators) {
    if (e == EstimatorKind::kLearned && !learned)
      throw ContractViolation("bench: learned estimator missing");
  }

  struct Job {
    PlannerKind planner;
    EstimatorKind estimator;
    int seed_index;
  };
  std::vector<Job> jobs;
  for (PlannerKind p : cfg.planners)
    for (EstimatorKind e : cfg.estimators)
      for (int s = 0; s < cfg.seeds; ++s) jobs.push_back({p, e, s});

  BenchResult result;
  result.trials.resize(jobs.size());

  // Each slot is written by exactly one worker; the output order is the
  // cross-product order regardless of scheduling.
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& j = jobs[i];
      PlannerConfig pc = cfg.planner;
      pc.seed = Rng::derive_seed(cfg.base_seed, static_cast<std::uint64_t>(j.seed_index));
      pc.budget_seconds = cfg.budget_seconds;
      pc.iteration_cap = cfg.iteration_cap;
      pc.sst_select_by_estimator = (j.estimator == EstimatorKind::kLearned);
      const CostEstimator* est =
          (j.estimator == EstimatorKind::kLearned) ? learned : euclidean;
      const PlanResult r = plan(j.planner, env, spec, *est, pc);
      TrialRecord t;
      t.planner = j.planner;
      t.estimator = j.estimator;
      t.seed_index = j.seed_index;
      t.seed = pc.seed;
      t.success = r.success;
      t.time_to_solution = r.time_to_first();
      t.first_iteration = r.iteration_of_first();
      t.cost = r.cost;
      t.iterations = r.stats.iterations;
      t.nodes = r.stats.nodes;
      result.trials[i] = t;
    }
  };
  const int workers = std::max(
      1, std::min(cfg.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  const bool iter_mode = cfg.iteration_cap > 0;
  for (PlannerKind p : cfg.planners) {
    for (EstimatorKind e : cfg.estimators) {
      CellSummary s;
      s.planner = p;
      s.estimator = e;
      std::vector<double> firsts;
      for (const TrialRecord& t : result.trials) {
        if (t.planner != p || t.estimator != e) continue;
        ++s.trials;
        if (t.success) {
          ++s.successes;
          firsts.push_back(iter_mode ? static_cast<double>(t.first_iteration)
                                     : t.time_to_solution);
        }
      }
      s.success_pct = s.trials ? 100.0 * s.successes / s.trials : 0.0;
      s.mean_time = firsts.empty() ? 0.0 : mean_of(firsts);
      s.std_time = sample_std_of(firsts);
      result.summaries.push_back(s);
    }
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_manifest(cfg, cfg.out_dir + "/manifest.txt");
    save_spec_config(spec, cfg.out_dir + "/model.cfg");
    write_trials(cfg, result.trials, cfg.out_dir + "/trials.csv");
    write_summary(cfg, result.summaries, cfg.out_dir + "/summary.csv");
    write_curves(cfg, result.trials, cfg.out_dir + "/curves.csv");
  }
  return result;
}

std::vector<EpisodeRecord> run_cumulative_benefit(const Environment& env,
                                                  const DynamicsSpec& spec,
                                                  const CostEstimator& standard,
                                                  const CostEstimator& learned,
                                                  const CumulativeConfig& cfg) {
  if (cfg.episodes < 1) throw ContractViolation("episodes must be >= 1");
  std::vector<EpisodeRecord> out;
  double cumulative = 0;
  for (int i = 0; i < cfg.episodes; ++i) {
    PlannerConfig pc = cfg.planner_cfg;
    pc.seed = Rng::derive_seed(cfg.base_seed, static_cast<std::uint64_t>(i));
    pc.budget_seconds = cfg.budget_seconds;
    pc.iteration_cap = cfg.iteration_cap;

    pc.sst_select_by_estimator = false;
    const PlanResult rs = plan(cfg.planner, env, spec, standard, pc);
    pc.sst_select_by_estimator = true;
    const PlanResult rl = plan(cfg.planner, env, spec, learned, pc);

    EpisodeRecord e;
    e.episode = i;
    e.seed = pc.seed;
    e.standard_success = rs.success;
    e.learned_success = rl.success;
    e.t_standard = rs.success ? rs.time_to_first() : cfg.budget_seconds;
    e.t_learned = rl.success ? rl.time_to_first() : cfg.budget_seconds;
    e.diff = e.t_standard - e.t_learned;
    cumulative += e.diff;
    e.cumulative = cumulative;
    out.push_back(e);
  }

  if (!cfg.out_path.empty()) {
    std::ofstream f = open_out(cfg.out_path);
    f << "# training_seconds = " << fmt(cfg.training_seconds) << "\n";
    f << "episode,seed,standard_success,learned_success,t_standard,"
         "t_learned,diff,cumulative\n";
    for (const EpisodeRecord& e : out) {
      f << e.episode << "," << e.seed << "," << (e.standard_success ? 1 : 0)
        << "," << (e.learned_success ? 1 : 0) << "," << fmt(e.t_standard)
        << "," << fmt(e.t_learned) << "," << fmt(e.diff) << ","
        << fmt(e.cumulative) << "\n";
    }
    finish_out(f, cfg.out_path);
  }
  return out;
}

std::vector<CostfieldRow> run_costfield(const DynamicsSpec& spec,
                                        const CostEstimator& est,
                                        const CostfieldConfig& cfg) {
  const int d = spec.state_dim();
  if (cfg.origin.size() != d)
    throw ContractViolation("costfield: origin dimension mismatch");
  if (cfg.axis_a < 0 || cfg.axis_a >= d || cfg.axis_b < 0 || cfg.axis_b >= d ||
      cfg.axis_a == cfg.axis_b)
    throw ContractViolation("costfield: bad sweep axes");
  if (cfg.resolution < 2) throw ContractViolation("costfield: resolution < 2");

  const int r = cfg.resolution;
  const double lo_a = spec.state_lo[cfg.axis_a], hi_a = spec.state_hi[cfg.axis_a];
  const double lo_b = spec.state_lo[cfg.axis_b], hi_b = spec.state_hi[cfg.axis_b];

  Batch grid(r * r, d);
  std::vector<CostfieldRow> rows(static_cast<size_t>(r) * r);
  for (int i = 0; i < r; ++i) {
    const double va = lo_a + (hi_a - lo_a) * i / (r - 1);
    for (int j = 0; j < r; ++j) {
      const double vb = lo_b + (hi_b - lo_b) * j / (r - 1);
      const int at = i * r + j;
      grid.row(at) = cfg.origin.transpose();
      grid(at, cfg.axis_a) = va;
      grid(at, cfg.axis_b) = vb;
      rows[static_cast<size_t>(at)].a = va;
      rows[static_cast<size_t>(at)].b = vb;
    }
  }

  Eigen::VectorXd predicted(grid.rows());
  est.estimate_batch(grid, cfg.origin, predicted);
  for (int at = 0; at < r * r; ++at)
    rows[static_cast<size_t>(at)].predicted = predicted[at];

  if (cfg.oracle_budget > 0) {
    OracleOptions opts;
    opts.budget = cfg.oracle_budget;
    for (int at = 0; at < r * r; ++at) {
      Rng rng(Rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(at)));
      const State s = grid.row(at).transpose();
      const std::optional<double> c =
          oracle_cost_sampled(spec, s, cfg.origin, opts, rng);
      rows[static_cast<size_t>(at)].oracle = c ? *c : kInf;
    }
  }

  if (!cfg.out_path.empty()) {
    std::ofstream f = open_out(cfg.out_path);
    f << "axis_a,axis_b,predicted" << (cfg.oracle_budget > 0 ? ",oracle" : "")
      << "\n";
    for (const CostfieldRow& row : rows) {
      f << fmt(row.a) << "," << fmt(row.b) << "," << fmt(row.predicted);
      if (cfg.oracle_budget > 0) f << "," << fmt(row.oracle);
      f << "\n";
    }
    finish_out(f, cfg.out_path);
  }
  return rows;
}

}  // namespace kinoplan
