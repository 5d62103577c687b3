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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kinoplan/bench.hpp"

namespace {

using namespace kinoplan;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SpecArgs {
  std::string model = "dubins";
  std::string config;
};

void add_spec_args(CLI::App* cmd, SpecArgs& a) {
  cmd->add_option("--model", a.model, "dynamics model: dubins|pendulum|trailer")
      ->capture_default_str();
  cmd->add_option("--config", a.config,
                  "dynamics config file (overrides --model)")
      ->check(CLI::ExistingFile);
}

DynamicsSpec resolve_spec(const SpecArgs& a) {
  if (!a.config.empty()) return load_spec_config(a.config);
  switch (model_from_name(a.model)) {
    case ModelKind::kDubins:
      return make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
    case ModelKind::kDoublePendulum:
      return make_pendulum_spec(PendulumParams{});
    case ModelKind::kGooseneckTrailer:
      return make_trailer_spec(TrailerParams{}, {0.0, 0.0}, {10.0, 10.0});
  }
  throw std::invalid_argument("bad model kind");
}

// Builds the learned estimator for `spec`, feeding the spec's turn-rate
// limit into the condition input of conditioned models.
std::unique_ptr<LearnedEstimator> load_learned(const std::string& net,
                                               const DynamicsSpec& spec) {
  Mlp model = load_mlp(net);
  if (model.state_dim() != spec.state_dim())
    throw std::runtime_error(
        "model '" + net + "' has state dim " +
        std::to_string(model.state_dim()) + " but the dynamics spec has " +
        std::to_string(spec.state_dim()));
  Eigen::VectorXd cond(model.condition_dim());
  if (model.condition_dim() > 0) {
    if (model.condition_dim() != 1 || spec.kind != ModelKind::kDubins)
      throw std::runtime_error(
          "conditioned model '" + net +
          "' expects a dubins spec with a single turn-rate condition");
    cond[0] = std::get<DubinsParams>(spec.params).turn_rate_limit;
  }
  return std::make_unique<LearnedEstimator>(std::move(model), std::move(cond));
}

struct SearchFlags {
  std::uint64_t seed = 0;
  double budget = 30.0;
  long iters = 0;
  int candidates = 10;
  double goal_bias = 0.05;
  double dur_lo = 0.1, dur_hi = 1.0;
  double anytime_eps = 0.1;
  double ao_weight = 1.0;
  double sst_bn = 0.4, sst_s = 0.2, sst_shrink = 0.9;
};

void add_search_flags(CLI::App* cmd, SearchFlags& f) {
  cmd->add_option("--seed", f.seed, "rng seed")->capture_default_str();
  cmd->add_option("--budget", f.budget, "wall-clock budget per run, seconds")
      ->capture_default_str();
  cmd->add_option("--iters", f.iters,
                  "iteration cap; > 0 ignores the wall clock (deterministic)")
      ->capture_default_str();
  cmd->add_option("--candidates", f.candidates,
                  "control samples per expansion")
      ->capture_default_str();
  cmd->add_option("--goal-bias", f.goal_bias, "goal sampling probability")
      ->capture_default_str();
  cmd->add_option("--dur-lo", f.dur_lo, "min propagation duration")
      ->capture_default_str();
  cmd->add_option("--dur-hi", f.dur_hi, "max propagation duration")
      ->capture_default_str();
  cmd->add_option("--anytime-eps", f.anytime_eps,
                  "anytime improvement fraction")
      ->capture_default_str();
  cmd->add_option("--ao-weight", f.ao_weight, "cost-axis weight in AO search")
      ->capture_default_str();
  cmd->add_option("--sst-delta-bn", f.sst_bn, "SST selection radius")
      ->capture_default_str();
  cmd->add_option("--sst-delta-s", f.sst_s, "SST witness radius")
      ->capture_default_str();
  cmd->add_option("--sst-shrink", f.sst_shrink, "SST* per-round radius decay")
      ->capture_default_str();
}

PlannerConfig to_planner_config(const SearchFlags& f) {
  PlannerConfig pc;
  pc.expand.candidates = f.candidates;
  pc.expand.goal_bias = f.goal_bias;
  pc.expand.duration_lo = f.dur_lo;
  pc.expand.duration_hi = f.dur_hi;
  pc.anytime_epsilon = f.anytime_eps;
  pc.ao_cost_weight = f.ao_weight;
  pc.sst.delta_bn = f.sst_bn;
  pc.sst.delta_s = f.sst_s;
  pc.sst.shrink = f.sst_shrink;
  pc.budget_seconds = f.budget;
  pc.iteration_cap = f.iters;
  pc.seed = f.seed;
  return pc;
}

// gen-data ------------------------------------------------------------

struct GenArgs {
  SpecArgs spec;
  long n = 10000;
  bool condition_omega = false;
  int condition_grid = 15;
  double condition_lo = 0.5, condition_hi = kPi;
  std::string oracle = "analytic";
  long oracle_budget = 20000;
  double goal_tol = 0.2;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_data(const GenArgs& a) {
  const DynamicsSpec spec = resolve_spec(a.spec);
  DataGenConfig cfg;
  cfg.count = a.n;
  cfg.condition_turn_rate = a.condition_omega;
  cfg.condition_grid = a.condition_grid;
  cfg.condition_lo = a.condition_lo;
  cfg.condition_hi = a.condition_hi;
  if (a.oracle == "analytic") {
    cfg.oracle = DataGenConfig::Oracle::kAnalytic;
  } else if (a.oracle == "sampled") {
    cfg.oracle = DataGenConfig::Oracle::kSampled;
  } else {
    throw std::invalid_argument("unknown oracle '" + a.oracle +
                                "' (expected analytic|sampled)");
  }
  cfg.oracle_opts.budget = a.oracle_budget;
  cfg.oracle_opts.goal_tol = a.goal_tol;
  cfg.seed = a.seed;

  DataGenReport report;
  const Dataset ds = generate_dataset(spec, cfg, &report);
  save_dataset(ds, a.out);
  std::cout << "samples " << ds.size() << "\n";
  std::cout << "attempts " << report.attempts << "\n";
  std::cout << "discard_rate "
            << fmt(report.attempts
                       ? static_cast<double>(report.failures) / report.attempts
                       : 0.0)
            << "\n";
  std::cout << "cost_cap " << fmt(ds.cost_cap) << "\n";
  std::cout << "clamped " << report.clamped << "\n";
  return 0;
}

// train ---------------------------------------------------------------

struct TrainArgs {
  std::string data;
  int width = 16;
  int layers = 5;
  int epochs = 200;
  double lr = 1e-3;
  double momentum = 0.9;
  int batch = 256;
  double val_fraction = 0.1;
  double time_budget = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::string log;
};

int cmd_train(const TrainArgs& a) {
  const Dataset ds = load_dataset(a.data);
  Rng rng(a.seed);
  Mlp model(ds.state_dim, ds.condition_dim, a.width, a.layers, rng);
  model.set_cost_scale(ds.cost_cap);

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.learning_rate = a.lr;
  tc.momentum = a.momentum;
  tc.batch_size = a.batch;
  tc.val_fraction = a.val_fraction;
  tc.seed = a.seed;
  tc.time_budget_seconds = a.time_budget;

  const TrainResult r = train_mlp(model, dataset_inputs(ds), ds.costs, tc);
  model.set_train_seconds(r.train_seconds);
  save_mlp(model, a.out);

  if (!a.log.empty()) {
    std::ofstream f(a.log);
    if (!f) throw std::runtime_error("cannot write " + a.log);
    f << "epoch,wall_seconds,train_mse,val_mse\n";
    for (const EpochStats& e : r.history)
      f << e.epoch << "," << fmt(e.wall_seconds) << "," << fmt(e.train_mse)
        << "," << fmt(e.val_mse) << "\n";
  }

  std::cout << "epochs " << (r.history.size() - 1) << "\n";
  std::cout << "train_seconds " << fmt(r.train_seconds) << "\n";
  if (!r.history.empty()) {
    std::cout << "initial_val_mse " << fmt(r.history.front().val_mse) << "\n";
    std::cout << "final_val_mse " << fmt(r.history.back().val_mse) << "\n";
  }
  return 0;
}

// plan ----------------------------------------------------------------

struct PlanArgs {
  std::string scene;
  SpecArgs spec;
  std::string planner = "rrt";
  std::string estimator = "euclidean";
  std::string net;
  SearchFlags search;
  std::string out;
  std::string tree;
};

int cmd_plan(const PlanArgs& a) {
  const Environment env = load_scene(a.scene);
  const DynamicsSpec spec = apply_scene_bounds(resolve_spec(a.spec), env);
  validate_environment(env, spec);

  const EstimatorKind ekind = estimator_from_name(a.estimator);
  EuclideanEstimator euclid(spec);
  std::unique_ptr<LearnedEstimator> learned;
  const CostEstimator* est = &euclid;
  if (ekind == EstimatorKind::kLearned) {
    if (a.net.empty())
      throw std::runtime_error("--estimator learned requires --net");
    learned = load_learned(a.net, spec);
    est = learned.get();
  }

  PlannerConfig pc = to_planner_config(a.search);
  pc.sst_select_by_estimator = (ekind == EstimatorKind::kLearned);
  const PlanResult r = plan(planner_from_name(a.planner), env, spec, *est, pc);

  std::cout << "success " << (r.success ? 1 : 0) << "\n";
  std::cout << "cost " << fmt(r.cost) << "\n";
  std::cout << "time_to_first " << fmt(r.time_to_first()) << "\n";
  std::cout << "first_iteration " << r.iteration_of_first() << "\n";
  std::cout << "iterations " << r.stats.iterations << "\n";
  std::cout << "nodes " << r.stats.nodes << "\n";
  std::cout << "episodes " << r.stats.episodes << "\n";

  if (!a.out.empty()) save_plan_result(r, a.out);
  if (!a.tree.empty()) {
    if (!r.tree) throw std::runtime_error("no tree to export (trivial start)");
    std::ofstream f(a.tree);
    if (!f) throw std::runtime_error("cannot write " + a.tree);
    export_tree(*r.tree, f);
  }
  return r.success ? 0 : 2;
}

// bench ---------------------------------------------------------------

struct BenchArgs {
  std::string scene;
  SpecArgs spec;
  std::vector<std::string> planners{"rrt"};
  std::vector<std::string> estimators{"euclidean"};
  std::string net;
  int seeds = 20;
  int workers = 1;
  int curve_points = 50;
  SearchFlags search;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  const Environment env = load_scene(a.scene);
  const DynamicsSpec spec = apply_scene_bounds(resolve_spec(a.spec), env);
  validate_environment(env, spec);

  BenchConfig bc;
  for (const std::string& p : a.planners)
    bc.planners.push_back(planner_from_name(p));
  for (const std::string& e : a.estimators)
    bc.estimators.push_back(estimator_from_name(e));
  bc.seeds = a.seeds;
  bc.base_seed = a.search.seed;
  bc.budget_seconds = a.search.budget;
  bc.iteration_cap = a.search.iters;
  bc.workers = a.workers;
  bc.curve_points = a.curve_points;
  bc.planner = to_planner_config(a.search);
  bc.out_dir = a.out;
  bc.scene_path = a.scene;
  bc.model_path = a.net;

  EuclideanEstimator euclid(spec);
  std::unique_ptr<LearnedEstimator> learned;
  for (EstimatorKind e : bc.estimators) {
    if (e == EstimatorKind::kLearned && !learned) {
      if (a.net.empty())
        throw std::runtime_error("estimator list includes learned: --net required");
      learned = load_learned(a.net, spec);
    }
  }

  const BenchResult r = run_bench(env, spec, &euclid, learned.get(), bc);
  for (const CellSummary& s : r.summaries) {
    std::cout << planner_name(s.planner) << " " << estimator_name(s.estimator)
              << " success_pct " << fmt(s.success_pct) << " mean "
              << fmt(s.mean_time) << " std " << fmt(s.std_time) << "\n";
  }
  return 0;
}

// costfield -----------------------------------------------------------

struct FieldArgs {
  SpecArgs spec;
  std::string net;
  std::vector<double> origin;
  std::vector<int> axes{0, 2};
  int res = 20;
  long oracle_budget = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_costfield(const FieldArgs& a) {
  const DynamicsSpec spec = resolve_spec(a.spec);
  const std::unique_ptr<LearnedEstimator> est = load_learned(a.net, spec);

  CostfieldConfig cc;
  if (!a.origin.empty()) {
    if (static_cast<int>(a.origin.size()) != spec.state_dim())
      throw std::invalid_argument("--origin needs one value per state dim");
    cc.origin = Eigen::Map<const Eigen::VectorXd>(
        a.origin.data(), static_cast<Eigen::Index>(a.origin.size()));
  } else if (spec.kind == ModelKind::kDoublePendulum) {
    cc.origin.resize(4);
    cc.origin << wrap_angle(kPi), 0.0, wrap_angle(kPi), 0.0;  // both links up
  } else {
    cc.origin = 0.5 * (spec.state_lo + spec.state_hi);
  }
  if (a.axes.size() != 2)
    throw std::invalid_argument("--axes needs exactly two dimensions");
  cc.axis_a = a.axes[0];
  cc.axis_b = a.axes[1];
  cc.resolution = a.res;
  cc.oracle_budget = a.oracle_budget;
  cc.seed = a.seed;
  cc.out_path = a.out;

  const std::vector<CostfieldRow> rows = run_costfield(spec, *est, cc);
  std::cout << "rows " << rows.size() << "\n";
  return 0;
}

// cumulative-benefit ---------------------------------------------------

struct CumArgs {
  std::string scene;
  SpecArgs spec;
  std::string net;
  std::string planner = "rrt";
  int episodes = 5;
  SearchFlags search;
  std::string out;
};

int cmd_cumulative(const CumArgs& a) {
  const Environment env = load_scene(a.scene);
  const DynamicsSpec spec = apply_scene_bounds(resolve_spec(a.spec), env);
  validate_environment(env, spec);

  EuclideanEstimator euclid(spec);
  const std::unique_ptr<LearnedEstimator> learned = load_learned(a.net, spec);

  CumulativeConfig cc;
  cc.planner = planner_from_name(a.planner);
  cc.episodes = a.episodes;
  cc.base_seed = a.search.seed;
  cc.budget_seconds = a.search.budget;
  cc.iteration_cap = a.search.iters;
  cc.training_seconds = std::max(0.0, learned->model().train_seconds());
  cc.planner_cfg = to_planner_config(a.search);
  cc.out_path = a.out;

  const std::vector<EpisodeRecord> eps =
      run_cumulative_benefit(env, spec, euclid, *learned, cc);
  const double final_cum = eps.empty() ? 0.0 : eps.back().cumulative;
  double best_cum = 0;
  for (const EpisodeRecord& e : eps) best_cum = std::max(best_cum, e.cumulative);
  std::cout << "episodes " << eps.size() << "\n";
  std::cout << "training_seconds " << fmt(cc.training_seconds) << "\n";
  std::cout << "cumulative " << fmt(final_cum) << "\n";
  std::cout << "recovered " << (best_cum > cc.training_seconds ? 1 : 0) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinodynamic planning toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  GenArgs gen;
  CLI::App* cgen = app.add_subcommand("gen-data",
                                      "sample a transition-cost dataset");
  add_spec_args(cgen, gen.spec);
  cgen->add_option("--n", gen.n, "sample count")->capture_default_str();
  cgen->add_flag("--condition-omega", gen.condition_omega,
                 "draw per-sample turn-rate limits (dubins)");
  cgen->add_option("--condition-grid", gen.condition_grid,
                   "turn-rate grid size")
      ->capture_default_str();
  cgen->add_option("--condition-lo", gen.condition_lo, "turn-rate grid low")
      ->capture_default_str();
  cgen->add_option("--condition-hi", gen.condition_hi, "turn-rate grid high")
      ->capture_default_str();
  cgen->add_option("--oracle", gen.oracle, "labeling oracle: analytic|sampled")
      ->capture_default_str();
  cgen->add_option("--oracle-budget", gen.oracle_budget,
                   "sampled-oracle tree iterations")
      ->capture_default_str();
  cgen->add_option("--goal-tol", gen.goal_tol, "sampled-oracle goal radius")
      ->capture_default_str();
  cgen->add_option("--seed", gen.seed, "rng seed")->capture_default_str();
  cgen->add_option("--out", gen.out, "output dataset file")->required();
  cgen->callback([&] { rc = cmd_gen_data(gen); });

  TrainArgs train;
  CLI::App* ctrain = app.add_subcommand("train", "fit the cost predictor");
  ctrain->add_option("--data", train.data, "dataset file")
      ->required()
      ->check(CLI::ExistingFile);
  ctrain->add_option("--width", train.width, "hidden layer width")
      ->capture_default_str();
  ctrain->add_option("--layers", train.layers, "hidden layer count")
      ->capture_default_str();
  ctrain->add_option("--epochs", train.epochs, "max epochs")
      ->capture_default_str();
  ctrain->add_option("--lr", train.lr, "learning rate")->capture_default_str();
  ctrain->add_option("--momentum", train.momentum, "sgd momentum")
      ->capture_default_str();
  ctrain->add_option("--batch", train.batch, "minibatch size")
      ->capture_default_str();
  ctrain->add_option("--val-fraction", train.val_fraction,
                     "held-out fraction")
      ->capture_default_str();
  ctrain->add_option("--time-budget", train.time_budget,
                     "training wall-time budget, seconds (0 = none)")
      ->capture_default_str();
  ctrain->add_option("--seed", train.seed, "rng seed")->capture_default_str();
  ctrain->add_option("--out", train.out, "output model file")->required();
  ctrain->add_option("--log", train.log, "loss log csv");
  ctrain->callback([&] { rc = cmd_train(train); });

  PlanArgs plan_args;
  CLI::App* cplan = app.add_subcommand("plan", "single seeded planner run");
  cplan->add_option("--scene", plan_args.scene, "scene file")
      ->required()
      ->check(CLI::ExistingFile);
  add_spec_args(cplan, plan_args.spec);
  cplan->add_option("--planner", plan_args.planner,
                    "rrt|anytime-rrt|ao-rrt|sst|sst-star")
      ->capture_default_str();
  cplan->add_option("--estimator", plan_args.estimator, "euclidean|learned")
      ->capture_default_str();
  cplan->add_option("--net", plan_args.net, "trained model file");
  add_search_flags(cplan, plan_args.search);
  cplan->add_option("--out", plan_args.out, "solution file");
  cplan->add_option("--tree", plan_args.tree, "tree export file");
  cplan->callback([&] { rc = cmd_plan(plan_args); });

  BenchArgs bench;
  CLI::App* cbench = app.add_subcommand("bench", "trial sweep with summaries");
  cbench->add_option("--scene", bench.scene, "scene file")
      ->required()
      ->check(CLI::ExistingFile);
  add_spec_args(cbench, bench.spec);
  cbench->add_option("--planners", bench.planners, "comma-separated planners")
      ->delimiter(',')
      ->capture_default_str();
  cbench
      ->add_option("--estimators", bench.estimators,
                   "comma-separated estimators")
      ->delimiter(',')
      ->capture_default_str();
  cbench->add_option("--net", bench.net, "trained model file");
  cbench->add_option("--seeds", bench.seeds, "trials per cell")
      ->capture_default_str();
  cbench->add_option("--workers", bench.workers, "concurrent trials")
      ->capture_default_str();
  cbench->add_option("--curve-points", bench.curve_points,
                     "success-curve grid points")
      ->capture_default_str();
  add_search_flags(cbench, bench.search);
  cbench->add_option("--out", bench.out, "output directory")->required();
  cbench->callback([&] { rc = cmd_bench(bench); });

  FieldArgs field;
  CLI::App* cfield = app.add_subcommand("costfield",
                                        "predicted-cost grid emission");
  add_spec_args(cfield, field.spec);
  cfield->add_option("--net", field.net, "trained model file")
      ->required()
      ->check(CLI::ExistingFile);
  cfield->add_option("--origin", field.origin,
                     "query anchor state (comma separated)")
      ->delimiter(',');
  cfield->add_option("--axes", field.axes, "two state dims to sweep")
      ->delimiter(',')
      ->capture_default_str();
  cfield->add_option("--res", field.res, "grid resolution per axis")
      ->capture_default_str();
  cfield->add_option("--oracle-budget", field.oracle_budget,
                     "also sample the oracle with this budget (0 = off)")
      ->capture_default_str();
  cfield->add_option("--seed", field.seed, "rng seed")->capture_default_str();
  cfield->add_option("--out", field.out, "output grid file")->required();
  cfield->callback([&] { rc = cmd_costfield(field); });

  CumArgs cum;
  CLI::App* ccum = app.add_subcommand(
      "cumulative-benefit", "paired standard/learned episode timing");
  ccum->add_option("--scene", cum.scene, "scene file")
      ->required()
      ->check(CLI::ExistingFile);
  add_spec_args(ccum, cum.spec);
  ccum->add_option("--net", cum.net, "trained model file")
      ->required()
      ->check(CLI::ExistingFile);
  ccum->add_option("--planner", cum.planner, "planner for both arms")
      ->capture_default_str();
  ccum->add_option("--episodes", cum.episodes, "paired episode count")
      ->capture_default_str();
  add_search_flags(ccum, cum.search);
  ccum->add_option("--out", cum.out, "episode csv");
  ccum->callback([&] { rc = cmd_cumulative(cum); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  }
  return rc;
}
