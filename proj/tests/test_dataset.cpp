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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "kinoplan/dataset.hpp"
#include "kinoplan/dubins.hpp"

using namespace kinoplan;

namespace {

DynamicsSpec dubins10() {
  return make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
}

}  // namespace

TEST_CASE("analytic generation labels pairs with the exact cost") {
  DynamicsSpec spec = dubins10();
  DataGenConfig cfg;
  cfg.count = 400;
  cfg.seed = 5;
  DataGenReport report;
  Dataset ds = generate_dataset(spec, cfg, &report);
  REQUIRE(ds.size() == 400);
  CHECK(ds.state_dim == 3);
  CHECK(ds.condition_dim == 0);
  CHECK(report.attempts == 400);  // the analytic oracle never fails
  CHECK(report.failures == 0);

  const DubinsParams& p = std::get<DubinsParams>(spec.params);
  int clamped_seen = 0;
  for (int i = 0; i < ds.size(); ++i) {
    const State a = ds.starts.row(i), b = ds.goals.row(i);
    for (int d = 0; d < 2; ++d) {
      CHECK(a(d) >= 0.0);
      CHECK(a(d) < 10.0);
    }
    const double truth = dubins_transition_cost(p, a, b);
    if (ds.clamped[i]) {
      clamped_seen++;
      CHECK(ds.costs(i) == ds.cost_cap);
      CHECK(truth >= ds.cost_cap);
    } else {
      CHECK(ds.costs(i) == truth);
      CHECK(ds.costs(i) <= ds.cost_cap);
    }
  }
  CHECK(clamped_seen == report.clamped);
  // the 0.99 nearest-rank cap leaves about 1% clamped
  CHECK(clamped_seen >= 1);
  CHECK(clamped_seen <= 20);
}

TEST_CASE("cap quantile follows the nearest-rank rule") {
  DynamicsSpec spec = dubins10();
  DataGenConfig cfg;
  cfg.count = 200;
  cfg.seed = 11;
  Dataset ds = generate_dataset(spec, cfg);

  // reconstruct the raw costs: unclamped values are exact, clamped ones
  // are recomputed analytically
  const DubinsParams& p = std::get<DubinsParams>(spec.params);
  std::vector<double> raw(ds.size());
  for (int i = 0; i < ds.size(); ++i)
    raw[i] = ds.clamped[i]
                 ? dubins_transition_cost(p, State(ds.starts.row(i)),
                                          State(ds.goals.row(i)))
                 : ds.costs(i);
  std::sort(raw.begin(), raw.end());
  const int rank = static_cast<int>(std::ceil(0.99 * ds.size())) - 1;
  CHECK(ds.cost_cap == raw[rank]);
}

TEST_CASE("generation is deterministic in the seed") {
  DynamicsSpec spec = dubins10();
  DataGenConfig cfg;
  cfg.count = 100;
  cfg.seed = 77;
  Dataset a = generate_dataset(spec, cfg);
  Dataset b = generate_dataset(spec, cfg);
  CHECK(a.starts == b.starts);
  CHECK(a.goals == b.goals);
  CHECK(a.costs == b.costs);
  CHECK(a.cost_cap == b.cost_cap);

  cfg.seed = 78;
  Dataset c = generate_dataset(spec, cfg);
  CHECK(a.starts != c.starts);
}

TEST_CASE("conditioned generation draws turn rates from the grid") {
  DynamicsSpec spec = dubins10();
  DataGenConfig cfg;
  cfg.count = 300;
  cfg.seed = 9;
  cfg.condition_turn_rate = true;
  cfg.condition_grid = 15;
  cfg.condition_lo = 0.5;
  cfg.condition_hi = kPi;
  Dataset ds = generate_dataset(spec, cfg);
  CHECK(ds.condition_dim == 1);
  REQUIRE(ds.conditions.rows() == 300);

  std::vector<double> grid(15);
  for (int k = 0; k < 15; ++k)
    grid[k] = 0.5 + (kPi - 0.5) * k / 14.0;
  int distinct = 0;
  std::vector<bool> seen(15, false);
  for (int i = 0; i < ds.size(); ++i) {
    const double om = ds.conditions(i, 0);
    bool on_grid = false;
    for (int k = 0; k < 15; ++k)
      if (om == grid[k]) {
        on_grid = true;
        if (!seen[k]) {
          seen[k] = true;
          distinct++;
        }
      }
    CHECK(on_grid);
    // cost is the analytic value for that per-sample turn rate
    DubinsParams p = std::get<DubinsParams>(spec.params);
    p.turn_rate_limit = om;
    const double truth = dubins_transition_cost(p, State(ds.starts.row(i)),
                                                State(ds.goals.row(i)));
    if (!ds.clamped[i]) CHECK(ds.costs(i) == truth);
  }
  CHECK(distinct == 15);

  Batch inputs = dataset_inputs(ds);
  CHECK(inputs.cols() == 7);
  CHECK(inputs(0, 6) == ds.conditions(0, 0));
  CHECK(inputs(0, 0) == ds.starts(0, 0));
  CHECK(inputs(0, 3) == ds.goals(0, 0));
}

TEST_CASE("dataset files round trip bitwise") {
  DynamicsSpec spec = dubins10();
  DataGenConfig cfg;
  cfg.count = 64;
  cfg.seed = 3;
  cfg.condition_turn_rate = true;
  Dataset ds = generate_dataset(spec, cfg);
  const std::string path =
      (std::filesystem::temp_directory_path() / "kinoplan_ds_rt.ds").string();
  save_dataset(ds, path);
  Dataset back = load_dataset(path);
  std::filesystem::remove(path);
  CHECK(back.kind == ds.kind);
  CHECK(back.state_dim == ds.state_dim);
  CHECK(back.condition_dim == ds.condition_dim);
  CHECK(back.cost_cap == ds.cost_cap);
  CHECK(back.starts == ds.starts);
  CHECK(back.goals == ds.goals);
  CHECK(back.conditions == ds.conditions);
  CHECK(back.costs == ds.costs);
  CHECK(back.clamped == ds.clamped);
}

TEST_CASE("sampled oracle agrees loosely with the analytic cost") {
  // tight bounds keep the search space small so a modest budget converges
  DynamicsSpec spec = make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {4.0, 4.0});
  const DubinsParams& p = std::get<DubinsParams>(spec.params);
  OracleOptions opts;
  opts.budget = 4000;
  Rng rng(13);
  int solved = 0;
  for (int i = 0; i < 12; ++i) {
    const State a = sample_state(spec, rng), b = sample_state(spec, rng);
    const auto est = oracle_cost_sampled(spec, a, b, opts, rng);
    if (!est) continue;
    solved++;
    const double truth = dubins_transition_cost(p, a, b);
    // sampled estimates reach a goal ball, so they can undershoot the
    // exact point-to-point cost slightly and overshoot it freely
    CHECK(*est > 0.3 * truth - opts.goal_tol);
    CHECK(*est < 3.0 * truth + 2.0);
  }
  CHECK(solved >= 8);
}

TEST_CASE("sampled oracle returns zero inside the goal ball") {
  DynamicsSpec spec = dubins10();
  OracleOptions opts;
  Rng rng(1);
  State a(3), b(3);
  a << 5.0, 5.0, 0.0;
  b << 5.05, 5.0, 0.05;
  const auto est = oracle_cost_sampled(spec, a, b, opts, rng);
  REQUIRE(est.has_value());
  CHECK(*est == 0.0);
}

TEST_CASE("generation aborts when the oracle keeps failing") {
  // a pendulum with a tiny torque limit cannot move anywhere: the sampled
  // oracle fails for almost every pair and generation must give up
  PendulumParams pp;
  pp.torque_limit = 1e-6;
  DynamicsSpec spec = make_pendulum_spec(pp);
  DataGenConfig cfg;
  cfg.count = 10;
  cfg.seed = 2;
  cfg.oracle = DataGenConfig::Oracle::kSampled;
  cfg.oracle_opts.budget = 50;
  CHECK_THROWS_AS(generate_dataset(spec, cfg), ContractViolation);
}

TEST_CASE("analytic oracle rejects non-dubins specs") {
  DynamicsSpec spec = make_pendulum_spec(PendulumParams{});
  DataGenConfig cfg;
  cfg.count = 4;
  CHECK_THROWS_AS(generate_dataset(spec, cfg), ContractViolation);
}
