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
#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "kinoplan/environment.hpp"

using namespace kinoplan;

namespace {

Environment basic_env() {
  Environment env;
  env.bounds_lo << 0.0, 0.0;
  env.bounds_hi << 10.0, 10.0;
  env.obstacles.push_back(RectObstacle{{3.0, 3.0}, {4.0, 7.0}});
  env.obstacles.push_back(CircleObstacle{{7.0, 2.0}, 1.0});
  env.start = State(3);
  env.start << 1.0, 1.0, 0.0;
  BallGoal g;
  g.dims = {0, 1};
  g.center = Eigen::Vector2d(9.0, 9.0);
  g.tol = Eigen::Vector2d(0.5, 0.5);
  env.goal = g;
  return env;
}

}  // namespace

TEST_CASE("point tests agree with geometry") {
  const Obstacle rect = RectObstacle{{1.0, 2.0}, {3.0, 5.0}};
  CHECK(point_in_obstacle(rect, {2.0, 3.0}));
  CHECK(point_in_obstacle(rect, {1.0, 2.0}));  // boundary counts
  CHECK(point_in_obstacle(rect, {3.0, 5.0}));
  CHECK(!point_in_obstacle(rect, {0.999, 3.0}));
  CHECK(!point_in_obstacle(rect, {2.0, 5.001}));

  const Obstacle circ = CircleObstacle{{5.0, 5.0}, 2.0};
  CHECK(point_in_obstacle(circ, {5.0, 5.0}));
  CHECK(point_in_obstacle(circ, {7.0, 5.0}));
  CHECK(!point_in_obstacle(circ, {7.0001, 5.0}));
  CHECK(point_in_obstacle(circ, {5.0 + std::sqrt(2.0), 5.0 + std::sqrt(2.0)}));
}

TEST_CASE("vehicle states check the reference point") {
  Environment env = basic_env();
  DynamicsSpec spec = make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
  State ok(3), hit_rect(3), hit_circle(3), outside(3);
  ok << 1.0, 1.0, 2.0;
  hit_rect << 3.5, 5.0, 0.0;
  hit_circle << 7.3, 2.2, 1.0;
  outside << 10.5, 5.0, 0.0;
  CHECK(state_valid(env, spec, ok));
  CHECK(!state_valid(env, spec, hit_rect));
  CHECK(!state_valid(env, spec, hit_circle));
  CHECK(!state_valid(env, spec, outside));
}

TEST_CASE("pendulum collision points cover both links") {
  DynamicsSpec spec = make_pendulum_spec(PendulumParams{});
  State x(4);
  x << kPi / 2.0, 0.0, kPi / 2.0, 0.0;  // both links along +x
  std::vector<Eigen::Vector2d> pts;
  collision_points(spec, x, pts);
  REQUIRE(pts.size() == 18);
  // innermost point is 1/9 along link 1, outermost is the tip at (2, 0)
  CHECK(pts.front().x() == doctest::Approx(1.0 / 9.0));
  CHECK(pts.front().y() == doctest::Approx(0.0));
  CHECK(pts.back().x() == doctest::Approx(2.0));
  CHECK(pts.back().y() == doctest::Approx(0.0).epsilon(1e-9));
  // elbow appears as the 9th point
  CHECK(pts[8].x() == doctest::Approx(1.0));
  // all collinear on the x axis for this pose
  for (const auto& p : pts) CHECK(std::abs(p.y()) < 1e-9);

  // hanging rest pose: tip at (0, -2)
  std::vector<Eigen::Vector2d> rest;
  collision_points(spec, State::Zero(4), rest);
  CHECK(rest.back().x() == doctest::Approx(0.0));
  CHECK(rest.back().y() == doctest::Approx(-2.0));
}

TEST_CASE("pendulum obstacle blocks a link midpoint") {
  DynamicsSpec spec = make_pendulum_spec(PendulumParams{});
  Environment env;
  env.bounds_lo << -3.0, -3.0;
  env.bounds_hi << 3.0, 3.0;
  env.start = State::Zero(4);
  env.goal = AltitudeGoal{1.9};
  // a disc covering the 4/9 interior point of the first link along +x
  env.obstacles.push_back(CircleObstacle{{0.5, 0.0}, 0.1});
  State along_x(4);
  along_x << kPi / 2.0, 0.0, kPi / 2.0, 0.0;
  CHECK(!state_valid(env, spec, along_x));
  CHECK(state_valid(env, spec, State::Zero(4)));
}

TEST_CASE("tip height matches link geometry") {
  PendulumParams p;
  p.arm_length_1 = 1.0;
  p.arm_length_2 = 2.0;
  DynamicsSpec spec = make_pendulum_spec(p);
  State down = State::Zero(4);
  CHECK(pendulum_tip_height(spec, down) == doctest::Approx(-3.0));
  State up(4);
  up << wrap_angle(kPi), 0.0, wrap_angle(kPi), 0.0;
  CHECK(pendulum_tip_height(spec, up) == doctest::Approx(3.0));
  State horizontal(4);
  horizontal << kPi / 2.0, 0.0, kPi / 2.0, 0.0;
  CHECK(pendulum_tip_height(spec, horizontal) == doctest::Approx(0.0));
}

TEST_CASE("ball goals wrap angular dimensions") {
  DynamicsSpec spec = make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
  Environment env = basic_env();
  BallGoal g;
  g.dims = {0, 1, 2};
  g.center = Eigen::Vector3d(9.0, 9.0, kPi - 0.05);
  g.tol = Eigen::Vector3d(0.5, 0.5, 0.2);
  env.goal = g;

  State near_wrap(3);
  near_wrap << 9.1, 9.1, -kPi + 0.05;  // 0.1 rad away across the seam
  CHECK(goal_reached(env, spec, near_wrap));
  State far(3);
  far << 9.1, 9.1, kPi - 0.4;
  CHECK(!goal_reached(env, spec, far));
  State off_position(3);
  off_position << 8.0, 9.0, kPi - 0.05;
  CHECK(!goal_reached(env, spec, off_position));
}

TEST_CASE("altitude goal keys on tip height only") {
  DynamicsSpec spec = make_pendulum_spec(PendulumParams{});
  Environment env;
  env.bounds_lo << -3.0, -3.0;
  env.bounds_hi << 3.0, 3.0;
  env.start = State::Zero(4);
  env.goal = AltitudeGoal{1.9};
  State up(4);
  up << wrap_angle(kPi), 3.0, wrap_angle(kPi), -2.0;  // velocity is free
  CHECK(goal_reached(env, spec, up));
  CHECK(!goal_reached(env, spec, State::Zero(4)));
}

TEST_CASE("goal samples satisfy the goal and use a fixed draw count") {
  Environment env = basic_env();
  DynamicsSpec spec = make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const State s = goal_sample(env, spec, rng);
    CHECK(goal_reached(env, spec, s));
    CHECK(s(0) == 9.0);
    CHECK(s(1) == 9.0);
    CHECK(s(2) >= -kPi);
    CHECK(s(2) < kPi);
  }
  // undeclared dims consume exactly one draw each
  Rng a(9), b(9);
  const State s = goal_sample(env, spec, a);
  CHECK(s(2) == b.uniform(-kPi, kPi));
  CHECK(a.next_u64() == b.next_u64());

  // altitude goal: deterministic, no draws
  Environment penv;
  penv.bounds_lo << -3.0, -3.0;
  penv.bounds_hi << 3.0, 3.0;
  penv.start = State::Zero(4);
  penv.goal = AltitudeGoal{1.9};
  DynamicsSpec pspec = make_pendulum_spec(PendulumParams{});
  Rng c(4), d(4);
  const State g = goal_sample(penv, pspec, c);
  CHECK(goal_reached(penv, pspec, g));
  CHECK(g(1) == 0.0);
  CHECK(g(3) == 0.0);
  CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("trajectory validity checks every stored state") {
  Environment env = basic_env();
  DynamicsSpec spec =
      apply_scene_bounds(make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0}), env);
  State x0(3);
  x0 << 2.0, 5.0, 0.0;  // heading straight at the rect obstacle
  Control u(2);
  u << 1.0, 0.0;
  Trajectory tr = propagate(spec, x0, u, 2.0);
  CHECK(!trajectory_valid(env, spec, tr));
  Trajectory short_tr = propagate(spec, x0, u, 0.5);
  CHECK(trajectory_valid(env, spec, short_tr));
}

TEST_CASE("scene files round trip and reject malformed input") {
  Environment env = basic_env();
  const std::string path =
      (std::filesystem::temp_directory_path() / "kinoplan_scene_rt.txt").string();
  save_scene(env, path);
  const Environment back = load_scene(path);
  std::filesystem::remove(path);
  CHECK(back.bounds_lo == env.bounds_lo);
  CHECK(back.bounds_hi == env.bounds_hi);
  CHECK(back.start == env.start);
  REQUIRE(back.obstacles.size() == 2);
  const auto& r = std::get<RectObstacle>(back.obstacles[0]);
  CHECK(r.lo == Eigen::Vector2d(3.0, 3.0));
  CHECK(r.hi == Eigen::Vector2d(4.0, 7.0));
  const auto& c = std::get<CircleObstacle>(back.obstacles[1]);
  CHECK(c.center == Eigen::Vector2d(7.0, 2.0));
  CHECK(c.radius == 1.0);
  const auto& g = std::get<BallGoal>(back.goal);
  CHECK(g.dims == std::vector<int>{0, 1});
  CHECK(g.center == std::get<BallGoal>(env.goal).center);
  CHECK(g.tol == std::get<BallGoal>(env.goal).tol);

  std::istringstream bad("bounds 0 0 10 10\nstart 1 1 0\nrect 1 2 3\n");
  CHECK_THROWS_AS(parse_scene(bad, "bad.txt"), ParseError);
  try {
    std::istringstream again("bounds 0 0 10 10\nstart 1 1 0\nrect 1 2 3\n");
    parse_scene(again, "bad.txt");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }

  std::istringstream comments(
      "# a scene\nbounds 0 0 10 10\n\nstart 1 1 0\ngoal altitude 1.5\n");
  const Environment ce = parse_scene(comments, "c.txt");
  CHECK(std::get<AltitudeGoal>(ce.goal).height == 1.5);
}

TEST_CASE("environment validation catches common mistakes") {
  DynamicsSpec spec = make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
  Environment env = basic_env();
  validate_environment(env, spec);  // fine as-is

  Environment wrong_dim = env;
  wrong_dim.start = State::Zero(4);
  CHECK_THROWS_AS(validate_environment(wrong_dim, spec), ContractViolation);

  Environment in_obstacle = env;
  in_obstacle.start = State(3);
  in_obstacle.start << 3.5, 5.0, 0.0;
  CHECK_THROWS_AS(validate_environment(in_obstacle, spec), ContractViolation);

  Environment bad_goal_dim = env;
  BallGoal g = std::get<BallGoal>(env.goal);
  g.dims = {0, 7};
  bad_goal_dim.goal = g;
  CHECK_THROWS_AS(validate_environment(bad_goal_dim, spec), ContractViolation);

  Environment altitude_on_car = env;
  altitude_on_car.goal = AltitudeGoal{1.0};
  CHECK_THROWS_AS(validate_environment(altitude_on_car, spec),
                  ContractViolation);

  DynamicsSpec pspec = make_pendulum_spec(PendulumParams{});
  Environment penv;
  penv.bounds_lo << -3.0, -3.0;
  penv.bounds_hi << 3.0, 3.0;
  penv.start = State::Zero(4);
  penv.goal = AltitudeGoal{5.0};  // above L1 + L2, unreachable
  CHECK_THROWS_AS(validate_environment(penv, pspec), ContractViolation);
}

TEST_CASE("scene bounds trim the spec position box") {
  DynamicsSpec spec = make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {20.0, 20.0});
  Environment env = basic_env();
  const DynamicsSpec cut = apply_scene_bounds(spec, env);
  CHECK(cut.state_hi(0) == 10.0);
  CHECK(cut.state_hi(1) == 10.0);
  CHECK(cut.state_lo(0) == 0.0);
  // pendulum is untouched
  DynamicsSpec pspec = make_pendulum_spec(PendulumParams{});
  const DynamicsSpec same = apply_scene_bounds(pspec, env);
  CHECK(same.state_lo == pspec.state_lo);
  CHECK(same.state_hi == pspec.state_hi);
}
