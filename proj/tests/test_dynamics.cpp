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

#include "doctest.h"
#include "kinoplan/dynamics.hpp"

using namespace kinoplan;

namespace {

DynamicsSpec dubins_box() {
  return make_dubins_spec(DubinsParams{}, {-20.0, -20.0}, {20.0, 20.0});
}

// error of an n-step constant-control integration against a closed form
double integration_error(const DynamicsSpec& spec, const State& x0,
                         const Control& u, double total, int steps,
                         const State& exact) {
  State x = x0;
  const double h = total / steps;
  for (int i = 0; i < steps; ++i) x = rk4_step(spec, x, u, h);
  State d = x - exact;
  for (int i = 0; i < spec.state_dim(); ++i)
    if (spec.angular(i)) d(i) = angle_diff(x(i), exact(i));
  return d.norm();
}

}  // namespace

TEST_CASE("car on the unit circle converges at fourth order") {
  // speed 1 with tan(steering) = 1 on a unit axle turns at 1 rad/s:
  // x = sin t, y = 1 - cos t, theta = t.
  DynamicsSpec spec = dubins_box();
  State x0(3);
  x0 << 0.0, 0.0, 0.0;
  Control u(2);
  u << 1.0, std::atan(1.0);
  const double t = 1.0;
  State exact(3);
  exact << std::sin(t), 1.0 - std::cos(t), t;

  const double e1 = integration_error(spec, x0, u, t, 8, exact);
  const double e2 = integration_error(spec, x0, u, t, 16, exact);
  const double e3 = integration_error(spec, x0, u, t, 32, exact);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
  CHECK(e2 / e3 > 12.0);
  CHECK(e2 / e3 < 20.0);
}

TEST_CASE("pendulum without gravity integrates torque exactly") {
  PendulumParams p;
  p.gravity = 0.0;
  p.mass = 2.0;
  p.arm_length_1 = 1.5;
  p.arm_length_2 = 0.5;
  DynamicsSpec spec = make_pendulum_spec(p);
  State x0 = State::Zero(4);
  Control u(2);
  u << 3.0, -1.0;

  // domega = u / (m L^2) is constant, so theta is quadratic in time and
  // RK4 reproduces it to rounding error.
  const double t = 0.75;
  Trajectory tr = propagate(spec, x0, u, t);
  CHECK(!tr.exited_bounds);
  CHECK(tr.duration == doctest::Approx(t));
  const State xf = tr.end_state();
  const double a1 = u(0) / (p.mass * p.arm_length_1 * p.arm_length_1);
  const double a2 = u(1) / (p.mass * p.arm_length_2 * p.arm_length_2);
  CHECK(xf(0) == doctest::Approx(0.5 * a1 * t * t).epsilon(1e-12));
  CHECK(xf(1) == doctest::Approx(a1 * t).epsilon(1e-12));
  CHECK(xf(2) == doctest::Approx(0.5 * a2 * t * t).epsilon(1e-12));
  CHECK(xf(3) == doctest::Approx(a2 * t).epsilon(1e-12));
}

TEST_CASE("pendulum joints are decoupled") {
  DynamicsSpec spec = make_pendulum_spec(PendulumParams{});
  State x(4);
  x << 0.4, 1.0, -0.9, 2.0;
  Control u(2);
  u << 2.5, -3.0;
  const State base = derivative(spec, x, u);
  State x2 = x;
  x2(2) = 1.3;
  x2(3) = -0.7;
  const State other = derivative(spec, x2, u);
  CHECK(base(0) == other(0));
  CHECK(base(1) == other(1));
  CHECK(base(2) != other(2));
}

TEST_CASE("trailer straight-line hitch angle follows the closed form") {
  // with zero steering theta_1 stays fixed and the hitch angle
  // delta = theta_1 - theta_2 obeys d(delta)/dt = -v sin(delta)/L2, whose
  // solution is tan(delta/2) = tan(delta0/2) exp(-v t / L2).
  TrailerParams p;
  p.axle_length_2 = 1.7;
  DynamicsSpec spec = make_trailer_spec(p, {-50.0, -50.0}, {50.0, 50.0});
  State x0(4);
  x0 << 0.0, 0.0, 0.0, -1.2;  // hitch angle 1.2 rad
  Control u(2);
  u << 1.0, 0.0;

  const double t = 2.0;
  const double d0 = x0(2) - x0(3);
  const double dt_exact =
      2.0 * std::atan(std::tan(d0 / 2.0) * std::exp(-u(0) * t / p.axle_length_2));
  State exact(4);
  exact << t, 0.0, 0.0, -dt_exact;

  const double e1 = integration_error(spec, x0, u, t, 8, exact);
  const double e2 = integration_error(spec, x0, u, t, 16, exact);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
  CHECK(integration_error(spec, x0, u, t, 256, exact) < 1e-10);
}

TEST_CASE("propagate splits duration into fixed steps plus remainder") {
  DynamicsSpec spec = dubins_box();  // dt = 0.01
  State x0 = State::Zero(3);
  Control u(2);
  u << 1.0, 0.3;
  Trajectory tr = propagate(spec, x0, u, 0.095);
  CHECK(tr.dt == spec.dt);
  CHECK(tr.duration == doctest::Approx(0.095));
  CHECK(tr.length() == 11);  // start + 9 full steps + partial step
  CHECK(!tr.exited_bounds);

  // the stored rows are exactly the rk4 iterates
  State x = x0;
  for (int i = 0; i < 9; ++i) {
    x = rk4_step(spec, x, u, spec.dt);
    CHECK(tr.states(i + 1, 0) == x(0));
    CHECK(tr.states(i + 1, 1) == x(1));
    CHECK(tr.states(i + 1, 2) == x(2));
  }
  x = rk4_step(spec, x, u, 0.095 - 9 * spec.dt);
  CHECK(tr.states(10, 0) == x(0));
  CHECK(tr.end_state()(2) == x(2));

  // a duration that is an exact multiple gets no padding row
  Trajectory tr2 = propagate(spec, x0, u, 0.05);
  CHECK(tr2.length() == 6);
  CHECK(tr2.duration == doctest::Approx(0.05));
}

TEST_CASE("propagate truncates before leaving the state box") {
  DynamicsSpec spec = make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
  State x0(3);
  x0 << 9.5, 5.0, 0.0;
  Control u(2);
  u << 1.0, 0.0;
  Trajectory tr = propagate(spec, x0, u, 2.0);
  CHECK(tr.exited_bounds);
  CHECK(tr.duration < 2.0);
  for (int i = 0; i < tr.length(); ++i) {
    State row = tr.states.row(i);
    CHECK(in_state_bounds(spec, row));
  }
  // immediate violation keeps just the start state
  State edge(3);
  edge << 9.9999, 5.0, 0.0;
  Trajectory tr2 = propagate(spec, edge, u, 1.0);
  CHECK(tr2.exited_bounds);
  CHECK(tr2.length() == 1);
  CHECK(tr2.duration == 0.0);
}

TEST_CASE("angles wrap during propagation instead of clamping") {
  DynamicsSpec spec = dubins_box();
  State x0(3);
  x0 << 0.0, 0.0, 3.0;
  Control u(2);
  u << 1.0, std::atan(1.0);  // 1 rad/s turn, crosses pi quickly
  Trajectory tr = propagate(spec, x0, u, 1.0);
  CHECK(!tr.exited_bounds);
  for (int i = 0; i < tr.length(); ++i) {
    CHECK(tr.states(i, 2) >= -kPi);
    CHECK(tr.states(i, 2) < kPi);
  }
  CHECK(tr.end_state()(2) == doctest::Approx(wrap_angle(4.0)));
}

TEST_CASE("weighted distance wraps angular coordinates") {
  DynamicsSpec spec = dubins_box();
  State a(3), b(3);
  a << 1.0, 2.0, 3.0;
  b << 4.0, 6.0, -3.0;
  const double dth = kTwoPi - 6.0;
  const double expect = std::sqrt(9.0 + 16.0 + dth * dth);
  CHECK(weighted_distance(spec, a, b) == doctest::Approx(expect));
  CHECK(weighted_distance_sq(spec, a, b) ==
        doctest::Approx(expect * expect));

  DynamicsSpec wspec = spec;
  wspec.weights << 2.0, 1.0, 0.5;
  const double expect_w = std::sqrt(36.0 + 16.0 + 0.25 * dth * dth);
  CHECK(weighted_distance(wspec, a, b) == doctest::Approx(expect_w));
}

TEST_CASE("state sampling consumes one draw per dimension") {
  DynamicsSpec spec = make_pendulum_spec(PendulumParams{});
  Rng a(5), b(5);
  State s = sample_state(spec, a);
  for (int i = 0; i < 4; ++i) {
    const double lo = spec.angular(i) ? -kPi : spec.state_lo(i);
    const double hi = spec.angular(i) ? kPi : spec.state_hi(i);
    CHECK(s(i) == b.uniform(lo, hi));
  }
  CHECK(a.next_u64() == b.next_u64());

  Rng c(5), d(5);
  Control u = sample_control(spec, c);
  for (int i = 0; i < 2; ++i)
    CHECK(u(i) == d.uniform(spec.control_lo(i), spec.control_hi(i)));
  CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("steering bound follows the turn-rate limit") {
  DubinsParams p;
  p.axle_length = 2.0;
  p.turn_rate_limit = 1.38;
  DynamicsSpec spec = make_dubins_spec(p, {0.0, 0.0}, {10.0, 10.0});
  CHECK(spec.control_hi(1) == doctest::Approx(std::atan(2.0 * 1.38)));
  CHECK(spec.control_lo(1) == doctest::Approx(-std::atan(2.0 * 1.38)));
  CHECK(spec.control_lo(0) == 0.0);  // forward only
  CHECK(spec.control_hi(0) == p.speed_max);

  // at full lock the heading rate per arc length equals the limit
  State x = State::Zero(3);
  Control u(2);
  u << 1.0, spec.control_hi(1);
  const State dx = derivative(spec, x, u);
  CHECK(dx(2) / u(0) == doctest::Approx(1.38));
}

TEST_CASE("config files round trip every model") {
  const auto dir = std::filesystem::temp_directory_path();
  auto roundtrip = [&](const DynamicsSpec& spec, const char* name) {
    const std::string path = (dir / name).string();
    save_spec_config(spec, path);
    const DynamicsSpec back = load_spec_config(path);
    std::filesystem::remove(path);
    CHECK(back.kind == spec.kind);
    CHECK(back.state_lo == spec.state_lo);
    CHECK(back.state_hi == spec.state_hi);
    CHECK(back.control_lo == spec.control_lo);
    CHECK(back.control_hi == spec.control_hi);
    CHECK(back.weights == spec.weights);
    CHECK((back.angular == spec.angular).all());
    CHECK(back.dt == spec.dt);
    return back;
  };

  DubinsParams dp;
  dp.turn_rate_limit = 1.38;
  dp.axle_length = 0.8;
  DynamicsSpec d = make_dubins_spec(dp, {0.0, 0.0}, {12.0, 9.0}, 0.02);
  const DynamicsSpec d2 = roundtrip(d, "kinoplan_cfg_d.cfg");
  CHECK(std::get<DubinsParams>(d2.params).turn_rate_limit == 1.38);
  CHECK(std::get<DubinsParams>(d2.params).axle_length == 0.8);

  PendulumParams pp;
  pp.torque_limit = 5.5;
  const DynamicsSpec p2 = roundtrip(make_pendulum_spec(pp), "kinoplan_cfg_p.cfg");
  CHECK(std::get<PendulumParams>(p2.params).torque_limit == 5.5);

  TrailerParams tp;
  tp.steering_limit = 0.6;
  const DynamicsSpec t2 = roundtrip(
      make_trailer_spec(tp, {0.0, 0.0}, {10.0, 10.0}), "kinoplan_cfg_t.cfg");
  CHECK(std::get<TrailerParams>(t2.params).steering_limit == 0.6);
}

TEST_CASE("derivative validates dimensions") {
  DynamicsSpec spec = dubins_box();
  CHECK_THROWS_AS(derivative(spec, State::Zero(2), Control::Zero(2)),
                  ContractViolation);
  CHECK_THROWS_AS(derivative(spec, State::Zero(3), Control::Zero(1)),
                  ContractViolation);
  CHECK_THROWS_AS(propagate(spec, State::Zero(3), Control::Zero(2), -1.0),
                  ContractViolation);
}
