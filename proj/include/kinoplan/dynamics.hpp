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

#include <iosfwd>
#include <string>
#include <variant>

#include "kinoplan/core.hpp"

namespace kinoplan {

enum class ModelKind { kDubins, kDoublePendulum, kGooseneckTrailer };

const char* model_name(ModelKind kind);
ModelKind model_from_name(const std::string& name);

// Rear-axle kinematic car. State [x, y, theta], controls [speed, steering].
// Speed is in [0, speed_max] (forward only); the steering bound is derived
// from the turn-rate limit: |phi| <= atan(axle_length * turn_rate_limit),
// which caps |dtheta/ds| at turn_rate_limit.
struct DubinsParams {
  double axle_length = 1.0;
  double speed_max = 1.0;
  double turn_rate_limit = 1.0;  // rad per unit arc length
};

// Torque-driven two-link pendulum with per-joint decoupled dynamics:
//   dtheta_i = omega_i
//   domega_i = u_i / (m * L_i^2) - g * sin(theta_i) / L_i
// State [theta_1, omega_1, theta_2, omega_2], controls [u_1, u_2].
// The first link is mounted at the origin; angles are measured from the
// hanging-down position so that [0, 0, 0, 0] is the rest state.
struct PendulumParams {
  double arm_length_1 = 1.0;
  double arm_length_2 = 1.0;
  double mass = 1.0;
  double gravity = 9.8;
  double torque_limit = 6.0;
  double speed_limit = 8.0;  // |omega_i| bound
};

// Tractor pulling one gooseneck trailer. State [x, y, theta_1, theta_2]
// (tractor pose plus trailer heading), controls [speed, steering]:
//   dx = u_s cos(theta_1),  dy = u_s sin(theta_1)
//   dtheta_1 = u_s tan(phi) / L_1
//   dtheta_2 = u_s sin(theta_1 - theta_2) / L_2
struct TrailerParams {
  double axle_length_1 = 1.0;
  double axle_length_2 = 1.0;
  double speed_max = 1.0;
  double steering_limit = 0.7;  // |phi| bound, radians
};

// A concrete dynamical system: model parameters plus the boxes and metric
// the planners operate with. Angular dimensions wrap to [-pi, pi) instead
// of clamping; their lo/hi entries are informational.
struct DynamicsSpec {
  ModelKind kind = ModelKind::kDubins;
  std::variant<DubinsParams, PendulumParams, TrailerParams> params;

  State state_lo, state_hi;
  Control control_lo, control_hi;
  Eigen::VectorXd weights;   // per-dimension metric weights
  Eigen::ArrayXi angular;    // 1 where the dimension is an angle
  double dt = 0.01;          // integration step

  int state_dim() const { return static_cast<int>(state_lo.size()); }
  int control_dim() const { return static_cast<int>(control_lo.size()); }
};

DynamicsSpec make_dubins_spec(const DubinsParams& p,
                              const Eigen::Vector2d& pos_lo,
                              const Eigen::Vector2d& pos_hi,
                              double dt = 0.01);
DynamicsSpec make_pendulum_spec(const PendulumParams& p, double dt = 0.002);
DynamicsSpec make_trailer_spec(const TrailerParams& p,
                               const Eigen::Vector2d& pos_lo,
                               const Eigen::Vector2d& pos_hi,
                               double dt = 0.01);

// Time derivative of the state. Throws ContractViolation on dimension
// mismatch.
State derivative(const DynamicsSpec& spec, const State& x, const Control& u);

// One classic Runge-Kutta 4 step of size h, angular dimensions re-wrapped.
State rk4_step(const DynamicsSpec& spec, const State& x, const Control& u,
               double h);

struct Trajectory {
  Batch states;       // one state per row, row 0 is the start state
  Control control;    // the (constant) control applied
  double dt = 0.0;
  double duration = 0.0;     // integrated time actually covered
  bool exited_bounds = false;

  int length() const { return static_cast<int>(states.rows()); }
  State end_state() const { return states.row(states.rows() - 1); }
};

// Integrates x0 under constant control for `duration` seconds with fixed
// steps of spec.dt plus one final partial step for the remainder. If an
// intermediate state leaves the (non-angular) state bounds the trajectory
// is truncated before the violating state and flagged; `duration` then
// reports the time actually covered.
Trajectory propagate(const DynamicsSpec& spec, const State& x0,
                     const Control& u, double duration);

// Same integration and truncation rule but keeps only the final state;
// used on hot paths that never inspect intermediate states. The returned
// state and covered duration are bitwise equal to propagate()'s.
struct PropagationEnd {
  State state;
  double duration = 0.0;
  bool exited_bounds = false;
};
PropagationEnd propagate_endpoint(const DynamicsSpec& spec, const State& x0,
                                  const Control& u, double duration);

// Reusable endpoint integrator: owns the Runge-Kutta scratch vectors so
// tight loops avoid per-call allocation. advance() overwrites `x` with the
// endpoint and returns the covered duration (less than requested when the
// state exits bounds; `exited` reports that). Results are bitwise equal to
// propagate_endpoint().
class Propagator {
 public:
  explicit Propagator(const DynamicsSpec& spec);
  double advance(State& x, const Control& u, double duration, bool* exited);
  const DynamicsSpec& spec() const { return *spec_; }

 private:
  const DynamicsSpec* spec_;
  State k1_, k2_, k3_, k4_, mid_, keep_;
};

// Weighted Euclidean distance with angular wrapping: each coordinate
// difference is scaled by weights[i] before the 2-norm.
double weighted_distance(const DynamicsSpec& spec, const State& a,
                         const State& b);
double weighted_distance_sq(const DynamicsSpec& spec, const State& a,
                            const State& b);

bool in_state_bounds(const DynamicsSpec& spec, const State& x);

// Wraps the angular dimensions of x in place.
void wrap_state(const DynamicsSpec& spec, State& x);

// Uniform samples over the respective boxes; angular state dimensions are
// drawn from [-pi, pi). Components are drawn in index order, one uniform
// each, so the RNG stream consumed is exactly state_dim/control_dim draws.
State sample_state(const DynamicsSpec& spec, Rng& rng);
Control sample_control(const DynamicsSpec& spec, Rng& rng);

// Plain-text config round trip. Keys are `name = value...` lines; see the
// files under configs/ for the per-model key sets.
DynamicsSpec load_spec_config(const std::string& path);
DynamicsSpec parse_spec_config(std::istream& in, const std::string& name);
void save_spec_config(const DynamicsSpec& spec, const std::string& path);

}  // namespace kinoplan
