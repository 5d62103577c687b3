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
#include <vector>

#include "kinoplan/dynamics.hpp"

namespace kinoplan {

struct RectObstacle {
  Eigen::Vector2d lo, hi;
};

struct CircleObstacle {
  Eigen::Vector2d center;
  double radius = 0.0;
};

using Obstacle = std::variant<RectObstacle, CircleObstacle>;

// Goal region: an axis-aligned ball over a declared subset of state
// dimensions (|x_d - center| <= tol per dimension, wrapped for angles), or a
// minimum end-effector height for the pendulum.
struct BallGoal {
  std::vector<int> dims;
  Eigen::VectorXd center;  // one entry per declared dimension
  Eigen::VectorXd tol;
};

struct AltitudeGoal {
  double height = 0.0;
};

using GoalSpec = std::variant<BallGoal, AltitudeGoal>;

struct Environment {
  Eigen::Vector2d bounds_lo{0, 0}, bounds_hi{0, 0};  // workspace box
  std::vector<Obstacle> obstacles;
  State start;
  GoalSpec goal;
};

// Workspace points checked against obstacles for a given state. Vehicles
// contribute their reference point (x, y); the pendulum contributes the
// elbow, the end-effector and 8 evenly spaced interior points per link
// (18 points, base mount excluded). Points are appended to `out` in
// base-to-tip order.
void collision_points(const DynamicsSpec& spec, const State& x,
                      std::vector<Eigen::Vector2d>& out);

bool point_in_obstacle(const Obstacle& obs, const Eigen::Vector2d& p);
bool point_in_collision(const Environment& env, const Eigen::Vector2d& p);

// Inside state bounds, all collision points inside the workspace box, and
// no collision point inside an obstacle.
bool state_valid(const Environment& env, const DynamicsSpec& spec,
                 const State& x);

// Every state of the trajectory is valid. The bounds-exit flag itself is
// not invalidating; truncated prefixes stay within bounds by construction.
bool trajectory_valid(const Environment& env, const DynamicsSpec& spec,
                      const Trajectory& traj);

bool goal_reached(const Environment& env, const DynamicsSpec& spec,
                  const State& x);

// End-effector height above the mount, positive upwards ([0,0,0,0] hangs at
// -(L1+L2)).
double pendulum_tip_height(const DynamicsSpec& spec, const State& x);

// A sample from the goal region, used for goal-biased sampling. Ball goals
// fix the declared dimensions at the center and draw the remaining
// dimensions uniformly (in index order); altitude goals return the up-up
// configuration with zero velocities and consume no draws.
State goal_sample(const Environment& env, const DynamicsSpec& spec, Rng& rng);

// Checks env/spec consistency (start dimension and validity, goal dims in
// range, altitude goal only for the pendulum and attainable). Throws
// ContractViolation with a message on the first problem found.
void validate_environment(const Environment& env, const DynamicsSpec& spec);

// Intersects the spec's position bounds (vehicle models) with the scene
// workspace box so sampling and validity agree. Pendulum specs pass
// through unchanged.
DynamicsSpec apply_scene_bounds(const DynamicsSpec& spec,
                                const Environment& env);

// Scene text format, one directive per line, `#` comments:
//   bounds x0 y0 x1 y1
//   start v0 v1 ...
//   goal ball dims i... center c... tol t...
//   goal altitude h
//   rect x0 y0 x1 y1
//   circle cx cy r
Environment load_scene(const std::string& path);
Environment parse_scene(std::istream& in, const std::string& name);
void save_scene(const Environment& env, const std::string& path);

}  // namespace kinoplan
