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

#include "kinoplan/environment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace kinoplan {

namespace {

Eigen::Vector2d pendulum_elbow(const PendulumParams& p, const State& x) {
  return {p.arm_length_1 * std::sin(x(0)), -p.arm_length_1 * std::cos(x(0))};
}

Eigen::Vector2d pendulum_tip(const PendulumParams& p, const State& x) {
  return pendulum_elbow(p, x) +
         Eigen::Vector2d(p.arm_length_2 * std::sin(x(2)),
                         -p.arm_length_2 * std::cos(x(2)));
}

constexpr int kLinkInteriorPoints = 8;

void append_link_points(const Eigen::Vector2d& from, const Eigen::Vector2d& to,
                        std::vector<Eigen::Vector2d>& out) {
  for (int k = 1; k <= kLinkInteriorPoints; ++k) {
    const double t = static_cast<double>(k) / (kLinkInteriorPoints + 1);
    out.push_back(from + t * (to - from));
  }
  out.push_back(to);
}

}  // namespace

void collision_points(const DynamicsSpec& spec, const State& x,
                      std::vector<Eigen::Vector2d>& out) {
  out.clear();
  switch (spec.kind) {
    case ModelKind::kDubins:
    case ModelKind::kGooseneckTrailer:
      out.emplace_back(x(0), x(1));
      break;
    case ModelKind::kDoublePendulum: {
      const auto& p = std::get<PendulumParams>(spec.params);
      const Eigen::Vector2d base(0, 0);
      const Eigen::Vector2d elbow = pendulum_elbow(p, x);
      append_link_points(base, elbow, out);
      append_link_points(elbow, pendulum_tip(p, x), out);
      break;
    }
  }
}

bool point_in_obstacle(const Obstacle& obs, const Eigen::Vector2d& p) {
  if (const auto* r = std::get_if<RectObstacle>(&obs)) {
    return p.x() >= r->lo.x() && p.x() <= r->hi.x() && p.y() >= r->lo.y() &&
           p.y() <= r->hi.y();
  }
  const auto& c = std::get<CircleObstacle>(obs);
  return (p - c.center).squaredNorm() <= c.radius * c.radius;
}

bool point_in_collision(const Environment& env, const Eigen::Vector2d& p) {
  for (const auto& obs : env.obstacles)
    if (point_in_obstacle(obs, p)) return true;
  return false;
}

bool state_valid(const Environment& env, const DynamicsSpec& spec,
                 const State& x) {
  if (!in_state_bounds(spec, x)) return false;
  static thread_local std::vector<Eigen::Vector2d> pts;
  collision_points(spec, x, pts);
  for (const auto& p : pts) {
    if (p.x() < env.bounds_lo.x() || p.x() > env.bounds_hi.x() ||
        p.y() < env.bounds_lo.y() || p.y() > env.bounds_hi.y())
      return false;
    if (point_in_collision(env, p)) return false;
  }
  return true;
}

bool trajectory_valid(const Environment& env, const DynamicsSpec& spec,
                      const Trajectory& traj) {
  for (int i = 0; i < traj.length(); ++i)
    if (!state_valid(env, spec, traj.states.row(i))) return false;
  return true;
}

double pendulum_tip_height(const DynamicsSpec& spec, const State& x) {
  const auto& p = std::get<PendulumParams>(spec.params);
  return -p.arm_length_1 * std::cos(x(0)) - p.arm_length_2 * std::cos(x(2));
}

bool goal_reached(const Environment& env, const DynamicsSpec& spec,
                  const State& x) {
  if (const auto* ball = std::get_if<BallGoal>(&env.goal)) {
    for (std::size_t k = 0; k < ball->dims.size(); ++k) {
      const int d = ball->dims[k];
      double diff = x(d) - ball->center(static_cast<int>(k));
      if (spec.angular(d)) diff = wrap_angle(diff);
      if (std::abs(diff) > ball->tol(static_cast<int>(k))) return false;
    }
    return true;
  }
  const auto& alt = std::get<AltitudeGoal>(env.goal);
  return pendulum_tip_height(spec, x) >= alt.height;
}

State goal_sample(const Environment& env, const DynamicsSpec& spec, Rng& rng) {
  if (const auto* ball = std::get_if<BallGoal>(&env.goal)) {
    State x(spec.state_dim());
    std::vector<bool> fixed(spec.state_dim(), false);
    for (std::size_t k = 0; k < ball->dims.size(); ++k) {
      x(ball->dims[k]) = ball->center(static_cast<int>(k));
      fixed[ball->dims[k]] = true;
    }
    for (int i = 0; i < spec.state_dim(); ++i) {
      if (fixed[i]) continue;
      x(i) = spec.angular(i) ? rng.uniform(-kPi, kPi)
                             : rng.uniform(spec.state_lo(i), spec.state_hi(i));
    }
    return x;
  }
  State x = State::Zero(spec.state_dim());
  x(0) = wrap_angle(kPi);
  x(2) = wrap_angle(kPi);
  return x;
}

void validate_environment(const Environment& env, const DynamicsSpec& spec) {
  if (env.bounds_hi.x() <= env.bounds_lo.x() ||
      env.bounds_hi.y() <= env.bounds_lo.y())
    throw ContractViolation("environment: empty workspace box");
  if (env.start.size() != spec.state_dim())
    throw ContractViolation("environment: start dimension mismatch");
  if (!state_valid(env, spec, env.start))
    throw ContractViolation("environment: start state invalid");
  if (const auto* ball = std::get_if<BallGoal>(&env.goal)) {
    if (ball->dims.empty())
      throw ContractViolation("environment: ball goal declares no dimensions");
    for (int d : ball->dims)
      if (d < 0 || d >= spec.state_dim())
        throw ContractViolation("environment: goal dimension out of range");
    if (ball->center.size() != static_cast<int>(ball->dims.size()) ||
        ball->tol.size() != static_cast<int>(ball->dims.size()))
      throw ContractViolation("environment: goal center/tol arity mismatch");
    for (int i = 0; i < ball->tol.size(); ++i)
      if (ball->tol(i) <= 0)
        throw ContractViolation("environment: goal tolerance must be positive");
  } else {
    if (spec.kind != ModelKind::kDoublePendulum)
      throw ContractViolation("environment: altitude goal needs the pendulum");
    const auto& p = std::get<PendulumParams>(spec.params);
    const double h = std::get<AltitudeGoal>(env.goal).height;
    if (h > p.arm_length_1 + p.arm_length_2)
      throw ContractViolation("environment: altitude goal unreachable");
  }
}

DynamicsSpec apply_scene_bounds(const DynamicsSpec& spec,
                                const Environment& env) {
  if (spec.kind == ModelKind::kDoublePendulum) return spec;
  DynamicsSpec out = spec;
  out.state_lo(0) = std::max(out.state_lo(0), env.bounds_lo.x());
  out.state_lo(1) = std::max(out.state_lo(1), env.bounds_lo.y());
  out.state_hi(0) = std::min(out.state_hi(0), env.bounds_hi.x());
  out.state_hi(1) = std::min(out.state_hi(1), env.bounds_hi.y());
  return out;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

double to_number(const std::string& tok, const std::string& file, int line) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(file, line, "expected a number, got `" + tok + "`");
  }
  if (pos != tok.size())
    throw ParseError(file, line, "expected a number, got `" + tok + "`");
  return v;
}

int to_index(const std::string& tok, const std::string& file, int line) {
  const double v = to_number(tok, file, line);
  const int i = static_cast<int>(v);
  if (v != i || i < 0)
    throw ParseError(file, line, "expected a nonnegative integer, got `" + tok + "`");
  return i;
}

}  // namespace

Environment parse_scene(std::istream& in, const std::string& name) {
  Environment env;
  bool have_bounds = false, have_start = false, have_goal = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& dir = toks[0];

    if (dir == "bounds") {
      if (have_bounds) throw ParseError(name, lineno, "duplicate bounds");
      if (toks.size() != 5) throw ParseError(name, lineno, "bounds expects 4 numbers");
      env.bounds_lo << to_number(toks[1], name, lineno), to_number(toks[2], name, lineno);
      env.bounds_hi << to_number(toks[3], name, lineno), to_number(toks[4], name, lineno);
      if (env.bounds_hi.x() <= env.bounds_lo.x() || env.bounds_hi.y() <= env.bounds_lo.y())
        throw ParseError(name, lineno, "bounds box is empty");
      have_bounds = true;
    } else if (dir == "start") {
      if (have_start) throw ParseError(name, lineno, "duplicate start");
      if (toks.size() < 2) throw ParseError(name, lineno, "start expects state values");
      env.start.resize(static_cast<int>(toks.size()) - 1);
      for (std::size_t i = 1; i < toks.size(); ++i)
        env.start(static_cast<int>(i) - 1) = to_number(toks[i], name, lineno);
      have_start = true;
    } else if (dir == "goal") {
      if (have_goal) throw ParseError(name, lineno, "duplicate goal");
      if (toks.size() < 2) throw ParseError(name, lineno, "goal expects a kind");
      if (toks[1] == "altitude") {
        if (toks.size() != 3) throw ParseError(name, lineno, "goal altitude expects one number");
        env.goal = AltitudeGoal{to_number(toks[2], name, lineno)};
      } else if (toks[1] == "ball") {
        // goal ball dims i... center c... tol t...
        BallGoal ball;
        std::size_t i = 2;
        auto expect_kw = [&](const char* kw) {
          if (i >= toks.size() || toks[i] != kw)
            throw ParseError(name, lineno, std::string("goal ball: expected `") + kw + "`");
          ++i;
        };
        expect_kw("dims");
        while (i < toks.size() && toks[i] != "center")
          ball.dims.push_back(to_index(toks[i++], name, lineno));
        if (ball.dims.empty()) throw ParseError(name, lineno, "goal ball: no dims");
        expect_kw("center");
        std::vector<double> center, tol;
        while (i < toks.size() && toks[i] != "tol")
          center.push_back(to_number(toks[i++], name, lineno));
        expect_kw("tol");
        while (i < toks.size()) tol.push_back(to_number(toks[i++], name, lineno));
        if (center.size() != ball.dims.size() || tol.size() != ball.dims.size())
          throw ParseError(name, lineno, "goal ball: dims/center/tol arity mismatch");
        ball.center = Eigen::Map<const Eigen::VectorXd>(center.data(), center.size());
        ball.tol = Eigen::Map<const Eigen::VectorXd>(tol.data(), tol.size());
        env.goal = std::move(ball);
      } else {
        throw ParseError(name, lineno, "unknown goal kind: " + toks[1]);
      }
      have_goal = true;
    } else if (dir == "rect") {
      if (toks.size() != 5) throw ParseError(name, lineno, "rect expects 4 numbers");
      RectObstacle r;
      r.lo << to_number(toks[1], name, lineno), to_number(toks[2], name, lineno);
      r.hi << to_number(toks[3], name, lineno), to_number(toks[4], name, lineno);
      if (r.hi.x() < r.lo.x() || r.hi.y() < r.lo.y())
        throw ParseError(name, lineno, "rect corners out of order");
      env.obstacles.emplace_back(r);
    } else if (dir == "circle") {
      if (toks.size() != 4) throw ParseError(name, lineno, "circle expects 3 numbers");
      CircleObstacle c;
      c.center << to_number(toks[1], name, lineno), to_number(toks[2], name, lineno);
      c.radius = to_number(toks[3], name, lineno);
      if (c.radius <= 0) throw ParseError(name, lineno, "circle radius must be positive");
      env.obstacles.emplace_back(c);
    } else {
      throw ParseError(name, lineno, "unknown directive: " + dir);
    }
  }
  if (!have_bounds) throw ParseError(name, 0, "missing bounds");
  if (!have_start) throw ParseError(name, 0, "missing start");
  if (!have_goal) throw ParseError(name, 0, "missing goal");
  return env;
}

Environment load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse_scene(in, path);
}

void save_scene(const Environment& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out.precision(17);
  out << "bounds " << env.bounds_lo.x() << " " << env.bounds_lo.y() << " "
      << env.bounds_hi.x() << " " << env.bounds_hi.y() << "\n";
  out << "start";
  for (int i = 0; i < env.start.size(); ++i) out << " " << env.start(i);
  out << "\n";
  if (const auto* ball = std::get_if<BallGoal>(&env.goal)) {
    out << "goal ball dims";
    for (int d : ball->dims) out << " " << d;
    out << " center";
    for (int i = 0; i < ball->center.size(); ++i) out << " " << ball->center(i);
    out << " tol";
    for (int i = 0; i < ball->tol.size(); ++i) out << " " << ball->tol(i);
    out << "\n";
  } else {
    out << "goal altitude " << std::get<AltitudeGoal>(env.goal).height << "\n";
  }
  for (const auto& obs : env.obstacles) {
    if (const auto* r = std::get_if<RectObstacle>(&obs))
      out << "rect " << r->lo.x() << " " << r->lo.y() << " " << r->hi.x()
          << " " << r->hi.y() << "\n";
    else {
      const auto& c = std::get<CircleObstacle>(obs);
      out << "circle " << c.center.x() << " " << c.center.y() << " "
          << c.radius << "\n";
    }
  }
}

}  // namespace kinoplan
