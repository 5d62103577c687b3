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

#include "kinoplan/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace kinoplan {

const char* model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDubins: return "dubins";
    case ModelKind::kDoublePendulum: return "double_pendulum";
    case ModelKind::kGooseneckTrailer: return "gooseneck_trailer";
  }
  throw ContractViolation("unknown model kind");
}

ModelKind model_from_name(const std::string& name) {
  if (name == "dubins") return ModelKind::kDubins;
  if (name == "double_pendulum") return ModelKind::kDoublePendulum;
  if (name == "gooseneck_trailer") return ModelKind::kGooseneckTrailer;
  throw ContractViolation("unknown model name: " + name);
}

DynamicsSpec make_dubins_spec(const DubinsParams& p,
                              const Eigen::Vector2d& pos_lo,
                              const Eigen::Vector2d& pos_hi, double dt) {
  if (p.axle_length <= 0 || p.speed_max <= 0 || p.turn_rate_limit <= 0)
    throw ContractViolation("dubins parameters must be positive");
  DynamicsSpec s;
  s.kind = ModelKind::kDubins;
  s.params = p;
  s.state_lo.resize(3);
  s.state_hi.resize(3);
  s.state_lo << pos_lo.x(), pos_lo.y(), -kPi;
  s.state_hi << pos_hi.x(), pos_hi.y(), kPi;
  const double steer = std::atan(p.axle_length * p.turn_rate_limit);
  s.control_lo.resize(2);
  s.control_hi.resize(2);
  s.control_lo << 0.0, -steer;
  s.control_hi << p.speed_max, steer;
  s.weights = Eigen::VectorXd::Ones(3);
  s.angular = Eigen::ArrayXi::Zero(3);
  s.angular(2) = 1;
  s.dt = dt;
  return s;
}

DynamicsSpec make_pendulum_spec(const PendulumParams& p, double dt) {
  if (p.arm_length_1 <= 0 || p.arm_length_2 <= 0 || p.mass <= 0 ||
      p.torque_limit <= 0 || p.speed_limit <= 0)
    throw ContractViolation("pendulum parameters must be positive");
  DynamicsSpec s;
  s.kind = ModelKind::kDoublePendulum;
  s.params = p;
  s.state_lo.resize(4);
  s.state_hi.resize(4);
  s.state_lo << -kPi, -p.speed_limit, -kPi, -p.speed_limit;
  s.state_hi << kPi, p.speed_limit, kPi, p.speed_limit;
  s.control_lo = Control::Constant(2, -p.torque_limit);
  s.control_hi = Control::Constant(2, p.torque_limit);
  s.weights = Eigen::VectorXd::Ones(4);
  s.angular = Eigen::ArrayXi::Zero(4);
  s.angular(0) = 1;
  s.angular(2) = 1;
  s.dt = dt;
  return s;
}

DynamicsSpec make_trailer_spec(const TrailerParams& p,
                               const Eigen::Vector2d& pos_lo,
                               const Eigen::Vector2d& pos_hi, double dt) {
  if (p.axle_length_1 <= 0 || p.axle_length_2 <= 0 || p.speed_max <= 0 ||
      p.steering_limit <= 0 || p.steering_limit >= kPi / 2)
    throw ContractViolation("trailer parameters out of range");
  DynamicsSpec s;
  s.kind = ModelKind::kGooseneckTrailer;
  s.params = p;
  s.state_lo.resize(4);
  s.state_hi.resize(4);
  s.state_lo << pos_lo.x(), pos_lo.y(), -kPi, -kPi;
  s.state_hi << pos_hi.x(), pos_hi.y(), kPi, kPi;
  s.control_lo.resize(2);
  s.control_hi.resize(2);
  s.control_lo << 0.0, -p.steering_limit;
  s.control_hi << p.speed_max, p.steering_limit;
  s.weights = Eigen::VectorXd::Ones(4);
  s.angular = Eigen::ArrayXi::Zero(4);
  s.angular(2) = 1;
  s.angular(3) = 1;
  s.dt = dt;
  return s;
}

namespace {

void derivative_into(const DynamicsSpec& spec, const State& x,
                     const Control& u, State& dx) {
  switch (spec.kind) {
    case ModelKind::kDubins: {
      const auto& p = std::get<DubinsParams>(spec.params);
      const double us = u(0), phi = u(1), th = x(2);
      dx << us * std::cos(th), us * std::sin(th),
          us * std::tan(phi) / p.axle_length;
      return;
    }
    case ModelKind::kDoublePendulum: {
      const auto& p = std::get<PendulumParams>(spec.params);
      const double l1 = p.arm_length_1, l2 = p.arm_length_2;
      dx << x(1),
          u(0) / (p.mass * l1 * l1) - p.gravity * std::sin(x(0)) / l1,
          x(3),
          u(1) / (p.mass * l2 * l2) - p.gravity * std::sin(x(2)) / l2;
      return;
    }
    case ModelKind::kGooseneckTrailer: {
      const auto& p = std::get<TrailerParams>(spec.params);
      const double us = u(0), phi = u(1), th1 = x(2), th2 = x(3);
      dx << us * std::cos(th1), us * std::sin(th1),
          us * std::tan(phi) / p.axle_length_1,
          us * std::sin(th1 - th2) / p.axle_length_2;
      return;
    }
  }
  throw ContractViolation("unknown model kind");
}

// One RK4 step of size h advancing x in place (then wrapping angles),
// with caller-provided stage buffers so stepping does not touch the heap.
void rk4_advance(const DynamicsSpec& spec, State& x, const Control& u,
                 double h, State& k1, State& k2, State& k3, State& k4,
                 State& mid) {
  derivative_into(spec, x, u, k1);
  mid = x + 0.5 * h * k1;
  derivative_into(spec, mid, u, k2);
  mid = x + 0.5 * h * k2;
  derivative_into(spec, mid, u, k3);
  mid = x + h * k3;
  derivative_into(spec, mid, u, k4);
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  wrap_state(spec, x);
}

struct Stepper {
  const DynamicsSpec& spec;
  State k1, k2, k3, k4, mid;

  explicit Stepper(const DynamicsSpec& s)
      : spec(s),
        k1(s.state_dim()),
        k2(s.state_dim()),
        k3(s.state_dim()),
        k4(s.state_dim()),
        mid(s.state_dim()) {}

  void step(State& x, const Control& u, double h) {
    rk4_advance(spec, x, u, h, k1, k2, k3, k4, mid);
  }
};

}  // namespace

State derivative(const DynamicsSpec& spec, const State& x, const Control& u) {
  if (x.size() != spec.state_dim())
    throw ContractViolation("derivative: state dimension mismatch");
  if (u.size() != spec.control_dim())
    throw ContractViolation("derivative: control dimension mismatch");
  State dx(x.size());
  derivative_into(spec, x, u, dx);
  return dx;
}

State rk4_step(const DynamicsSpec& spec, const State& x, const Control& u,
               double h) {
  if (x.size() != spec.state_dim() || u.size() != spec.control_dim())
    throw ContractViolation("rk4_step: dimension mismatch");
  Stepper stepper(spec);
  State out = x;
  stepper.step(out, u, h);
  return out;
}

void wrap_state(const DynamicsSpec& spec, State& x) {
  for (int i = 0; i < spec.angular.size(); ++i)
    if (spec.angular(i)) x(i) = wrap_angle(x(i));
}

bool in_state_bounds(const DynamicsSpec& spec, const State& x) {
  for (int i = 0; i < spec.state_dim(); ++i) {
    if (spec.angular(i)) continue;
    if (x(i) < spec.state_lo(i) || x(i) > spec.state_hi(i)) return false;
  }
  return true;
}

namespace {

void check_propagate_args(const DynamicsSpec& spec, const State& x0,
                          const Control& u, double duration) {
  if (x0.size() != spec.state_dim() || u.size() != spec.control_dim())
    throw ContractViolation("propagate: dimension mismatch");
  if (duration < 0) throw ContractViolation("propagate: negative duration");
  if (!in_state_bounds(spec, x0))
    throw ContractViolation("propagate: start state out of bounds");
}

}  // namespace

Trajectory propagate(const DynamicsSpec& spec, const State& x0,
                     const Control& u, double duration) {
  check_propagate_args(spec, x0, u, duration);

  const double dt = spec.dt;
  const int full = static_cast<int>(std::floor(duration / dt + 1e-9));
  const double rem = duration - full * dt;
  const bool partial = rem > 1e-9;
  const int max_steps = full + (partial ? 1 : 0);

  Batch states(max_steps + 1, spec.state_dim());
  State x = x0;
  wrap_state(spec, x);
  states.row(0) = x;

  Stepper stepper(spec);
  int n = 1;
  double covered = 0.0;
  bool exited = false;
  for (int s = 0; s < max_steps; ++s) {
    const double h = (s < full) ? dt : rem;
    stepper.step(x, u, h);
    if (!in_state_bounds(spec, x)) {
      exited = true;
      break;
    }
    states.row(n++) = x;
    covered += h;
  }

  Trajectory traj;
  traj.states = states.topRows(n);
  traj.control = u;
  traj.dt = dt;
  traj.duration = covered;
  traj.exited_bounds = exited;
  return traj;
}

PropagationEnd propagate_endpoint(const DynamicsSpec& spec, const State& x0,
                                  const Control& u, double duration) {
  Propagator prop(spec);
  PropagationEnd out;
  out.state = x0;
  out.duration = prop.advance(out.state, u, duration, &out.exited_bounds);
  return out;
}

Propagator::Propagator(const DynamicsSpec& spec)
    : spec_(&spec),
      k1_(spec.state_dim()),
      k2_(spec.state_dim()),
      k3_(spec.state_dim()),
      k4_(spec.state_dim()),
      mid_(spec.state_dim()),
      keep_(spec.state_dim()) {}

double Propagator::advance(State& x, const Control& u, double duration,
                           bool* exited) {
  const DynamicsSpec& spec = *spec_;
  check_propagate_args(spec, x, u, duration);

  const double dt = spec.dt;
  const int full = static_cast<int>(std::floor(duration / dt + 1e-9));
  const double rem = duration - full * dt;
  const bool partial = rem > 1e-9;
  const int max_steps = full + (partial ? 1 : 0);

  wrap_state(spec, x);
  if (exited) *exited = false;
  double covered = 0.0;
  for (int s = 0; s < max_steps; ++s) {
    const double h = (s < full) ? dt : rem;
    keep_ = x;
    rk4_advance(spec, x, u, h, k1_, k2_, k3_, k4_, mid_);
    if (!in_state_bounds(spec, x)) {
      x = keep_;
      if (exited) *exited = true;
      return covered;
    }
    covered += h;
  }
  return covered;
}

double weighted_distance_sq(const DynamicsSpec& spec, const State& a,
                            const State& b) {
  if (a.size() != spec.state_dim() || b.size() != spec.state_dim())
    throw ContractViolation("weighted_distance: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < spec.state_dim(); ++i) {
    double d = a(i) - b(i);
    if (spec.angular(i)) d = wrap_angle(d);
    d *= spec.weights(i);
    acc += d * d;
  }
  return acc;
}

double weighted_distance(const DynamicsSpec& spec, const State& a,
                         const State& b) {
  return std::sqrt(weighted_distance_sq(spec, a, b));
}

State sample_state(const DynamicsSpec& spec, Rng& rng) {
  State x(spec.state_dim());
  for (int i = 0; i < spec.state_dim(); ++i)
    x(i) = spec.angular(i) ? rng.uniform(-kPi, kPi)
                           : rng.uniform(spec.state_lo(i), spec.state_hi(i));
  return x;
}

Control sample_control(const DynamicsSpec& spec, Rng& rng) {
  Control u(spec.control_dim());
  for (int i = 0; i < spec.control_dim(); ++i)
    u(i) = rng.uniform(spec.control_lo(i), spec.control_hi(i));
  return u;
}

namespace {

struct KeyValues {
  std::map<std::string, std::pair<int, std::vector<double>>> numeric;
  std::string model;
  int model_line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

KeyValues read_key_values(std::istream& in, const std::string& name) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(name, lineno, "expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(name, lineno, "empty key");
    if (key == "model") {
      if (!kv.model.empty()) throw ParseError(name, lineno, "duplicate key: model");
      kv.model = val;
      kv.model_line = lineno;
      continue;
    }
    if (kv.numeric.count(key))
      throw ParseError(name, lineno, "duplicate key: " + key);
    std::istringstream vs(val);
    std::vector<double> nums;
    double d;
    while (vs >> d) nums.push_back(d);
    std::string tail;
    if (!(vs >> tail).eof() || nums.empty())
      throw ParseError(name, lineno, "expected numeric value(s) for " + key);
    kv.numeric[key] = {lineno, nums};
  }
  return kv;
}

class SpecReader {
 public:
  SpecReader(KeyValues kv, std::string name) : kv_(std::move(kv)), name_(std::move(name)) {}

  double scalar(const std::string& key, double fallback, bool required = false) {
    auto it = kv_.numeric.find(key);
    if (it == kv_.numeric.end()) {
      if (required) throw ParseError(name_, 0, "missing required key: " + key);
      return fallback;
    }
    if (it->second.second.size() != 1)
      throw ParseError(name_, it->second.first, key + " expects one value");
    used_.push_back(key);
    return it->second.second[0];
  }

  Eigen::VectorXd vector(const std::string& key, int n, const Eigen::VectorXd& fallback) {
    auto it = kv_.numeric.find(key);
    if (it == kv_.numeric.end()) return fallback;
    if (static_cast<int>(it->second.second.size()) != n)
      throw ParseError(name_, it->second.first,
                       key + " expects " + std::to_string(n) + " values");
    used_.push_back(key);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = it->second.second[i];
    return v;
  }

  void finish() {
    for (const auto& [key, entry] : kv_.numeric) {
      bool ok = false;
      for (const auto& u : used_)
        if (u == key) ok = true;
      if (!ok) throw ParseError(name_, entry.first, "unknown key: " + key);
    }
  }

 private:
  KeyValues kv_;
  std::string name_;
  std::vector<std::string> used_;
};

}  // namespace

DynamicsSpec parse_spec_config(std::istream& in, const std::string& name) {
  KeyValues kv = read_key_values(in, name);
  if (kv.model.empty()) throw ParseError(name, 0, "missing required key: model");
  const ModelKind kind = [&] {
    try {
      return model_from_name(kv.model);
    } catch (const ContractViolation&) {
      throw ParseError(name, kv.model_line, "unknown model: " + kv.model);
    }
  }();

  SpecReader r(std::move(kv), name);
  DynamicsSpec spec;
  switch (kind) {
    case ModelKind::kDubins: {
      DubinsParams p;
      p.axle_length = r.scalar("axle_length", p.axle_length);
      p.speed_max = r.scalar("speed_max", p.speed_max);
      p.turn_rate_limit = r.scalar("turn_rate_limit", p.turn_rate_limit);
      const auto lo = r.vector("position_min", 2, Eigen::Vector2d(0, 0));
      const auto hi = r.vector("position_max", 2, Eigen::Vector2d(10, 10));
      spec = make_dubins_spec(p, lo, hi, r.scalar("dt", 0.01));
      break;
    }
    case ModelKind::kDoublePendulum: {
      PendulumParams p;
      p.arm_length_1 = r.scalar("arm_length_1", p.arm_length_1);
      p.arm_length_2 = r.scalar("arm_length_2", p.arm_length_2);
      p.mass = r.scalar("mass", p.mass);
      p.gravity = r.scalar("gravity", p.gravity);
      p.torque_limit = r.scalar("torque_limit", p.torque_limit);
      p.speed_limit = r.scalar("speed_limit", p.speed_limit);
      spec = make_pendulum_spec(p, r.scalar("dt", 0.002));
      break;
    }
    case ModelKind::kGooseneckTrailer: {
      TrailerParams p;
      p.axle_length_1 = r.scalar("axle_length_1", p.axle_length_1);
      p.axle_length_2 = r.scalar("axle_length_2", p.axle_length_2);
      p.speed_max = r.scalar("speed_max", p.speed_max);
      p.steering_limit = r.scalar("steering_limit", p.steering_limit);
      const auto lo = r.vector("position_min", 2, Eigen::Vector2d(0, 0));
      const auto hi = r.vector("position_max", 2, Eigen::Vector2d(10, 10));
      spec = make_trailer_spec(p, lo, hi, r.scalar("dt", 0.01));
      break;
    }
  }
  spec.weights = r.vector("weights", spec.state_dim(), spec.weights);
  for (int i = 0; i < spec.weights.size(); ++i)
    if (spec.weights(i) <= 0) throw ParseError(name, 0, "weights must be positive");
  r.finish();
  return spec;
}

DynamicsSpec load_spec_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return parse_spec_config(in, path);
}

void save_spec_config(const DynamicsSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out.precision(17);
  out << "model = " << model_name(spec.kind) << "\n";
  switch (spec.kind) {
    case ModelKind::kDubins: {
      const auto& p = std::get<DubinsParams>(spec.params);
      out << "axle_length = " << p.axle_length << "\n"
          << "speed_max = " << p.speed_max << "\n"
          << "turn_rate_limit = " << p.turn_rate_limit << "\n"
          << "position_min = " << spec.state_lo(0) << " " << spec.state_lo(1) << "\n"
          << "position_max = " << spec.state_hi(0) << " " << spec.state_hi(1) << "\n";
      break;
    }
    case ModelKind::kDoublePendulum: {
      const auto& p = std::get<PendulumParams>(spec.params);
      out << "arm_length_1 = " << p.arm_length_1 << "\n"
          << "arm_length_2 = " << p.arm_length_2 << "\n"
          << "mass = " << p.mass << "\n"
          << "gravity = " << p.gravity << "\n"
          << "torque_limit = " << p.torque_limit << "\n"
          << "speed_limit = " << p.speed_limit << "\n";
      break;
    }
    case ModelKind::kGooseneckTrailer: {
      const auto& p = std::get<TrailerParams>(spec.params);
      out << "axle_length_1 = " << p.axle_length_1 << "\n"
          << "axle_length_2 = " << p.axle_length_2 << "\n"
          << "speed_max = " << p.speed_max << "\n"
          << "steering_limit = " << p.steering_limit << "\n"
          << "position_min = " << spec.state_lo(0) << " " << spec.state_lo(1) << "\n"
          << "position_max = " << spec.state_hi(0) << " " << spec.state_hi(1) << "\n";
      break;
    }
  }
  out << "weights =";
  for (int i = 0; i < spec.weights.size(); ++i) out << " " << spec.weights(i);
  out << "\n";
  out << "dt = " << spec.dt << "\n";
}

}  // namespace kinoplan
