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

#include "kinoplan/dubins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kinoplan {

namespace {

// Angle in [0, 2*pi).
double mod2pi(double a) {
  const double m = std::fmod(a, kTwoPi);
  return m < 0 ? m + kTwoPi : m;
}

// Tolerance for boundary configurations (tangent circles, collapsed arcs),
// in normalized unit-radius units.
constexpr double kGeomEps = 1e-9;

// An optimal path never contains a full circle; an arc that rounds to
// 2*pi is a collapsed zero arc that picked up a spurious revolution.
double snap_arc(double s) { return s > kTwoPi - kGeomEps ? 0.0 : s; }

struct Normalized {
  double alpha, beta, d;
  double theta;  // frame rotation, needed to map samples back
};

Normalized normalize(const State& q0, const State& q1, double rho) {
  const double dx = q1(0) - q0(0);
  const double dy = q1(1) - q0(1);
  Normalized n;
  n.theta = std::atan2(dy, dx);
  n.alpha = mod2pi(q0(2) - n.theta);
  n.beta = mod2pi(q1(2) - n.theta);
  n.d = std::hypot(dx, dy) / rho;
  return n;
}

using Seg = std::optional<std::array<double, 3>>;

Seg word_lsl(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double c_ab = std::cos(alpha - beta);
  const double p_sq = 2 + d * d - 2 * c_ab + 2 * d * (sa - sb);
  if (p_sq < -kGeomEps) return std::nullopt;
  const double tmp = std::atan2(cb - ca, d + sa - sb);
  return std::array<double, 3>{snap_arc(mod2pi(-alpha + tmp)),
                               std::sqrt(std::max(p_sq, 0.0)),
                               snap_arc(mod2pi(beta - tmp))};
}

Seg word_rsr(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double c_ab = std::cos(alpha - beta);
  const double p_sq = 2 + d * d - 2 * c_ab + 2 * d * (sb - sa);
  if (p_sq < -kGeomEps) return std::nullopt;
  const double tmp = std::atan2(ca - cb, d - sa + sb);
  return std::array<double, 3>{snap_arc(mod2pi(alpha - tmp)),
                               std::sqrt(std::max(p_sq, 0.0)),
                               snap_arc(mod2pi(-beta + tmp))};
}

Seg word_lsr(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double c_ab = std::cos(alpha - beta);
  const double p_sq = -2 + d * d + 2 * c_ab + 2 * d * (sa + sb);
  if (p_sq < -kGeomEps) return std::nullopt;
  const double p = std::sqrt(std::max(p_sq, 0.0));
  const double tmp = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
  return std::array<double, 3>{snap_arc(mod2pi(-alpha + tmp)), p,
                               snap_arc(mod2pi(-mod2pi(beta) + tmp))};
}

Seg word_rsl(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double c_ab = std::cos(alpha - beta);
  const double p_sq = d * d - 2 + 2 * c_ab - 2 * d * (sa + sb);
  if (p_sq < -kGeomEps) return std::nullopt;
  const double p = std::sqrt(std::max(p_sq, 0.0));
  const double tmp = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
  return std::array<double, 3>{snap_arc(mod2pi(alpha - tmp)), p,
                               snap_arc(mod2pi(beta - tmp))};
}

Seg word_rlr(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double c_ab = std::cos(alpha - beta);
  const double tmp = (6.0 - d * d + 2 * c_ab + 2 * d * (sa - sb)) / 8.0;
  if (std::abs(tmp) > 1 + kGeomEps) return std::nullopt;
  const double p = mod2pi(kTwoPi - std::acos(std::clamp(tmp, -1.0, 1.0)));
  const double t =
      mod2pi(alpha - std::atan2(ca - cb, d - sa + sb) + mod2pi(p / 2.0));
  return std::array<double, 3>{snap_arc(t), snap_arc(p),
                               snap_arc(mod2pi(alpha - beta - t + mod2pi(p)))};
}

Seg word_lrl(double alpha, double beta, double d) {
  const double sa = std::sin(alpha), sb = std::sin(beta);
  const double ca = std::cos(alpha), cb = std::cos(beta);
  const double c_ab = std::cos(alpha - beta);
  const double tmp = (6.0 - d * d + 2 * c_ab + 2 * d * (sb - sa)) / 8.0;
  if (std::abs(tmp) > 1 + kGeomEps) return std::nullopt;
  const double p = mod2pi(kTwoPi - std::acos(std::clamp(tmp, -1.0, 1.0)));
  const double t = mod2pi(-alpha - std::atan2(ca - cb, d + sa - sb) + p / 2.0);
  return std::array<double, 3>{
      snap_arc(t), snap_arc(p),
      snap_arc(mod2pi(mod2pi(beta) - alpha - t + mod2pi(p)))};
}

Seg word_segments(DubinsWord word, double alpha, double beta, double d) {
  switch (word) {
    case DubinsWord::kLSL: return word_lsl(alpha, beta, d);
    case DubinsWord::kRSR: return word_rsr(alpha, beta, d);
    case DubinsWord::kLSR: return word_lsr(alpha, beta, d);
    case DubinsWord::kRSL: return word_rsl(alpha, beta, d);
    case DubinsWord::kRLR: return word_rlr(alpha, beta, d);
    case DubinsWord::kLRL: return word_lrl(alpha, beta, d);
  }
  throw ContractViolation("unknown dubins word");
}

// Segment directions per word: -1 right, 0 straight, +1 left.
constexpr int kDirs[6][3] = {
    {+1, 0, +1}, {-1, 0, -1}, {+1, 0, -1}, {-1, 0, +1}, {-1, +1, -1}, {+1, -1, +1},
};

// Advance a unit-radius pose by arc length s along a segment.
void advance(int dir, double s, double& x, double& y, double& th) {
  if (dir == 0) {
    x += std::cos(th) * s;
    y += std::sin(th) * s;
  } else if (dir > 0) {
    x += std::sin(th + s) - std::sin(th);
    y += -std::cos(th + s) + std::cos(th);
    th += s;
  } else {
    x += -std::sin(th - s) + std::sin(th);
    y += std::cos(th - s) - std::cos(th);
    th -= s;
  }
}

}  // namespace

std::optional<DubinsPath> dubins_word_path(DubinsWord word, const State& q0,
                                           const State& q1, double rho) {
  if (rho <= 0) throw ContractViolation("dubins: rho must be positive");
  if (q0.size() < 3 || q1.size() < 3)
    throw ContractViolation("dubins: states need (x, y, heading)");
  const Normalized n = normalize(q0, q1, rho);
  const Seg seg = word_segments(word, n.alpha, n.beta, n.d);
  if (!seg) return std::nullopt;
  DubinsPath path;
  path.word = word;
  path.seg = *seg;
  path.rho = rho;
  return path;
}

DubinsPath dubins_shortest_path(const State& q0, const State& q1, double rho) {
  std::optional<DubinsPath> best;
  double best_len = std::numeric_limits<double>::infinity();
  for (int w = 0; w < 6; ++w) {
    const auto cand = dubins_word_path(static_cast<DubinsWord>(w), q0, q1, rho);
    if (cand && cand->length() < best_len) {
      best = cand;
      best_len = cand->length();
    }
  }
  if (!best) throw ContractViolation("dubins: no word admits a path");
  return *best;
}

double dubins_shortest_length(const State& q0, const State& q1, double rho) {
  return dubins_shortest_path(q0, q1, rho).length();
}

State dubins_sample(const DubinsPath& path, const State& q0, double s) {
  if (s < 0 || s > path.length() + 1e-9)
    throw ContractViolation("dubins_sample: s outside [0, length]");
  double rem = s / path.rho;
  // Normalized frame: start at the origin with the start heading, unit radius.
  double x = 0, y = 0, th = q0(2);
  const int* dirs = kDirs[static_cast<int>(path.word)];
  for (int i = 0; i < 3; ++i) {
    const double take = std::min(rem, path.seg[i]);
    advance(dirs[i], take, x, y, th);
    rem -= take;
    if (rem <= 0) break;
  }
  State out(3);
  out << q0(0) + path.rho * x, q0(1) + path.rho * y, wrap_angle(th);
  return out;
}

double dubins_transition_cost(const DubinsParams& params, const State& a,
                              const State& b) {
  if (params.turn_rate_limit <= 0 || params.speed_max <= 0)
    throw ContractViolation("dubins_transition_cost: invalid parameters");
  return dubins_shortest_length(a, b, 1.0 / params.turn_rate_limit) /
         params.speed_max;
}

}  // namespace kinoplan
