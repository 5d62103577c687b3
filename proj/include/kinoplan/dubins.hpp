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

#include <array>
#include <optional>

#include "kinoplan/dynamics.hpp"

namespace kinoplan {

// Classical obstacle-free shortest paths for the forward-only car with a
// minimum turning radius: the optimum is one of six words (LSL, RSR, LSR,
// RSL, RLR, LRL) made of unit-radius arcs and a straight segment.

enum class DubinsWord { kLSL, kRSR, kLSR, kRSL, kRLR, kLRL };

struct DubinsPath {
  DubinsWord word = DubinsWord::kLSL;
  // Segment lengths normalized by the turning radius.
  std::array<double, 3> seg{{0, 0, 0}};
  double rho = 1.0;

  double length() const { return (seg[0] + seg[1] + seg[2]) * rho; }
};

// Candidate path of one specific word, if that word admits a solution for
// the pair. States are (x, y, heading); rho > 0 is the turning radius.
std::optional<DubinsPath> dubins_word_path(DubinsWord word, const State& q0,
                                           const State& q1, double rho);

// The shortest of the six candidates. At least one word always exists.
DubinsPath dubins_shortest_path(const State& q0, const State& q1, double rho);

double dubins_shortest_length(const State& q0, const State& q1, double rho);

// Pose after arc length s along the path from q0 (s in [0, length]).
State dubins_sample(const DubinsPath& path, const State& q0, double s);

// Minimum traversal time between two states for the given car: geometric
// shortest length at radius 1/turn_rate_limit divided by speed_max.
double dubins_transition_cost(const DubinsParams& params, const State& a,
                              const State& b);

}  // namespace kinoplan
