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

#include <vector>

#include "kinoplan/dubins.hpp"

namespace kinoplan::testsupport {

double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Rank correlation with average ranks on ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Independent numeric reference for the shortest bounded-curvature path
// length: for each three-segment word family the free parameters are swept
// on a grid and refined locally, composing poses with elementary rotations
// only. Returns the best valid length found (an upper bound that converges
// to the optimum).
double dubins_numeric_length(const DubinsParams& params, const State& a,
                             const State& b);

}  // namespace kinoplan::testsupport
