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

#include <functional>
#include <utility>
#include <vector>

#include "kinoplan/core.hpp"

namespace kinoplan {

// Incremental k-d tree under a weighted Euclidean metric where some
// dimensions are angles on [-pi, pi). Queries are exact and reproduce a
// linear scan bit for bit, including ties (lexicographic (distance^2, id)
// order): subtree pruning uses per-axis point-to-interval distances taken
// over the wrapped images of the query, and a subtree is skipped only when
// its bound strictly exceeds the incumbent beyond a small relative slack.
class WeightedKdTree {
 public:
  WeightedKdTree() = default;
  WeightedKdTree(Eigen::VectorXd weights, Eigen::ArrayXi angular);

  void reset(Eigen::VectorXd weights, Eigen::ArrayXi angular);

  int size() const { return static_cast<int>(points_.size()); }
  bool empty() const { return points_.empty(); }

  // Ids are arbitrary nonnegative caller keys; angular coordinates must
  // already be wrapped to [-pi, pi).
  void insert(int id, const State& p);

  using Skip = std::function<bool(int)>;

  // Returns (id, distance); (-1, inf) when everything is skipped or empty.
  std::pair<int, double> nearest(const State& q) const;
  std::pair<int, double> nearest(const State& q, const Skip& skip) const;

  // Appends ids with distance <= r to `out` (unsorted traversal order).
  void radius_search(const State& q, double r, std::vector<int>& out) const;
  void radius_search(const State& q, double r, std::vector<int>& out,
                     const Skip& skip) const;

 private:
  struct Node {
    int id = -1;
    int left = -1, right = -1;
    int split = 0;
    // Bounding box of every point in this subtree (never shrinks).
    Eigen::VectorXd box_lo, box_hi;
  };

  struct Best {
    double d2;
    int id;
    bool better(double cand_d2, int cand_id) const {
      return cand_d2 < d2 || (cand_d2 == d2 && cand_id < id);
    }
  };

  double point_dist_sq(const State& q, int node) const;
  double box_bound_sq(const State& q, const Node& n) const;
  void nearest_rec(int node, const State& q, const Skip* skip, Best& best) const;
  void radius_rec(int node, const State& q, double r2, const Skip* skip,
                  std::vector<int>& out) const;

  Eigen::VectorXd weights_;
  Eigen::ArrayXi angular_;
  int dim_ = 0;
  int root_ = -1;
  std::vector<Node> nodes_;
  std::vector<State> points_;  // parallel to nodes_
};

}  // namespace kinoplan
