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

#include "kinoplan/kdtree.hpp"

#include <cmath>
#include <limits>

namespace kinoplan {

namespace {
// Pruning must never discard a subtree whose true distance ties the
// incumbent, so bounds are compared with a hair of relative slack.
constexpr double kPruneSlack = 1e-12;
}  // namespace

WeightedKdTree::WeightedKdTree(Eigen::VectorXd weights, Eigen::ArrayXi angular) {
  reset(std::move(weights), std::move(angular));
}

void WeightedKdTree::reset(Eigen::VectorXd weights, Eigen::ArrayXi angular) {
  if (weights.size() != angular.size() || weights.size() == 0)
    throw ContractViolation("kdtree: weights/angular size mismatch");
  weights_ = std::move(weights);
  angular_ = std::move(angular);
  dim_ = static_cast<int>(weights_.size());
  root_ = -1;
  nodes_.clear();
  points_.clear();
}

void WeightedKdTree::insert(int id, const State& p) {
  if (dim_ == 0) throw ContractViolation("kdtree: not configured");
  if (p.size() != dim_) throw ContractViolation("kdtree: point dimension mismatch");

  const int idx = static_cast<int>(nodes_.size());
  Node n;
  n.id = id;
  n.box_lo = p;
  n.box_hi = p;
  nodes_.push_back(std::move(n));
  points_.push_back(p);

  if (root_ < 0) {
    root_ = idx;
    nodes_[idx].split = 0;
    return;
  }
  int cur = root_;
  for (;;) {
    Node& node = nodes_[cur];
    node.box_lo = node.box_lo.cwiseMin(p);
    node.box_hi = node.box_hi.cwiseMax(p);
    const int d = node.split;
    int& child = (p(d) < points_[cur](d)) ? node.left : node.right;
    if (child < 0) {
      child = idx;
      nodes_[idx].split = (d + 1) % dim_;
      return;
    }
    cur = child;
  }
}

double WeightedKdTree::point_dist_sq(const State& q, int node) const {
  const State& p = points_[node];
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double d = q(i) - p(i);
    if (angular_(i)) d = wrap_angle(d);
    d *= weights_(i);
    acc += d * d;
  }
  return acc;
}

double WeightedKdTree::box_bound_sq(const State& q, const Node& n) const {
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double lo = n.box_lo(i), hi = n.box_hi(i);
    double d;
    if (angular_(i)) {
      // Interval lies inside [-pi, pi); the three images of q cover every
      // wrapped displacement.
      d = std::numeric_limits<double>::infinity();
      for (const double img : {q(i) - kTwoPi, q(i), q(i) + kTwoPi}) {
        const double di = img < lo ? lo - img : (img > hi ? img - hi : 0.0);
        d = std::min(d, di);
      }
    } else {
      d = q(i) < lo ? lo - q(i) : (q(i) > hi ? q(i) - hi : 0.0);
    }
    d *= weights_(i);
    acc += d * d;
  }
  return acc;
}

void WeightedKdTree::nearest_rec(int node, const State& q, const Skip* skip,
                                 Best& best) const {
  const Node& n = nodes_[node];
  if (box_bound_sq(q, n) > best.d2 * (1.0 + kPruneSlack)) return;

  if (!skip || !(*skip)(n.id)) {
    const double d2 = point_dist_sq(q, node);
    if (best.better(d2, n.id)) {
      best.d2 = d2;
      best.id = n.id;
    }
  }

  const int d = n.split;
  const bool left_first = q(d) < points_[node](d);
  const int first = left_first ? n.left : n.right;
  const int second = left_first ? n.right : n.left;
  if (first >= 0) nearest_rec(first, q, skip, best);
  if (second >= 0) nearest_rec(second, q, skip, best);
}

std::pair<int, double> WeightedKdTree::nearest(const State& q) const {
  return nearest(q, Skip());
}

std::pair<int, double> WeightedKdTree::nearest(const State& q,
                                               const Skip& skip) const {
  if (q.size() != dim_) throw ContractViolation("kdtree: query dimension mismatch");
  Best best{std::numeric_limits<double>::infinity(),
            std::numeric_limits<int>::max()};
  if (root_ >= 0) nearest_rec(root_, q, skip ? &skip : nullptr, best);
  if (best.id == std::numeric_limits<int>::max())
    return {-1, std::numeric_limits<double>::infinity()};
  return {best.id, std::sqrt(best.d2)};
}

void WeightedKdTree::radius_rec(int node, const State& q, double r2,
                                const Skip* skip, std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (box_bound_sq(q, n) > r2 * (1.0 + kPruneSlack)) return;
  if ((!skip || !(*skip)(n.id)) && point_dist_sq(q, node) <= r2)
    out.push_back(n.id);
  if (n.left >= 0) radius_rec(n.left, q, r2, skip, out);
  if (n.right >= 0) radius_rec(n.right, q, r2, skip, out);
}

void WeightedKdTree::radius_search(const State& q, double r,
                                   std::vector<int>& out) const {
  radius_search(q, r, out, Skip());
}

void WeightedKdTree::radius_search(const State& q, double r,
                                   std::vector<int>& out,
                                   const Skip& skip) const {
  if (q.size() != dim_) throw ContractViolation("kdtree: query dimension mismatch");
  if (root_ >= 0) radius_rec(root_, q, r * r, skip ? &skip : nullptr, out);
}

}  // namespace kinoplan
