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
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "kinoplan/kdtree.hpp"

using namespace kinoplan;

namespace {

// reference metric, identical formula to the tree's
double dist_sq(const Eigen::VectorXd& w, const Eigen::ArrayXi& ang,
               const State& a, const State& b) {
  double s = 0;
  for (int i = 0; i < a.size(); ++i) {
    const double d =
        ang(i) ? angle_diff(a(i), b(i)) : a(i) - b(i);
    s += (w(i) * d) * (w(i) * d);
  }
  return s;
}

struct Fixture {
  Eigen::VectorXd w;
  Eigen::ArrayXi ang;
  std::vector<State> pts;
  WeightedKdTree tree;

  Fixture(int dim, int n_angular, int count, std::uint64_t seed) {
    w = Eigen::VectorXd::Ones(dim);
    ang = Eigen::ArrayXi::Zero(dim);
    Rng rng(seed);
    for (int i = 0; i < dim; ++i) w(i) = rng.uniform(0.3, 2.0);
    for (int i = 0; i < n_angular; ++i) ang(dim - 1 - i) = 1;
    tree.reset(w, ang);
    for (int i = 0; i < count; ++i) {
      State p(dim);
      for (int d = 0; d < dim; ++d)
        p(d) = ang(d) ? rng.uniform(-kPi, kPi) : rng.uniform(-5.0, 5.0);
      pts.push_back(p);
      tree.insert(i, p);
    }
  }

  State random_query(Rng& rng) const {
    State q(w.size());
    for (int d = 0; d < w.size(); ++d)
      q(d) = ang(d) ? rng.uniform(-kPi, kPi) : rng.uniform(-6.0, 6.0);
    return q;
  }

  std::pair<int, double> brute_nearest(const State& q) const {
    double best = std::numeric_limits<double>::infinity();
    int id = -1;
    for (size_t i = 0; i < pts.size(); ++i) {
      const double d2 = dist_sq(w, ang, q, pts[i]);
      if (d2 < best || (d2 == best && static_cast<int>(i) < id)) {
        best = d2;
        id = static_cast<int>(i);
      }
    }
    return {id, std::sqrt(best)};
  }

  std::vector<int> brute_radius(const State& q, double r) const {
    std::vector<int> out;
    for (size_t i = 0; i < pts.size(); ++i)
      if (dist_sq(w, ang, q, pts[i]) <= r * r)
        out.push_back(static_cast<int>(i));
    return out;
  }
};

}  // namespace

TEST_CASE("nearest matches a linear scan bit for bit") {
  for (int dim : {2, 3, 4}) {
    for (int n_ang : {0, 1, 2}) {
      Fixture f(dim, n_ang, 400, 17 + dim + 10 * n_ang);
      Rng rng(55);
      for (int t = 0; t < 300; ++t) {
        const State q = f.random_query(rng);
        const auto [bid, bd] = f.brute_nearest(q);
        const auto [tid, td] = f.tree.nearest(q);
        CHECK(tid == bid);
        CHECK(td == bd);
      }
    }
  }
}

TEST_CASE("nearest finds points across the angular seam") {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
  Eigen::ArrayXi ang(2);
  ang << 0, 1;
  WeightedKdTree tree(w, ang);
  State a(2), b(2);
  a << 0.0, kPi - 0.01;   // just below the seam
  b << 0.0, 1.0;
  tree.insert(0, a);
  tree.insert(1, b);
  State q(2);
  q << 0.0, -kPi + 0.01;  // just above the seam, 0.02 rad from a
  const auto [id, d] = tree.nearest(q);
  CHECK(id == 0);
  CHECK(d == doctest::Approx(0.02));
}

TEST_CASE("radius search returns exactly the linear-scan set") {
  Fixture f(3, 1, 500, 99);
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const State q = f.random_query(rng);
    const double r = rng.uniform(0.1, 3.0);
    auto expect = f.brute_radius(q, r);
    std::vector<int> got;
    f.tree.radius_search(q, r, got);
    std::sort(got.begin(), got.end());
    CHECK(got == expect);
  }
}

TEST_CASE("skip predicates exclude ids from both query kinds") {
  Fixture f(2, 0, 200, 23);
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const State q = f.random_query(rng);
    const auto parity = [](int id) { return id % 2 == 0; };  // skip evens
    const auto [tid, td] = f.tree.nearest(q, parity);
    // brute force over odd ids only
    double best = std::numeric_limits<double>::infinity();
    int bid = -1;
    for (size_t i = 1; i < f.pts.size(); i += 2) {
      const double d2 = dist_sq(f.w, f.ang, q, f.pts[i]);
      if (d2 < best) {
        best = d2;
        bid = static_cast<int>(i);
      }
    }
    CHECK(tid == bid);
    CHECK(td == doctest::Approx(std::sqrt(best)));

    std::vector<int> got;
    f.tree.radius_search(q, 2.0, got, parity);
    for (int id : got) CHECK(id % 2 == 1);
    auto all = f.brute_radius(q, 2.0);
    size_t odd_count = 0;
    for (int id : all)
      if (id % 2 == 1) odd_count++;
    CHECK(got.size() == odd_count);
  }
}

TEST_CASE("duplicate points tie-break on the smaller id") {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
  Eigen::ArrayXi ang = Eigen::ArrayXi::Zero(2);
  WeightedKdTree tree(w, ang);
  State p(2);
  p << 1.0, 1.0;
  tree.insert(7, p);
  tree.insert(3, p);
  tree.insert(5, p);
  State q(2);
  q << 1.1, 1.0;
  CHECK(tree.nearest(q).first == 3);
  // with 3 skipped the next-lowest id wins
  CHECK(tree.nearest(q, [](int id) { return id == 3; }).first == 5);
}

TEST_CASE("empty and fully skipped trees report no result") {
  WeightedKdTree tree(Eigen::VectorXd::Ones(2), Eigen::ArrayXi::Zero(2));
  State q = State::Zero(2);
  CHECK(tree.nearest(q).first == -1);
  CHECK(std::isinf(tree.nearest(q).second));
  tree.insert(0, q);
  CHECK(tree.nearest(q, [](int) { return true; }).first == -1);
  std::vector<int> out;
  tree.radius_search(q, 10.0, out, [](int) { return true; });
  CHECK(out.empty());
}

TEST_CASE("interleaved insert and query stays exact") {
  Eigen::VectorXd w(3);
  w << 1.0, 1.0, 0.5;
  Eigen::ArrayXi ang(3);
  ang << 0, 0, 1;
  WeightedKdTree tree(w, ang);
  std::vector<State> pts;
  Rng rng(41);
  for (int i = 0; i < 600; ++i) {
    State p(3);
    p << rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi);
    tree.insert(i, p);
    pts.push_back(p);
    if (i % 7 == 0) {
      State q(3);
      q << rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi);
      double best = std::numeric_limits<double>::infinity();
      int bid = -1;
      for (size_t k = 0; k < pts.size(); ++k) {
        const double d2 = dist_sq(w, ang, q, pts[k]);
        if (d2 < best) {
          best = d2;
          bid = static_cast<int>(k);
        }
      }
      const auto [tid, td] = tree.nearest(q);
      CHECK(tid == bid);
      CHECK(td * td == doctest::Approx(best).epsilon(1e-12));
    }
  }
}
