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
#include <sstream>

#include "doctest.h"
#include "kinoplan/search_tree.hpp"

using namespace kinoplan;

namespace {

DynamicsSpec spec2d() {
  // dubins box reused as a plain weighted space
  return make_dubins_spec(DubinsParams{}, {0.0, 0.0}, {10.0, 10.0});
}

State st(double x, double y, double th = 0.0) {
  State s(3);
  s << x, y, th;
  return s;
}

Control ctrl(double a, double b) {
  Control c(2);
  c << a, b;
  return c;
}

int add(SearchTree& tree, int parent, const State& s, double edge_cost) {
  return tree.insert(parent, s, ctrl(1.0, 0.0), edge_cost, edge_cost);
}

}  // namespace

TEST_CASE("insert tracks parents, children and cost-to-come") {
  SearchTree tree(spec2d(), st(1, 1));
  CHECK(tree.size() == 1);
  CHECK(tree.node(0).parent == -1);
  CHECK(tree.node(0).cost_to_come == 0.0);

  const int a = add(tree, 0, st(2, 1), 1.0);
  const int b = add(tree, a, st(3, 1), 0.5);
  const int c = add(tree, 0, st(1, 2), 2.0);
  CHECK(tree.size() == 4);
  CHECK(tree.node(a).parent == 0);
  CHECK(tree.node(b).cost_to_come == doctest::Approx(1.5));
  CHECK(tree.node(0).child_count == 2);
  CHECK(tree.node(a).child_count == 1);
  CHECK(tree.node(c).child_count == 0);
  CHECK(tree.path_from_root(b) == std::vector<int>{0, a, b});
  CHECK(tree.states_matrix().row(b)(0) == 3.0);

  CHECK_THROWS_AS(tree.insert(99, st(0, 0), ctrl(0, 0), 1.0, 1.0),
                  ContractViolation);
  CHECK_THROWS_AS(tree.insert(0, st(0, 0), ctrl(0, 0), 1.0, -0.1),
                  ContractViolation);
}

TEST_CASE("deactivate prunes childless inactive chains up to the root") {
  SearchTree tree(spec2d(), st(1, 1));
  const int a = add(tree, 0, st(2, 1), 1.0);
  const int b = add(tree, a, st(3, 1), 1.0);
  const int c = add(tree, b, st(4, 1), 1.0);

  // a -> b -> c hangs off the root; killing c should sweep b and a only
  // after they are themselves inactive and childless
  tree.deactivate(b);  // b inactive but has child c: stays
  CHECK(!tree.node(b).active);
  CHECK(!tree.node(b).removed);
  CHECK(tree.active_count() == 3);

  tree.deactivate(c);  // c childless: removed, then b follows; a is active
  CHECK(tree.node(c).removed);
  CHECK(tree.node(b).removed);
  CHECK(!tree.node(a).removed);
  CHECK(tree.node(a).child_count == 0);
  CHECK(tree.active_count() == 2);

  tree.deactivate(a);
  CHECK(tree.node(a).removed);
  CHECK(tree.node(0).child_count == 0);
  CHECK(!tree.node(0).removed);  // root survives
  CHECK(tree.active_count() == 1);
}

TEST_CASE("nearest queries agree between scan and index and skip inactive") {
  DynamicsSpec spec = spec2d();
  SearchTree indexed(spec, st(5, 5));
  SearchTree plain(spec, st(5, 5), /*build_index=*/false);
  CHECK(indexed.has_index());
  CHECK(!plain.has_index());

  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    const State s = st(rng.uniform(0, 10), rng.uniform(0, 10),
                       rng.uniform(-kPi, kPi));
    const int parent_hint = rng.uniform_int(indexed.size());
    const int parent = indexed.node(parent_hint).removed ? 0 : parent_hint;
    const double cost = rng.uniform(0.1, 1.0);
    indexed.insert(parent, s, ctrl(1, 0), cost, cost);
    plain.insert(parent, s, ctrl(1, 0), cost, cost);
    if (i % 11 == 0 && indexed.size() > 5) {
      int victim = 1 + rng.uniform_int(indexed.size() - 1);
      if (!indexed.node(victim).removed && victim != 0 &&
          indexed.node(victim).child_count == 0) {
        indexed.deactivate(victim);
        plain.deactivate(victim);
      }
    }
    const State q = st(rng.uniform(0, 10), rng.uniform(0, 10),
                       rng.uniform(-kPi, kPi));
    const int want = plain.nearest_euclidean(q);
    CHECK(indexed.nearest_euclidean(q) == want);
    CHECK(indexed.nearest_euclidean_indexed(q) == want);
  }
}

TEST_CASE("radius query returns every active node in range") {
  DynamicsSpec spec = spec2d();
  SearchTree tree(spec, st(5, 5));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const State s = st(rng.uniform(0, 10), rng.uniform(0, 10),
                       rng.uniform(-kPi, kPi));
    tree.insert(0, s, ctrl(1, 0), 0.5, 0.5);
  }
  for (int t = 0; t < 50; ++t) {
    const State q = st(rng.uniform(0, 10), rng.uniform(0, 10),
                       rng.uniform(-kPi, kPi));
    const double r = rng.uniform(0.5, 4.0);
    std::vector<int> got;
    tree.near_euclidean_indexed(q, r, got);
    std::vector<int> expect;
    for (int id = 0; id < tree.size(); ++id)
      if (tree.node(id).active &&
          weighted_distance(spec, tree.node(id).state, q) <= r)
        expect.push_back(id);
    std::sort(got.begin(), got.end());
    CHECK(got == expect);
  }
}

TEST_CASE("gather_active narrows to live rows with matching ids") {
  SearchTree tree(spec2d(), st(1, 1));
  const int a = add(tree, 0, st(2, 2), 1.0);
  const int b = add(tree, 0, st(3, 3), 1.0);
  const int c = add(tree, 0, st(4, 4), 1.0);
  (void)b;

  std::vector<int> ids;
  Eigen::Ref<const Batch> all = tree.gather_active(ids);
  CHECK(ids == std::vector<int>{0, a, b, c});
  CHECK(all.rows() == 4);

  tree.deactivate(b);
  Eigen::Ref<const Batch> live = tree.gather_active(ids);
  CHECK(ids == std::vector<int>{0, a, c});
  REQUIRE(live.rows() == 3);
  CHECK(live(2, 0) == 4.0);
}

TEST_CASE("export lists one line per node") {
  SearchTree tree(spec2d(), st(1, 1, 0.5));
  add(tree, 0, st(2, 1), 1.25);
  std::ostringstream out;
  export_tree(tree, out);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') lines++;
  CHECK(lines == 2);
  CHECK(out.str().find("1.25") != std::string::npos);
}

TEST_CASE("witness regions dedupe by radius") {
  WitnessSet ws(spec2d(), 0.5);
  CHECK(ws.find(st(1, 1)) == -1);
  const int w0 = ws.add(st(1, 1), 0);
  CHECK(ws.find(st(1.2, 1)) == w0);    // inside the region
  CHECK(ws.find(st(1.6, 1)) == -1);    // outside
  const int w1 = ws.add(st(3, 3), 1);
  CHECK(ws.size() == 2);
  CHECK(ws.representative(w1) == 1);
  ws.set_representative(w1, 4);
  CHECK(ws.representative(w1) == 4);
}

TEST_CASE("witness update accepts, replaces and rejects correctly") {
  DynamicsSpec spec = spec2d();
  SearchTree tree(spec, st(1, 1));
  WitnessSet ws(spec, 0.5);

  // seed the start region like the planners do
  ws.add(st(1, 1), 0);

  WitnessCandidate cand;
  cand.parent = 0;
  cand.control = ctrl(1, 0);
  cand.duration = 1.0;

  // fresh region: accepted
  cand.state = st(4, 4);
  cand.edge_cost = 2.0;
  const WitnessDecision d1 = sst_witness_update(ws, tree, cand);
  CHECK(d1.kind == WitnessDecision::Kind::kAcceptNew);
  REQUIRE(d1.inserted != -1);
  CHECK(ws.size() == 2);
  CHECK(ws.representative(d1.witness) == d1.inserted);
  const int first = d1.inserted;

  // same region, worse cost: rejected, nothing inserted
  cand.state = st(4.1, 4);
  cand.edge_cost = 3.0;
  const int size_before = tree.size();
  const WitnessDecision d2 = sst_witness_update(ws, tree, cand);
  CHECK(d2.kind == WitnessDecision::Kind::kReject);
  CHECK(d2.inserted == -1);
  CHECK(tree.size() == size_before);
  CHECK(ws.size() == 2);

  // same region, better cost: replaces and deactivates the old rep
  cand.state = st(3.9, 4);
  cand.edge_cost = 1.0;
  const WitnessDecision d3 = sst_witness_update(ws, tree, cand);
  CHECK(d3.kind == WitnessDecision::Kind::kReplace);
  CHECK(d3.displaced == first);
  CHECK(!tree.node(first).active);
  CHECK(tree.node(first).removed);  // childless loser is swept immediately
  CHECK(ws.representative(d3.witness) == d3.inserted);

  // a displaced representative with children stays as a tombstone-free
  // inactive interior node
  cand.state = st(7, 7);
  cand.edge_cost = 1.0;
  const WitnessDecision d4 = sst_witness_update(ws, tree, cand);
  const int rep = d4.inserted;
  const int child = add(tree, rep, st(7.8, 7.8), 0.5);
  cand.state = st(7.05, 7);
  cand.edge_cost = 0.5;
  const WitnessDecision d5 = sst_witness_update(ws, tree, cand);
  CHECK(d5.kind == WitnessDecision::Kind::kReplace);
  CHECK(d5.displaced == rep);
  CHECK(!tree.node(rep).active);
  CHECK(!tree.node(rep).removed);  // still anchors its child
  CHECK(tree.node(child).active);
}

TEST_CASE("witness invariants hold under random traffic") {
  DynamicsSpec spec = spec2d();
  SearchTree tree(spec, st(5, 5));
  WitnessSet ws(spec, 0.4);
  ws.add(st(5, 5), 0);
  Rng rng(19);

  for (int i = 0; i < 800; ++i) {
    WitnessCandidate cand;
    // parent: any active node (scan for one)
    int parent = -1;
    for (int trial = 0; trial < 50 && parent < 0; ++trial) {
      const int id = rng.uniform_int(tree.size());
      if (tree.node(id).active) parent = id;
    }
    if (parent < 0) parent = 0;
    cand.parent = parent;
    cand.state = st(rng.uniform(0, 10), rng.uniform(0, 10),
                    rng.uniform(-kPi, kPi));
    cand.control = ctrl(rng.uniform(0, 1), rng.uniform(-0.7, 0.7));
    cand.duration = rng.uniform(0.1, 1.0);
    cand.edge_cost = cand.duration;
    sst_witness_update(ws, tree, cand);
  }

  // every witness has a live representative in its region, and no two
  // witnesses are within the radius of each other
  int reps_alive = 0;
  for (int w = 0; w < ws.size(); ++w) {
    const int rep = ws.representative(w);
    REQUIRE(rep >= 0);
    REQUIRE(rep < tree.size());
    const TreeNode& n = tree.node(rep);
    CHECK(n.active);
    CHECK(!n.removed);
    CHECK(weighted_distance(spec, n.state, ws.point(w)) <= ws.radius() + 1e-9);
    reps_alive++;
    for (int v = w + 1; v < ws.size(); ++v)
      CHECK(weighted_distance(spec, ws.point(w), ws.point(v)) >
            ws.radius() - 1e-9);
  }
  CHECK(reps_alive == ws.size());

  // tombstoned nodes are never active; live nodes never hang off a
  // tombstone (pruned chains keep stale parent links internally)
  for (int id = 0; id < tree.size(); ++id) {
    const TreeNode& n = tree.node(id);
    if (n.removed) CHECK(!n.active);
    if (!n.removed && n.parent >= 0) {
      CHECK(!tree.node(n.parent).removed);
      // cost to come is consistent along the edge chain
      CHECK(n.cost_to_come >= tree.node(n.parent).cost_to_come - 1e-12);
    }
  }

  // child counts match reality
  std::vector<int> counted(tree.size(), 0);
  for (int id = 0; id < tree.size(); ++id)
    if (!tree.node(id).removed && tree.node(id).parent >= 0)
      counted[tree.node(id).parent]++;
  for (int id = 0; id < tree.size(); ++id)
    if (!tree.node(id).removed)
      CHECK(tree.node(id).child_count == counted[id]);
}
