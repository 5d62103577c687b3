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
#include <vector>

#include "kinoplan/dynamics.hpp"
#include "kinoplan/kdtree.hpp"

namespace kinoplan {

struct TreeNode {
  State state;
  Control control;      // control that produced this node (empty at the root)
  double duration = 0;  // propagation time of the incoming edge
  double cost_to_come = 0;
  int parent = -1;
  int child_count = 0;
  bool active = true;    // eligible for nearest queries / expansion
  bool removed = false;  // tombstoned by pruning; implies !active
};

// Append-only tree over states of one DynamicsSpec. Node ids are dense and
// stable; pruning tombstones nodes instead of reusing ids. States are also
// mirrored row-by-row in a dense matrix so estimator queries can run over
// one contiguous batch.
class SearchTree {
 public:
  SearchTree(const DynamicsSpec& spec, const State& root,
             bool build_index = true);

  const DynamicsSpec& spec() const { return spec_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int active_count() const { return active_count_; }
  bool all_active() const { return active_count_ == size(); }
  const TreeNode& node(int id) const { return nodes_.at(id); }

  // Edge cost must be nonnegative; returns the new node id.
  int insert(int parent, const State& state, const Control& control,
             double duration, double edge_cost);

  // Marks a node inactive, then tombstones it and any ancestors that are
  // inactive and childless (the root is never removed).
  void deactivate(int id);

  // Reference nearest neighbor: linear scan of active nodes under the
  // spec's weighted metric, ties to the lowest id. Returns -1 when no node
  // is active.
  int nearest_euclidean(const State& q) const;

  // Same answer through the k-d index.
  int nearest_euclidean_indexed(const State& q) const;

  // Active node ids with weighted distance to q at most r.
  void near_euclidean_indexed(const State& q, double r,
                              std::vector<int>& out) const;

  bool has_index() const { return indexed_; }

  // Row i holds node i's state (tombstones included).
  const Batch& states_matrix() const { return states_; }

  // Contiguous batch of the active nodes' states plus the matching ids (in
  // id order). When every node is active this is a view of states_matrix()
  // and no copy happens.
  Eigen::Ref<const Batch> gather_active(std::vector<int>& ids) const;

  // Ids from the goal node back to the root, reversed to root-first order.
  std::vector<int> path_from_root(int id) const;

 private:
  DynamicsSpec spec_;
  std::vector<TreeNode> nodes_;
  Batch states_;  // rows 0..size-1 valid
  int active_count_ = 0;
  bool indexed_ = false;
  WeightedKdTree index_;
  mutable Batch scratch_;  // reused by gather_active
};

// Writes `id parent cost duration state... control...` per line.
void export_tree(const SearchTree& tree, std::ostream& out);

// One witness per region of radius `radius` (weighted metric); each witness
// remembers the cheapest tree node seen in its region (the representative).
class WitnessSet {
 public:
  WitnessSet(const DynamicsSpec& spec, double radius);

  int size() const { return static_cast<int>(points_.size()); }
  double radius() const { return radius_; }

  // Nearest witness within `radius` of s, or -1.
  int find(const State& s) const;

  int add(const State& s, int representative);
  int representative(int witness) const { return reps_.at(witness); }
  void set_representative(int witness, int node) { reps_.at(witness) = node; }
  const State& point(int witness) const { return points_.at(witness); }

 private:
  double radius_;
  DynamicsSpec spec_;
  std::vector<State> points_;
  std::vector<int> reps_;
  WeightedKdTree index_;
};

struct WitnessCandidate {
  int parent = -1;
  State state;
  Control control;
  double duration = 0;
  double edge_cost = 0;
};

struct WitnessDecision {
  enum class Kind { kAcceptNew, kReplace, kReject };
  Kind kind = Kind::kReject;
  int witness = -1;
  int inserted = -1;   // new node id, -1 on reject
  int displaced = -1;  // deactivated old representative, -1 unless replaced
};

// Sparse acceptance test: a candidate landing in a fresh region is inserted
// and becomes the region's representative; one landing in a known region is
// inserted only if it beats the current representative's cost-to-come, which
// is then deactivated (and its childless inactive ancestors pruned);
// otherwise the candidate is rejected and nothing is inserted.
WitnessDecision sst_witness_update(WitnessSet& witnesses, SearchTree& tree,
                                   const WitnessCandidate& candidate);

}  // namespace kinoplan
