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

#include "kinoplan/search_tree.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace kinoplan {

SearchTree::SearchTree(const DynamicsSpec& spec, const State& root,
                       bool build_index)
    : spec_(spec), indexed_(build_index) {
  if (root.size() != spec_.state_dim())
    throw ContractViolation("search tree: root dimension mismatch");
  if (indexed_) index_.reset(spec_.weights, spec_.angular);
  states_.resize(64, spec_.state_dim());

  TreeNode n;
  n.state = root;
  wrap_state(spec_, n.state);
  nodes_.push_back(n);
  states_.row(0) = nodes_[0].state;
  active_count_ = 1;
  if (indexed_) index_.insert(0, nodes_[0].state);
}

int SearchTree::insert(int parent, const State& state, const Control& control,
                       double duration, double edge_cost) {
  if (parent < 0 || parent >= size())
    throw ContractViolation("search tree: bad parent id");
  if (nodes_[parent].removed)
    throw ContractViolation("search tree: parent is removed");
  if (edge_cost < 0)
    throw ContractViolation("search tree: negative edge cost");
  if (state.size() != spec_.state_dim())
    throw ContractViolation("search tree: state dimension mismatch");

  const int id = size();
  TreeNode n;
  n.state = state;
  wrap_state(spec_, n.state);
  n.control = control;
  n.duration = duration;
  n.cost_to_come = nodes_[parent].cost_to_come + edge_cost;
  n.parent = parent;
  nodes_.push_back(std::move(n));
  nodes_[parent].child_count++;
  active_count_++;

  if (states_.rows() < size()) {
    Batch grown(states_.rows() * 2, spec_.state_dim());
    grown.topRows(states_.rows()) = states_;
    states_.swap(grown);
  }
  states_.row(id) = nodes_[id].state;
  if (indexed_) index_.insert(id, nodes_[id].state);
  return id;
}

void SearchTree::deactivate(int id) {
  if (id <= 0 || id >= size()) return;  // the root stays
  TreeNode& n = nodes_[id];
  if (n.removed) return;
  if (n.active) {
    n.active = false;
    active_count_--;
  }
  int cur = id;
  while (cur > 0 && !nodes_[cur].active && !nodes_[cur].removed &&
         nodes_[cur].child_count == 0) {
    nodes_[cur].removed = true;
    const int parent = nodes_[cur].parent;
    nodes_[parent].child_count--;
    cur = parent;
  }
}

int SearchTree::nearest_euclidean(const State& q) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  int best = -1;
  for (int id = 0; id < size(); ++id) {
    const TreeNode& n = nodes_[id];
    if (!n.active) continue;
    const double d2 = weighted_distance_sq(spec_, n.state, q);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = id;
    }
  }
  return best;
}

int SearchTree::nearest_euclidean_indexed(const State& q) const {
  if (!indexed_) throw ContractViolation("search tree: index disabled");
  const auto [id, dist] = index_.nearest(
      q, [this](int cand) { return !nodes_[cand].active; });
  (void)dist;
  return id;
}

void SearchTree::near_euclidean_indexed(const State& q, double r,
                                        std::vector<int>& out) const {
  if (!indexed_) throw ContractViolation("search tree: index disabled");
  out.clear();
  index_.radius_search(q, r, out,
                       [this](int cand) { return !nodes_[cand].active; });
  std::sort(out.begin(), out.end());
}

Eigen::Ref<const Batch> SearchTree::gather_active(std::vector<int>& ids) const {
  ids.clear();
  if (all_active()) {
    ids.resize(size());
    for (int i = 0; i < size(); ++i) ids[i] = i;
    return states_.topRows(size());
  }
  ids.reserve(active_count_);
  if (scratch_.rows() < active_count_ || scratch_.cols() != spec_.state_dim())
    scratch_.resize(std::max(active_count_, 64), spec_.state_dim());
  int row = 0;
  for (int id = 0; id < size(); ++id) {
    if (!nodes_[id].active) continue;
    scratch_.row(row++) = states_.row(id);
    ids.push_back(id);
  }
  return scratch_.topRows(row);
}

std::vector<int> SearchTree::path_from_root(int id) const {
  std::vector<int> path;
  for (int cur = id; cur >= 0; cur = nodes_.at(cur).parent)
    path.push_back(cur);
  std::reverse(path.begin(), path.end());
  return path;
}

void export_tree(const SearchTree& tree, std::ostream& out) {
  out.precision(17);
  for (int id = 0; id < tree.size(); ++id) {
    const TreeNode& n = tree.node(id);
    if (n.removed) continue;
    out << id << " " << n.parent << " " << n.cost_to_come << " " << n.duration;
    for (int i = 0; i < n.state.size(); ++i) out << " " << n.state(i);
    for (int i = 0; i < n.control.size(); ++i) out << " " << n.control(i);
    out << "\n";
  }
}

WitnessSet::WitnessSet(const DynamicsSpec& spec, double radius)
    : radius_(radius), spec_(spec) {
  if (radius <= 0) throw ContractViolation("witness set: radius must be positive");
  index_.reset(spec_.weights, spec_.angular);
}

int WitnessSet::find(const State& s) const {
  if (points_.empty()) return -1;
  const auto [id, dist] = index_.nearest(s);
  return (id >= 0 && dist <= radius_) ? id : -1;
}

int WitnessSet::add(const State& s, int representative) {
  const int id = size();
  points_.push_back(s);
  reps_.push_back(representative);
  index_.insert(id, s);
  return id;
}

WitnessDecision sst_witness_update(WitnessSet& witnesses, SearchTree& tree,
                                   const WitnessCandidate& candidate) {
  WitnessDecision decision;
  const double cost =
      tree.node(candidate.parent).cost_to_come + candidate.edge_cost;

  const int witness = witnesses.find(candidate.state);
  if (witness < 0) {
    decision.kind = WitnessDecision::Kind::kAcceptNew;
    decision.inserted =
        tree.insert(candidate.parent, candidate.state, candidate.control,
                    candidate.duration, candidate.edge_cost);
    decision.witness = witnesses.add(candidate.state, decision.inserted);
    return decision;
  }

  const int rep = witnesses.representative(witness);
  if (cost < tree.node(rep).cost_to_come) {
    decision.kind = WitnessDecision::Kind::kReplace;
    decision.witness = witness;
    decision.displaced = rep;
    decision.inserted =
        tree.insert(candidate.parent, candidate.state, candidate.control,
                    candidate.duration, candidate.edge_cost);
    witnesses.set_representative(witness, decision.inserted);
    tree.deactivate(rep);
    return decision;
  }

  decision.kind = WitnessDecision::Kind::kReject;
  decision.witness = witness;
  return decision;
}

}  // namespace kinoplan
