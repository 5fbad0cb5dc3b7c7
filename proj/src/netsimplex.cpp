// Copyright 2026 The otlab Authors.
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

#include "netsimplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace otlab {

namespace {
constexpr size_t kNoArc = std::numeric_limits<size_t>::max();
}

NetSimplex::NetSimplex(std::vector<double> supplies, std::vector<double> demands) {
  n1_ = supplies.size();
  n2_ = demands.size();
  if (n1_ == 0 || n2_ == 0) {
    throw InputError("transport: a marginal with no atoms");
  }
  double total_supply = 0.0, total_demand = 0.0;
  for (double w : supplies) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("transport: bad supply weight");
    total_supply += w;
  }
  for (double v : demands) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("transport: bad demand weight");
    total_demand += v;
  }
  if (std::abs(total_supply - total_demand) > 1e-9) {
    throw InputError("transport: marginal masses differ");
  }

  const size_t V = n1_ + n2_;
  root_ = int(V);
  balance_.resize(V);
  for (size_t i = 0; i < n1_; ++i) balance_[i] = supplies[i];
  for (size_t j = 0; j < n2_; ++j) balance_[n1_ + j] = -demands[j];

  const int64_t art_cost = (int64_t(V) + 2) << 32;

  parent_.assign(V + 1, -1);
  pred_arc_.assign(V + 1, -1);
  first_child_.assign(V + 1, -1);
  next_sib_.assign(V + 1, -1);
  prev_sib_.assign(V + 1, -1);
  depth_.assign(V + 1, 0);
  pot_.assign(V + 1, 0);

  arc_from_.reserve(V);
  arc_to_.reserve(V);
  cost_.reserve(V);
  flow_.reserve(V);
  state_.reserve(V);
  for (size_t u = 0; u < V; ++u) {
    const bool outward = balance_[u] >= 0.0;
    arc_from_.push_back(outward ? uint32_t(u) : uint32_t(root_));
    arc_to_.push_back(outward ? uint32_t(root_) : uint32_t(u));
    cost_.push_back(art_cost);
    flow_.push_back(std::abs(balance_[u]));
    state_.push_back(kTree);
    pred_arc_[u] = int32_t(u);
    depth_[u] = 1;
    pot_[u] = outward ? art_cost : -art_cost;
    attach(int(u), root_);
  }
  artificial_count_ = V;
  depth_[root_] = 0;
  pot_[root_] = 0;
  parent_[root_] = -1;
}

size_t NetSimplex::add_arc(uint32_t i, uint32_t j, int64_t cost) {
  if (i >= n1_ || j >= n2_) throw InputError("transport: arc endpoint out of range");
  arc_from_.push_back(i);
  arc_to_.push_back(uint32_t(n1_ + j));
  cost_.push_back(cost);
  flow_.push_back(0.0);
  state_.push_back(kLower);
  return arc_from_.size() - 1;
}

void NetSimplex::detach(int node) {
  const int p = parent_[node];
  if (prev_sib_[node] >= 0) {
    next_sib_[prev_sib_[node]] = next_sib_[node];
  } else {
    first_child_[p] = next_sib_[node];
  }
  if (next_sib_[node] >= 0) prev_sib_[next_sib_[node]] = prev_sib_[node];
  prev_sib_[node] = -1;
  next_sib_[node] = -1;
}

void NetSimplex::attach(int node, int p) {
  parent_[node] = p;
  next_sib_[node] = first_child_[p];
  if (next_sib_[node] >= 0) prev_sib_[next_sib_[node]] = node;
  prev_sib_[node] = -1;
  first_child_[p] = node;
}

size_t NetSimplex::price_block() {
  const size_t begin = artificial_count_;
  const size_t end = arc_from_.size();
  const size_t ncand = end - begin;
  if (ncand == 0) return kNoArc;
  const size_t block = std::max<size_t>(64, size_t(std::sqrt(double(ncand))));
  if (price_cursor_ < begin || price_cursor_ >= end) price_cursor_ = begin;

  size_t pos = price_cursor_;
  size_t scanned = 0;
  size_t in_block = 0;
  int64_t best_rc = 0;
  size_t best = kNoArc;
  while (scanned < ncand) {
    if (state_[pos] == kLower) {
      const int64_t rc = reduced_cost(pos);
      if (rc < best_rc) {
        best_rc = rc;
        best = pos;
      }
    }
    ++pos;
    if (pos == end) pos = begin;
    ++scanned;
    if (++in_block == block) {
      if (best != kNoArc) {
        price_cursor_ = pos;
        return best;
      }
      in_block = 0;
    }
  }
  price_cursor_ = pos;
  return best;
}

size_t NetSimplex::price_bland() {
  for (size_t a = artificial_count_; a < arc_from_.size(); ++a) {
    if (state_[a] == kLower && reduced_cost(a) < 0) return a;
  }
  return kNoArc;
}

void NetSimplex::pivot(size_t entering) {
  const int u = int(arc_from_[entering]);
  const int v = int(arc_to_[entering]);
  const int64_t rc_enter = reduced_cost(entering);

  // Walk both endpoints to the apex, recording each tree arc, its child-side
  // node, and whether it sits on the v side of the cycle.
  cycle_arcs_.clear();
  cycle_dirs_.clear();
  static thread_local std::vector<int> cycle_child;
  static thread_local std::vector<int8_t> cycle_side;
  cycle_child.clear();
  cycle_side.clear();

  auto record = [&](int node, int8_t side) {
    const size_t a = size_t(pred_arc_[node]);
    const bool child_points_up = arc_from_[a] == uint32_t(node);
    // Cycle orientation runs u -> v across the entering arc, then back from v
    // to u through the tree; on the v side traversal follows child-to-parent.
    int8_t dir;
    if (side == 1) {
      dir = child_points_up ? int8_t(1) : int8_t(-1);
    } else {
      dir = child_points_up ? int8_t(-1) : int8_t(1);
    }
    cycle_arcs_.push_back(a);
    cycle_dirs_.push_back(dir);
    cycle_child.push_back(node);
    cycle_side.push_back(side);
  };

  int x = u, y = v;
  while (depth_[x] > depth_[y]) {
    record(x, 0);
    x = parent_[x];
  }
  while (depth_[y] > depth_[x]) {
    record(y, 1);
    y = parent_[y];
  }
  while (x != y) {
    record(x, 0);
    x = parent_[x];
    record(y, 1);
    y = parent_[y];
  }

  double theta = std::numeric_limits<double>::infinity();
  size_t leave_pos = kNoArc;
  for (size_t k = 0; k < cycle_arcs_.size(); ++k) {
    if (cycle_dirs_[k] != -1) continue;
    const double f = flow_[cycle_arcs_[k]];
    bool better;
    if (bland_mode_) {
      better = f < theta ||
               (f == theta && leave_pos != kNoArc &&
                cycle_arcs_[k] < cycle_arcs_[leave_pos]);
    } else {
      better = f < theta;
    }
    if (better) {
      theta = f;
      leave_pos = k;
    }
  }
  if (leave_pos == kNoArc) {
    throw InternalError("transport solver found an unbounded direction");
  }

  if (theta > 0.0) {
    flow_[entering] += theta;
    for (size_t k = 0; k < cycle_arcs_.size(); ++k) {
      double& f = flow_[cycle_arcs_[k]];
      f += cycle_dirs_[k] > 0 ? theta : -theta;
      if (f < 0.0) f = 0.0;
    }
  }

  const size_t leaving = cycle_arcs_[leave_pos];
  state_[entering] = kTree;
  state_[leaving] = kLower;
  flow_[leaving] = 0.0;

  const bool v_side = cycle_side[leave_pos] == 1;
  const int sub_root = v_side ? v : u;
  const int new_parent = v_side ? u : v;
  const int64_t shift = v_side ? -rc_enter : rc_enter;
  const int chain_end = cycle_child[leave_pos];

  // Reverse the parent chain from sub_root up to the cut point, hanging the
  // subtree under new_parent through the entering arc.
  int prev = new_parent;
  size_t carry = entering;
  int node = sub_root;
  for (;;) {
    const int old_parent = parent_[node];
    const size_t old_arc = size_t(pred_arc_[node]);
    detach(node);
    attach(node, prev);
    pred_arc_[node] = int32_t(carry);
    if (node == chain_end) break;
    prev = node;
    carry = old_arc;
    node = old_parent;
  }

  // Refresh depth and potential across the rehung subtree.
  static thread_local std::vector<int> stack;
  stack.clear();
  stack.push_back(sub_root);
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    depth_[n] = depth_[parent_[n]] + 1;
    pot_[n] += shift;
    for (int c = first_child_[n]; c >= 0; c = next_sib_[c]) stack.push_back(c);
  }
}

void NetSimplex::solve() {
  const uint64_t V = n1_ + n2_;
  const uint64_t bland_after = 64 * (V + 2) + 65536;
  const uint64_t hard_cap = 1000 * (V + 2) + (uint64_t(1) << 23);
  uint64_t local = 0;
  bland_mode_ = false;
  for (;;) {
    const size_t e = bland_mode_ ? price_bland() : price_block();
    if (e == kNoArc) break;
    pivot(e);
    ++pivots_;
    if (++local == bland_after) bland_mode_ = true;
    if (local > hard_cap) {
      throw InternalError("transport solver pivot budget exhausted");
    }
  }
}

void NetSimplex::extract_flows() {
  const size_t V = n1_ + n2_;
  for (size_t a = 0; a < arc_from_.size(); ++a) {
    if (state_[a] != kTree) flow_[a] = 0.0;
  }
  std::vector<double> excess = balance_;
  excess.push_back(0.0);

  std::vector<int> order(V);
  for (size_t u = 0; u < V; ++u) order[u] = int(u);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return depth_[a] > depth_[b]; });

  for (int node : order) {
    const size_t a = size_t(pred_arc_[node]);
    double f = arc_from_[a] == uint32_t(node) ? excess[node] : -excess[node];
    if (f < 0.0) {
      if (f < -1e-9) {
        throw InternalError("transport solver produced a negative flow");
      }
      f = 0.0;
    }
    flow_[a] = f;
    excess[parent_[node]] += excess[node];
  }

  max_artificial_flow_ = 0.0;
  for (size_t a = 0; a < artificial_count_; ++a) {
    max_artificial_flow_ = std::max(max_artificial_flow_, flow_[a]);
  }
}

}  // namespace otlab
