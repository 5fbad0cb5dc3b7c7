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

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace otlab {

// Primal network simplex for the uncapacitated bipartite transportation
// problem. Costs are 64-bit integers (the caller fixes the scaling), flows
// are doubles. The graph starts with artificial arcs tying every node to a
// root, so any candidate arc set yields a feasible basis; candidate arcs can
// be added between solve() calls and the basis warm-starts.
class NetSimplex {
 public:
  // supplies[i] > 0 ship out of source i, demands[j] > 0 flow into sink j.
  // Totals must agree to ~1e-9.
  NetSimplex(std::vector<double> supplies, std::vector<double> demands);

  // Adds a candidate arc from source `i` to sink `j`. Returns its id.
  size_t add_arc(uint32_t i, uint32_t j, int64_t cost);
  size_t candidate_arc_count() const { return arc_from_.size() - artificial_count_; }

  // Pivots until no candidate arc has negative reduced cost. Throws
  // InternalError if the pivot budget is exhausted.
  void solve();

  // Node potentials: sources at [0, n1), sinks at [n1, n1+n2).
  int64_t potential(size_t node) const { return pot_[node]; }
  size_t source_count() const { return n1_; }
  size_t sink_count() const { return n2_; }
  uint64_t pivot_count() const { return pivots_; }

  // Recomputes tree-arc flows exactly from the node balances (deepest cells
  // first), replacing the incrementally updated values.
  void extract_flows();

  // Largest flow left on an artificial arc after extract_flows(); positive
  // values mean the candidate arc set cannot route all mass.
  double max_artificial_flow() const { return max_artificial_flow_; }

  // Visits candidate arcs with positive flow as fn(source, sink, flow, cost).
  template <typename Fn>
  void for_each_flow(Fn&& fn) const {
    for (size_t a = artificial_count_; a < arc_from_.size(); ++a) {
      if (flow_[a] > 0.0) {
        fn(arc_from_[a], uint32_t(arc_to_[a] - n1_), flow_[a], cost_[a]);
      }
    }
  }

 private:
  enum : uint8_t { kLower = 0, kTree = 1 };

  int64_t reduced_cost(size_t a) const {
    return cost_[a] - pot_[arc_from_[a]] + pot_[arc_to_[a]];
  }
  size_t price_block();
  size_t price_bland();
  void pivot(size_t entering);
  void rehang(int sub_root, int new_parent, size_t entering_arc, int64_t pot_shift);
  void detach(int node);
  void attach(int node, int parent);

  size_t n1_ = 0, n2_ = 0;
  size_t artificial_count_ = 0;
  int root_ = 0;
  std::vector<double> balance_;  // +supply for sources, -demand for sinks

  std::vector<uint32_t> arc_from_;
  std::vector<uint32_t> arc_to_;
  std::vector<int64_t> cost_;
  std::vector<double> flow_;
  std::vector<uint8_t> state_;

  std::vector<int32_t> parent_;
  std::vector<int32_t> pred_arc_;
  std::vector<int32_t> first_child_;
  std::vector<int32_t> next_sib_;
  std::vector<int32_t> prev_sib_;
  std::vector<int32_t> depth_;
  std::vector<int64_t> pot_;

  uint64_t pivots_ = 0;
  size_t price_cursor_ = 0;
  bool bland_mode_ = false;
  double max_artificial_flow_ = 0.0;

  // Scratch buffers for the pivot cycle walk.
  std::vector<size_t> cycle_arcs_;
  std::vector<int8_t> cycle_dirs_;
};

}  // namespace otlab
