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

#include <cstdint>
#include <vector>

#include "measure.hpp"
#include "partition.hpp"
#include "space.hpp"

namespace otlab {

// Knobs for the exact solver. Distances are scaled to 64-bit integer costs,
// so "exact" means exact for the rounded costs; the reported value is then
// re-evaluated in doubles from the plan, leaving ~1e-10 of rounding slack.
struct SolverLimits {
  // Hard cap on candidate arcs held by the solver (memory guard).
  size_t max_candidate_arcs = 25'000'000;
  // Instances with at most this many source-sink pairs are solved with the
  // full arc set; larger ones go through pricing over a growing subset.
  size_t dense_threshold = size_t(1) << 22;
  // Neighbors seeded per source atom before the first restricted solve.
  int knn = 8;
  // Skip the dual-potential extraction (two dense conjugation passes) when
  // only the value and plan are needed.
  bool want_dual = true;
};

struct PlanEntry {
  uint32_t source = 0;
  uint32_t target = 0;
  double mass = 0.0;
};

struct SolveStats {
  uint64_t pivots = 0;
  uint64_t arcs_used = 0;
  int pricing_rounds = 0;
  double duality_gap = 0.0;
};

// Feasible dual pair for the p-th power cost, tightened by conjugation and
// shifted so max f = 1; both vectors then live in [0, 1].
struct DualPotential {
  std::vector<double> f;   // on the first measure's atoms
  std::vector<double> fc;  // on the second measure's atoms
  double objective = 0.0;  // sum w_i f_i - sum v_j fc_j
};

struct ExactResult {
  double value = 0.0;      // W_p
  double value_pow = 0.0;  // W_p^p
  std::vector<PlanEntry> plan;
  DualPotential dual;  // empty unless SolverLimits::want_dual
  SolveStats stats;
};

// Optimal transport between two discrete measures under D(x,y)^p cost.
ExactResult exact_wp(const GroundSpace& space, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu, double p,
                     const SolverLimits& limits = {});

// Reference implementation by permutation enumeration. Requires equal atom
// counts (at most 8) and uniform weights on both sides.
double brute_force_wp(const GroundSpace& space, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu, double p);

// g[j] = max_i (values[i] - D(from_i, to_j)^p).
std::vector<double> c_transform_max(const GroundSpace& space, double p,
                                    const std::vector<double>& values,
                                    const DiscreteMeasure& from,
                                    const DiscreteMeasure& to);

// f[i] = min_j (values[j] + D(from_i, to_j)^p).
std::vector<double> c_transform_min(const GroundSpace& space, double p,
                                    const std::vector<double>& values,
                                    const DiscreteMeasure& from,
                                    const DiscreteMeasure& to);

double plan_cost_pow(const GroundSpace& space, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu,
                     const std::vector<PlanEntry>& plan, double p);

// Largest absolute deviation between the plan's marginals and the two
// weight vectors.
double plan_marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const std::vector<PlanEntry>& plan);

// Cell-counting upper bound on W_p^p: the deepest level's diameter to the
// p-th power, plus one discrepancy term per level weighted by the parent
// level's diameter bound.
struct DyadicBound {
  double bound_pow = 0.0;
  double bound = 0.0;
  double residual_term = 0.0;
  std::vector<double> level_terms;  // level_terms[k-1] belongs to level k
};

DyadicBound dyadic_upper_bound(const DyadicPartition& partition,
                               const CellHistogram& mu_hist,
                               const CellHistogram& nu_hist, double p);

// Explicit coupling whose cost is within the cell-counting bound: mass that
// agrees within a cell descends to the children, the rest is matched inside
// the enclosing cell.
struct CouplingResult {
  std::vector<PlanEntry> entries;
  double cost_pow = 0.0;
};

CouplingResult dyadic_coupling(const DyadicPartition& partition,
                               const GroundSpace& space,
                               const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu, double p,
                               size_t max_entries = 10'000'000);

}  // namespace otlab
