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
#include "rng.hpp"

namespace otlab {

// Prescribed approximation sequence delta_n = min(cap, c * n^alpha).
// Admissibility (checked on the dyadic grid n = 2^j):
//   (a) delta_n lies in (0,1) and is nonincreasing,
//   (b) delta_n >= 1/n for n >= 2,
//   (c) log n / (-log delta_n) is nondecreasing.
// (c) forces c <= 1 on the power-law branch and (b) pins c = 1 when
// alpha = -1; violations are reported by name.
struct MultiscaleDescriptor {
  double c = 1.0;
  double alpha = -1.0;
  double cap = 0.75;
  int depth = 8;  // construction truncation level K (levels 2..K carry cubes)

  double delta(uint64_t n) const;
};

// A self-refining measure on [0,1]^m whose best n-point approximation error
// tracks the prescribed sequence. Construction: N_k is the smallest power of
// two n with delta_n <= 2^-k; the splitting dimension m is log2 of the
// largest ratio N_{k+1}/N_k; level k of the binary-cube hierarchy carries
// N_{k-2} "live" cubes of equal mass, each live cube passing its mass to its
// first N_{k-1}/N_{k-2} children in a fixed corner order. Level 2 starts from
// the single cube [0, 1/4]^m.
class MultiscaleMeasure {
 public:
  int dim() const { return dim_; }
  int depth() const { return depth_; }
  Norm norm() const { return norm_; }

  // N_k for k in [0, depth + 4] (a little lookahead past the truncation,
  // used by the ladder diagnostics).
  const std::vector<uint64_t>& level_thresholds() const { return levels_n_; }

  uint64_t live_count(int level) const;

  // Codes of live cubes at a level in [2, depth]; a code packs the per-axis
  // cube indices with stride 2^level.
  const std::vector<uint64_t>& live_codes(int level) const;

  // Exact mass of the binary cube with the given code at a level in
  // [0, depth]. Cubes off the live tree have mass zero.
  double cell_mass(int level, uint64_t code) const;

  // Atomization at the truncation depth: one atom per deepest live cube at
  // its center, carrying the cube's exact mass. The gap to the un-truncated
  // measure is at most the deepest cell diameter 2^-depth.
  DiscreteMeasure deep_reference() const;

  // Draw n points: a uniform live deep cube, then a uniform point in it.
  DiscreteMeasure sample(size_t n, RngStream& rng) const;

  // Lower-left corner coordinate step at a level (2^-level).
  double cell_side(int level) const;

  // Per-axis index of the cube containing x at a level, packed as a code.
  uint64_t locate(const double* x, int level) const;

  GroundSpace space() const { return GroundSpace::make(dim_, norm_); }

 private:
  friend MultiscaleMeasure build_multiscale_measure(const MultiscaleDescriptor&,
                                                    Norm norm);
  int dim_ = 1;
  int depth_ = 2;
  Norm norm_ = Norm::kInf;
  std::vector<uint64_t> levels_n_;
  // live_[k - 2] holds the sorted live-cube codes of level k.
  std::vector<std::vector<uint64_t>> live_;
};

// Validates the descriptor (named condition violations become ConfigError),
// derives N_k and the splitting dimension, and materializes the live-cube
// hierarchy down to the truncation depth.
MultiscaleMeasure build_multiscale_measure(const MultiscaleDescriptor& desc,
                                           Norm norm = Norm::kInf);

// Oracle used by the builder and exposed for tests: smallest power of two n
// with delta_n <= 2^-k, scanning j = 0, 1, 2, ...
uint64_t smallest_dyadic_with_delta_below(const MultiscaleDescriptor& desc,
                                          int k);

}  // namespace otlab
