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
#include <unordered_map>
#include <vector>

#include "measure.hpp"
#include "space.hpp"

namespace otlab {

// Nested partition hierarchy with refinement ratio delta = 1/base per level.
// Level-k cells have diameter at most delta^k; level k+1 refines level k.
// Implementations only need to answer "which cell chain contains x", which
// is all histogramming and the multiscale transport machinery consume.
class DyadicPartition {
 public:
  virtual ~DyadicPartition() = default;

  virtual int dim() const = 0;
  virtual int depth() const = 0;
  virtual double delta() const = 0;

  // Writes the containing cell key for levels 1..depth (depth entries).
  // Throws InputError when x falls outside the partitioned region.
  virtual void cell_path(const double* x, uint64_t* keys_out) const = 0;

  // Upper bound on the diameter of a level's cells (<= delta^level).
  virtual double level_diameter_bound(int level) const = 0;
};

// Implicit grid of half-open cubes of side base^-k, closed at the upper
// ambient boundary so coordinate 1 still lands in a cell.
class StandardPartition final : public DyadicPartition {
 public:
  int dim() const override { return dim_; }
  int depth() const override { return depth_; }
  double delta() const override { return 1.0 / double(base_); }
  int base() const { return base_; }

  void cell_path(const double* x, uint64_t* keys_out) const override;
  double level_diameter_bound(int level) const override;

  // Cell key at one level; key packs per-axis indices with stride base^level.
  uint64_t locate(const double* x, int level) const;
  uint64_t parent_key(int level, uint64_t key) const;
  uint64_t level_cell_count(int level) const;  // base^(dim * level)

  // Center coordinates of a cell, for exports and plan inspection.
  void cell_center(int level, uint64_t key, double* out) const;

 private:
  friend StandardPartition standard_cube_partition(const GroundSpace&, int, int);
  int dim_ = 1;
  int base_ = 3;
  int depth_ = 1;
  std::vector<uint64_t> strides_;  // base^level for level = 0..depth
};

// Grid partition with base 2 or 3. Throws ConfigError when the cell keys
// would not be representable (dim * depth too deep for 64-bit packing).
StandardPartition standard_cube_partition(const GroundSpace& space, int base,
                                          int depth);

// Closed metric ball given by center and diameter.
struct CoveringBall {
  std::vector<double> center;
  double diameter = 0.0;
};

// Partition built from per-level ball coverings of a finite point set S.
// Deepest-level cells are unions of tiny grid boxes (side 3^-(depth+1))
// assigned to the first ball that touches them; each coarser level merges
// the not-yet-claimed finer cells touching its balls, in ball order, and
// promotes untouched leftovers unchanged. The construction guarantees
//   - level-k cells have diameter at most 3^-k,
//   - cells refine across levels with recorded parents,
//   - at most (size of the level-k covering) cells meet S at level k.
class CoveringPartition final : public DyadicPartition {
 public:
  struct Cell {
    int parent = -1;            // index into the previous (coarser) level
    double diameter_bound = 0;  // recorded bound, <= 3^-level
    std::vector<int> children;  // indices into the next (finer) level
    std::vector<uint64_t> boxes;  // deepest level only: member box codes
  };

  int dim() const override { return dim_; }
  int depth() const override { return depth_; }
  double delta() const override { return 1.0 / 3.0; }

  void cell_path(const double* x, uint64_t* keys_out) const override;
  double level_diameter_bound(int level) const override;

  const std::vector<Cell>& level_cells(int level) const;

  // Index of the cell containing x at a level (InputError outside ambient).
  int locate_cell(const double* x, int level) const;

  // Number of cells per level that contain at least one of the given points.
  std::vector<uint64_t> cells_meeting(const double* points, size_t count) const;

 private:
  friend CoveringPartition partition_from_coverings(
      const GroundSpace&, const std::vector<double>&,
      const std::vector<std::vector<CoveringBall>>&);
  int dim_ = 1;
  int depth_ = 1;
  double grid_ = 1.0 / 9.0;  // deepest box side, 3^-(depth+1)
  uint64_t grid_cells_per_axis_ = 9;
  std::vector<std::vector<Cell>> levels_;       // levels_[k-1] = level k
  std::unordered_map<uint64_t, int> box_to_leaf_;
};

// Builds the covering-driven partition. coverings[k-1] lists the level-k
// balls; level-k balls must have diameter <= 3^-(k+1) and every covering
// must cover all of S (witness index reported otherwise).
CoveringPartition partition_from_coverings(
    const GroundSpace& space, const std::vector<double>& s_points,
    const std::vector<std::vector<CoveringBall>>& coverings);

// Sparse per-level cell masses of a measure under a partition.
// levels[k-1] maps level-k cell key -> mass.
struct CellHistogram {
  int depth = 0;
  double delta = 1.0 / 3.0;
  std::vector<std::unordered_map<uint64_t, double>> levels;

  const std::unordered_map<uint64_t, double>& level(int k) const {
    return levels.at(size_t(k) - 1);
  }
};

// Pre: every atom lies in the partitioned region (InputError otherwise).
CellHistogram histogram(const DyadicPartition& partition,
                        const DiscreteMeasure& measure);

}  // namespace otlab
