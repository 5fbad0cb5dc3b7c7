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

#include "partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace otlab {

namespace {

constexpr uint64_t kMaxClaimedBoxes = 1u << 22;

uint64_t checked_pow(uint64_t base, uint64_t exp, const char* what) {
  uint64_t out = 1;
  for (uint64_t i = 0; i < exp; ++i) {
    if (out > (uint64_t(1) << 62) / base) {
      throw ConfigError(std::string(what) + ": cell keys exceed 64-bit packing");
    }
    out *= base;
  }
  return out;
}

}  // namespace

StandardPartition standard_cube_partition(const GroundSpace& space, int base,
                                          int depth) {
  if (base != 2 && base != 3) {
    throw ConfigError("standard_cube_partition: base must be 2 or 3");
  }
  if (depth < 1) {
    throw ConfigError("standard_cube_partition: depth must be at least 1");
  }
  // Representability: (base^depth)^dim must fit the key type.
  const uint64_t stride = checked_pow(base, depth, "standard_cube_partition");
  checked_pow(stride, space.dim, "standard_cube_partition");

  StandardPartition part;
  part.dim_ = space.dim;
  part.base_ = base;
  part.depth_ = depth;
  part.strides_.resize(depth + 1);
  part.strides_[0] = 1;
  for (int k = 1; k <= depth; ++k) {
    part.strides_[k] = part.strides_[k - 1] * uint64_t(base);
  }
  return part;
}

double StandardPartition::level_diameter_bound(int level) const {
  return std::pow(delta(), level);
}

uint64_t StandardPartition::locate(const double* x, int level) const {
  const uint64_t stride = strides_.at(level);
  uint64_t key = 0;
  uint64_t axis_base = 1;
  for (int a = 0; a < dim_; ++a) {
    if (!(x[a] >= 0.0 && x[a] <= 1.0)) {
      throw InputError("partition: point outside [0,1]^dim");
    }
    int64_t idx = int64_t(x[a] * double(stride));
    if (idx >= int64_t(stride)) idx = int64_t(stride) - 1;
    if (idx < 0) idx = 0;
    key += uint64_t(idx) * axis_base;
    axis_base *= stride;
  }
  return key;
}

uint64_t StandardPartition::parent_key(int level, uint64_t key) const {
  if (level < 2) throw InputError("partition: level 1 cells have no stored parent");
  const uint64_t stride = strides_.at(level);
  const uint64_t parent_stride = strides_.at(level - 1);
  uint64_t parent = 0;
  uint64_t axis_base = 1;
  for (int a = 0; a < dim_; ++a) {
    const uint64_t idx = key % stride;
    key /= stride;
    parent += (idx / uint64_t(base_)) * axis_base;
    axis_base *= parent_stride;
  }
  return parent;
}

uint64_t StandardPartition::level_cell_count(int level) const {
  uint64_t out = 1;
  for (int a = 0; a < dim_; ++a) out *= strides_.at(level);
  return out;
}

void StandardPartition::cell_center(int level, uint64_t key, double* out) const {
  const uint64_t stride = strides_.at(level);
  const double side = 1.0 / double(stride);
  for (int a = 0; a < dim_; ++a) {
    const uint64_t idx = key % stride;
    key /= stride;
    out[a] = (double(idx) + 0.5) * side;
  }
}

void StandardPartition::cell_path(const double* x, uint64_t* keys_out) const {
  // Deepest indices once, parents by integer division, so the chain is
  // consistent even when x sits on a cell boundary.
  uint64_t idx[64];
  const uint64_t deep_stride = strides_[depth_];
  for (int a = 0; a < dim_; ++a) {
    if (!(x[a] >= 0.0 && x[a] <= 1.0)) {
      throw InputError("partition: point outside [0,1]^dim");
    }
    int64_t v = int64_t(x[a] * double(deep_stride));
    if (v >= int64_t(deep_stride)) v = int64_t(deep_stride) - 1;
    if (v < 0) v = 0;
    idx[a] = uint64_t(v);
  }
  for (int level = depth_; level >= 1; --level) {
    const uint64_t stride = strides_[level];
    uint64_t key = 0;
    uint64_t axis_base = 1;
    for (int a = 0; a < dim_; ++a) {
      key += idx[a] * axis_base;
      axis_base *= stride;
    }
    keys_out[level - 1] = key;
    for (int a = 0; a < dim_; ++a) idx[a] /= uint64_t(base_);
  }
}

namespace {

struct BBox {
  int64_t lo[64];
  int64_t hi[64];
};

// Closest-point test between a grid box and a ball, exact for both norms.
bool box_touches_ball(const GroundSpace& space, const int64_t* box_idx,
                      double grid, const CoveringBall& ball) {
  const double rad = ball.diameter / 2.0 + 1e-12;
  if (space.norm == Norm::kInf) {
    for (int a = 0; a < space.dim; ++a) {
      const double lo = double(box_idx[a]) * grid;
      const double hi = lo + grid;
      const double c = ball.center[a];
      if (c + rad < lo || c - rad > hi) return false;
    }
    return true;
  }
  double closest[64];
  for (int a = 0; a < space.dim; ++a) {
    const double lo = double(box_idx[a]) * grid;
    const double hi = lo + grid;
    closest[a] = std::min(hi, std::max(lo, ball.center[a]));
  }
  return distance_unchecked(space, closest, ball.center.data()) <= rad;
}

}  // namespace

CoveringPartition partition_from_coverings(
    const GroundSpace& space, const std::vector<double>& s_points,
    const std::vector<std::vector<CoveringBall>>& coverings) {
  const int m = space.dim;
  const int kstar = int(coverings.size());
  if (kstar < 1) throw InputError("partition_from_coverings: at least one level required");
  if (s_points.empty() || s_points.size() % size_t(m) != 0) {
    throw InputError("partition_from_coverings: point array size must be a multiple of dim");
  }
  const size_t s_count = s_points.size() / size_t(m);

  for (int k = 1; k <= kstar; ++k) {
    const double max_diam = std::pow(3.0, -(k + 1));
    for (const CoveringBall& ball : coverings[k - 1]) {
      if (int(ball.center.size()) != m) {
        throw InputError("partition_from_coverings: ball center dimension mismatch");
      }
      validate_point(space, ball.center.data());
      if (!(ball.diameter >= 0.0) || ball.diameter > max_diam + 1e-12) {
        throw InputError("partition_from_coverings: level-" + std::to_string(k) +
                         " ball diameter exceeds 3^-(k+1)");
      }
    }
    // Every point of S must sit inside some level-k ball.
    for (size_t i = 0; i < s_count; ++i) {
      const double* pt = s_points.data() + i * size_t(m);
      bool covered = false;
      for (const CoveringBall& ball : coverings[k - 1]) {
        if (distance_unchecked(space, pt, ball.center.data()) <=
            ball.diameter / 2.0 + 1e-12) {
          covered = true;
          break;
        }
      }
      if (!covered) {
        throw InputError("partition_from_coverings: level-" + std::to_string(k) +
                         " covering misses point #" + std::to_string(i));
      }
    }
  }

  CoveringPartition part;
  part.dim_ = m;
  part.depth_ = kstar;
  const uint64_t grid_axis = checked_pow(3, uint64_t(kstar) + 1, "partition_from_coverings");
  checked_pow(grid_axis, uint64_t(m), "partition_from_coverings");
  part.grid_cells_per_axis_ = grid_axis;
  part.grid_ = std::pow(3.0, -(kstar + 1));
  part.levels_.resize(kstar);

  // Deepest level: boxes claimed by the first ball that touches them.
  std::vector<BBox> leaf_bbox;
  {
    std::vector<CoveringPartition::Cell>& cells = part.levels_[kstar - 1];
    for (const CoveringBall& ball : coverings[kstar - 1]) {
      CoveringPartition::Cell cell;
      BBox bbox;
      const double rad = ball.diameter / 2.0;
      int64_t lo[64], hi[64], cur[64];
      for (int a = 0; a < m; ++a) {
        lo[a] = std::max<int64_t>(0, int64_t((ball.center[a] - rad) / part.grid_));
        hi[a] = std::min<int64_t>(int64_t(grid_axis) - 1,
                                  int64_t((ball.center[a] + rad) / part.grid_));
        cur[a] = lo[a];
        bbox.lo[a] = int64_t(grid_axis);
        bbox.hi[a] = -1;
      }
      for (;;) {
        if (box_touches_ball(space, cur, part.grid_, ball)) {
          uint64_t code = 0;
          uint64_t axis_base = 1;
          for (int a = 0; a < m; ++a) {
            code += uint64_t(cur[a]) * axis_base;
            axis_base *= grid_axis;
          }
          if (part.box_to_leaf_.find(code) == part.box_to_leaf_.end()) {
            part.box_to_leaf_[code] = int(cells.size());
            cell.boxes.push_back(code);
            for (int a = 0; a < m; ++a) {
              bbox.lo[a] = std::min(bbox.lo[a], cur[a]);
              bbox.hi[a] = std::max(bbox.hi[a], cur[a]);
            }
            if (part.box_to_leaf_.size() > kMaxClaimedBoxes) {
              throw CapacityError("partition_from_coverings: rasterized box cap exceeded");
            }
          }
        }
        int axis = 0;
        while (axis < m && ++cur[axis] > hi[axis]) {
          cur[axis] = lo[axis];
          ++axis;
        }
        if (axis == m) break;
      }
      if (!cell.boxes.empty()) {
        cells.push_back(std::move(cell));
        leaf_bbox.push_back(bbox);
      }
    }
    // Record diameter bounds from the exact bounding boxes.
    const double level_cap = std::pow(3.0, -kstar);
    for (size_t i = 0; i < cells.size(); ++i) {
      double extent[64];
      for (int a = 0; a < m; ++a) {
        extent[a] = double(leaf_bbox[i].hi[a] - leaf_bbox[i].lo[a] + 1) * part.grid_;
      }
      double diam;
      if (space.norm == Norm::kInf) {
        diam = *std::max_element(extent, extent + m);
      } else {
        double acc = 0;
        for (int a = 0; a < m; ++a) acc += extent[a] * extent[a];
        diam = std::sqrt(acc) / space.scale;
      }
      cells[i].diameter_bound = std::min(diam, level_cap);
    }
  }

  // Coarser levels: merge unclaimed finer cells touching each ball, in ball
  // order; leftovers are promoted unchanged so the partition stays exact.
  std::vector<BBox> finer_bbox = leaf_bbox;
  for (int level = kstar - 1; level >= 1; --level) {
    std::vector<CoveringPartition::Cell>& finer = part.levels_[level];
    std::vector<CoveringPartition::Cell>& cells = part.levels_[level - 1];
    std::vector<char> claimed(finer.size(), 0);
    std::vector<BBox> bboxes;

    auto finer_touches = [&](int fidx, const CoveringBall& ball) {
      // Quick reject on the bounding box, then exact test on member boxes.
      const BBox& bb = finer_bbox[fidx];
      const double rad = ball.diameter / 2.0 + 1e-12;
      for (int a = 0; a < m; ++a) {
        const double lo = double(bb.lo[a]) * part.grid_;
        const double hi = double(bb.hi[a] + 1) * part.grid_;
        if (ball.center[a] + rad < lo || ball.center[a] - rad > hi) return false;
      }
      // Walk down to the leaf boxes of this finer cell.
      std::vector<std::pair<int, int>> frontier = {{level + 1, fidx}};
      while (!frontier.empty()) {
        auto [lev, idx] = frontier.back();
        frontier.pop_back();
        const CoveringPartition::Cell& c = part.levels_[lev - 1][idx];
        if (lev == kstar) {
          for (uint64_t code : c.boxes) {
            int64_t box_idx[64];
            uint64_t rest = code;
            for (int a = 0; a < m; ++a) {
              box_idx[a] = int64_t(rest % grid_axis);
              rest /= grid_axis;
            }
            if (box_touches_ball(space, box_idx, part.grid_, ball)) return true;
          }
        } else {
          for (int child : c.children) frontier.push_back({lev + 1, child});
        }
      }
      return false;
    };

    for (const CoveringBall& ball : coverings[level - 1]) {
      CoveringPartition::Cell cell;
      BBox bbox;
      for (int a = 0; a < m; ++a) {
        bbox.lo[a] = int64_t(grid_axis);
        bbox.hi[a] = -1;
      }
      for (size_t f = 0; f < finer.size(); ++f) {
        if (claimed[f]) continue;
        if (!finer_touches(int(f), ball)) continue;
        claimed[f] = 1;
        cell.children.push_back(int(f));
        for (int a = 0; a < m; ++a) {
          bbox.lo[a] = std::min(bbox.lo[a], finer_bbox[f].lo[a]);
          bbox.hi[a] = std::max(bbox.hi[a], finer_bbox[f].hi[a]);
        }
      }
      if (!cell.children.empty()) {
        cells.push_back(std::move(cell));
        bboxes.push_back(bbox);
      }
    }
    for (size_t f = 0; f < finer.size(); ++f) {
      if (claimed[f]) continue;
      CoveringPartition::Cell cell;
      cell.children.push_back(int(f));
      cells.push_back(std::move(cell));
      bboxes.push_back(finer_bbox[f]);
    }
    const double level_cap = std::pow(3.0, -level);
    for (size_t i = 0; i < cells.size(); ++i) {
      double extent[64];
      for (int a = 0; a < m; ++a) {
        extent[a] = double(bboxes[i].hi[a] - bboxes[i].lo[a] + 1) * part.grid_;
      }
      double diam;
      if (space.norm == Norm::kInf) {
        diam = *std::max_element(extent, extent + m);
      } else {
        double acc = 0;
        for (int a = 0; a < m; ++a) acc += extent[a] * extent[a];
        diam = std::sqrt(acc) / space.scale;
      }
      cells[i].diameter_bound = std::min(diam, level_cap);
      for (int child : cells[i].children) {
        part.levels_[level][child].parent = int(i);
      }
    }
    finer_bbox = bboxes;
  }
  return part;
}

double CoveringPartition::level_diameter_bound(int level) const {
  double best = 0.0;
  for (const Cell& c : levels_.at(size_t(level) - 1)) {
    best = std::max(best, c.diameter_bound);
  }
  return best;
}

const std::vector<CoveringPartition::Cell>& CoveringPartition::level_cells(
    int level) const {
  return levels_.at(size_t(level) - 1);
}

int CoveringPartition::locate_cell(const double* x, int level) const {
  uint64_t code = 0;
  uint64_t axis_base = 1;
  for (int a = 0; a < dim_; ++a) {
    if (!(x[a] >= 0.0 && x[a] <= 1.0)) {
      throw InputError("partition: point outside [0,1]^dim");
    }
    int64_t idx = int64_t(x[a] / grid_);
    if (idx >= int64_t(grid_cells_per_axis_)) idx = int64_t(grid_cells_per_axis_) - 1;
    if (idx < 0) idx = 0;
    code += uint64_t(idx) * axis_base;
    axis_base *= grid_cells_per_axis_;
  }
  auto it = box_to_leaf_.find(code);
  if (it == box_to_leaf_.end()) {
    throw InputError("partition: point outside the covered region");
  }
  int idx = it->second;
  for (int lev = depth_; lev > level; --lev) {
    idx = levels_[lev - 1][idx].parent;
    if (idx < 0) throw InternalError("partition: broken parent chain");
  }
  return idx;
}

void CoveringPartition::cell_path(const double* x, uint64_t* keys_out) const {
  int idx = locate_cell(x, depth_);
  keys_out[depth_ - 1] = uint64_t(idx);
  for (int lev = depth_; lev > 1; --lev) {
    idx = levels_[lev - 1][idx].parent;
    if (idx < 0) throw InternalError("partition: broken parent chain");
    keys_out[lev - 2] = uint64_t(idx);
  }
}

std::vector<uint64_t> CoveringPartition::cells_meeting(const double* points,
                                                       size_t count) const {
  std::vector<std::vector<char>> seen(depth_);
  for (int k = 1; k <= depth_; ++k) seen[k - 1].assign(levels_[k - 1].size(), 0);
  std::vector<uint64_t> keys(depth_);
  for (size_t i = 0; i < count; ++i) {
    cell_path(points + i * size_t(dim_), keys.data());
    for (int k = 1; k <= depth_; ++k) seen[k - 1][keys[k - 1]] = 1;
  }
  std::vector<uint64_t> counts(depth_);
  for (int k = 1; k <= depth_; ++k) {
    counts[k - 1] = uint64_t(std::count(seen[k - 1].begin(), seen[k - 1].end(), 1));
  }
  return counts;
}

CellHistogram histogram(const DyadicPartition& partition,
                        const DiscreteMeasure& measure) {
  if (measure.dim != partition.dim()) {
    throw InputError("histogram: measure dimension does not match partition");
  }
  CellHistogram hist;
  hist.depth = partition.depth();
  hist.delta = partition.delta();
  hist.levels.resize(hist.depth);
  std::vector<uint64_t> keys(hist.depth);
  for (size_t i = 0; i < measure.size(); ++i) {
    partition.cell_path(measure.atom(i), keys.data());
    const double w = measure.weights[i];
    for (int k = 1; k <= hist.depth; ++k) {
      hist.levels[k - 1][keys[k - 1]] += w;
    }
  }
  return hist;
}

}  // namespace otlab
