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

#include "multiscale.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace otlab {

namespace {

constexpr int kConditionGridMaxJ = 40;      // conditions checked on n = 2^j, j <= 40
constexpr uint64_t kMaxLiveCubes = 1u << 22;  // memory guard for the hierarchy

}  // namespace

double MultiscaleDescriptor::delta(uint64_t n) const {
  const double power = c * std::pow(double(n), alpha);
  return std::min(cap, power);
}

uint64_t smallest_dyadic_with_delta_below(const MultiscaleDescriptor& desc,
                                          int k) {
  const double target = std::ldexp(1.0, -k);
  for (int j = 0; j <= 62; ++j) {
    const uint64_t n = 1ull << j;
    if (desc.delta(n) <= target) return n;
  }
  throw ConfigError("multiscale: delta_n never reaches 2^-" + std::to_string(k) +
                    " on the dyadic grid");
}

MultiscaleMeasure build_multiscale_measure(const MultiscaleDescriptor& desc,
                                           Norm norm) {
  if (!(desc.cap > 0.0 && desc.cap < 1.0)) {
    throw ConfigError("multiscale: cap must lie in (0,1)");
  }
  if (!(desc.c > 0.0)) throw ConfigError("multiscale: c must be positive");
  if (!(desc.alpha >= -1.0 && desc.alpha < 0.0)) {
    throw ConfigError("multiscale: alpha must lie in [-1, 0)");
  }
  if (desc.depth < 2 || desc.depth > 24) {
    throw ConfigError("multiscale: depth must lie in [2, 24]");
  }

  // Admissibility on the dyadic grid, each condition reported by name.
  double prev_delta = 1.0;
  double prev_ratio = 0.0;
  for (int j = 0; j <= kConditionGridMaxJ; ++j) {
    const uint64_t n = 1ull << j;
    const double d = desc.delta(n);
    if (!(d > 0.0 && d < 1.0)) {
      throw ConfigError("multiscale: condition 'delta in (0,1)' fails at n = 2^" +
                        std::to_string(j));
    }
    if (d > prev_delta + 1e-15) {
      throw ConfigError("multiscale: condition 'delta nonincreasing' fails at n = 2^" +
                        std::to_string(j));
    }
    if (n >= 2 && d * double(n) < 1.0 - 1e-12) {
      throw ConfigError("multiscale: condition 'delta_n >= 1/n' fails at n = 2^" +
                        std::to_string(j));
    }
    if (j >= 1) {
      const double ratio = std::log(double(n)) / -std::log(d);
      if (ratio < prev_ratio - 1e-12) {
        throw ConfigError(
            "multiscale: condition 'log n / -log delta nondecreasing' fails at n = 2^" +
            std::to_string(j));
      }
      prev_ratio = ratio;
    }
    prev_delta = d;
  }

  MultiscaleMeasure mu;
  mu.norm_ = norm;
  mu.depth_ = desc.depth;

  const int top_k = desc.depth + 4;
  mu.levels_n_.resize(top_k + 1);
  for (int k = 0; k <= top_k; ++k) {
    mu.levels_n_[k] = smallest_dyadic_with_delta_below(desc, k);
    if (k > 0 && mu.levels_n_[k] < mu.levels_n_[k - 1]) {
      throw InternalError("multiscale: N_k not nondecreasing");
    }
  }

  // Splitting dimension: log2 of the largest consecutive ratio. Ratios are
  // powers of two by construction.
  int m = 1;
  for (int k = 0; k + 1 <= top_k; ++k) {
    const uint64_t ratio = mu.levels_n_[k + 1] / mu.levels_n_[k];
    if (ratio * mu.levels_n_[k] != mu.levels_n_[k + 1]) {
      throw InternalError("multiscale: N_{k+1}/N_k not integral");
    }
    int bits = 0;
    while ((1ull << (bits + 1)) <= ratio) ++bits;
    if ((1ull << bits) != ratio) {
      throw InternalError("multiscale: N_{k+1}/N_k not a power of two");
    }
    m = std::max(m, bits);
  }
  mu.dim_ = m;

  if (uint64_t(m) * uint64_t(desc.depth) > 62) {
    throw ConfigError("multiscale: depth too large for derived dimension (code overflow)");
  }
  if (mu.levels_n_[desc.depth - 2] > kMaxLiveCubes) {
    throw ConfigError("multiscale: live-cube count at the truncation depth exceeds the cap");
  }

  // Build the live hierarchy. Level 2 is the single cube [0, 1/4]^m.
  mu.live_.resize(desc.depth - 1);
  mu.live_[0] = {0};
  for (int k = 2; k < desc.depth; ++k) {
    const uint64_t ratio = mu.levels_n_[k - 1] / mu.levels_n_[k - 2];
    const std::vector<uint64_t>& parents = mu.live_[k - 2];
    std::vector<uint64_t>& children = mu.live_[k - 1];
    children.reserve(parents.size() * ratio);
    const uint64_t parent_stride = 1ull << k;
    const uint64_t child_stride = 1ull << (k + 1);
    for (uint64_t pcode : parents) {
      for (uint64_t rank = 0; rank < ratio; ++rank) {
        // Child corner order: bit a of the rank is the offset on axis a.
        uint64_t ccode = 0;
        uint64_t rest = pcode;
        for (int a = 0; a < m; ++a) {
          const uint64_t pidx = rest % parent_stride;
          rest /= parent_stride;
          const uint64_t cidx = 2 * pidx + ((rank >> a) & 1u);
          uint64_t axis_base = 1;
          for (int b = 0; b < a; ++b) axis_base *= child_stride;
          ccode += cidx * axis_base;
        }
        children.push_back(ccode);
      }
    }
    std::sort(children.begin(), children.end());
  }
  return mu;
}

uint64_t MultiscaleMeasure::live_count(int level) const {
  if (level < 2 || level > depth_) {
    throw InputError("multiscale: live cubes exist at levels [2, depth]");
  }
  return levels_n_[level - 2];
}

const std::vector<uint64_t>& MultiscaleMeasure::live_codes(int level) const {
  if (level < 2 || level > depth_) {
    throw InputError("multiscale: live cubes exist at levels [2, depth]");
  }
  return live_[level - 2];
}

double MultiscaleMeasure::cell_side(int level) const {
  return std::ldexp(1.0, -level);
}

uint64_t MultiscaleMeasure::locate(const double* x, int level) const {
  const uint64_t stride = 1ull << level;
  uint64_t code = 0;
  uint64_t axis_base = 1;
  for (int a = 0; a < dim_; ++a) {
    double scaled = std::ldexp(x[a], level);
    int64_t idx = int64_t(scaled);
    if (idx >= int64_t(stride)) idx = int64_t(stride) - 1;  // 1.0 folds into the top cell
    if (idx < 0) idx = 0;
    code += uint64_t(idx) * axis_base;
    axis_base *= stride;
  }
  return code;
}

double MultiscaleMeasure::cell_mass(int level, uint64_t code) const {
  if (level < 0 || level > depth_) {
    throw InputError("multiscale: level out of range");
  }
  if (level >= 2) {
    const std::vector<uint64_t>& codes = live_[level - 2];
    const bool live = std::binary_search(codes.begin(), codes.end(), code);
    return live ? 1.0 / double(levels_n_[level - 2]) : 0.0;
  }
  // Levels 0 and 1 aggregate level-2 masses: a coarse cube holds a level-2
  // cube when the per-axis indices match after shifting.
  const int shift = 2 - level;
  const uint64_t coarse_stride = 1ull << level;
  const uint64_t fine_stride = 4;
  double total = 0.0;
  for (uint64_t fine : live_[0]) {
    uint64_t rest = fine;
    uint64_t coarse = 0;
    uint64_t axis_base = 1;
    for (int a = 0; a < dim_; ++a) {
      const uint64_t fidx = rest % fine_stride;
      rest /= fine_stride;
      coarse += (fidx >> shift) * axis_base;
      axis_base *= coarse_stride;
    }
    if (coarse == code) total += 1.0 / double(levels_n_[0]);
  }
  return total;
}

DiscreteMeasure MultiscaleMeasure::deep_reference() const {
  const std::vector<uint64_t>& codes = live_[depth_ - 2];
  const uint64_t stride = 1ull << depth_;
  const double side = cell_side(depth_);
  std::vector<double> atoms;
  atoms.reserve(codes.size() * dim_);
  for (uint64_t code : codes) {
    uint64_t rest = code;
    for (int a = 0; a < dim_; ++a) {
      const uint64_t idx = rest % stride;
      rest /= stride;
      atoms.push_back((double(idx) + 0.5) * side);
    }
  }
  std::vector<double> weights(codes.size(), 1.0 / double(codes.size()));
  return DiscreteMeasure::create(dim_, std::move(atoms), std::move(weights));
}

DiscreteMeasure MultiscaleMeasure::sample(size_t n, RngStream& rng) const {
  const std::vector<uint64_t>& codes = live_[depth_ - 2];
  const uint64_t stride = 1ull << depth_;
  const double side = cell_side(depth_);
  std::vector<double> atoms;
  atoms.reserve(n * dim_);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t code = codes[rng.uniform_below(codes.size())];
    uint64_t rest = code;
    for (int a = 0; a < dim_; ++a) {
      const uint64_t idx = rest % stride;
      rest /= stride;
      atoms.push_back((double(idx) + rng.uniform01()) * side);
    }
  }
  return DiscreteMeasure::uniform_on(dim_, std::move(atoms));
}

}  // namespace otlab
