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

#include "dimension.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_set>

#include "errors.hpp"

namespace otlab {

namespace {

constexpr double kTol = 1e-12;
constexpr size_t kExactAtomCap = 20;
constexpr uint64_t kSearchBudget = 5'000'000;

struct Support {
  std::vector<const double*> pts;
  std::vector<double> w;
  double total = 0.0;
};

Support collect_support(const DiscreteMeasure& m) {
  Support s;
  for (size_t i = 0; i < m.size(); ++i) {
    if (m.weights[i] > 0.0) {
      s.pts.push_back(m.atom(i));
      s.w.push_back(m.weights[i]);
      s.total += m.weights[i];
    }
  }
  return s;
}

double mask_mass(uint32_t mask, const std::vector<double>& w) {
  double acc = 0.0;
  while (mask) {
    const int b = std::countr_zero(mask);
    acc += w[b];
    mask &= mask - 1;
  }
  return acc;
}

// Coverage masks of balls of radius eps/2 centered on the atoms.
std::vector<uint32_t> centered_masks(const GroundSpace& space, const Support& s,
                                     double eps) {
  const size_t n = s.pts.size();
  std::vector<uint32_t> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (distance_unchecked(space, s.pts[i], s.pts[j]) <= eps / 2.0 + kTol) {
        out[i] |= uint32_t(1) << j;
      }
    }
  }
  return out;
}

// Coverage masks of all canonically placed cubes of side eps: a cube in a
// minimum cover can be slid until each lower face touches a covered atom, so
// corners drawn from atom coordinates are enough.
std::vector<uint32_t> canonical_cube_masks(const GroundSpace& space,
                                           const Support& s, double eps) {
  const size_t n = s.pts.size();
  std::vector<uint32_t> masks = {~uint32_t(0) >> (32 - n)};
  for (int a = 0; a < space.dim; ++a) {
    std::vector<uint32_t> axis;
    for (size_t i = 0; i < n; ++i) {
      const double lo = s.pts[i][a];
      uint32_t m = 0;
      for (size_t j = 0; j < n; ++j) {
        if (s.pts[j][a] >= lo - kTol && s.pts[j][a] <= lo + eps + kTol) {
          m |= uint32_t(1) << j;
        }
      }
      axis.push_back(m);
    }
    std::unordered_set<uint32_t> next;
    for (uint32_t m1 : masks) {
      for (uint32_t m2 : axis) {
        const uint32_t m = m1 & m2;
        if (m) next.insert(m);
      }
    }
    masks.assign(next.begin(), next.end());
    if (masks.size() > (size_t(1) << 21)) {
      throw CapacityError("exact covering: candidate cube explosion");
    }
  }
  return masks;
}

uint64_t exact_full_cover(size_t n, const std::vector<uint32_t>& candidates) {
  const uint32_t full = ~uint32_t(0) >> (32 - n);

  // Greedy pass for an upper bound.
  uint64_t best;
  {
    uint32_t covered = 0;
    uint64_t used = 0;
    while (covered != full) {
      uint32_t pick = 0;
      int gain = -1;
      for (uint32_t c : candidates) {
        const int g = std::popcount(c & ~covered);
        if (g > gain) {
          gain = g;
          pick = c;
        }
      }
      if (gain <= 0) throw InternalError("exact covering: atom left uncoverable");
      covered |= pick;
      ++used;
    }
    best = used;
  }

  int max_size = 1;
  for (uint32_t c : candidates) max_size = std::max(max_size, std::popcount(c));

  uint64_t nodes = 0;
  std::function<void(uint32_t, uint64_t)> dfs = [&](uint32_t covered,
                                                    uint64_t used) {
    if (covered == full) {
      best = std::min(best, used);
      return;
    }
    if (++nodes > kSearchBudget) {
      throw CapacityError("exact covering: search budget exceeded");
    }
    const uint32_t uncovered = full & ~covered;
    const uint64_t lb =
        used + uint64_t((std::popcount(uncovered) + max_size - 1) / max_size);
    if (lb >= best) return;
    // Branch on the uncovered atom with the fewest candidate sets.
    int pick = -1;
    int fewest = std::numeric_limits<int>::max();
    for (int e = 0; e < int(n); ++e) {
      if (!(uncovered >> e & 1)) continue;
      int cnt = 0;
      for (uint32_t c : candidates) {
        if (c >> e & 1) ++cnt;
      }
      if (cnt < fewest) {
        fewest = cnt;
        pick = e;
      }
    }
    std::vector<uint32_t> covering;
    for (uint32_t c : candidates) {
      if (c >> pick & 1) covering.push_back(c);
    }
    std::sort(covering.begin(), covering.end(), [&](uint32_t a, uint32_t b) {
      return std::popcount(a & uncovered) > std::popcount(b & uncovered);
    });
    for (uint32_t c : covering) dfs(covered | c, used + 1);
  };
  dfs(0, 0);
  return best;
}

uint64_t exact_mass_cover(const Support& s, const std::vector<uint32_t>& raw,
                          double target) {
  if (target <= kTol) return 0;
  std::vector<std::pair<double, uint32_t>> cands;
  for (uint32_t c : raw) cands.push_back({mask_mass(c, s.w), c});
  std::sort(cands.begin(), cands.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  // Greedy upper bound on the count.
  uint64_t best = 0;
  {
    uint32_t covered = 0;
    double mass = 0.0;
    while (mass < target - kTol) {
      double gain = -1.0;
      uint32_t pick = 0;
      for (const auto& [mw, c] : cands) {
        const double g = mask_mass(c & ~covered, s.w);
        if (g > gain) {
          gain = g;
          pick = c;
        }
      }
      if (gain <= 0.0) {
        throw InternalError("exact covering: mass target unreachable");
      }
      covered |= pick;
      mass += gain;
      ++best;
    }
  }

  std::vector<double> suffix_max(cands.size() + 1, 0.0);
  for (size_t i = cands.size(); i-- > 0;) {
    suffix_max[i] = std::max(suffix_max[i + 1], cands[i].first);
  }

  uint64_t nodes = 0;
  std::function<void(size_t, uint32_t, double, uint64_t)> dfs =
      [&](size_t idx, uint32_t covered, double mass, uint64_t used) {
        if (mass >= target - kTol) {
          best = std::min(best, used);
          return;
        }
        if (idx == cands.size()) return;
        if (++nodes > kSearchBudget) {
          throw CapacityError("exact covering: search budget exceeded");
        }
        const double deficit = target - mass;
        const double step = suffix_max[idx];
        if (step <= 0.0) return;
        const uint64_t lb = used + uint64_t(std::ceil(deficit / step - kTol));
        if (lb >= best) return;
        const double gain = mask_mass(cands[idx].second & ~covered, s.w);
        if (gain > 0.0) {
          dfs(idx + 1, covered | cands[idx].second, mass + gain, used + 1);
        }
        dfs(idx + 1, covered, mass, used);
      };
  dfs(0, 0, 0.0, 0);
  return best;
}

uint64_t greedy_mass_cover(const Support& s, const std::vector<uint32_t>& cands,
                           double target) {
  if (target <= kTol) return 0;
  uint32_t covered = 0;
  double mass = 0.0;
  uint64_t used = 0;
  while (mass < target - kTol) {
    double gain = -1.0;
    uint32_t pick = 0;
    for (uint32_t c : cands) {
      const double g = mask_mass(c & ~covered, s.w);
      if (g > gain) {
        gain = g;
        pick = c;
      }
    }
    if (gain <= 0.0) throw InternalError("greedy covering: no progress");
    covered |= pick;
    mass += gain;
    ++used;
  }
  return used;
}

uint64_t cell_proxy_cover(const GroundSpace& space, const Support& s,
                          double eps, double target) {
  if (target <= kTol) return 0;
  const double cells_per_axis = std::ceil(1.0 / eps - kTol);
  std::vector<std::pair<std::vector<int64_t>, double>> keyed;
  keyed.reserve(s.pts.size());
  for (size_t i = 0; i < s.pts.size(); ++i) {
    std::vector<int64_t> key(space.dim);
    for (int a = 0; a < space.dim; ++a) {
      int64_t idx = int64_t(s.pts[i][a] / eps);
      if (idx >= int64_t(cells_per_axis)) idx = int64_t(cells_per_axis) - 1;
      if (idx < 0) idx = 0;
      key[a] = idx;
    }
    keyed.push_back({std::move(key), s.w[i]});
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<double> cell_mass;
  for (size_t i = 0; i < keyed.size(); ++i) {
    if (i == 0 || keyed[i].first != keyed[i - 1].first) {
      cell_mass.push_back(keyed[i].second);
    } else {
      cell_mass.back() += keyed[i].second;
    }
  }
  std::sort(cell_mass.begin(), cell_mass.end(), std::greater<double>());
  double acc = 0.0;
  uint64_t used = 0;
  for (double mw : cell_mass) {
    acc += mw;
    ++used;
    if (acc >= target - kTol) return used;
  }
  throw InternalError("cell covering: mass target unreachable");
}

}  // namespace

CoverMode cover_mode_from_string(const std::string& name) {
  if (name == "exact") return CoverMode::kExact;
  if (name == "greedy") return CoverMode::kGreedy;
  if (name == "cell_proxy") return CoverMode::kCellProxy;
  throw ConfigError("unknown covering mode: " + name);
}

std::string cover_mode_to_string(CoverMode mode) {
  switch (mode) {
    case CoverMode::kExact:
      return "exact";
    case CoverMode::kGreedy:
      return "greedy";
    case CoverMode::kCellProxy:
      return "cell_proxy";
  }
  throw ConfigError("unknown covering mode");
}

CoveringResult mass_covering_number(const GroundSpace& space,
                                    const DiscreteMeasure& measure, double eps,
                                    double tau, CoverMode mode) {
  if (measure.dim != space.dim) {
    throw InputError("covering: measure dimension does not match the space");
  }
  if (!(eps > 0.0) || !(eps <= 1.0)) {
    throw InputError("covering: eps must lie in (0, 1]");
  }
  if (!(tau >= 0.0) || !(tau < 1.0)) {
    throw InputError("covering: tau must lie in [0, 1)");
  }
  const Support s = collect_support(measure);
  if (s.pts.empty()) throw InputError("covering: measure has no support");
  const double target = s.total * (1.0 - tau);

  CoveringResult out;
  out.mode = mode;
  switch (mode) {
    case CoverMode::kExact: {
      if (s.pts.size() > kExactAtomCap) {
        throw CapacityError("exact covering: at most 20 support atoms");
      }
      std::vector<uint32_t> cands;
      if (space.norm == Norm::kInf || space.dim == 1) {
        cands = canonical_cube_masks(space, s, eps);
      } else {
        cands = centered_masks(space, s, eps);
        out.data_centered = true;
      }
      out.count = tau == 0.0 ? exact_full_cover(s.pts.size(), cands)
                             : exact_mass_cover(s, cands, target);
      break;
    }
    case CoverMode::kGreedy: {
      if (s.pts.size() > 32) {
        // The mask machinery caps at 32 atoms; fall back to index sets.
        const size_t n = s.pts.size();
        std::vector<char> covered(n, 0);
        double mass = 0.0;
        uint64_t used = 0;
        while (mass < target - kTol) {
          size_t pick = n;
          double g_best = -1.0;
          for (size_t i = 0; i < n; ++i) {
            double g = 0.0;
            for (size_t j = 0; j < n; ++j) {
              if (!covered[j] &&
                  distance_unchecked(space, s.pts[i], s.pts[j]) <=
                      eps / 2.0 + kTol) {
                g += s.w[j];
              }
            }
            if (g > g_best) {
              g_best = g;
              pick = i;
            }
          }
          if (pick == n || g_best <= 0.0) {
            throw InternalError("greedy covering: no progress");
          }
          for (size_t j = 0; j < n; ++j) {
            if (!covered[j] &&
                distance_unchecked(space, s.pts[pick], s.pts[j]) <=
                    eps / 2.0 + kTol) {
              covered[j] = 1;
              mass += s.w[j];
            }
          }
          ++used;
        }
        out.count = used;
      } else {
        out.count = greedy_mass_cover(s, centered_masks(space, s, eps), target);
      }
      out.data_centered = true;
      break;
    }
    case CoverMode::kCellProxy:
      out.count = cell_proxy_cover(space, s, eps, target);
      break;
  }
  return out;
}

CoveringResult covering_number(const GroundSpace& space,
                               const DiscreteMeasure& measure, double eps,
                               CoverMode mode) {
  return mass_covering_number(space, measure, eps, 0.0, mode);
}

double dimension_at_scale(uint64_t count, double eps) {
  if (count == 0) throw InputError("dimension_at_scale: zero covering count");
  if (!(eps > 0.0) || !(eps < 1.0)) {
    throw InputError("dimension_at_scale: eps must lie in (0, 1)");
  }
  if (count == 1) return 0.0;
  return std::log(double(count)) / -std::log(eps);
}

double d_eps(const GroundSpace& space, const DiscreteMeasure& measure,
             double eps, double tau, CoverMode mode) {
  const CoveringResult r = mass_covering_number(space, measure, eps, tau, mode);
  return dimension_at_scale(std::max<uint64_t>(1, r.count), eps);
}

std::vector<double> scale_grid(int coarsest_level, int finest_level) {
  if (coarsest_level < 1 || finest_level < coarsest_level || finest_level > 30) {
    throw ConfigError("scale_grid: need 1 <= coarsest <= finest <= 30");
  }
  std::vector<double> grid;
  for (int j = coarsest_level; j <= finest_level; ++j) {
    grid.push_back(std::pow(3.0, -j));
  }
  return grid;
}

namespace {

std::vector<double> checked_grid(const std::vector<double>& grid, double max_eps) {
  if (grid.empty()) throw ConfigError("dimension grid is empty");
  std::vector<double> g = grid;
  std::sort(g.begin(), g.end(), std::greater<double>());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  for (double eps : g) {
    if (!(eps > 0.0) || eps > max_eps + kTol) {
      throw ConfigError("dimension grid entries must lie in (0, " +
                        std::to_string(max_eps) + "]");
    }
  }
  return g;
}

}  // namespace

DnResult compute_d_n(const GroundSpace& space, const DiscreteMeasure& measure,
                     double p, uint64_t n, const std::vector<double>& grid,
                     CoverMode mode) {
  validate_exponent(p);
  if (n < 1) throw InputError("compute_d_n: n must be positive");
  const std::vector<double> g = checked_grid(grid, 1.0 / 9.0);

  DnResult out;
  out.grid = g;
  out.sup_dim.resize(g.size());
  out.mass_term.resize(g.size());
  out.value = std::numeric_limits<double>::infinity();
  for (size_t o = 0; o < g.size(); ++o) {
    const double tau = std::pow(g[o], p);
    double sup = 0.0;
    for (size_t t = 0; t <= o; ++t) {
      sup = std::max(sup, d_eps(space, measure, g[t], tau, mode));
    }
    out.sup_dim[o] = sup;
    out.mass_term[o] = std::log(double(n)) / -std::log(g[o]);
    const double score = std::max(sup, out.mass_term[o]);
    if (score < out.value) {
      out.value = score;
      out.eps_star = g[o];
    }
  }
  return out;
}

MnResult compute_m_n(const GroundSpace& space, const DiscreteMeasure& measure,
                     double p, uint64_t n, const std::vector<double>& grid,
                     CoverMode mode) {
  validate_exponent(p);
  if (n < 1) throw InputError("compute_m_n: n must be positive");
  const std::vector<double> g = checked_grid(grid, 1.0);

  MnResult out;
  out.grid = g;
  out.cover_term.resize(g.size());
  out.sample_term.resize(g.size());
  out.value = std::numeric_limits<double>::infinity();
  for (size_t o = 0; o < g.size(); ++o) {
    const double tau = std::pow(g[o], p);
    const CoveringResult r = mass_covering_number(space, measure, g[o], tau, mode);
    out.cover_term[o] = double(r.count);
    out.sample_term[o] = double(n) * std::pow(g[o], 2.0 * p);
    const double score = std::max(out.cover_term[o], out.sample_term[o]);
    if (score < out.value) {
      out.value = score;
      out.eps_star = g[o];
    }
  }
  return out;
}

}  // namespace otlab
