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
#include <string>
#include <vector>

#include "measure.hpp"
#include "space.hpp"

namespace otlab {

// How covering numbers are evaluated. Sets in the cover always have diameter
// eps: cubes of side eps, or balls of radius eps/2.
//
//  kExact      minimum cover, arbitrary centers; needs at most 20 support
//              atoms. For the scaled Euclidean norm in dimension >= 2 the
//              family is restricted to balls centered on atoms (reported via
//              CoveringResult::data_centered), which can overshoot by a
//              little but stays a valid cover.
//  kGreedy     largest-gain-first over balls centered on atoms.
//  kCellProxy  distinct grid cells of side eps (upper bound, very fast).
enum class CoverMode { kExact, kGreedy, kCellProxy };

CoverMode cover_mode_from_string(const std::string& name);
std::string cover_mode_to_string(CoverMode mode);

struct CoveringResult {
  uint64_t count = 0;
  CoverMode mode = CoverMode::kGreedy;
  bool data_centered = false;
};

// Fewest diameter-eps sets covering every atom with positive weight.
CoveringResult covering_number(const GroundSpace& space,
                               const DiscreteMeasure& measure, double eps,
                               CoverMode mode);

// Fewest diameter-eps sets holding at least 1 - tau of the mass.
CoveringResult mass_covering_number(const GroundSpace& space,
                                    const DiscreteMeasure& measure, double eps,
                                    double tau, CoverMode mode);

// log(count) / -log(eps); zero when count is 1.
double dimension_at_scale(uint64_t count, double eps);

double d_eps(const GroundSpace& space, const DiscreteMeasure& measure,
             double eps, double tau, CoverMode mode);

// Scales 3^-j for j in [coarsest_level, finest_level].
std::vector<double> scale_grid(int coarsest_level, int finest_level);

// Sample-size-adapted dimension: for each grid scale eps, take the largest
// d_eps' over grid scales eps' in [eps, 1/9] at mass cutoff eps^p, cap it
// with log n / -log eps, and keep the smallest such value over the grid.
struct DnResult {
  double value = 0.0;
  double eps_star = 0.0;
  std::vector<double> grid;       // descending
  std::vector<double> sup_dim;    // per grid entry
  std::vector<double> mass_term;  // log n / -log eps per grid entry
};

DnResult compute_d_n(const GroundSpace& space, const DiscreteMeasure& measure,
                     double p, uint64_t n, const std::vector<double>& grid,
                     CoverMode mode);

// Effective support size: for each grid scale eps, the larger of the mass
// covering number at cutoff eps^p and n * eps^(2p); minimized over the grid.
struct MnResult {
  double value = 0.0;
  double eps_star = 0.0;
  std::vector<double> grid;
  std::vector<double> cover_term;
  std::vector<double> sample_term;
};

MnResult compute_m_n(const GroundSpace& space, const DiscreteMeasure& measure,
                     double p, uint64_t n, const std::vector<double>& grid,
                     CoverMode mode);

}  // namespace otlab
