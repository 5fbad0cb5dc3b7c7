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

#include <nlohmann/json_fwd.hpp>

#include "rng.hpp"
#include "space.hpp"

namespace otlab {

// Finitely supported probability measure on [0,1]^dim. Atoms are stored
// row-major; weights are nonnegative and sum to 1 within 1e-12.
struct DiscreteMeasure {
  int dim = 1;
  std::vector<double> atoms;    // size() * dim entries
  std::vector<double> weights;  // size() entries

  size_t size() const { return weights.size(); }
  const double* atom(size_t i) const { return atoms.data() + i * size_t(dim); }

  // Validates shapes, coordinate ranges and the weight budget.
  static DiscreteMeasure create(int dim, std::vector<double> atoms,
                                std::vector<double> weights);
  // Equal weights 1/n on the given atoms.
  static DiscreteMeasure uniform_on(int dim, std::vector<double> atoms);
};

// Sampling-law description. The JSON form (see from_json) is the interchange
// format used by configs and by the C API.
struct GeneratorSpec {
  enum class Kind {
    kUniformCube,
    kDiracMix,
    kClusterable,
    kGaussianMixture,
    kCantorSelfSimilar,
    kMultiscale,
  };

  Kind kind = Kind::kUniformCube;
  int dim = 1;
  Norm norm = Norm::kInf;
  uint64_t default_seed = 0;

  // dirac_mix / clusterable / gaussian_mixture: explicit component centers
  // (row-major) with optional weights; or auto-generated centers.
  std::vector<double> centers;
  std::vector<double> center_weights;
  int num_centers = 0;
  uint64_t center_seed = 0;

  double delta = 0.0;  // clusterable: ball radius around each center
  double sigma = 0.0;  // gaussian_mixture: per-coordinate std deviation

  // cantor_self_similar: iterated-function-system parameters. Each
  // coordinate independently follows the same contraction family, so the
  // attractor is a product set with similarity dimension
  // dim * log(branches) / log(1/ratio).
  double ratio = 1.0 / 3.0;
  int branches = 2;

  // multiscale: target approximation sequence delta_n = min(cap, c * n^alpha)
  // and construction depth.
  double ms_c = 1.0;
  double ms_alpha = -1.0;
  double ms_cap = 0.75;
  int ms_depth = 8;

  static GeneratorSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  GroundSpace space() const { return GroundSpace::make(dim, norm); }

  // Reference dimension when analytically known; used by the ladder reports.
  // Returns a negative value when no clean reference exists.
  double analytic_dimension() const;

  // Resolved component centers (explicit list, or generated from
  // center_seed). Validated against the cube and the component geometry.
  std::vector<double> resolved_centers() const;
  std::vector<double> resolved_center_weights(size_t count) const;

  std::string kind_name() const;
};

struct SampleMetadata {
  uint64_t clamped_coordinates = 0;  // gaussian samples pulled back to the cube
};

// Draws n i.i.d. atoms with equal weights. Identical (spec, n, seed) calls
// reproduce the same atom list bit-for-bit.
DiscreteMeasure sample_empirical(const GeneratorSpec& spec, size_t n,
                                 uint64_t seed, SampleMetadata* meta = nullptr);

// As above, but drawing from a caller-owned stream (the harness splits one
// stream per replicate).
DiscreteMeasure sample_empirical_stream(const GeneratorSpec& spec, size_t n,
                                        RngStream& rng,
                                        SampleMetadata* meta = nullptr);

// Monte Carlo estimate of the mass the law puts within distance eps of the
// finite set S (the eps-fattening of S). Returns the hit fraction.
double fattening_mass(const GeneratorSpec& spec, const double* set_points,
                      size_t set_count, double eps, size_t samples,
                      uint64_t seed);

}  // namespace otlab
