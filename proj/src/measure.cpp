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

#include "measure.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "multiscale.hpp"

namespace otlab {

using nlohmann::json;

DiscreteMeasure DiscreteMeasure::create(int dim, std::vector<double> atoms,
                                        std::vector<double> weights) {
  if (dim < 1) throw InputError("measure: dimension must be positive");
  if (weights.empty()) throw InputError("measure: at least one atom required");
  if (atoms.size() != weights.size() * size_t(dim)) {
    throw InputError("measure: atom array size does not match weight count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InputError("measure: weights must be nonnegative");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw InputError("measure: weights must sum to 1 within 1e-12");
  }
  for (double c : atoms) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw InputError("measure: atom coordinate outside [0,1]");
    }
  }
  DiscreteMeasure m;
  m.dim = dim;
  m.atoms = std::move(atoms);
  m.weights = std::move(weights);
  return m;
}

DiscreteMeasure DiscreteMeasure::uniform_on(int dim, std::vector<double> atoms) {
  if (dim < 1 || atoms.empty() || atoms.size() % size_t(dim) != 0) {
    throw InputError("measure: atom array size must be a positive multiple of dim");
  }
  const size_t n = atoms.size() / size_t(dim);
  std::vector<double> weights(n, 1.0 / double(n));
  return create(dim, std::move(atoms), std::move(weights));
}

namespace {

const char* kind_names[] = {"uniform_cube",     "dirac_mix",
                            "clusterable",      "gaussian_mixture",
                            "cantor_self_similar", "multiscale_converse"};

GeneratorSpec::Kind kind_from_name(const std::string& name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kind_names[i]) return GeneratorSpec::Kind(i);
  }
  throw ConfigError("generator: unknown kind '" + name + "'");
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec.dim < 1 || spec.dim > 64) {
    throw ConfigError("generator: dimension must lie in [1, 64]");
  }
  switch (spec.kind) {
    case GeneratorSpec::Kind::kUniformCube:
      break;
    case GeneratorSpec::Kind::kDiracMix:
      if (spec.centers.empty() && spec.num_centers < 1) {
        throw ConfigError("dirac_mix: needs points or num_centers >= 1");
      }
      break;
    case GeneratorSpec::Kind::kClusterable:
      if (!(spec.delta > 0.0) || spec.delta >= 0.5) {
        throw ConfigError("clusterable: delta must lie in (0, 0.5)");
      }
      if (spec.centers.empty() && spec.num_centers < 1) {
        throw ConfigError("clusterable: needs centers or num_centers >= 1");
      }
      break;
    case GeneratorSpec::Kind::kGaussianMixture:
      if (!(spec.sigma > 0.0)) {
        throw ConfigError("gaussian_mixture: sigma must be positive");
      }
      if (spec.centers.empty() && spec.num_centers < 1) {
        throw ConfigError("gaussian_mixture: needs centers or num_centers >= 1");
      }
      break;
    case GeneratorSpec::Kind::kCantorSelfSimilar:
      if (spec.branches < 2 || spec.branches > 16) {
        throw ConfigError("cantor: branches must lie in [2, 16]");
      }
      if (!(spec.ratio > 0.0) || spec.ratio >= 1.0) {
        throw ConfigError("cantor: contraction ratio must lie in (0, 1)");
      }
      if (spec.ratio > 1.0 / double(spec.branches) + 1e-12) {
        throw ConfigError("cantor: ratio must not exceed 1/branches (branch images overlap)");
      }
      break;
    case GeneratorSpec::Kind::kMultiscale:
      // Full admissibility checks live in build_multiscale_measure.
      break;
  }
}

}  // namespace

std::string GeneratorSpec::kind_name() const { return kind_names[int(kind)]; }

GeneratorSpec GeneratorSpec::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("generator: JSON object expected");
  GeneratorSpec spec;
  try {
    spec.kind = kind_from_name(j.at("kind").get<std::string>());
    spec.dim = j.value("dimension", 1);
    spec.norm = norm_from_string(j.value("norm", std::string("ell_inf")));
    spec.default_seed = j.value("seed", uint64_t(0));
    if (j.contains("centers")) {
      for (const auto& row : j.at("centers")) {
        if (!row.is_array() || int(row.size()) != spec.dim) {
          throw ConfigError("generator: each center needs exactly 'dimension' coordinates");
        }
        for (const auto& v : row) spec.centers.push_back(v.get<double>());
      }
    }
    if (j.contains("center_weights")) {
      spec.center_weights = j.at("center_weights").get<std::vector<double>>();
    }
    spec.num_centers = j.value("num_centers", 0);
    spec.center_seed = j.value("center_seed", uint64_t(0));
    spec.delta = j.value("delta", 0.0);
    spec.sigma = j.value("sigma", 0.0);
    spec.ratio = j.value("ratio", 1.0 / 3.0);
    spec.branches = j.value("branches", 2);
    spec.ms_c = j.value("c", 1.0);
    spec.ms_alpha = j.value("alpha", -1.0);
    spec.ms_cap = j.value("cap", 0.75);
    spec.ms_depth = j.value("depth", 8);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator: malformed JSON (") + e.what() + ")");
  }
  validate_spec(spec);
  if (spec.kind == Kind::kMultiscale) {
    // Derive the cube dimension now so downstream shape checks see it.
    MultiscaleDescriptor desc{spec.ms_c, spec.ms_alpha, spec.ms_cap, spec.ms_depth};
    spec.dim = build_multiscale_measure(desc, spec.norm).dim();
  }
  return spec;
}

json GeneratorSpec::to_json() const {
  json j;
  j["kind"] = kind_name();
  j["dimension"] = dim;
  j["norm"] = norm_to_string(norm);
  if (default_seed != 0) j["seed"] = default_seed;
  if (!centers.empty()) {
    json rows = json::array();
    const size_t count = centers.size() / size_t(dim);
    for (size_t i = 0; i < count; ++i) {
      json row = json::array();
      for (int a = 0; a < dim; ++a) row.push_back(centers[i * dim + a]);
      rows.push_back(row);
    }
    j["centers"] = rows;
  }
  if (!center_weights.empty()) j["center_weights"] = center_weights;
  if (num_centers > 0) {
    j["num_centers"] = num_centers;
    j["center_seed"] = center_seed;
  }
  switch (kind) {
    case Kind::kClusterable:
      j["delta"] = delta;
      break;
    case Kind::kGaussianMixture:
      j["sigma"] = sigma;
      break;
    case Kind::kCantorSelfSimilar:
      j["ratio"] = ratio;
      j["branches"] = branches;
      break;
    case Kind::kMultiscale:
      j["c"] = ms_c;
      j["alpha"] = ms_alpha;
      j["cap"] = ms_cap;
      j["depth"] = ms_depth;
      break;
    default:
      break;
  }
  return j;
}

double GeneratorSpec::analytic_dimension() const {
  switch (kind) {
    case Kind::kUniformCube:
    case Kind::kClusterable:
    case Kind::kGaussianMixture:
      return double(dim);
    case Kind::kDiracMix:
      return 0.0;
    case Kind::kCantorSelfSimilar:
      return double(dim) * std::log(double(branches)) / std::log(1.0 / ratio);
    case Kind::kMultiscale:
      return std::min(double(dim), -1.0 / ms_alpha);
  }
  return -1.0;
}

std::vector<double> GeneratorSpec::resolved_centers() const {
  const double pad = (kind == Kind::kClusterable) ? delta : 0.0;
  std::vector<double> pts = centers;
  if (pts.empty()) {
    RngStream rng(center_seed, substream(kStreamCenters, 0, 0));
    pts.reserve(size_t(num_centers) * dim);
    for (int i = 0; i < num_centers; ++i) {
      for (int a = 0; a < dim; ++a) {
        pts.push_back(pad + (1.0 - 2.0 * pad) * rng.uniform01());
      }
    }
  }
  for (size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i] >= pad && pts[i] <= 1.0 - pad)) {
      throw ConfigError(kind_name() +
                        ": component center too close to the cube boundary");
    }
  }
  return pts;
}

std::vector<double> GeneratorSpec::resolved_center_weights(size_t count) const {
  if (center_weights.empty()) {
    return std::vector<double>(count, 1.0 / double(count));
  }
  if (center_weights.size() != count) {
    throw ConfigError(kind_name() + ": center_weights size mismatch");
  }
  double total = 0.0;
  for (double w : center_weights) {
    if (!(w >= 0.0)) throw ConfigError(kind_name() + ": negative center weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ConfigError(kind_name() + ": center weights must sum to 1");
  }
  return center_weights;
}

namespace {

// CDF inversion over component weights; stable order, single uniform draw.
size_t pick_component(const std::vector<double>& weights, RngStream& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

void sample_cantor_coordinate(const GeneratorSpec& spec, RngStream& rng,
                              double* out) {
  // Walk the contraction maps until the surviving cell is below 2^-40; the
  // emitted point sits in the truncated attractor, within 2^-40 of the
  // full one.
  const double gap = (spec.branches == 1)
                         ? 0.0
                         : (1.0 - spec.ratio) / double(spec.branches - 1);
  for (int a = 0; a < spec.dim; ++a) {
    double x = 0.0;
    double scale = 1.0;
    while (scale >= 0x1.0p-40) {
      const uint64_t branch = rng.uniform_below(uint64_t(spec.branches));
      x += scale * gap * double(branch);
      scale *= spec.ratio;
    }
    out[a] = std::min(1.0, std::max(0.0, x));
  }
}

}  // namespace

DiscreteMeasure sample_empirical_stream(const GeneratorSpec& spec, size_t n,
                                        RngStream& rng, SampleMetadata* meta) {
  if (n == 0) throw InputError("sample_empirical: n must be positive");
  validate_spec(spec);
  const int m = spec.dim;
  std::vector<double> atoms;
  atoms.reserve(n * size_t(m));

  switch (spec.kind) {
    case GeneratorSpec::Kind::kUniformCube: {
      for (size_t i = 0; i < n * size_t(m); ++i) atoms.push_back(rng.uniform01());
      break;
    }
    case GeneratorSpec::Kind::kDiracMix: {
      const std::vector<double> pts = spec.resolved_centers();
      const size_t count = pts.size() / size_t(m);
      const std::vector<double> w = spec.resolved_center_weights(count);
      for (size_t i = 0; i < n; ++i) {
        const size_t c = pick_component(w, rng);
        for (int a = 0; a < m; ++a) atoms.push_back(pts[c * m + a]);
      }
      break;
    }
    case GeneratorSpec::Kind::kClusterable: {
      const std::vector<double> pts = spec.resolved_centers();
      const size_t count = pts.size() / size_t(m);
      const std::vector<double> w = spec.resolved_center_weights(count);
      const GroundSpace space = spec.space();
      for (size_t i = 0; i < n; ++i) {
        const size_t c = pick_component(w, rng);
        const double* center = pts.data() + c * m;
        // Uniform in the delta-ball around the center. For the sup norm the
        // ball is the cube itself; for the scaled Euclidean norm, rejection
        // inside the bounding cube.
        double point[64];
        for (;;) {
          for (int a = 0; a < m; ++a) {
            point[a] = center[a] + spec.delta * (2.0 * rng.uniform01() - 1.0);
          }
          if (space.norm == Norm::kInf) break;
          if (distance_unchecked(space, point, center) <= spec.delta) break;
        }
        for (int a = 0; a < m; ++a) atoms.push_back(point[a]);
      }
      break;
    }
    case GeneratorSpec::Kind::kGaussianMixture: {
      const std::vector<double> pts = spec.resolved_centers();
      const size_t count = pts.size() / size_t(m);
      const std::vector<double> w = spec.resolved_center_weights(count);
      uint64_t clamped = 0;
      for (size_t i = 0; i < n; ++i) {
        const size_t c = pick_component(w, rng);
        for (int a = 0; a < m; ++a) {
          double v = pts[c * m + a] + spec.sigma * rng.normal();
          if (v < 0.0 || v > 1.0) {
            v = std::min(1.0, std::max(0.0, v));
            ++clamped;
          }
          atoms.push_back(v);
        }
      }
      if (meta) meta->clamped_coordinates += clamped;
      break;
    }
    case GeneratorSpec::Kind::kCantorSelfSimilar: {
      double point[64];
      for (size_t i = 0; i < n; ++i) {
        sample_cantor_coordinate(spec, rng, point);
        for (int a = 0; a < m; ++a) atoms.push_back(point[a]);
      }
      break;
    }
    case GeneratorSpec::Kind::kMultiscale: {
      MultiscaleDescriptor desc{spec.ms_c, spec.ms_alpha, spec.ms_cap,
                                spec.ms_depth};
      const MultiscaleMeasure mm = build_multiscale_measure(desc, spec.norm);
      return mm.sample(n, rng);
    }
  }
  return DiscreteMeasure::uniform_on(m, std::move(atoms));
}

DiscreteMeasure sample_empirical(const GeneratorSpec& spec, size_t n,
                                 uint64_t seed, SampleMetadata* meta) {
  RngStream rng(seed, 0);
  return sample_empirical_stream(spec, n, rng, meta);
}

double fattening_mass(const GeneratorSpec& spec, const double* set_points,
                      size_t set_count, double eps, size_t samples,
                      uint64_t seed) {
  if (samples == 0) throw InputError("fattening_mass: sample count must be positive");
  if (set_count == 0) throw InputError("fattening_mass: empty target set");
  if (!(eps >= 0.0)) throw InputError("fattening_mass: eps must be nonnegative");
  const GroundSpace space = spec.space();
  RngStream rng(seed, substream(kStreamMonteCarlo, 0, 0));
  const DiscreteMeasure draw = sample_empirical_stream(spec, samples, rng);
  size_t hits = 0;
  for (size_t i = 0; i < samples; ++i) {
    if (distance_to_set(space, draw.atom(i), set_points, set_count) <= eps) {
      ++hits;
    }
  }
  return double(hits) / double(samples);
}

}  // namespace otlab
