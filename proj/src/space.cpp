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

#include "space.hpp"

#include "errors.hpp"

namespace otlab {

Norm norm_from_string(const std::string& name) {
  if (name == "ell_inf") return Norm::kInf;
  if (name == "ell_2_scaled") return Norm::kL2Scaled;
  throw ConfigError("unknown norm '" + name + "' (expected ell_inf or ell_2_scaled)");
}

std::string norm_to_string(Norm norm) {
  return norm == Norm::kInf ? "ell_inf" : "ell_2_scaled";
}

GroundSpace GroundSpace::make(int dim, Norm norm) {
  if (dim < 1 || dim > 64) {
    throw ConfigError("ground space dimension must be in [1, 64]");
  }
  GroundSpace s;
  s.dim = dim;
  s.norm = norm;
  s.scale = (norm == Norm::kL2Scaled) ? std::sqrt(double(dim)) : 1.0;
  return s;
}

void validate_point(const GroundSpace& space, const double* x) {
  for (int a = 0; a < space.dim; ++a) {
    if (!(x[a] >= 0.0 && x[a] <= 1.0)) {
      throw InputError("point coordinate outside [0,1]");
    }
  }
}

void validate_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InputError("transport exponent p must be a finite real >= 1");
  }
}

double GroundSpace::distance(const double* x, const double* y) const {
  validate_point(*this, x);
  validate_point(*this, y);
  return distance_unchecked(*this, x, y);
}

double distance_to_set(const GroundSpace& space, const double* x,
                       const double* points, size_t count) {
  if (count == 0) throw InputError("distance_to_set: empty point set");
  double best = distance_unchecked(space, x, points);
  for (size_t i = 1; i < count; ++i) {
    const double d = distance_unchecked(space, x, points + i * space.dim);
    if (d < best) best = d;
  }
  return best;
}

}  // namespace otlab
