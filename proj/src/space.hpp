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

#include <cmath>
#include <cstddef>
#include <string>

namespace otlab {

// Ground metric on the unit cube [0,1]^m. Both norms keep the cube at
// diameter exactly 1 (the sup norm natively; the Euclidean norm after
// division by sqrt(m)), which every transport bound in this library
// quietly relies on.
enum class Norm { kInf, kL2Scaled };

Norm norm_from_string(const std::string& name);
std::string norm_to_string(Norm norm);

struct GroundSpace {
  int dim = 1;
  Norm norm = Norm::kInf;
  double scale = 1.0;  // divisor applied to the raw norm (sqrt(dim) for kL2Scaled)

  static GroundSpace make(int dim, Norm norm = Norm::kInf);

  // Validated distance: checks coordinates lie in [0,1]^dim, throws
  // InputError otherwise. Hot paths use distance_unchecked below.
  double distance(const double* x, const double* y) const;
};

// Raw metric kernel with no validation; used inside solvers and samplers
// where inputs are known to be in range.
inline double distance_unchecked(const GroundSpace& space, const double* x,
                                 const double* y) {
  if (space.norm == Norm::kInf) {
    double best = 0.0;
    for (int a = 0; a < space.dim; ++a) {
      const double d = std::fabs(x[a] - y[a]);
      if (d > best) best = d;
    }
    return best;
  }
  double acc = 0.0;
  for (int a = 0; a < space.dim; ++a) {
    const double d = x[a] - y[a];
    acc += d * d;
  }
  return std::sqrt(acc) / space.scale;
}

// Distance raised to the transport exponent, with fast paths for the
// common p. p is validated once at the call sites that accept it.
inline double distance_pow(const GroundSpace& space, const double* x,
                           const double* y, double p) {
  const double d = distance_unchecked(space, x, y);
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

// Min distance from x to a finite point set (flat row-major array).
double distance_to_set(const GroundSpace& space, const double* x,
                       const double* points, size_t count);

void validate_point(const GroundSpace& space, const double* x);
void validate_exponent(double p);

}  // namespace otlab
