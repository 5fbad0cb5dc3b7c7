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

namespace otlab {

// Counter-based generator (Philox 4x32, 10 rounds). A (seed, stream) pair
// addresses an independent sequence, so replicated experiments can split
// streams by index instead of jumping a shared state. Equal inputs replay
// bit-for-bit, which is what the reproducibility contract of the whole
// harness rests on.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream);

  uint64_t next_u64();

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform01();

  // Standard normal via Box-Muller; deterministic (no rejection loop).
  double normal();

  // Uniform integer in [0, bound) for bound >= 1. Uses a fixed-point
  // multiply; the bias is below 2^-64 per draw, far under anything the
  // experiments can resolve.
  uint64_t uniform_below(uint64_t bound);

 private:
  void refill();

  uint32_t key_[2];
  uint32_t ctr_[4];
  uint32_t buf_[4];
  int buf_pos_;
  double cached_normal_;
  bool has_cached_normal_;
};

// Packs experiment coordinates into a collision-free stream id:
// purpose tag in the top bits, then two 24-bit indices. Arguments beyond
// the field widths throw, so distinct (purpose, a, b) triples can never
// alias each other.
uint64_t substream(uint64_t purpose, uint64_t a, uint64_t b);

// Stream purpose tags used by the experiment harness.
enum : uint64_t {
  kStreamReference = 1,
  kStreamReferenceReplica = 2,
  kStreamEmpirical = 3,
  kStreamBootstrap = 4,
  kStreamKmeans = 5,
  kStreamMonteCarlo = 6,
  kStreamCenters = 7,
};

}  // namespace otlab
