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

#include "rng.hpp"

#include <cmath>

#include "errors.hpp"

namespace otlab {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(uint32_t ctr[4], const uint32_t key[2]) {
  const uint64_t p0 = uint64_t(kPhiloxM0) * ctr[0];
  const uint64_t p1 = uint64_t(kPhiloxM1) * ctr[2];
  const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
  const uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
  const uint32_t n0 = hi1 ^ ctr[1] ^ key[0];
  const uint32_t n1 = lo1;
  const uint32_t n2 = hi0 ^ ctr[3] ^ key[1];
  const uint32_t n3 = lo0;
  ctr[0] = n0;
  ctr[1] = n1;
  ctr[2] = n2;
  ctr[3] = n3;
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream)
    : buf_pos_(4), cached_normal_(0.0), has_cached_normal_(false) {
  key_[0] = uint32_t(seed);
  key_[1] = uint32_t(seed >> 32);
  // Lanes 0-1 form the 64-bit draw counter, lanes 2-3 carry the stream id.
  ctr_[0] = 0;
  ctr_[1] = 0;
  ctr_[2] = uint32_t(stream);
  ctr_[3] = uint32_t(stream >> 32);
}

void RngStream::refill() {
  uint32_t block[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
  uint32_t key[2] = {key_[0], key_[1]};
  for (int round = 0; round < 10; ++round) {
    philox_round(block, key);
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  buf_[0] = block[0];
  buf_[1] = block[1];
  buf_[2] = block[2];
  buf_[3] = block[3];
  buf_pos_ = 0;
  if (++ctr_[0] == 0) ++ctr_[1];
}

uint64_t RngStream::next_u64() {
  if (buf_pos_ > 2) refill();
  const uint64_t lo = buf_[buf_pos_];
  const uint64_t hi = buf_[buf_pos_ + 1];
  buf_pos_ += 2;
  return lo | (hi << 32);
}

double RngStream::uniform01() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // 1 - u keeps the argument of log strictly positive.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

uint64_t RngStream::uniform_below(uint64_t bound) {
  if (bound == 0) throw InputError("uniform_below: bound must be positive");
  const unsigned __int128 wide = (unsigned __int128)next_u64() * bound;
  return uint64_t(wide >> 64);
}

uint64_t substream(uint64_t purpose, uint64_t a, uint64_t b) {
  if (purpose >= (1ull << 16) || a >= (1ull << 24) || b >= (1ull << 24)) {
    throw InputError("substream: index out of packing range");
  }
  return (purpose << 48) | (a << 24) | b;
}

}  // namespace otlab
