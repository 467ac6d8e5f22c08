// Copyright 2026 The memclock Authors. All Rights Reserved.
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

#ifndef MEMCLOCK_RNG_H_
#define MEMCLOCK_RNG_H_

#include <cstddef>
#include <cstdint>

namespace memclock {

// Counter-based generator. Draw number i of stream `seed` is
//
//   mix64(key + (i + 1) * kGamma),   key = mix64(seed ^ kSeedSalt)
//
// where mix64 is the SplitMix64 finalizer (shifts 30/27/31, multipliers
// 0xbf58476d1ce4e5b9 and 0x94d049bb133111eb) and kGamma = 0x9e3779b97f4a7c15.
// Only 64-bit integer arithmetic is involved, so streams are identical on
// every platform. Normals use the Box-Muller transform on consecutive pairs of
// uniforms; the sine branch is cached for the next call.
//
// Rng is single-owner and not thread-safe.
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x6d656d636c6f636bULL;  // "memclock"

  explicit Rng(std::uint64_t seed);

  // Stateless access to draw `counter` of stream `seed`.
  static std::uint64_t at(std::uint64_t seed, std::uint64_t counter);
  // Seed of an independent substream, e.g. one per optimizer step.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_zero();
  double normal();
  // Uniform integer in [0, n). Unbiased (modulo with rejection).
  std::size_t below(std::size_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace memclock

#endif  // MEMCLOCK_RNG_H_
