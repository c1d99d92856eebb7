// Copyright 2026 The ldphist Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Randomness plumbing: the generator type used throughout the library, a
// portable uniform-double transform, and deterministic seed derivation for
// experiment streams.
//
// std::uniform_real_distribution is not used anywhere because its output is
// implementation-defined; every transform below is fixed so that streams are
// reproducible across standard libraries.

#ifndef LDPHIST_RANDOM_H_
#define LDPHIST_RANDOM_H_

#include <cstdint>
#include <limits>
#include <random>

namespace ldphist {

using Rng = std::mt19937_64;

template <typename URBG>
concept Full64BitGenerator =
    std::uniform_random_bit_generator<URBG> && (URBG::min() == 0) &&
    (URBG::max() == std::numeric_limits<std::uint64_t>::max());

// Uniform double in the open interval (0, 1): the top 52 bits of one draw,
// offset by half a grid step. Every value (k + 1/2) 2^-52 is exactly
// representable, so neither endpoint can occur.
template <Full64BitGenerator URBG>
inline double UniformOpen01(URBG& rng) {
  return (static_cast<double>(rng() >> 12) + 0.5) * 0x1.0p-52;
}

// Uniform double in [lo, hi).
template <Full64BitGenerator URBG>
inline double UniformIn(URBG& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Labels distinguishing independent streams that belong to one replication.
enum class StreamRole : std::uint64_t {
  kData = 0,
  kPrivatize = 1,
  kProbe = 2,
};

namespace internal {

// splitmix64 finaliser; a bijection on 64-bit words.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace internal

// Derives the seed of one randomness stream from the experiment's master seed
// and its coordinates. The chain is
//   s0 = Mix64(master), s1 = Mix64(s0 ^ n), s2 = Mix64(s1 ^ rep),
//   seed = Mix64(s2 ^ role)
// and is part of the reproducibility contract: do not change it.
constexpr std::uint64_t SeedDerive(std::uint64_t master_seed, std::uint64_t n,
                                   std::uint64_t rep_index,
                                   StreamRole role) {
  std::uint64_t s = internal::Mix64(master_seed);
  s = internal::Mix64(s ^ n);
  s = internal::Mix64(s ^ rep_index);
  return internal::Mix64(s ^ static_cast<std::uint64_t>(role));
}

}  // namespace ldphist

#endif  // LDPHIST_RANDOM_H_
