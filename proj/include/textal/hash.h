// Copyright 2026 The Authors.
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

// Stable hashing and seeded randomness.
//
// Everything that feeds persisted state or mock model outputs goes through
// these helpers instead of std::hash or std::*_distribution, whose results are
// implementation-defined. std::mt19937_64 itself is fully specified.

#ifndef TEXTAL_HASH_H_
#define TEXTAL_HASH_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace textal {

// 64-bit FNV-1a.
constexpr uint64_t Fnv1a64(std::string_view bytes,
                           uint64_t basis = 0xcbf29ce484222325ULL) {
  uint64_t h = basis;
  for (char c : bytes) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Hash of `text` followed by the decimal rendering of `seed`.
inline uint64_t HashWithSeed(std::string_view text, uint64_t seed) {
  return Fnv1a64(std::to_string(seed), Fnv1a64(text));
}

// splitmix64 finalizer; used to combine and whiten hash values.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t HashCombine(uint64_t a, uint64_t b) {
  return Mix64(a ^ Mix64(b));
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double UnitInterval(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Unbiased draw from [0, n) by rejection. n must be positive.
uint64_t UniformIndex(std::mt19937_64& rng, uint64_t n);

// Fisher-Yates shuffle driven by mt19937_64(seed); identical on every
// platform.
template <typename T>
void SeededShuffle(std::vector<T>& items, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(UniformIndex(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace textal

#endif  // TEXTAL_HASH_H_
