//
// Copyright 2026 The fairci Authors
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
//

#ifndef FAIRCI_RNG_HPP_
#define FAIRCI_RNG_HPP_

// Portable, seedable random streams. Results depend only on (seed, stream)
// and never on the platform's standard library, so simulation outputs are
// reproducible across compilers.
//
// Stream splitting: the generator for (seed, stream) is xoshiro256** whose
// four state words are the first four outputs of SplitMix64 started at
//   Mix64(seed) ^ Mix64(stream + 0x9E3779B97F4A7C15).

#include <cstdint>
#include <limits>

namespace fairci {

// SplitMix64 output finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t Next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return Mix64(state_);
  }

 private:
  std::uint64_t state_;
};

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) { Seed(SplitMix64(seed)); }

  static Xoshiro256 ForStream(std::uint64_t seed, std::uint64_t stream) {
    Xoshiro256 g(0);
    g.Seed(SplitMix64(Mix64(seed) ^ Mix64(stream + 0x9E3779B97F4A7C15ULL)));
    return g;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = Rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by multiply-shift; bound must be > 0.
  std::uint64_t Below(std::uint64_t bound) {
    __extension__ using Wide = unsigned __int128;
    return static_cast<std::uint64_t>((Wide{(*this)()} * bound) >> 64);
  }

 private:
  static constexpr std::uint64_t Rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  void Seed(SplitMix64 sm) {
    for (auto& w : s_) w = sm.Next();
  }

  std::uint64_t s_[4]{};
};

}  // namespace fairci

#endif  // FAIRCI_RNG_HPP_
