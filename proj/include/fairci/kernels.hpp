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

#ifndef FAIRCI_KERNELS_HPP_
#define FAIRCI_KERNELS_HPP_

// Data-parallel inner loops. Each kernel has a scalar reference in
// fairci::kernels::scalar and, on x86-64, an AVX2 variant in
// fairci::kernels::avx2. The unqualified entry points dispatch at runtime to
// the best variant the CPU supports. All kernels produce exact integer
// results, so every variant must agree bit for bit with the scalar one.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace fairci::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view IsaName(Isa isa);

// Whether the variant was compiled in and the running CPU supports it.
bool IsaAvailable(Isa isa);

// The variant the dispatching entry points use: an explicit override, else
// the FAIRCI_ISA environment variable ("scalar" or "avx2"), else the best
// available one.
Isa ActiveIsa();

// Pins dispatch to one variant (tests, benchmarks). std::nullopt restores
// automatic selection. Requesting an unavailable ISA throws
// Error(kInvalidArgument).
void SetIsaOverride(std::optional<Isa> isa);

using Histogram8 = std::array<std::uint64_t, 8>;
using Gram4 = std::array<std::array<std::uint64_t, 4>, 4>;
using BitPlanes4 = std::array<std::span<const std::uint64_t>, 4>;
using Cuts7 = std::array<double, 7>;

// counts[c & 7] += 1 for every code c.
void Tabulate(std::span<const std::uint8_t> codes, Histogram8& counts);

// gram[j][k] = popcount(planes[j] & planes[k]) summed over words. All planes
// must have the same length; bits past the record count must be zero.
Gram4 IndicatorGram(const BitPlanes4& planes);

// counts[b] += 1 for each u, where b = #{k : u >= cuts[k]}. cuts must be
// non-decreasing.
void BinUniforms(std::span<const double> uniforms, const Cuts7& cuts,
                 Histogram8& counts);

namespace scalar {
void Tabulate(std::span<const std::uint8_t> codes, Histogram8& counts);
Gram4 IndicatorGram(const BitPlanes4& planes);
void BinUniforms(std::span<const double> uniforms, const Cuts7& cuts,
                 Histogram8& counts);
}  // namespace scalar

#if defined(FAIRCI_HAVE_AVX2_KERNELS)
namespace avx2 {
void Tabulate(std::span<const std::uint8_t> codes, Histogram8& counts);
Gram4 IndicatorGram(const BitPlanes4& planes);
void BinUniforms(std::span<const double> uniforms, const Cuts7& cuts,
                 Histogram8& counts);
}  // namespace avx2
#endif

}  // namespace fairci::kernels

#endif  // FAIRCI_KERNELS_HPP_
