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

// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <bit>

#include "fairci/kernels.hpp"

namespace fairci::kernels::avx2 {
namespace {

inline std::uint64_t HorizontalSum(__m256i v) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

// Per-byte popcount (Mula's nibble lookup) folded into four 64-bit lanes.
inline __m256i PopcountBytesToU64(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2,
                                       3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1, 2,
                                       2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  const __m256i cnt =
      _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

}  // namespace

void Tabulate(std::span<const std::uint8_t> codes, Histogram8& counts) {
  const std::size_t n = codes.size();
  const std::uint8_t* data = codes.data();
  const __m256i seven = _mm256_set1_epi8(7);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  // Byte lanes overflow after 255 increments, so flush in blocks.
  constexpr std::size_t kBlock = 255 * 32;
  while (n - i >= 32) {
    const std::size_t end = i + std::min(kBlock, (n - i) / 32 * 32);
    __m256i acc[8];
    for (auto& a : acc) a = zero;
    for (; i < end; i += 32) {
      const __m256i x = _mm256_and_si256(
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i)), seven);
      for (int v = 0; v < 8; ++v) {
        acc[v] = _mm256_sub_epi8(
            acc[v], _mm256_cmpeq_epi8(x, _mm256_set1_epi8(static_cast<char>(v))));
      }
    }
    for (int v = 0; v < 8; ++v) {
      counts[v] += HorizontalSum(_mm256_sad_epu8(acc[v], zero));
    }
  }
  for (; i < n; ++i) ++counts[data[i] & 7u];
}

Gram4 IndicatorGram(const BitPlanes4& planes) {
  const std::size_t words = planes[0].size();
  __m256i acc[10];
  for (auto& a : acc) a = _mm256_setzero_si256();
  std::size_t w = 0;
  for (; w + 4 <= words; w += 4) {
    __m256i v[4];
    for (int j = 0; j < 4; ++j) {
      v[j] = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(planes[j].data() + w));
    }
    int slot = 0;
    for (int j = 0; j < 4; ++j) {
      for (int k = j; k < 4; ++k, ++slot) {
        acc[slot] = _mm256_add_epi64(
            acc[slot], PopcountBytesToU64(_mm256_and_si256(v[j], v[k])));
      }
    }
  }
  Gram4 gram{};
  int slot = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = j; k < 4; ++k, ++slot) {
      std::uint64_t total = HorizontalSum(acc[slot]);
      for (std::size_t t = w; t < words; ++t) {
        total += static_cast<std::uint64_t>(
            std::popcount(planes[j][t] & planes[k][t]));
      }
      gram[j][k] = gram[k][j] = total;
    }
  }
  return gram;
}

void BinUniforms(std::span<const double> uniforms, const Cuts7& cuts,
                 Histogram8& counts) {
  // at_least[k] counts u >= cuts[k]; with sorted cuts the histogram follows
  // by differencing.
  const std::size_t n = uniforms.size();
  const double* u = uniforms.data();
  __m256d cut[7];
  __m256i acc[7];
  for (int k = 0; k < 7; ++k) {
    cut[k] = _mm256_set1_pd(cuts[k]);
    acc[k] = _mm256_setzero_si256();
  }
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(u + i);
    for (int k = 0; k < 7; ++k) {
      const __m256d ge = _mm256_cmp_pd(x, cut[k], _CMP_GE_OQ);
      acc[k] = _mm256_sub_epi64(acc[k], _mm256_castpd_si256(ge));
    }
  }
  std::uint64_t at_least[8];
  for (int k = 0; k < 7; ++k) at_least[k] = HorizontalSum(acc[k]);
  at_least[7] = 0;
  const std::uint64_t vector_total = i;
  counts[0] += vector_total - at_least[0];
  for (int k = 1; k < 8; ++k) counts[k] += at_least[k - 1] - at_least[k];
  for (; i < n; ++i) {
    std::size_t bin = 0;
    while (bin < cuts.size() && u[i] >= cuts[bin]) ++bin;
    ++counts[bin];
  }
}

}  // namespace fairci::kernels::avx2
