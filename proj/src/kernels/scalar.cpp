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

#include <bit>

#include "fairci/kernels.hpp"

namespace fairci::kernels::scalar {

void Tabulate(std::span<const std::uint8_t> codes, Histogram8& counts) {
  for (std::uint8_t c : codes) ++counts[c & 7u];
}

Gram4 IndicatorGram(const BitPlanes4& planes) {
  Gram4 gram{};
  const std::size_t words = planes[0].size();
  for (std::size_t w = 0; w < words; ++w) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t k = j; k < 4; ++k) {
        gram[j][k] += static_cast<std::uint64_t>(
            std::popcount(planes[j][w] & planes[k][w]));
      }
    }
  }
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = 0; k < j; ++k) gram[j][k] = gram[k][j];
  return gram;
}

void BinUniforms(std::span<const double> uniforms, const Cuts7& cuts,
                 Histogram8& counts) {
  for (double u : uniforms) {
    std::size_t bin = 0;
    while (bin < cuts.size() && u >= cuts[bin]) ++bin;
    ++counts[bin];
  }
}

}  // namespace fairci::kernels::scalar
