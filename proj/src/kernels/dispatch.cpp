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

#include <atomic>
#include <cstdlib>
#include <string>

#include "fairci/error.hpp"
#include "fairci/kernels.hpp"

namespace fairci::kernels {
namespace {

// -1 = automatic, otherwise static_cast<int>(Isa).
std::atomic<int> g_override{-1};

bool CpuHasAvx2() {
#if defined(FAIRCI_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa AutomaticIsa() {
  static const Isa chosen = [] {
    if (const char* env = std::getenv("FAIRCI_ISA")) {
      const std::string want(env);
      if (want == "scalar") return Isa::kScalar;
      if (want == "avx2" && CpuHasAvx2()) return Isa::kAvx2;
    }
    return CpuHasAvx2() ? Isa::kAvx2 : Isa::kScalar;
  }();
  return chosen;
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

bool IsaAvailable(Isa isa) {
  return isa == Isa::kScalar || (isa == Isa::kAvx2 && CpuHasAvx2());
}

Isa ActiveIsa() {
  const int forced = g_override.load(std::memory_order_relaxed);
  return forced >= 0 ? static_cast<Isa>(forced) : AutomaticIsa();
}

void SetIsaOverride(std::optional<Isa> isa) {
  if (isa && !IsaAvailable(*isa)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("kernel variant not available: ") +
                    std::string(IsaName(*isa)));
  }
  g_override.store(isa ? static_cast<int>(*isa) : -1,
                   std::memory_order_relaxed);
}

void Tabulate(std::span<const std::uint8_t> codes, Histogram8& counts) {
#if defined(FAIRCI_HAVE_AVX2_KERNELS)
  if (ActiveIsa() == Isa::kAvx2) return avx2::Tabulate(codes, counts);
#endif
  scalar::Tabulate(codes, counts);
}

Gram4 IndicatorGram(const BitPlanes4& planes) {
  for (const auto& p : planes) {
    if (p.size() != planes[0].size()) {
      throw Error(ErrorCode::kInvalidArgument, "bit planes differ in length");
    }
  }
#if defined(FAIRCI_HAVE_AVX2_KERNELS)
  if (ActiveIsa() == Isa::kAvx2) return avx2::IndicatorGram(planes);
#endif
  return scalar::IndicatorGram(planes);
}

void BinUniforms(std::span<const double> uniforms, const Cuts7& cuts,
                 Histogram8& counts) {
#if defined(FAIRCI_HAVE_AVX2_KERNELS)
  if (ActiveIsa() == Isa::kAvx2) return avx2::BinUniforms(uniforms, cuts, counts);
#endif
  scalar::BinUniforms(uniforms, cuts, counts);
}

}  // namespace fairci::kernels
