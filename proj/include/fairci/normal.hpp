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

#ifndef FAIRCI_NORMAL_HPP_
#define FAIRCI_NORMAL_HPP_

namespace fairci {

// Standard normal CDF.
double NormalCdf(double x);

// Upper tail 1 - Phi(x), accurate far into the right tail.
double NormalSurvival(double x);

// Standard normal density.
double NormalPdf(double x);

// Standard normal quantile. Wichura's AS 241 rational approximation followed
// by one Newton step against NormalCdf; absolute error well below 1e-9 for
// p in [1e-300, 1 - 1e-16]. Throws Error(kInvalidArgument) outside (0, 1).
double NormalQuantile(double p);

}  // namespace fairci

#endif  // FAIRCI_NORMAL_HPP_
