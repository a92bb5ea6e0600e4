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

#ifndef FAIRCI_TOOLS_CLI_HPP_
#define FAIRCI_TOOLS_CLI_HPP_

#include <ostream>

namespace fairci {

// Runs the fairci command line. Returns the process exit code: 0 success,
// 1 usage or configuration error, 2 degenerate or unusable data.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace fairci

#endif  // FAIRCI_TOOLS_CLI_HPP_
