//
// Copyright 2026 The Debias Authors
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

#ifndef DEBIAS_TOOLS_CLI_H_
#define DEBIAS_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace debias::cli {

inline constexpr char kVersion[] = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name. Results go to `out`
// or to the file named by --out; diagnostics go to `err`.
//
// Exit codes: 0 on success, 2 on parse or validation errors, 1 on internal
// errors and on a failed mc-check. Output files are written to a temporary
// file in the same directory and renamed into place, so a failing run never
// leaves a partial file behind.
int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace debias::cli

#endif  // DEBIAS_TOOLS_CLI_H_
