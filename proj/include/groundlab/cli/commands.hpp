// Copyright 2026 The groundlab Authors
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundlab/core/error.hpp"

namespace groundlab::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3, kAcceptance = 4 };

/// Exit code for a library error: configuration problems map to 2, the rest to 3.
int exit_code_for(Errc code);

/// Machine-readable error record written to stderr and <out>/error.json.
nlohmann::json error_record(const std::string& subcommand, const std::string& code, const std::string& message,
                            int exit_code);

/// Entry point behind the executable. `args` excludes the program name.
/// Progress goes to `err` unless --quiet; summaries go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace groundlab::cli
