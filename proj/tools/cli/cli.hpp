// Copyright 2026 The sebeu Authors
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

#ifndef SEBEU_TOOLS_CLI_HPP_
#define SEBEU_TOOLS_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sebeu::cli {

inline constexpr std::uint64_t kDefaultSeed = 20260417;

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitSolverFailure = 2,
};

struct RunConfig {
  std::string command;
  std::string spec_path;
  std::string out_dir = ".";
  std::uint64_t seed = kDefaultSeed;
  std::optional<int> paths;
  std::optional<int> horizon;
  std::vector<int> n_grid;
  std::optional<double> tol;
  std::optional<long long> budget;
  int workers = 0;
};

const std::vector<std::string>& Commands();

// Runs one command and writes its artifacts plus manifest.json into
// config.out_dir. Messages go to `log`.
int RunScenario(const RunConfig& config, std::ostream& log);

// Parses argv and dispatches.
int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a byte string.
std::string Sha256Hex(const std::string& bytes);

}  // namespace sebeu::cli

#endif  // SEBEU_TOOLS_CLI_HPP_
