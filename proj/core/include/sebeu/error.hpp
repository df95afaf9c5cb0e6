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

#ifndef SEBEU_ERROR_HPP_
#define SEBEU_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace sebeu {

// Failure categories. The solver-side kinds (everything from
// SingularEquilibrium on) are mathematically meaningful outcomes, not bugs;
// the CLI maps them to exit status 2.
enum class ErrorKind {
  kParse,
  kDimension,
  kDefiniteness,
  kInvalidArgument,
  kBudgetExceeded,
  kStructure,
  kSingularEquilibrium,
  kNoConvergence,
  kInstabilityDetected,
  kFilterRiccatiDiverged,
  kClosedLoopUnstable,
  kSteadyStateInfeasible,
};

std::string_view ErrorKindName(ErrorKind kind);

// True for kinds that report a violated modelling assumption rather than
// malformed input.
bool IsSolverFailure(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string assumption = {},
        double metric = 0.0)
      : std::runtime_error(std::move(message)),
        kind_(kind),
        assumption_(std::move(assumption)),
        metric_(metric) {}

  ErrorKind kind() const { return kind_; }
  // Name of the violated assumption or condition, when there is one.
  const std::string& assumption() const { return assumption_; }
  // The number that failed the check (condition number, eigenvalue,
  // residual, ...).
  double metric() const { return metric_; }

 private:
  ErrorKind kind_;
  std::string assumption_;
  double metric_;
};

}  // namespace sebeu

#endif  // SEBEU_ERROR_HPP_
