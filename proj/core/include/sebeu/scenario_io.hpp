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

#ifndef SEBEU_SCENARIO_IO_HPP_
#define SEBEU_SCENARIO_IO_HPP_

#include <string>
#include <string_view>
#include <variant>

#include "sebeu/model.hpp"

namespace sebeu {

using Scenario = std::variant<LqGameSpec, FiniteGameSpec>;

// Parses and validates a scenario document. Errors carry the JSON pointer of
// the offending node (kParse), the offending block (kDimension) or the
// matrix and its minimum eigenvalue (kDefiniteness).
Scenario LoadSpec(std::string_view text);
Scenario LoadSpecFile(const std::string& path);

std::string SerializeSpec(const LqGameSpec& spec);
std::string SerializeSpec(const FiniteGameSpec& spec);
std::string SerializeSpec(const Scenario& scenario);

// Shortest form is not attempted; 17 significant digits round-trip every
// double exactly.
std::string FormatDouble(double value);

// Locale-independent decimal parse; throws Error(kParse) naming `where`.
double ParseDouble(std::string_view text, std::string_view where);

}  // namespace sebeu

#endif  // SEBEU_SCENARIO_IO_HPP_
