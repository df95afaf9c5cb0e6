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

#ifndef SEBEU_TESTS_SUPPORT_RANDOM_SPECS_HPP_
#define SEBEU_TESTS_SUPPORT_RANDOM_SPECS_HPP_

#include <cstdint>
#include <random>

#include "sebeu/model.hpp"

namespace sebeu::testing {

struct RandomSpecOptions {
  int n_dm = 2;
  int n = 2;
  int m = 1;
  int p = 1;
  int n0 = 1;
  int horizon = 4;
  double beta = 0.95;
  // Identical DMs (same blocks, same noise laws).
  bool symmetric = false;
  // Turns off every coupling term C, K, L.
  bool decoupled = false;
};

LqGameSpec RandomLqSpec(std::uint64_t seed, const RandomSpecOptions& options);

Mat RandomMatrix(std::mt19937_64& rng, int rows, int cols, double scale);
// Symmetric with eigenvalues in [lo, lo + spread].
Mat RandomSpd(std::mt19937_64& rng, int n, double lo, double spread);

}  // namespace sebeu::testing

#endif  // SEBEU_TESTS_SUPPORT_RANDOM_SPECS_HPP_
