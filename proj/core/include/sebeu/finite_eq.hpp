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

#ifndef SEBEU_FINITE_EQ_HPP_
#define SEBEU_FINITE_EQ_HPP_

#include <cstddef>
#include <vector>

#include "sebeu/model.hpp"
#include "sebeu/rational.hpp"

namespace sebeu {

// A pmf over env_values (beliefs) or over one DM's actions.
using Pmf = std::vector<Rational>;
using RationalProfile = std::vector<Pmf>;
using MixedProfile = std::vector<std::vector<double>>;
using PureProfile = std::vector<int>;

RationalProfile PointProfile(const FiniteGameSpec& spec, const PureProfile& u);
RationalProfile UniformProfile(const FiniteGameSpec& spec);

// Throws kInvalidArgument unless every pmf is nonnegative and sums to one.
void CheckProfile(const FiniteGameSpec& spec, const RationalProfile& profile);
void CheckProfile(const FiniteGameSpec& spec, const MixedProfile& profile,
                  double tol = 1e-12);

Pmf InducedEnvDistribution(const FiniteGameSpec& spec,
                           const RationalProfile& profile);
std::vector<double> InducedEnvDistribution(const FiniteGameSpec& spec,
                                           const MixedProfile& profile);

// Law of y with DM i's action pinned to `action`.
Pmf ConditionalEnvDistribution(const FiniteGameSpec& spec,
                               const RationalProfile& profile, int i,
                               int action);

Rational ExpectedCost(const FiniteGameSpec& spec, int i, int action,
                      const Pmf& belief);

struct BestReplySet {
  std::vector<int> actions;  // increasing
  Rational value;
};
BestReplySet BestReplyToBelief(const FiniteGameSpec& spec, int i,
                               const Pmf& belief);

struct BestReplySetD {
  std::vector<int> actions;
  double value = 0.0;
};
// Actions within `tie_tol` of the minimum count as optimal.
BestReplySetD BestReplyToBelief(const FiniteGameSpec& spec, int i,
                                const std::vector<double>& belief,
                                double tie_tol = 1e-12);

struct EnumerationOptions {
  std::size_t budget = 10000000;
  int workers = 0;  // 0: hardware concurrency
};

// Sorted lexicographically, DM 0 most significant. Throw kBudgetExceeded
// when the joint action space exceeds the budget.
std::vector<PureProfile> EnumeratePureSebeu(const FiniteGameSpec& spec,
                                            const EnumerationOptions& o = {});
std::vector<PureProfile> EnumeratePureNash(const FiniteGameSpec& spec,
                                           const EnumerationOptions& o = {});
std::vector<PureProfile> EnumeratePureKalai(const FiniteGameSpec& spec,
                                            const EnumerationOptions& o = {});

struct EquilibriumSets {
  std::vector<PureProfile> sebeu, nash, kalai;
};
EquilibriumSets EnumerateAll(const FiniteGameSpec& spec,
                             const EnumerationOptions& o = {});

// Membership tests for a single pure profile.
bool IsPureSebeu(const FiniteGameSpec& spec, const PureProfile& u);
bool IsPureNash(const FiniteGameSpec& spec, const PureProfile& u);
bool IsPureKalai(const FiniteGameSpec& spec, const PureProfile& u);

struct IterationOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int budget = 10000;
  MixedProfile start;  // empty: uniform
};

struct IterationRow {
  int iter = 0;
  int dm = 0;
  double tv_change = 0.0;
  double br_residual = 0.0;
};

struct IterationReport {
  MixedProfile profile;
  bool converged = false;
  int iterations = 0;
  std::vector<IterationRow> trace;
  std::vector<double> env_pmf;
  // Expected regret of each DM's mixture against env_pmf.
  std::vector<double> br_residual;
  double max_residual = 0.0;
  // Converged and every support action is a best reply within tol.
  bool verified = false;
};

// gamma <- (1 - damping) gamma + damping * uniform(best replies to zeta_gamma).
// Non-convergence is reported, not thrown.
IterationReport SebeuFixedPointIteration(const FiniteGameSpec& spec,
                                         const IterationOptions& options = {});

}  // namespace sebeu

#endif  // SEBEU_FINITE_EQ_HPP_
