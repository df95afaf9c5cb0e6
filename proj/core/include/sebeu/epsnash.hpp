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

#ifndef SEBEU_EPSNASH_HPP_
#define SEBEU_EPSNASH_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sebeu/finite_eq.hpp"
#include "sebeu/model.hpp"
#include "sebeu/rational.hpp"
#include "sebeu/sebeu_lq.hpp"
#include "sebeu/simulate.hpp"

namespace sebeu {

// Two-stage scalar game: SEBEU gains and one DM's optimal response to the
// others playing them, u_1 = ft1 x_1 + kt1 y_0 + nt1 u_0 and u_0 = ft0 x_0.
struct TwoStageGains {
  double f0 = 0.0;
  double f1 = 0.0;
  double k1 = 0.0;
  double ft0 = 0.0;
  double ft1 = 0.0;
  double kt1 = 0.0;
  double nt1 = 0.0;
};

// N may be fractional for asymptotic fits. Requires horizon 2 and beta 1.
TwoStageGains TwoStageNashResponse(const ScalarGameParams& params, double n_dm);

// u_t = sum_{s<=t} P[t][s] x_s + sum_{s<t} Q[t][s + 1] y_s + h[t], where x
// is the deviator's own state and Q[t][0] multiplies y_{-1}.
struct AffinePolicy {
  std::vector<std::vector<Mat>> P, Q;
  std::vector<Vec> h;

  int horizon() const { return static_cast<int>(h.size()); }
};

int AffineParameterCount(int horizon, int n, int m, int p);
std::vector<double> FlattenAffine(const AffinePolicy& policy);
AffinePolicy UnflattenAffine(const std::vector<double>& theta, int horizon, int n,
                             int m, int p);

// DM j's profile policy written in the affine class, by unrolling the
// estimator readout of Xhat_t.
AffinePolicy SebeuAsAffine(const LqGameSpec& spec, const SebeuLqProfile& profile,
                           int j);

// Exact expected cost of DM j when it plays `policy` and everyone else keeps
// the profile.
double DeviationCost(const LqGameSpec& spec, const SebeuLqProfile& profile, int j,
                     const AffinePolicy& policy);

// Same value, from the loop's response to DM j's input computed once up
// front. Cheap per call.
class DeviationEvaluator {
 public:
  DeviationEvaluator(const LqGameSpec& spec, const SebeuLqProfile& profile, int j);

  double Cost(const AffinePolicy& policy) const;

 private:
  const LqGameSpec* spec_;
  int j_;
  int horizon_;
  LoopForms base_;
  // dx_[s][r], dy_[s][r]: change of x^j_s and y_s per unit u_r.
  std::vector<std::vector<Mat>> dx_, dy_;
};

struct GapEntry {
  int n_dm = 0;
  int dm = 0;
  double sebeu_cost = 0.0;
  double deviation_cost = 0.0;
  double gap = 0.0;
  AffinePolicy policy;  // best deviation found
  int best_start = 0;
  int iterations = 0;
  bool converged = false;
};

struct GapReport {
  std::vector<GapEntry> entries;
  double max_gap = 0.0;
  std::string deviation_class;
};

struct DeviationSearchOptions {
  int starts = 8;
  double gradient_tolerance = 1e-9;
  int budget = 2000;  // iterations per start
  double start_spread = 0.25;
  std::uint64_t seed = 20260417;
  int workers = 0;
  double fd_step = 1e-6;
};

// Affine-class deviation search for DM j; finite horizon only. Start 0 is
// the profile policy itself, so gap >= 0 up to rounding.
GapEntry EpsGapLqAffine(const LqGameSpec& spec, const SebeuLqProfile& profile,
                        int j, const DeviationSearchOptions& options = {});

// All DMs, or only `dms` when given.
GapReport EpsGapLq(const LqGameSpec& spec, const SebeuLqProfile& profile,
                   const DeviationSearchOptions& options = {},
                   const std::vector<int>& dms = {});

using SpecFamily = std::function<LqGameSpec(int n_dm)>;

// One row per N. Only DM 0 is probed when `first_only` (exchangeable DMs).
GapReport SweepN(const SpecFamily& family, const std::vector<int>& grid,
                 const DeviationSearchOptions& options = {}, bool first_only = true);

void WriteGapCsv(const GapReport& report, std::ostream& os);

struct FiniteGapEntry {
  int dm = 0;
  Rational cost;
  Rational best_cost;
  Rational gap;
  int best_action = 0;
};

struct FiniteGapReport {
  std::vector<FiniteGapEntry> entries;
  Rational max_gap;
};

// Exact gaps against pure deviations, which suffice for a best reply.
FiniteGapReport EpsGapFinite(const FiniteGameSpec& spec, const RationalProfile& profile);

void WriteGapCsv(const FiniteGapReport& report, std::ostream& os);

struct InverseNFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of values against 1/N.
InverseNFit FitInverseN(const std::vector<double>& n, const std::vector<double>& values);

}  // namespace sebeu

#endif  // SEBEU_EPSNASH_HPP_
