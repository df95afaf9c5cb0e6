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

#include "sebeu/epsnash.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sebeu/error.hpp"
#include "sebeu/simulate.hpp"
#include "support/random_specs.hpp"

namespace sebeu {
namespace {

using testing::RandomLqSpec;
using testing::RandomSpecOptions;

// The deviator's closed-form response written in the affine class.
AffinePolicy ClosedFormPolicy(const TwoStageGains& g) {
  AffinePolicy pol = UnflattenAffine(std::vector<double>(AffineParameterCount(2, 1, 1, 1)),
                                     2, 1, 1, 1);
  pol.P[0][0](0, 0) = g.ft0;
  pol.P[1][1](0, 0) = g.ft1;
  pol.P[1][0](0, 0) = g.nt1 * g.ft0;  // n u_0 with u_0 = ft0 x_0
  pol.Q[1][1](0, 0) = g.kt1;
  return pol;
}

DeviationSearchOptions Quick() {
  DeviationSearchOptions o;
  o.starts = 4;
  return o;
}

TEST_CASE("closed-form responses match the rational oracle") {
  const ScalarGameParams unit;
  const TwoStageGains one = TwoStageNashResponse(unit, 1);
  CHECK(one.f0 == doctest::Approx(-0.6).epsilon(1e-15));
  CHECK(one.f1 == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(std::abs(one.k1 + 1.0 / 34.0) <= 1e-15);
  CHECK(std::abs(one.ft0 + 7.0 / 19.0) <= 1e-12);
  CHECK(std::abs(one.ft1 + 0.25) <= 1e-12);
  CHECK(std::abs(one.kt1) <= 1e-15);
  CHECK(std::abs(one.nt1) <= 1e-15);

  const TwoStageGains two = TwoStageNashResponse(unit, 2);
  CHECK(std::abs(two.ft0 + 278952.0 / 613127.0) <= 1e-12);
  CHECK(std::abs(two.ft1 + 1.0 / 3.0) <= 1e-12);
  CHECK(std::abs(two.kt1 + 245.0 / 38586.0) <= 1e-12);
  CHECK(std::abs(two.nt1 - 1.0 / 218.0) <= 1e-12);

  const TwoStageGains four = TwoStageNashResponse(unit, 4);
  CHECK(std::abs(four.ft0 + 12176608.0 / 23582359.0) <= 1e-12);
  CHECK(std::abs(four.ft1 + 0.4) <= 1e-12);
  CHECK(std::abs(four.kt1 + 2643.0 / 465430.0) <= 1e-12);
  CHECK(std::abs(four.nt1 - 9.0 / 4270.0) <= 1e-12);

  const TwoStageGains big = TwoStageNashResponse(unit, 1e9);
  CHECK(big.ft0 == doctest::Approx(-0.6).epsilon(1e-7));
  CHECK(big.ft1 == doctest::Approx(-0.5).epsilon(1e-7));
  CHECK(std::abs(big.kt1) <= 1e-8);
  CHECK(std::abs(big.nt1) <= 1e-8);
  ScalarGameParams bad = unit;
  bad.horizon = 3;
  CHECK_THROWS_AS(TwoStageNashResponse(bad, 2), Error);
}

TEST_CASE("response coefficients on y_0 and u_0 vanish like 1/N") {
  const std::vector<double> grid = {1e2, 1e3, 1e4, 1e5};
  std::vector<double> v;
  for (double n : grid) {
    const TwoStageGains g = TwoStageNashResponse({}, n);
    v.push_back(std::abs(g.kt1) + std::abs(g.nt1));
  }
  const InverseNFit fit = FitInverseN(grid, v);
  CHECK(fit.r_squared >= 0.99);
  CHECK(fit.slope > 0.0);
  const TwoStageGains huge = TwoStageNashResponse({}, 1e6);
  CHECK(std::abs(huge.nt1) <= 10.0 / 1e6);
}

TEST_CASE("profile policy in the affine class reproduces its cost") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    RandomSpecOptions o;
    o.n_dm = 3;
    o.p = 2;
    const LqGameSpec spec = RandomLqSpec(seed, o);
    const SebeuLqProfile prof = BuildSebeuFinite(spec);
    const LoopForms base = RollOutForms(spec, prof, InitMode::kPrior, spec.horizon);
    for (int j = 0; j < spec.n_dm; ++j) {
      const double want = ExpectedCostOfForms(spec, base, j);
      const double got = DeviationCost(spec, prof, j, SebeuAsAffine(spec, prof, j));
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
    const DeviationEvaluator fast(spec, prof, 2);
    std::vector<double> theta = FlattenAffine(SebeuAsAffine(spec, prof, 2));
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += 0.3 * std::sin(1.0 + k);
    const AffinePolicy odd = UnflattenAffine(theta, spec.horizon, o.n, o.m, o.p);
    CHECK(fast.Cost(odd) == doctest::Approx(DeviationCost(spec, prof, 2, odd)).epsilon(1e-11));
    const AffinePolicy pol = SebeuAsAffine(spec, prof, 1);
    const AffinePolicy back = UnflattenAffine(FlattenAffine(pol), spec.horizon,
                                              o.n, o.m, o.p);
    CHECK(FlattenAffine(back) == FlattenAffine(pol));
  }
}

TEST_CASE("single DM: search recovers the closed-form best response") {
  const LqGameSpec spec = MakeScalarGame({}, 1);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const TwoStageGains g = TwoStageNashResponse({}, 1);
  const double closed = DeviationCost(spec, prof, 0, ClosedFormPolicy(g));
  const GapEntry e = EpsGapLqAffine(spec, prof, 0);
  CHECK(std::abs(e.deviation_cost - closed) <= 1e-6);
  CHECK(e.gap > 0.0);
  CHECK(e.policy.P[0][0](0, 0) == doctest::Approx(g.ft0).epsilon(1e-4));
  CHECK(e.policy.P[1][1](0, 0) == doctest::Approx(g.ft1).epsilon(1e-4));
}

TEST_CASE("search does at least as well as the closed form for N = 2, 4") {
  for (int n : {2, 4}) {
    const LqGameSpec spec = MakeScalarGame({}, n);
    const SebeuLqProfile prof = BuildSebeuFinite(spec);
    const double closed =
        DeviationCost(spec, prof, 0, ClosedFormPolicy(TwoStageNashResponse({}, n)));
    const GapEntry e = EpsGapLqAffine(spec, prof, 0, Quick());
    CHECK(e.deviation_cost <= closed + 1e-9);
    CHECK(closed <= e.sebeu_cost + 1e-12);
  }
}

TEST_CASE("no gain from deviating when the environment is exogenous") {
  RandomSpecOptions o;
  o.decoupled = true;
  o.horizon = 3;
  const LqGameSpec spec = RandomLqSpec(11, o);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const GapReport rep = EpsGapLq(spec, prof, Quick());
  CHECK(rep.entries.size() == 2u);
  for (const GapEntry& e : rep.entries) {
    CHECK(e.gap >= -1e-10);
    CHECK(e.gap <= 1e-8);
  }
}

TEST_CASE("gaps are nonnegative on coupled specs") {
  RandomSpecOptions o;
  o.horizon = 3;
  const LqGameSpec spec = RandomLqSpec(12, o);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const GapReport rep = EpsGapLq(spec, prof, Quick());
  for (const GapEntry& e : rep.entries) CHECK(e.gap >= -1e-10);
  CHECK_THROWS_AS(EpsGapLqAffine(spec, prof, 5), Error);
}

TEST_CASE("gap decays across the two-stage family") {
  const SpecFamily family = [](int n) { return MakeScalarGame({}, n); };
  const GapReport rep = SweepN(family, {1, 4, 16, 64, 256}, Quick());
  REQUIRE(rep.entries.size() == 5u);
  for (std::size_t k = 1; k < rep.entries.size(); ++k) {
    CHECK(rep.entries[k].gap < rep.entries[k - 1].gap);
    CHECK(rep.entries[k].gap > 0.0);
  }
  CHECK(rep.entries.front().gap >= 10.0 * rep.entries.back().gap);
  std::ostringstream os;
  WriteGapCsv(rep, os);
  CHECK(os.str().rfind("N,dm,sebeu_cost,deviation_cost,gap\n1,1,", 0) == 0);
}

TEST_CASE("demand response gaps at pure equilibria are 0 or 1/N") {
  for (int n = 1; n <= 6; ++n) {
    const FiniteGameSpec spec = MakeDemandResponseGame(n);
    for (const PureProfile& u : EnumeratePureSebeu(spec)) {
      const FiniteGapReport rep = EpsGapFinite(spec, PointProfile(spec, u));
      const bool all_one = std::all_of(u.begin(), u.end(), [](int a) { return a == 1; });
      CHECK(rep.max_gap == (all_one ? Rational(0) : Rational(1, n)));
      for (const FiniteGapEntry& e : rep.entries) CHECK(e.gap >= Rational(0));
    }
  }
  const FiniteGameSpec two = MakeDemandResponseGame(2);
  const FiniteGapReport rep = EpsGapFinite(two, PointProfile(two, {2, 0}));
  CHECK(rep.entries[0].gap == Rational(1, 2));
  CHECK(rep.entries[0].best_action == 1);
  CHECK(rep.entries[1].gap == Rational(0));
}

}  // namespace
}  // namespace sebeu
