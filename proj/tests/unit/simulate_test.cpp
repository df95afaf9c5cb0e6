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

#include "sebeu/simulate.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "sebeu/error.hpp"
#include "support/random_specs.hpp"

namespace sebeu {
namespace {

using testing::RandomLqSpec;
using testing::RandomSpecOptions;

LqGameSpec Silent(LqGameSpec spec) {
  spec.noise.init.mean.setZero();
  spec.noise.init.cov.setZero();
  for (auto& s : spec.noise.w) {
    for (auto& law : s.items) {
      law.mean.setZero();
      law.cov.setZero();
    }
  }
  for (auto& law : spec.noise.xi.items) {
    law.mean.setZero();
    law.cov.setZero();
  }
  return spec;
}

LqGameSpec ScalarStationary() {
  ScalarGameParams params;
  params.horizon = kInfiniteHorizon;
  params.beta = 0.9;
  params.a = 0.7;
  LqGameSpec spec = MakeScalarGame(params, 2);
  spec.noise.w[1].items[0].mean(0) = 0.2;
  spec.noise.w[2].items[0].mean(0) = 0.2;
  spec.noise.xi.items[0].mean(0) = 0.1;
  return spec;
}

TEST_CASE("noise-free zero-mean loop stays at zero") {
  const LqGameSpec spec = Silent(RandomLqSpec(4, {}));
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const MomentModel mm = PropagateMoments(spec, prof, spec.horizon, InitMode::kPrior);
  for (int t = 0; t < mm.horizon(); ++t) {
    CHECK(mm.mean[t].cwiseAbs().maxCoeff() == 0.0);
    CHECK(mm.cov[t].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("two-stage scalar game has zero-mean prices") {
  const LqGameSpec spec = MakeScalarGame({}, 1);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const MomentModel mm = PropagateMoments(spec, prof, 2, InitMode::kPrior);
  CHECK(std::abs(mm.YMean(0)(0)) <= 1e-10);
  CHECK(std::abs(mm.YMean(1)(0)) <= 1e-10);
}

TEST_CASE("moments agree with the exact forms") {
  RandomSpecOptions o;
  o.p = 2;
  o.horizon = 5;
  const LqGameSpec spec = RandomLqSpec(8, o);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const MomentModel mm = PropagateMoments(spec, prof, o.horizon, InitMode::kPrior, 5);
  const LoopForms forms = RollOutForms(spec, prof, InitMode::kPrior, o.horizon);
  for (int t = 0; t < o.horizon; ++t) {
    CHECK((Mean(forms.y[t]) - mm.YMean(t)).norm() <= 1e-12);
    for (std::size_t h = 0; h < mm.y_lag[t].size(); ++h) {
      const Mat c = Cov(forms.y[t + h], forms.y[t]);
      CHECK((c - mm.y_lag[t][h]).norm() <= 1e-11);
    }
  }
}

TEST_CASE("stationary profile: moments do not drift") {
  const LqGameSpec spec = ScalarStationary();
  const SebeuLqProfile prof = BuildSebeuInfiniteStationary(spec);
  const MomentModel mm = PropagateMoments(spec, prof, 51, InitMode::kSteadyState);
  const StationaryState& ss = prof.stationary;
  for (int t = 0; t <= 50; ++t) {
    CHECK((mm.XCov(t) - ss.Theta).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((mm.XMean(t) - ss.x_hat0).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((mm.YMean(t) - mm.YMean(0)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("noise-free paths equal the mean path") {
  LqGameSpec spec = Silent(RandomLqSpec(5, {}));
  spec.noise.init.mean.setConstant(0.5);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const MomentModel mm = PropagateMoments(spec, prof, spec.horizon, InitMode::kPrior);
  SimulationOptions o;
  o.n_paths = 3;
  o.horizon = spec.horizon;
  const TrajectoryBatch b = SimulateTrajectories(spec, prof, o);
  for (int k = 0; k < 3; ++k) {
    for (int t = 0; t < o.horizon; ++t) {
      CHECK((b.y[k][t] - mm.YMean(t)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("sampling is independent of the worker count") {
  const LqGameSpec spec = RandomLqSpec(6, {});
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  SimulationOptions o;
  o.n_paths = 64;
  o.horizon = spec.horizon;
  o.workers = 1;
  std::ostringstream one, eight;
  WriteTrajectoriesCsv(SimulateTrajectories(spec, prof, o), one);
  o.workers = 8;
  WriteTrajectoriesCsv(SimulateTrajectories(spec, prof, o), eight);
  CHECK(one.str() == eight.str());
  o.seed += 1;
  std::ostringstream other;
  WriteTrajectoriesCsv(SimulateTrajectories(spec, prof, o), other);
  CHECK(one.str() != other.str());
}

TEST_CASE("Monte Carlo price mean in the two-stage game") {
  const LqGameSpec spec = MakeScalarGame({}, 1);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  SimulationOptions o;
  o.n_paths = 100000;
  o.horizon = 2;
  const TrajectoryBatch b = SimulateTrajectories(spec, prof, o);
  for (int t = 0; t < 2; ++t) {
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < o.n_paths; ++k) {
      const double y = b.y[k][t](0);
      s += y;
      s2 += y * y;
    }
    const double mean = s / o.n_paths;
    const double sd = std::sqrt(s2 / o.n_paths - mean * mean);
    CHECK(std::abs(mean) <= 3.0 * sd / std::sqrt(double(o.n_paths)));
  }
}

TEST_CASE("Monte Carlo agrees with exact moments across seeds") {
  const LqGameSpec spec = ScalarStationary();
  const SebeuLqProfile prof = BuildSebeuInfiniteStationary(spec);
  const MomentModel mm = PropagateMoments(spec, prof, 5, InitMode::kSteadyState);
  int inside = 0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    SimulationOptions o;
    o.n_paths = 2000;
    o.horizon = 5;
    o.mode = InitMode::kSteadyState;
    o.seed = 1000 + trial;
    const TrajectoryBatch b = SimulateTrajectories(spec, prof, o);
    double s = 0.0;
    for (int k = 0; k < o.n_paths; ++k) s += b.y[k][4](0);
    const double se = std::sqrt(mm.YCov(4)(0, 0) / o.n_paths);
    if (std::abs(s / o.n_paths - mm.YMean(4)(0)) <= 4.0 * se) ++inside;
  }
  CHECK(inside >= trials - 1);
}

TEST_CASE("equilibrium profiles are consistent; perturbed ones are not") {
  const LqGameSpec spec = MakeScalarGame({}, 1);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const ConsistencyReport ok = ConsistencyCheck(spec, prof);
  CHECK(ok.passed);
  CHECK(ok.max_gap <= 1e-10);

  // Shift the stage-1 coefficient on y_0 by 0.1.
  std::vector<DmPolicy> bent = prof.policies;
  bent[0].G[1](0, 0) += 0.1 / prof.estimator.Gamma[0](0, 0);
  const ConsistencyReport bad = ConsistencyCheck(spec, prof, {}, &bent);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_cov_gap > 1e-4);
}

TEST_CASE("uncoupled and random coupled profiles pass") {
  RandomSpecOptions o;
  o.decoupled = true;
  const LqGameSpec plain = RandomLqSpec(2, o);
  CHECK(ConsistencyCheck(plain, BuildSebeuFinite(plain)).passed);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RandomSpecOptions r;
    r.n_dm = 3;
    r.p = 2;
    const LqGameSpec spec = RandomLqSpec(seed, r);
    const ConsistencyReport rep = ConsistencyCheck(spec, BuildSebeuFinite(spec));
    CHECK(rep.passed);
    CHECK(rep.max_forecast_gap <= 1e-8);
  }
}

TEST_CASE("stationary consistency including lags") {
  const LqGameSpec spec = ScalarStationary();
  const SebeuLqProfile prof = BuildSebeuInfiniteStationary(spec);
  const ConsistencyReport rep = ConsistencyCheck(spec, prof);
  CHECK(rep.passed);
  std::vector<DmPolicy> bent = prof.policies;
  bent[1].H[0](0) += 0.1;
  CHECK_FALSE(ConsistencyCheck(spec, prof, {}, &bent).passed);
}

TEST_CASE("csv layout") {
  const LqGameSpec spec = MakeScalarGame({}, 2);
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  SimulationOptions o;
  o.n_paths = 2;
  o.horizon = 2;
  std::ostringstream os;
  WriteTrajectoriesCsv(SimulateTrajectories(spec, prof, o), os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "path,t,dm,x,u,y,d");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2 * 2 * 2);
}

}  // namespace
}  // namespace sebeu
