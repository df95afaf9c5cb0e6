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

#include "sebeu/lqr_exo.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "sebeu/error.hpp"
#include "support/random_specs.hpp"

namespace sebeu {
namespace {

using testing::RandomMatrix;
using testing::RandomSpd;

double Scalar(const Mat& m) { return m(0, 0); }

EnvSequenceLaw RandomEnv(std::mt19937_64& rng, int p, int length) {
  EnvSequenceLaw env;
  env.p = p;
  const int dim = p * (length + 1);
  env.mean = RandomMatrix(rng, dim, 1, 0.5);
  // AR(1)-like correlation so conditional means move.
  const Mat mix = RandomMatrix(rng, dim, dim, 0.3);
  env.cov = mix * mix.transpose() + 0.1 * Mat::Identity(dim, dim);
  return env;
}

TEST_CASE("complete squares reproduces the coupled stage cost") {
  std::mt19937_64 rng(7);
  const Mat q = Mat::Constant(1, 1, 2.0), r = Mat::Constant(1, 1, 3.0);
  const Mat k = Mat::Constant(1, 1, 1.0), l = Mat::Constant(1, 1, 1.0);
  const SquaresPieces sq = CompleteSquares(q, r, k, l);
  for (int i = 0; i < 50; ++i) {
    const Vec x = RandomMatrix(rng, 1, 1, 1.0), u = RandomMatrix(rng, 1, 1, 1.0),
              z = RandomMatrix(rng, 1, 1, 1.0);
    const double direct = x.dot(q * x) + u.dot(r * u) +
                          2.0 * z.dot(k * u + l * x);
    CHECK(std::abs(sq.Evaluate(x, u, z) - direct) <= 1e-12);
  }
  // Matrix case with p x m and p x n couplings.
  const Mat q3 = RandomSpd(rng, 3, 0.5, 1.0), r2 = RandomSpd(rng, 2, 0.5, 1.0);
  const Mat k2 = RandomMatrix(rng, 2, 2, 1.0), l2 = RandomMatrix(rng, 2, 3, 1.0);
  const SquaresPieces sm = CompleteSquares(q3, r2, k2, l2);
  for (int i = 0; i < 50; ++i) {
    const Vec x = RandomMatrix(rng, 3, 1, 1.0), u = RandomMatrix(rng, 2, 1, 1.0),
              z = RandomMatrix(rng, 2, 1, 1.0);
    const double direct = x.dot(q3 * x) + u.dot(r2 * u) +
                          2.0 * z.dot(k2 * u + l2 * x);
    CHECK(std::abs(sm.Evaluate(x, u, z) - direct) <= 1e-12);
  }
  const SquaresPieces none = CompleteSquares(q, r, Mat::Zero(1, 1), Mat::Zero(1, 1));
  CHECK(Scalar(none.correction) == 0.0);
  CHECK_THROWS_AS(CompleteSquares(Mat::Zero(1, 1), r, k, l), Error);
}

TEST_CASE("two-stage scalar game gains") {
  const LqGameSpec spec = MakeScalarGame({}, 1);
  const RiccatiLadder ladder = RiccatiFinite(spec.per_dm[0], 2);
  CHECK(Scalar(ladder.M[2]) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Scalar(ladder.M[1]) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(Scalar(ladder.F[1]) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(Scalar(ladder.F[0]) == doctest::Approx(-0.6).epsilon(1e-15));

  const ExoPolicy pol = SolveExo(spec, 0);
  CHECK(Scalar(pol.GAt(1, 1)) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(Scalar(pol.GAt(0, 0)) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(Scalar(pol.GAt(0, 1)) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(pol.HAt(0).norm() == 0.0);
  CHECK(pol.HAt(1).norm() == 0.0);
}

TEST_CASE("no control authority and no coupling") {
  std::mt19937_64 rng(3);
  DmBlock dm;
  dm.A = MatSeries(RandomMatrix(rng, 2, 2, 0.5));
  dm.B = MatSeries(Mat::Zero(2, 1));
  dm.C = MatSeries(Mat::Zero(2, 1));
  dm.Q = MatSeries(RandomSpd(rng, 2, 0.5, 1.0));
  dm.R = MatSeries(Mat::Identity(1, 1));
  dm.K = MatSeries(Mat::Zero(1, 1));
  dm.L = MatSeries(Mat::Zero(1, 2));
  dm.QT = dm.Q.At(0);
  dm.beta = 0.9;
  const RiccatiLadder ladder = RiccatiFinite(dm, 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(ladder.F[k].norm() == 0.0);
    const Mat expect = dm.Q.At(k) + dm.beta * dm.A.At(k).transpose() *
                                        ladder.M[k + 1] * dm.A.At(k);
    CHECK((ladder.M[k] - expect).norm() <= 1e-12);
  }
  dm.B = MatSeries(RandomMatrix(rng, 2, 1, 1.0));
  const ExoPolicy pol = ExoGainsFinite(dm, 5, RiccatiFinite(dm, 5), {Vec::Zero(2)});
  for (int k = 0; k < 5; ++k) {
    for (int t = k; t < 5; ++t) CHECK(pol.GAt(k, t).norm() == 0.0);
    CHECK(pol.HAt(k).norm() == 0.0);
  }
  dm.A = MatSeries(Mat(0.8 * Mat::Identity(2, 2)));
  const ExoPolicy inf = ExoGainsInfinite(dm, RiccatiAlgebraic(dm), Vec::Zero(2));
  CHECK(inf.Gsum.norm() == 0.0);
  CHECK(inf.Gn(3).norm() == 0.0);
  CHECK(inf.HAt(0).norm() == 0.0);
}

TEST_CASE("finite Riccati stays above the stage weight and converges") {
  testing::RandomSpecOptions opt;
  opt.n = 2;
  opt.horizon = 50;
  opt.beta = 0.95;
  const LqGameSpec spec = testing::RandomLqSpec(11, opt);
  DmBlock dm = spec.per_dm[0];
  dm.A = MatSeries(Mat(0.7 * dm.A.At(0) / std::max(1.0, linalg::SpectralRadius(dm.A.At(0)))));
  const RiccatiLadder l50 = RiccatiFinite(dm, 50);
  const RiccatiLadder l51 = RiccatiFinite(dm, 51);
  CHECK((l50.M[0] - l51.M[0]).norm() <= 1e-10);
  for (int k = 0; k < 50; ++k) {
    CHECK(linalg::MinEigenvalue(l50.M[k] - dm.Q.At(k)) >= -1e-10);
  }
  const RiccatiLadder l200 = RiccatiFinite(dm, 200);
  const RiccatiLadder alg = RiccatiAlgebraic(dm);
  CHECK((l200.M[0] - alg.M[0]).norm() <= 1e-8);
}

TEST_CASE("algebraic Riccati") {
  ScalarGameParams params;
  params.beta = 0.9;
  params.horizon = kInfiniteHorizon;
  const DmBlock dm = MakeScalarGame(params, 1).per_dm[0];
  const RiccatiLadder ladder = RiccatiAlgebraic(dm);
  CHECK(Scalar(ladder.M[0]) == doctest::Approx(1.5884033489985555906).epsilon(1e-12));
  CHECK(Scalar(ladder.F[0]) == doctest::Approx(-0.58840334899855559064).epsilon(1e-12));
  CHECK(ladder.residual <= 1e-10);

  RiccatiOptions from_above;
  from_above.init = 10.0 * dm.Q.At(0);
  CHECK((RiccatiAlgebraic(dm, from_above).M[0] - ladder.M[0]).norm() <= 1e-9);

  DmBlock myopic = dm;
  myopic.beta = 0.0;
  const RiccatiLadder m0 = RiccatiAlgebraic(myopic);
  CHECK(Scalar(m0.M[0]) == 1.0);
  CHECK(Scalar(m0.F[0]) == 0.0);

  DmBlock stuck = dm;
  stuck.A = MatSeries(Mat::Constant(1, 1, 2.0));
  stuck.B = MatSeries(Mat::Zero(1, 1));
  CHECK_THROWS_AS(RiccatiAlgebraic(stuck), Error);
}

TEST_CASE("summed gain matches the partial sum") {
  ScalarGameParams params;
  params.beta = 0.9;
  params.a = 0.8;
  params.horizon = kInfiniteHorizon;
  DmBlock dm = MakeScalarGame(params, 1).per_dm[0];
  dm.C = MatSeries(Mat::Constant(1, 1, 0.3));
  dm.L = MatSeries(Mat::Constant(1, 1, 0.4));
  const ExoPolicy pol = ExoGainsInfinite(dm, RiccatiAlgebraic(dm), Vec::Constant(1, 0.7));
  Mat partial = Mat::Zero(1, 1);
  for (int n = 0; n <= 200; ++n) partial += pol.Gn(n);
  CHECK((partial - pol.Gsum).norm() <= 1e-12);
  CHECK(pol.HAt(0).norm() > 0.0);
  const ExoPolicy zero_mean = ExoGainsInfinite(dm, RiccatiAlgebraic(dm), Vec::Zero(1));
  CHECK(zero_mean.HAt(0).norm() == 0.0);
}

TEST_CASE("exact cost of the scalar game") {
  const LqGameSpec spec = MakeScalarGame({}, 1);
  const ExoPolicy pol = SolveExo(spec, 0);
  const GaussianLaw x0{Vec::Zero(1), Mat::Zero(1, 1)};
  const Series<GaussianLaw> w(GaussianLaw{Vec::Zero(1), Mat::Zero(1, 1)});
  EnvSequenceLaw env{1, Vec::Zero(3), Mat::Zero(3, 3)};
  CHECK(EvalExoCost(pol, spec.per_dm[0], x0, w, env) == 0.0);

  std::mt19937_64 rng(5);
  env = RandomEnv(rng, 1, 2);
  const GaussianLaw x0n{Vec::Constant(1, 0.3), Mat::Identity(1, 1)};
  const double base = EvalExoCost(pol, spec.per_dm[0], x0n, spec.noise.w[1], env);
  for (double d : {-0.01, 0.01}) {
    ExoPolicy bumped = pol;
    bumped.F[1](0, 0) += d;
    CHECK(EvalExoCost(bumped, spec.per_dm[0], x0n, spec.noise.w[1], env) > base);
  }
}

void CheckOptimal(const ExoPolicy& pol, const DmBlock& dm, const GaussianLaw& x0,
                  const Series<GaussianLaw>& w, const EnvSequenceLaw& env,
                  std::uint64_t seed) {
  const double base = EvalExoCost(pol, dm, x0, w, env);
  const std::vector<double> theta = Flatten(pol);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    std::vector<double> up = theta, dn = theta;
    up[i] += h;
    dn[i] -= h;
    const double g = (EvalExoCost(Unflatten(pol, up), dm, x0, w, env) -
                      EvalExoCost(Unflatten(pol, dn), dm, x0, w, env)) /
                     (2.0 * h);
    worst = std::max(worst, std::abs(g));
  }
  CHECK(worst <= 1e-6 * (1.0 + std::abs(base)));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1e-2);
  int lower = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v = theta;
    for (double& x : v) x += nd(rng);
    if (EvalExoCost(Unflatten(pol, v), dm, x0, w, env) < base - 1e-10) ++lower;
  }
  CHECK(lower == 0);
}

TEST_CASE("exo-optimal policy is stationary and minimal (finite)") {
  testing::RandomSpecOptions opt;
  opt.n = 2;
  opt.m = 2;
  opt.p = 2;
  opt.horizon = 5;
  const LqGameSpec spec = testing::RandomLqSpec(21, opt);
  const ExoPolicy pol = SolveExo(spec, 0);
  std::mt19937_64 rng(8);
  const EnvSequenceLaw env = RandomEnv(rng, 2, 5);
  const GaussianLaw x0{RandomMatrix(rng, 2, 1, 1.0), RandomSpd(rng, 2, 0.3, 1.0)};
  CheckOptimal(pol, spec.per_dm[0], x0, spec.noise.w[1], env, 99);
}

TEST_CASE("exo-optimal policy is stationary and minimal (infinite)") {
  testing::RandomSpecOptions opt;
  opt.n = 2;
  opt.horizon = kInfiniteHorizon;
  opt.beta = 0.6;
  const LqGameSpec spec = testing::RandomLqSpec(31, opt);
  const ExoPolicy pol = SolveExo(spec, 0);
  const int horizon = TruncationHorizon(0.6);
  std::mt19937_64 rng(9);
  EnvSequenceLaw env = RandomEnv(rng, 1, horizon + 20);
  const GaussianLaw x0{RandomMatrix(rng, 2, 1, 1.0), RandomSpd(rng, 2, 0.3, 1.0)};
  CheckOptimal(pol, spec.per_dm[0], x0, spec.noise.w[1], env, 98);
  env = RandomEnv(rng, 1, horizon - 1);
  CHECK_THROWS_AS(EvalExoCost(pol, spec.per_dm[0], x0, spec.noise.w[1], env), Error);
}

}  // namespace
}  // namespace sebeu
