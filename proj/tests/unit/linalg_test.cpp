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

#include "sebeu/linalg.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "sebeu/error.hpp"
#include "sebeu/gaussian_forms.hpp"
#include "support/random_specs.hpp"

namespace sebeu {
namespace {

using testing::RandomMatrix;
using testing::RandomSpd;

TEST_CASE("eigenvalue helpers") {
  Mat m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(linalg::MinEigenvalue(m) == doctest::Approx(1.0));
  CHECK(linalg::SpectralRadius(m) == doctest::Approx(3.0));
  CHECK(linalg::IsSymmetric(m));
  m(0, 1) = 1.5;
  CHECK_FALSE(linalg::IsSymmetric(m));
  CHECK(linalg::SpectralRadius(Mat()) == 0.0);
  CHECK(std::isinf(linalg::MinEigenvalue(Mat())));
  Mat rot(2, 2);
  rot << 0, -2, 2, 0;
  CHECK(std::abs(linalg::DominantEigenvalue(rot)) == doctest::Approx(2.0));
}

TEST_CASE("spd solve and its definiteness error") {
  std::mt19937_64 rng(1);
  const Mat s = RandomSpd(rng, 4, 0.5, 1.0);
  const Mat rhs = RandomMatrix(rng, 4, 2, 1.0);
  CHECK((s * linalg::SpdSolve(s, rhs, "s") - rhs).norm() <= 1e-12);
  Mat bad = Mat::Identity(2, 2);
  bad(1, 1) = -1.0;
  try {
    linalg::SpdSolve(bad, Mat::Identity(2, 2), "R");
    FAIL("expected a definiteness error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDefiniteness);
    CHECK(e.metric() == doctest::Approx(-1.0));
  }
}

TEST_CASE("pseudo inverse and PSD factor") {
  Mat v(3, 1);
  v << 1, 2, 2;
  const Mat s = v * v.transpose();
  const Mat pinv = linalg::PsdPseudoInverse(s);
  CHECK((s * pinv * s - s).norm() <= 1e-12);
  const Mat l = linalg::PsdLowerFactor(s);
  CHECK((l * l.transpose() - s).norm() <= 1e-12);
  CHECK(l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);
  std::mt19937_64 rng(2);
  const Mat spd = RandomSpd(rng, 5, 0.1, 1.0);
  const Mat f = linalg::PsdLowerFactor(spd);
  CHECK((f * f.transpose() - spd).norm() <= 1e-11);
}

TEST_CASE("condition number and stabilizability") {
  CHECK(linalg::ConditionNumber(Mat::Identity(3, 3)) == doctest::Approx(1.0));
  Mat sing = Mat::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK(std::isinf(linalg::ConditionNumber(sing)));

  Mat a(2, 2);
  a << 1.2, 0, 0, 0.5;
  Mat b(2, 1);
  b << 1, 0;
  CHECK(linalg::IsStabilizable(a, b));
  b << 0, 1;
  CHECK_FALSE(linalg::IsStabilizable(a, b));
}

TEST_CASE("Stein and Lyapunov solvers") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Mat a = RandomMatrix(rng, 4, 4, 1.0);
    a *= 0.9 / linalg::SpectralRadius(a);
    const Mat q = RandomSpd(rng, 4, 0.1, 1.0);
    const Mat p = linalg::SolveDiscreteLyapunov(a, q);
    CHECK((a * p * a.transpose() + q - p).norm() <= 1e-9 * p.norm());

    Mat g = RandomMatrix(rng, 3, 3, 1.0);
    g *= 0.8 / std::max(1e-3, linalg::SpectralRadius(g));
    const Mat rhs = RandomMatrix(rng, 3, 2, 1.0);
    Mat a2 = RandomMatrix(rng, 2, 2, 1.0);
    a2 *= 0.7 / std::max(1e-3, linalg::SpectralRadius(a2));
    const Mat x = linalg::SolveStein(g, rhs, a2);
    CHECK((rhs + g * x * a2 - x).norm() <= 1e-10 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("block diagonal and symmetrize") {
  const Mat d = linalg::BlockDiagonal({Mat::Constant(1, 1, 2.0), Mat::Identity(2, 2)});
  CHECK(d.rows() == 3);
  CHECK(d(0, 0) == 2.0);
  CHECK(d(0, 1) == 0.0);
  CHECK(d(2, 2) == 1.0);
  Mat m(2, 2);
  m << 1, 2, 4, 1;
  CHECK(linalg::Symmetrize(m)(0, 1) == 3.0);
}

TEST_CASE("forms carry exact moments") {
  PrimitiveSpace space;
  GaussianLaw law;
  law.mean = Vec::Constant(2, 1.0);
  law.cov.resize(2, 2);
  law.cov << 2, 1, 1, 3;
  const int id = space.AddBlock(law);
  const Form x = space.BlockForm(id);
  CHECK((Mean(x) - law.mean).norm() == 0.0);
  CHECK((Cov(x) - law.cov).norm() <= 1e-12);
  // E[x' P x] = tr(P cov) + mean' P mean.
  const Mat p = Mat::Identity(2, 2);
  CHECK(ExpectQuad(x, p) == doctest::Approx(5.0 + 2.0));
  Mat m(1, 2);
  m << 1, -1;
  const Form d = m * x;
  CHECK(Cov(d)(0, 0) == doctest::Approx(2.0 + 3.0 - 2.0));
}

}  // namespace
}  // namespace sebeu
