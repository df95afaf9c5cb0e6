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

#include "support/random_specs.hpp"

#include <Eigen/QR>

#include "sebeu/linalg.hpp"

namespace sebeu::testing {
namespace {

Mat Stable(std::mt19937_64& rng, int n, double radius) {
  Mat a = RandomMatrix(rng, n, n, 0.5);
  const double rho = linalg::SpectralRadius(a);
  if (rho > radius) a *= radius / rho;
  return a;
}

// Entries of magnitude in [0.15, 0.35] with random sign.
Mat AwayFromZero(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> mag(0.15, 0.35);
  std::bernoulli_distribution sign(0.5);
  Mat out(rows, cols);
  for (int i = 0; i < out.size(); ++i) {
    out.data()[i] = sign(rng) ? mag(rng) : -mag(rng);
  }
  return out;
}

Mat Uniform(std::mt19937_64& rng, int rows, int cols, double half_width) {
  std::uniform_real_distribution<double> d(-half_width, half_width);
  Mat out(rows, cols);
  for (int i = 0; i < out.size(); ++i) out.data()[i] = d(rng);
  return out;
}

GaussianLaw RandomLaw(std::mt19937_64& rng, int n, double mean_scale) {
  return {RandomMatrix(rng, n, 1, mean_scale), RandomSpd(rng, n, 0.2, 0.6)};
}

}  // namespace

Mat RandomMatrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Mat out(rows, cols);
  for (int i = 0; i < out.size(); ++i) out.data()[i] = d(rng);
  return out;
}

Mat RandomSpd(std::mt19937_64& rng, int n, double lo, double spread) {
  const Mat q = Eigen::HouseholderQR<Mat>(RandomMatrix(rng, n, n, 1.0))
                    .householderQ() *
                Mat::Identity(n, n);
  std::uniform_real_distribution<double> d(lo, lo + spread);
  Vec eig(n);
  for (int i = 0; i < n; ++i) eig(i) = d(rng);
  return linalg::Symmetrize(q * eig.asDiagonal() * q.transpose());
}

LqGameSpec RandomLqSpec(std::uint64_t seed, const RandomSpecOptions& o) {
  std::mt19937_64 rng(seed);
  LqGameSpec spec;
  spec.n_dm = o.n_dm;
  spec.horizon = o.horizon;
  const bool infinite = o.horizon == kInfiniteHorizon;

  auto make_dm = [&]() {
    DmBlock dm;
    dm.A = MatSeries(Stable(rng, o.n, infinite ? 1.05 : 1.2));
    dm.B = MatSeries(RandomMatrix(rng, o.n, o.m, 0.7));
    dm.C = MatSeries(o.decoupled ? Mat(Mat::Zero(o.n, o.p))
                                 : Uniform(rng, o.n, o.p, 0.25));
    dm.Q = MatSeries(RandomSpd(rng, o.n, 0.5, 1.0));
    dm.R = MatSeries(RandomSpd(rng, o.m, 0.5, 1.0));
    dm.K = MatSeries(o.decoupled ? Mat(Mat::Zero(o.p, o.m))
                                 : RandomMatrix(rng, o.p, o.m, 0.4));
    dm.L = MatSeries(o.decoupled ? Mat(Mat::Zero(o.p, o.n))
                                 : RandomMatrix(rng, o.p, o.n, 0.3));
    dm.QT = infinite ? Mat() : dm.Q.At(0);
    dm.beta = o.beta;
    return dm;
  };

  spec.env.n0 = o.n0;
  spec.env.p = o.p;
  spec.env.A0 = MatSeries(Stable(rng, o.n0, 0.7));
  spec.env.D = MatSeries(RandomMatrix(rng, o.p, o.n0, 0.5));

  const int nx = o.n0 + o.n_dm * o.n;
  const int init_dim = o.p + nx;
  spec.noise.w.push_back(Series<GaussianLaw>(RandomLaw(rng, o.n0, 0.2)));
  DmBlock first = make_dm();
  GaussianLaw first_w = RandomLaw(rng, o.n, 0.2);
  Mat b1 = RandomMatrix(rng, o.n0, o.m, 0.3);
  Mat b2 = RandomMatrix(rng, o.n0, o.n, 0.2);
  Mat e1 = AwayFromZero(rng, o.p, o.m);
  Mat e2 = RandomMatrix(rng, o.p, o.n, 0.2);
  for (int j = 0; j < o.n_dm; ++j) {
    if (j > 0 && !o.symmetric) {
      first = make_dm();
      first_w = RandomLaw(rng, o.n, 0.2);
      b1 = RandomMatrix(rng, o.n0, o.m, 0.3);
      b2 = RandomMatrix(rng, o.n0, o.n, 0.2);
      e1 = AwayFromZero(rng, o.p, o.m);
      e2 = RandomMatrix(rng, o.p, o.n, 0.2);
    }
    spec.per_dm.push_back(first);
    spec.noise.w.push_back(Series<GaussianLaw>(first_w));
    spec.env.B1.push_back(MatSeries(b1));
    spec.env.B2.push_back(MatSeries(b2));
    spec.env.E1.push_back(MatSeries(e1));
    spec.env.E2.push_back(MatSeries(e2));
  }
  spec.noise.xi = Series<GaussianLaw>(RandomLaw(rng, o.p, 0.3));

  // Joint (y_{-1}, X_0): correlated, nonzero mean.
  const Mat mix = RandomMatrix(rng, init_dim, init_dim, 0.5);
  spec.noise.init.mean = RandomMatrix(rng, init_dim, 1, 0.5);
  spec.noise.init.cov = linalg::Symmetrize(
      mix * mix.transpose() + 0.3 * Mat::Identity(init_dim, init_dim));
  if (o.symmetric) {
    // Exchangeable initial states.
    const int head = o.p + o.n0;
    for (int j = 1; j < o.n_dm; ++j) {
      const int off = head + j * o.n;
      spec.noise.init.mean.segment(off, o.n) =
          spec.noise.init.mean.segment(head, o.n);
    }
    Mat cov = Mat::Zero(init_dim, init_dim);
    cov.topLeftCorner(head, head) =
        spec.noise.init.cov.topLeftCorner(head, head);
    const Mat own = spec.noise.init.cov.block(head, head, o.n, o.n);
    const Mat cross = spec.noise.init.cov.block(0, head, head, o.n);
    for (int j = 0; j < o.n_dm; ++j) {
      const int off = head + j * o.n;
      cov.block(off, off, o.n, o.n) = own;
      cov.block(0, off, head, o.n) = cross;
      cov.block(off, 0, o.n, head) = cross.transpose();
    }
    // Keep it PSD: shrink the cross terms until it is.
    while (linalg::MinEigenvalue(cov) < 1e-6) {
      for (int j = 0; j < o.n_dm; ++j) {
        const int off = head + j * o.n;
        cov.block(0, off, head, o.n) *= 0.5;
        cov.block(off, 0, o.n, head) *= 0.5;
      }
    }
    spec.noise.init.cov = cov;
  }
  spec.noise.iid = true;
  return spec;
}

}  // namespace sebeu::testing
