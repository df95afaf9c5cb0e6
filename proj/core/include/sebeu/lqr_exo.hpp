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

#ifndef SEBEU_LQR_EXO_HPP_
#define SEBEU_LQR_EXO_HPP_

#include <vector>

#include "sebeu/linalg.hpp"
#include "sebeu/model.hpp"

namespace sebeu {

// c(x,u,z) = |x + x_shift z|_Q^2 + |u + u_shift z|_R^2 - |z|_correction^2.
struct SquaresPieces {
  Mat q, r;
  Mat x_shift;     // Q^-1 L'
  Mat u_shift;     // R^-1 K'
  Mat correction;  // L Q^-1 L' + K R^-1 K'

  double Evaluate(const Vec& x, const Vec& u, const Vec& z) const;
};

SquaresPieces CompleteSquares(const Mat& q, const Mat& r, const Mat& k,
                              const Mat& l);

// Backward Riccati data. Finite horizon: M has T+1 entries, S, F and Gamma
// have T. Infinite horizon: one entry each.
struct RiccatiLadder {
  std::vector<Mat> M, S, F;
  // Gamma[n] = beta (A_n + B_n F_n)'.
  std::vector<Mat> Gamma;
  int iterations = 0;
  double residual = 0.0;

  int horizon() const { return static_cast<int>(F.size()); }
  // Gamma_{k+1} ... Gamma_t, identity when t == k.
  Mat Phi(int k, int t) const;
};

RiccatiLadder RiccatiFinite(const DmBlock& dm, int horizon);

struct RiccatiOptions {
  Mat init;  // empty means zero
  double damping = 1.0;
  int budget = 100000;
  double tol = 1e-12;
};

// Throws kNoConvergence with the last residual, kInstabilityDetected when
// sqrt(beta)(A + BF) is not stable.
RiccatiLadder RiccatiAlgebraic(const DmBlock& dm,
                               const RiccatiOptions& options = {});

// u_k = F_k x_k + sum_{t >= k} G_{k,t} E[z_t | Z_{k-1}] + H_k.
struct ExoPolicy {
  bool infinite = false;
  int horizon = 0;
  std::vector<Mat> F;
  // Finite: G[k][t - k] for t in [k, T).
  std::vector<std::vector<Mat>> G;
  std::vector<Vec> H;

  // Infinite: G_0 = G0 and G_n = P Gamma^{n-1} V for n >= 1.
  Mat G0, P, Gamma, V;
  Mat Gsum;  // sum over n of G_n

  const Mat& FAt(int k) const { return F.size() == 1 ? F.front() : F.at(k); }
  const Vec& HAt(int k) const { return H.size() == 1 ? H.front() : H.at(k); }
  Mat Gn(int n) const;
  Mat GAt(int k, int t) const;
  int m() const { return static_cast<int>(FAt(0).rows()); }
  int n() const { return static_cast<int>(FAt(0).cols()); }
  int p() const;
};

// `w_mean[t]` is the mean of this DM's state noise at stage t (broadcast
// when it has one entry).
ExoPolicy ExoGainsFinite(const DmBlock& dm, int horizon,
                         const RiccatiLadder& ladder,
                         const std::vector<Vec>& w_mean);
ExoPolicy ExoGainsInfinite(const DmBlock& dm, const RiccatiLadder& ladder,
                           const Vec& w_mean);

// Riccati plus gains for DM j of a spec.
ExoPolicy SolveExo(const LqGameSpec& spec, int j);

// Recomputes Gsum from (G0, P, Gamma, V); throws kInstabilityDetected when
// the resolvent does not exist.
void RefreshSummedGain(ExoPolicy& policy);

// Gaussian law of (z_{-1}, z_0, ..., z_{L-1}) stacked.
struct EnvSequenceLaw {
  int p = 1;
  Vec mean;
  Mat cov;
  int length() const { return static_cast<int>(mean.size()) / p - 1; }
};

// Smallest T with beta^T / (1 - beta) <= tol.
int TruncationHorizon(double beta, double tol = 1e-10);

// Exact expected cost sum_t beta^t c_t (+ beta^T |x_T|_QT^2 when finite).
// The DM's initial state and noises are independent of the environment.
// Infinite horizon truncates at TruncationHorizon(beta); the law must cover
// at least that many stages.
double EvalExoCost(const ExoPolicy& policy, const DmBlock& dm,
                   const GaussianLaw& x0, const Series<GaussianLaw>& w,
                   const EnvSequenceLaw& env);

std::vector<double> Flatten(const ExoPolicy& policy);
ExoPolicy Unflatten(const ExoPolicy& shape, const std::vector<double>& values);

}  // namespace sebeu

#endif  // SEBEU_LQR_EXO_HPP_
