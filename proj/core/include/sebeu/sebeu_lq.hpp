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

#ifndef SEBEU_SEBEU_LQ_HPP_
#define SEBEU_SEBEU_LQ_HPP_

#include <string>
#include <vector>

#include "sebeu/linalg.hpp"
#include "sebeu/lqr_exo.hpp"
#include "sebeu/model.hpp"

namespace sebeu {

template <class T>
const T& StageAt(const std::vector<T>& v, int t) {
  return v.size() == 1 ? v.front() : v.at(t);
}

// Closed loop in stacked form, X = (x^0, x^1, ..., x^N):
//   y_t     = D_t X_t + sum_k Gp(t,k) E[y_k|Y_{t-1}] + Hp_t + xi_t
//   X_{t+1} = A_t X_t + sum_k GX(t,k) E[y_k|Y_{t-1}] + HX_t + C_t y_t + W_t
// Infinite horizon: one entry per vector and Gp(0, n) is the n-step gain.
struct ClosedLoopCoeffs {
  bool infinite = false;
  int horizon = 0;
  int p = 0;
  int nx = 0;
  std::vector<Mat> D, A, C;
  std::vector<Vec> Hp, HX;
  std::vector<Vec> xi_mean, w_mean;
  // How DM j's control enters y and X at stage t: lift_p[t][j], lift_X[t][j].
  std::vector<std::vector<Mat>> lift_p, lift_X;
  std::vector<ExoPolicy> policies;

  Mat Gp(int t, int k) const;
  Mat GX(int t, int k) const;
  const Mat& LiftP(int t, int j) const { return StageAt(lift_p, t).at(j); }
  const Mat& LiftX(int t, int j) const { return StageAt(lift_X, t).at(j); }
};

// Stacked matrices of one stage for feedback gains f[j] (one per DM).
struct StackedStage {
  Mat D, A, C;
  std::vector<Mat> lift_p, lift_X;
};
StackedStage StackDynamics(const LqGameSpec& spec, const std::vector<Mat>& f,
                           int t);

ClosedLoopCoeffs AssembleClosedLoop(const LqGameSpec& spec,
                                    const std::vector<ExoPolicy>& policies);

// E[y_t | Y_{k-1}] = a[t-k] E[X_k | Y_{k-1}] + b[t-k] for t in [k, T).
struct EnvEquationSlice {
  std::vector<Mat> a;
  std::vector<Vec> b;
  double condition = 1.0;
  double determinant = 1.0;  // det(I - Lambda_k)
};

// Throws kSingularEquilibrium when I - Lambda_k has condition number above
// 1e12.
EnvEquationSlice SolveEnvEquations(const ClosedLoopCoeffs& coeffs, int k);

struct EnvAffineSolution {
  // Finite horizon: one slice per k.
  std::vector<EnvEquationSlice> slices;
  // Infinite horizon: [a_n, b_n] = a_tilde * A_tilde^n, where A_tilde is the
  // augmented mean propagator [[Abar, cbar], [0, 1]].
  Mat a_tilde, A_tilde;
  int iterations = 0;
  std::vector<double> residual_trace;
  double window_residual = 0.0;

  Mat MeanPropagator() const;
  Mat an(int n) const;
  Vec bn(int n) const;
};

struct FixedPointOptions {
  double damping = 0.5;
  int budget = 10000;
  double tol = 1e-13;
  int window = 200;
};

// Stationary ansatz E[y_t] = a X_t + b with X_{t+1} = Abar X_t + cbar.
// Throws kNoConvergence (with the residual trace tail in the message) or
// kInstabilityDetected.
EnvAffineSolution SolveInfiniteEnvFixedPoint(
    const ClosedLoopCoeffs& coeffs, const FixedPointOptions& options = {});

// u = F x + G Xhat + H.
struct DmPolicy {
  std::vector<Mat> F, G;
  std::vector<Vec> H;
  const Mat& FAt(int t) const { return StageAt(F, t); }
  const Mat& GAt(int t) const { return StageAt(G, t); }
  const Vec& HAt(int t) const { return StageAt(H, t); }
};

// The exogenous environment model the policies are optimal against:
//   ybar_t     = D_t Xbar_t + Gp_t Xhat_t + hp_t + xibar_t
//   Xbar_{t+1} = A_t Xbar_t + GX_t Xhat_t + hX_t + C_t ybar_t + Wbar_t
// with Xhat_t = E[Xbar_t | Ybar_{t-1}].
struct ExoModel {
  std::vector<Mat> D, A, C, Gp, GX;
  std::vector<Vec> hp, hX;
};

// Xhat_{t+1} = Phi_t Xhat_t + Gamma_t y_t + kappa_t.
// Xhat_0 = x0_offset + x0_gain y_{-1} unless the profile is stationary,
// in which case Xhat_0 is drawn jointly with X_0 from the steady state.
struct KalmanEstimator {
  Vec x0_offset;
  Mat x0_gain;
  std::vector<Mat> Phi, Gamma, L, Sigma;
  std::vector<Vec> kappa;
};

struct StationaryState {
  Mat Sigma, Theta, Acl, Bcl, kalman_gain;
  Vec x_hat0;
  double sigma_residual = 0.0;
  double theta_residual = 0.0;
  double x_hat_residual = 0.0;
  double acl_radius = 0.0;
  int sigma_iterations = 0;
};

struct SebeuLqProfile {
  bool infinite = false;
  int horizon = 0;
  std::vector<ExoPolicy> exo;
  ClosedLoopCoeffs coeffs;
  EnvAffineSolution env;
  std::vector<DmPolicy> policies;
  ExoModel model;
  KalmanEstimator estimator;
  StationaryState stationary;
};

SebeuLqProfile BuildSebeuFinite(const LqGameSpec& spec);
SebeuLqProfile BuildSebeuInfiniteStationary(
    const LqGameSpec& spec, const FixedPointOptions& options = {});
SebeuLqProfile BuildSebeu(const LqGameSpec& spec);

// Time-varying Kalman recursion for a finite exogenous model, seeded with
// the joint law of (y_{-1}, X_0).
KalmanEstimator BuildKalmanFinite(const LqGameSpec& spec, const ExoModel& model,
                                  int horizon);

// Gaussian conditioning of X_0 on y_{-1}: returns (offset, gain, cov).
struct InitialPrior {
  Vec offset;
  Mat gain;
  Mat cov;
};
InitialPrior PriorFromInit(const LqGameSpec& spec);

struct MeanFieldSolution {
  ExoPolicy exo;
  Vec y_hat, x_hat;
  // u = F x + offset with offset = G y_hat + H.
  Mat F, G;
  Vec H, offset;
  double condition = 1.0;
  bool init_matches = true;
  std::string warning;
};

// Identical DMs, C = 0, no environment state, infinite horizon; throws
// kStructure otherwise and kSingularEquilibrium for a singular system.
MeanFieldSolution SolveMeanField(const LqGameSpec& spec);

}  // namespace sebeu

#endif  // SEBEU_SEBEU_LQ_HPP_
