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

#ifndef SEBEU_SIMULATE_HPP_
#define SEBEU_SIMULATE_HPP_

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sebeu/gaussian_forms.hpp"
#include "sebeu/model.hpp"
#include "sebeu/sebeu_lq.hpp"

namespace sebeu {

enum class InitMode {
  // (y_{-1}, X_0) from the spec; Xhat_0 from the estimator's prior map.
  kPrior,
  // (X_0, Xhat_0) from the stationary law of a stationary profile.
  kSteadyState,
};

// Affine closed loop in Z = (X, Xhat):
//   y_t     = Y_t Z_t + y0_t + xi_t
//   Z_{t+1} = Zz_t Z_t + Zy_t y_t + z0_t + [W_t; 0]
struct LoopStage {
  Mat Y, Zz, Zy;
  Vec y0, z0;
};

struct LoopSystem {
  int nx = 0;
  int p = 0;
  std::vector<LoopStage> stages;  // one entry when time-invariant
  std::vector<GaussianLaw> w, xi;
  GaussianLaw z_init;

  const LoopStage& At(int t) const { return StageAt(stages, t); }
};

// The loop the game actually runs when DM j plays policies[j] and reads
// Xhat from the profile's estimator. `policies` defaults to the profile's.
LoopSystem TrueLoop(const LqGameSpec& spec, const SebeuLqProfile& profile,
                    InitMode mode, const std::vector<DmPolicy>* policies = nullptr);
// The exogenous model the profile's policies were optimized against.
LoopSystem ExoModelLoop(const LqGameSpec& spec, const SebeuLqProfile& profile,
                        InitMode mode);

struct MomentModel {
  int nx = 0;
  int p = 0;
  // Mean and covariance of (X_t, Xhat_t, y_t).
  std::vector<Vec> mean;
  std::vector<Mat> cov;
  // y_lag[t][h] = cov(y_{t+h}, y_t) while t + h is inside the horizon.
  std::vector<std::vector<Mat>> y_lag;

  int horizon() const { return static_cast<int>(mean.size()); }
  Vec YMean(int t) const { return mean[t].tail(p); }
  Mat YCov(int t) const { return cov[t].bottomRightCorner(p, p); }
  Vec XMean(int t) const { return mean[t].head(nx); }
  Mat XCov(int t) const { return cov[t].topLeftCorner(nx, nx); }
};

MomentModel PropagateMoments(const LoopSystem& loop, int horizon, int max_lag = 10);
MomentModel PropagateMoments(const LqGameSpec& spec, const SebeuLqProfile& profile,
                             int horizon, InitMode mode, int max_lag = 10);

// Every signal of one closed-loop run as affine forms of the primitives.
// x[t][0] is the environment state, x[t][j + 1] the state of DM j.
struct LoopForms {
  PrimitiveSpace space;
  Form y_prev;
  std::vector<Form> y, xhat;
  std::vector<std::vector<Form>> x, u;
};

// Replaces DM `deviator`'s control: called at stage t with the forms built
// so far (x[0..t], y[0..t-1], u[0..t-1]).
using DeviatorControl = std::function<Form(int t, const LoopForms& sofar)>;

LoopForms RollOutForms(const LqGameSpec& spec, const SebeuLqProfile& profile,
                       InitMode mode, int horizon, int deviator = -1,
                       const DeviatorControl& control = {},
                       const std::vector<DmPolicy>* policies = nullptr);

// E[sum_t beta^t c_t + beta^T |x_T|_QT^2] for DM j along `forms` (the
// terminal term only when the horizon is finite).
double ExpectedCostOfForms(const LqGameSpec& spec, const LoopForms& forms, int j);

struct TrajectoryBatch {
  int n_paths = 0;
  int horizon = 0;
  int n_dm = 0;
  std::uint64_t seed = 0;
  // [path][t][j] for DMs j in [0, N); y and d are [path][t].
  std::vector<std::vector<std::vector<Vec>>> x, u;
  std::vector<std::vector<Vec>> y, d;
};

struct SimulationOptions {
  int n_paths = 1000;
  int horizon = 10;
  std::uint64_t seed = 20260417;
  int workers = 0;  // 0: hardware concurrency
  InitMode mode = InitMode::kPrior;
};

// Path k draws from a generator seeded by a splitmix64 hash of (seed, k),
// so results do not depend on the worker count.
TrajectoryBatch SimulateTrajectories(const LqGameSpec& spec,
                                     const SebeuLqProfile& profile,
                                     const SimulationOptions& options);

// Columns path, t, dm, x, u, y, d; vector cells are ';'-joined.
void WriteTrajectoriesCsv(const TrajectoryBatch& batch, std::ostream& os);

std::uint64_t SplitMix64(std::uint64_t x);

struct DiscrepancyRow {
  std::string quantity;  // mean, cov, lag, forecast_mean, forecast_cov
  int t = 0;
  int s = 0;
  double closed_loop = 0.0;
  double model = 0.0;
  double gap = 0.0;
};

struct ConsistencyOptions {
  double tol = 1e-8;
  int max_lag = 10;
  // Stationary profiles: number of steps compared.
  int window = 30;
};

struct ConsistencyReport {
  bool passed = false;
  double tol = 0.0;
  double max_mean_gap = 0.0;
  double max_cov_gap = 0.0;
  double max_forecast_gap = 0.0;
  double max_gap = 0.0;
  std::vector<DiscrepancyRow> rows;
};

// Compares the environment law of the true loop (with `policies`, default
// the profile's) against the exogenous model, and the profile's forecasts
// E[y_n | Y_{t-1}] against the true conditional means.
ConsistencyReport ConsistencyCheck(const LqGameSpec& spec,
                                   const SebeuLqProfile& profile,
                                   const ConsistencyOptions& options = {},
                                   const std::vector<DmPolicy>* policies = nullptr);

void WriteConsistencyCsv(const ConsistencyReport& report, std::ostream& os);

}  // namespace sebeu

#endif  // SEBEU_SIMULATE_HPP_
