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

#ifndef SEBEU_MODEL_HPP_
#define SEBEU_MODEL_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "sebeu/error.hpp"
#include "sebeu/linalg.hpp"
#include "sebeu/rational.hpp"

namespace sebeu {

inline constexpr int kInfiniteHorizon = -1;

// A quantity given either once (broadcast over all stages) or per stage.
template <class T>
struct Series {
  std::vector<T> items;

  Series() = default;
  Series(T single) : items{std::move(single)} {}  // NOLINT
  explicit Series(std::vector<T> per_stage) : items(std::move(per_stage)) {}

  const T& At(int t) const {
    return items.size() == 1 ? items.front() : items.at(t);
  }
  bool time_varying() const { return items.size() > 1; }
};

using MatSeries = Series<Mat>;

struct GaussianLaw {
  Vec mean;
  Mat cov;
  int dim() const { return static_cast<int>(mean.size()); }
};

// One decision maker: x' = A x + B u + C y + w, stage cost
// |x|_Q^2 + |u|_R^2 + 2 y'(K u + L x), terminal |x|_QT^2.
// K is p x m and L is p x n.
struct DmBlock {
  MatSeries A, B, C, Q, R, K, L;
  Mat QT;
  double beta = 1.0;

  int n() const { return static_cast<int>(A.At(0).rows()); }
  int m() const { return static_cast<int>(B.At(0).cols()); }
};

// x0' = A0 x0 + (1/N) sum_j (B1_j u_j + B2_j x_j) + w0
// y   = D x0  + (1/N) sum_j (E1_j u_j + E2_j x_j) + xi
struct EnvBlock {
  int n0 = 0;
  int p = 1;
  MatSeries A0, D;
  std::vector<MatSeries> B1, B2, E1, E2;
};

struct NoiseSpec {
  // Joint law of (y_{-1}, x^0_0, x^1_0, ..., x^N_0).
  GaussianLaw init;
  // w[0] is the environment-state noise, w[j] the noise of DM j.
  std::vector<Series<GaussianLaw>> w;
  Series<GaussianLaw> xi;
  bool iid = true;
};

struct LqGameSpec {
  int n_dm = 1;
  int horizon = 1;
  std::vector<DmBlock> per_dm;
  EnvBlock env;
  NoiseSpec noise;

  bool infinite() const { return horizon == kInfiniteHorizon; }
  int p() const { return env.p; }
  int n0() const { return env.n0; }
  // Dimension of the stacked state X = (x^0, x^1, ..., x^N).
  int nx() const;
  // Offset of x^j inside X; j = 0 is the environment state.
  int StateOffset(int j) const;
  // Offset of x^j inside the initial vector (y_{-1}, X_0).
  int InitOffset(int j) const { return env.p + StateOffset(j); }

  // Stacked means and covariances of W_t = (w^0, ..., w^N) and xi_t.
  Vec WMean(int t) const;
  Mat WCov(int t) const;
  const GaussianLaw& Xi(int t) const { return noise.xi.At(t); }
};

// Single-stage finite game. Actions and disturbances are indexed; the
// environment values are exact rationals.
struct FiniteGameSpec {
  int n_dm = 1;
  std::vector<std::vector<std::string>> actions;
  std::vector<Rational> env_values;
  std::vector<std::string> disturbance_labels;
  std::vector<Rational> disturbance_pmf;
  // outcome[JointIndex(u) * |Xi| + k] is the index into env_values of
  // g(u, xi_k).
  std::vector<int> outcome;
  // cost[i][a][y] = c^i(action a, env_values[y]).
  std::vector<std::vector<std::vector<Rational>>> cost;

  int NumActions(int i) const { return static_cast<int>(actions[i].size()); }
  int NumDisturbances() const {
    return static_cast<int>(disturbance_pmf.size());
  }
  std::size_t JointCount() const;
  // Mixed radix with DM 0 as the most significant digit.
  std::size_t JointIndex(const std::vector<int>& a) const;
  std::vector<int> JointDecode(std::size_t index) const;
  int Outcome(std::size_t joint, int xi) const {
    return outcome[joint * disturbance_pmf.size() + xi];
  }
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool AllPassed() const;
  // First failing check with the given name prefix, or nullptr.
  const ValidationCheck* Find(const std::string& prefix) const;
};

// Structural checks that loading enforces: dimensions and definiteness.
// Throws Error(kDimension) or Error(kDefiniteness).
void CheckLqStructure(const LqGameSpec& spec);
void CheckFiniteStructure(const FiniteGameSpec& spec);

// Reports every modelling condition without throwing.
ValidationReport ValidateLqSpec(const LqGameSpec& spec);

// Scalar family used throughout: x' = a x + b u + w, cost
// q x^2 + r u^2 + 2 y u, y = mean of controls + xi, terminal q x^2.
struct ScalarGameParams {
  double a = 1.0;
  double b = 1.0;
  double q = 1.0;
  double r = 1.0;
  double var_x0 = 1.0;
  double var_w = 1.0;
  double var_xi = 1.0;
  double beta = 1.0;
  int horizon = 2;
};

LqGameSpec MakeScalarGame(const ScalarGameParams& params, int n_dm);

// Copies DM 0 of a one-DM spec n_dm times with independent initial states
// and noises.
LqGameSpec ReplicateDm(const LqGameSpec& single, int n_dm);

// Consumers choose {0,1,2}, price is the average, cost u*y - u.
FiniteGameSpec MakeDemandResponseGame(int n_dm);

}  // namespace sebeu

#endif  // SEBEU_MODEL_HPP_
