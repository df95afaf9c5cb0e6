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

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "sebeu/error.hpp"
#include "sebeu/gaussian_forms.hpp"

namespace sebeu {
namespace {

Mat Identity(Eigen::Index n) { return Mat::Identity(n, n); }

// -S^{-1} rhs with S checked for definiteness.
Mat NegSolve(const Mat& s, const Mat& rhs) {
  return -linalg::SpdSolve(s, rhs, "S = R + beta B'MB");
}

Mat RiccatiStep(const DmBlock& dm, const Mat& m, int t) {
  const Mat& a = dm.A.At(t);
  const Mat& b = dm.B.At(t);
  const double beta = dm.beta;
  const Mat s = dm.R.At(t) + beta * b.transpose() * m * b;
  const Mat mb = m * b;
  const Mat inner =
      m - beta * mb * linalg::SpdSolve(s, mb.transpose(), "S = R + beta B'MB");
  return linalg::Symmetrize(dm.Q.At(t) + beta * a.transpose() * inner * a);
}

void AppendMat(std::vector<double>& out, const Mat& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

void ReadMat(Mat& m, const std::vector<double>& in, std::size_t& pos) {
  if (pos + static_cast<std::size_t>(m.size()) > in.size()) {
    throw Error(ErrorKind::kDimension, "flattened policy is too short");
  }
  std::copy(in.begin() + static_cast<std::ptrdiff_t>(pos),
            in.begin() + static_cast<std::ptrdiff_t>(pos + m.size()),
            m.data());
  pos += static_cast<std::size_t>(m.size());
}

}  // namespace

double SquaresPieces::Evaluate(const Vec& x, const Vec& u,
                               const Vec& z) const {
  const Vec xs = x + x_shift * z;
  const Vec us = u + u_shift * z;
  return xs.dot(q * xs) + us.dot(r * us) - z.dot(correction * z);
}

SquaresPieces CompleteSquares(const Mat& q, const Mat& r, const Mat& k,
                              const Mat& l) {
  SquaresPieces out;
  out.q = q;
  out.r = r;
  out.x_shift = linalg::SpdSolve(q, l.transpose(), "Q");
  out.u_shift = linalg::SpdSolve(r, k.transpose(), "R");
  out.correction = linalg::Symmetrize(l * out.x_shift + k * out.u_shift);
  return out;
}

Mat RiccatiLadder::Phi(int k, int t) const {
  Mat out = Identity(Gamma.front().rows());
  for (int n = k + 1; n <= t; ++n) out = out * Gamma.at(n);
  return out;
}

RiccatiLadder RiccatiFinite(const DmBlock& dm, int horizon) {
  if (horizon < 1) {
    throw Error(ErrorKind::kInvalidArgument, "horizon must be positive");
  }
  RiccatiLadder ladder;
  ladder.M.resize(horizon + 1);
  ladder.S.resize(horizon);
  ladder.F.resize(horizon);
  ladder.Gamma.resize(horizon);
  ladder.M[horizon] = dm.QT;
  const double beta = dm.beta;
  for (int k = horizon - 1; k >= 0; --k) {
    const Mat& a = dm.A.At(k);
    const Mat& b = dm.B.At(k);
    const Mat& next = ladder.M[k + 1];
    ladder.S[k] = linalg::Symmetrize(dm.R.At(k) + beta * b.transpose() * next * b);
    ladder.F[k] = NegSolve(ladder.S[k], beta * b.transpose() * next * a);
    ladder.M[k] = RiccatiStep(dm, next, k);
    ladder.Gamma[k] = beta * (a + b * ladder.F[k]).transpose();
  }
  return ladder;
}

RiccatiLadder RiccatiAlgebraic(const DmBlock& dm,
                               const RiccatiOptions& options) {
  const int n = dm.n();
  Mat m = options.init.size() == 0 ? Mat(Mat::Zero(n, n)) : options.init;
  const double damping = options.damping;
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "damping must lie in (0, 1]");
  }
  double step = 0.0;
  int it = 0;
  for (; it < options.budget; ++it) {
    const Mat next = RiccatiStep(dm, m, 0);
    step = (next - m).norm();
    m = (1.0 - damping) * m + damping * next;
    if (step <= options.tol * std::max(1.0, m.norm())) break;
  }
  const double residual = (RiccatiStep(dm, m, 0) - m).norm();
  if (it >= options.budget || residual > 1e-10 * std::max(1.0, m.norm())) {
    throw Error(ErrorKind::kNoConvergence,
                "algebraic Riccati iteration did not converge; residual " +
                    std::to_string(residual),
                "riccati convergence", residual);
  }
  RiccatiLadder ladder;
  const Mat& a = dm.A.At(0);
  const Mat& b = dm.B.At(0);
  const double beta = dm.beta;
  ladder.M = {m};
  ladder.S = {linalg::Symmetrize(dm.R.At(0) + beta * b.transpose() * m * b)};
  ladder.F = {NegSolve(ladder.S[0], beta * b.transpose() * m * a)};
  ladder.Gamma = {beta * (a + b * ladder.F[0]).transpose()};
  ladder.iterations = it + 1;
  ladder.residual = residual;
  const double rho = linalg::SpectralRadius(std::sqrt(beta) * (a + b * ladder.F[0]));
  if (rho >= 1.0) {
    throw Error(ErrorKind::kInstabilityDetected,
                "sqrt(beta)(A + BF) is not stable", "stabilizable (A, B)", rho);
  }
  return ladder;
}

int ExoPolicy::p() const {
  if (infinite) return static_cast<int>(G0.cols());
  return static_cast<int>(G.front().front().cols());
}

Mat ExoPolicy::Gn(int n) const {
  if (n == 0) return G0;
  Mat acc = V;
  for (int i = 1; i < n; ++i) acc = Gamma * acc;
  return P * acc;
}

Mat ExoPolicy::GAt(int k, int t) const {
  if (infinite) return Gn(t - k);
  return G.at(k).at(t - k);
}

void RefreshSummedGain(ExoPolicy& policy) {
  const double rho = linalg::SpectralRadius(policy.Gamma);
  if (rho >= 1.0) {
    throw Error(ErrorKind::kInstabilityDetected,
                "resolvent (I - beta(A+BF)')^-1 does not exist",
                "spectral radius < 1", rho);
  }
  const Mat eye = Identity(policy.Gamma.rows());
  policy.Gsum = policy.G0 + policy.P * (eye - policy.Gamma).lu().solve(policy.V);
}

ExoPolicy ExoGainsFinite(const DmBlock& dm, int horizon,
                         const RiccatiLadder& ladder,
                         const std::vector<Vec>& w_mean) {
  auto w_at = [&](int t) -> const Vec& {
    return w_mean.size() == 1 ? w_mean.front() : w_mean.at(t);
  };
  const double beta = dm.beta;
  ExoPolicy out;
  out.infinite = false;
  out.horizon = horizon;
  out.F = ladder.F;
  out.G.resize(horizon);
  out.H.resize(horizon);
  for (int k = 0; k < horizon; ++k) {
    const Mat& b = dm.B.At(k);
    const Mat& s = ladder.S[k];
    const Mat p_k = NegSolve(s, beta * b.transpose());
    out.G[k].push_back(NegSolve(
        s, dm.K.At(k).transpose() + beta * b.transpose() * ladder.M[k + 1] *
                                        dm.C.At(k)));
    Vec h_sum = ladder.M[k + 1] * w_at(k);
    Mat phi_prev = Identity(dm.n());  // Phi_{k,t-1}
    for (int t = k + 1; t < horizon; ++t) {
      const Mat phi = phi_prev * ladder.Gamma[t];
      const Mat inner =
          phi * ladder.M[t + 1] * dm.C.At(t) +
          phi_prev * (ladder.F[t].transpose() * dm.K.At(t).transpose() +
                      dm.L.At(t).transpose());
      out.G[k].push_back(p_k * inner);
      h_sum += phi * ladder.M[t + 1] * w_at(t);
      phi_prev = phi;
    }
    out.H[k] = p_k * h_sum;
  }
  return out;
}

ExoPolicy ExoGainsInfinite(const DmBlock& dm, const RiccatiLadder& ladder,
                           const Vec& w_mean) {
  const double beta = dm.beta;
  const Mat& b = dm.B.At(0);
  const Mat& m = ladder.M[0];
  const Mat& s = ladder.S[0];
  ExoPolicy out;
  out.infinite = true;
  out.horizon = kInfiniteHorizon;
  out.F = {ladder.F[0]};
  out.Gamma = ladder.Gamma[0];
  out.P = NegSolve(s, beta * b.transpose());
  out.G0 = NegSolve(s, dm.K.At(0).transpose() + beta * b.transpose() * m * dm.C.At(0));
  out.V = ladder.F[0].transpose() * dm.K.At(0).transpose() +
          dm.L.At(0).transpose() + out.Gamma * m * dm.C.At(0);
  RefreshSummedGain(out);
  const Mat eye = Identity(out.Gamma.rows());
  out.H = {out.P * (eye - out.Gamma).lu().solve(m * w_mean)};
  return out;
}

ExoPolicy SolveExo(const LqGameSpec& spec, int j) {
  const DmBlock& dm = spec.per_dm.at(j);
  const auto& w = spec.noise.w.at(j + 1);
  if (spec.infinite()) {
    return ExoGainsInfinite(dm, RiccatiAlgebraic(dm), w.At(0).mean);
  }
  std::vector<Vec> means;
  for (int t = 0; t < spec.horizon; ++t) means.push_back(w.At(t).mean);
  return ExoGainsFinite(dm, spec.horizon, RiccatiFinite(dm, spec.horizon),
                        means);
}

int TruncationHorizon(double beta, double tol) {
  if (beta <= 0.0) return 1;
  if (beta >= 1.0) {
    throw Error(ErrorKind::kInvalidArgument,
                "infinite horizon needs beta < 1 for truncation");
  }
  const double t = std::log(tol * (1.0 - beta)) / std::log(beta);
  return std::max(1, static_cast<int>(std::ceil(t)));
}

double EvalExoCost(const ExoPolicy& policy, const DmBlock& dm,
                   const GaussianLaw& x0, const Series<GaussianLaw>& w,
                   const EnvSequenceLaw& env) {
  const int horizon =
      policy.infinite ? TruncationHorizon(dm.beta) : policy.horizon;
  const int p = env.p;
  const int env_len = env.length();
  if (env_len < horizon) {
    throw Error(ErrorKind::kInvalidArgument,
                "environment law covers " + std::to_string(env_len) +
                    " stages, cost needs " + std::to_string(horizon));
  }
  // Lookahead for the G sums: to the end of the policy horizon when finite,
  // to the end of the supplied law when infinite.
  const int last = policy.infinite ? env_len - 1 : horizon - 1;

  PrimitiveSpace space;
  const int id_x0 = space.AddBlock(x0);
  const int id_z = space.AddBlock({env.mean, env.cov});
  std::vector<int> id_w(horizon);
  for (int t = 0; t < horizon; ++t) id_w[t] = space.AddBlock(w.At(t));

  const Eigen::Index z_col = space.BlockColumn(id_z);
  const Mat& z_factor = space.Factor(id_z);
  const Form z_all = space.BlockForm(id_z);

  std::vector<Mat> gn;
  if (policy.infinite) {
    gn.push_back(policy.G0);
    Mat acc = policy.V;
    for (int n = 1; n <= last; ++n) {
      gn.push_back(policy.P * acc);
      acc = policy.Gamma * acc;
    }
  }

  Form x = space.BlockForm(id_x0);
  double total = 0.0;
  double disc = 1.0;
  for (int k = 0; k < horizon; ++k) {
    const int m = policy.m();
    // sum_t G_{k,t} E[z_t | Z_{k-1}]: the causal factor of the z block keeps
    // only the columns of z_{-1}, ..., z_{k-1}.
    const int span = last - k + 1;
    Mat grow(m, static_cast<Eigen::Index>(span) * p);
    for (int t = k; t <= last; ++t) {
      grow.middleCols(static_cast<Eigen::Index>(t - k) * p, p) =
          policy.infinite ? gn[t - k] : policy.G[k][t - k];
    }
    const Eigen::Index row0 = static_cast<Eigen::Index>(k + 1) * p;
    const Eigen::Index rows = static_cast<Eigen::Index>(span) * p;
    const Eigen::Index known = static_cast<Eigen::Index>(k + 1) * p;
    Form u = policy.FAt(k) * x;
    u.offset += grow * env.mean.segment(row0, rows) + policy.HAt(k);
    u.coeff.middleCols(z_col, known).noalias() +=
        grow * z_factor.block(row0, 0, rows, known);

    const Form z = z_all.Rows(row0, p);
    const double stage = ExpectQuad(x, dm.Q.At(k)) + ExpectQuad(u, dm.R.At(k)) +
                         2.0 * ExpectQuad(z, dm.K.At(k), u) +
                         2.0 * ExpectQuad(z, dm.L.At(k), x);
    total += disc * stage;
    disc *= dm.beta;

    Form next = dm.A.At(k) * x;
    next.AddProduct(dm.B.At(k), u);
    next.AddProduct(dm.C.At(k), z);
    next += space.BlockForm(id_w[k]);
    x = std::move(next);
  }
  if (!policy.infinite) total += disc * ExpectQuad(x, dm.QT);
  return total;
}

std::vector<double> Flatten(const ExoPolicy& policy) {
  std::vector<double> out;
  if (policy.infinite) {
    AppendMat(out, policy.F.front());
    AppendMat(out, policy.G0);
    AppendMat(out, policy.P);
    AppendMat(out, policy.Gamma);
    AppendMat(out, policy.V);
    AppendMat(out, policy.H.front());
    return out;
  }
  for (int k = 0; k < policy.horizon; ++k) {
    AppendMat(out, policy.F[k]);
    for (const Mat& g : policy.G[k]) AppendMat(out, g);
    AppendMat(out, policy.H[k]);
  }
  return out;
}

ExoPolicy Unflatten(const ExoPolicy& shape, const std::vector<double>& values) {
  ExoPolicy out = shape;
  std::size_t pos = 0;
  if (out.infinite) {
    ReadMat(out.F.front(), values, pos);
    ReadMat(out.G0, values, pos);
    ReadMat(out.P, values, pos);
    ReadMat(out.Gamma, values, pos);
    ReadMat(out.V, values, pos);
    Mat h = out.H.front();
    ReadMat(h, values, pos);
    out.H.front() = h;
    if (linalg::SpectralRadius(out.Gamma) < 1.0) RefreshSummedGain(out);
  } else {
    for (int k = 0; k < out.horizon; ++k) {
      ReadMat(out.F[k], values, pos);
      for (Mat& g : out.G[k]) ReadMat(g, values, pos);
      Mat h = out.H[k];
      ReadMat(h, values, pos);
      out.H[k] = h;
    }
  }
  if (pos != values.size()) {
    throw Error(ErrorKind::kDimension, "flattened policy has extra entries");
  }
  return out;
}

}  // namespace sebeu
