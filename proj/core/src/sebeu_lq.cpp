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

#include "sebeu/sebeu_lq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "sebeu/error.hpp"

namespace sebeu {
namespace {

constexpr double kMaxCondition = 1e12;

Mat Eye(Eigen::Index n) { return Mat::Identity(n, n); }

std::string Num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Condition number with the largest singular value floored at 1, so a
// 1 x 1 system near zero still counts as singular.
double IdentityScaledCondition(const Mat& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(1.0, sv(0)) / smin;
}

// Solves m x = rhs after the condition-number gate.
Mat GatedSolve(const Mat& m, const Mat& rhs, const std::string& what,
               double* condition) {
  const double cond = IdentityScaledCondition(m);
  if (condition != nullptr) *condition = cond;
  if (!(cond <= kMaxCondition)) {
    throw Error(ErrorKind::kSingularEquilibrium,
                what + " is singular or ill-conditioned (condition number " +
                    Num(cond) + ")",
                "unique equilibrium environment variables", cond);
  }
  return m.partialPivLu().solve(rhs);
}

bool SameSeries(const MatSeries& a, const MatSeries& b) {
  if (a.items.size() != b.items.size()) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    if (a.items[i].rows() != b.items[i].rows() ||
        a.items[i].cols() != b.items[i].cols() || a.items[i] != b.items[i]) {
      return false;
    }
  }
  return true;
}

std::vector<ExoPolicy> SolveAllExo(const LqGameSpec& spec) {
  std::vector<ExoPolicy> out;
  out.reserve(spec.n_dm);
  for (int j = 0; j < spec.n_dm; ++j) out.push_back(SolveExo(spec, j));
  return out;
}

// Filter quantities of one step.
struct FilterStep {
  Mat gain;      // A Sigma D' S^+
  Mat next_cov;  // A (Sigma - Sigma D' S^+ D Sigma) A' + W
};

FilterStep KalmanStep(const Mat& a, const Mat& d, const Mat& sigma,
                      const Mat& xi_cov, const Mat& w_cov) {
  const Mat sd = sigma * d.transpose();
  const Mat s_pinv = linalg::PsdPseudoInverse(linalg::Symmetrize(d * sd + xi_cov));
  FilterStep out;
  out.gain = a * sd * s_pinv;
  out.next_cov = linalg::Symmetrize(
      a * (sigma - sd * s_pinv * sd.transpose()) * a.transpose() + w_cov);
  return out;
}

}  // namespace

Mat ClosedLoopCoeffs::Gp(int t, int k) const {
  Mat out = Mat::Zero(p, p);
  for (std::size_t j = 0; j < policies.size(); ++j) {
    out.noalias() += LiftP(t, static_cast<int>(j)) * policies[j].GAt(t, k);
  }
  return out;
}

Mat ClosedLoopCoeffs::GX(int t, int k) const {
  Mat out = Mat::Zero(nx, p);
  for (std::size_t j = 0; j < policies.size(); ++j) {
    out.noalias() += LiftX(t, static_cast<int>(j)) * policies[j].GAt(t, k);
  }
  return out;
}

StackedStage StackDynamics(const LqGameSpec& spec, const std::vector<Mat>& f,
                           int t) {
  if (static_cast<int>(f.size()) != spec.n_dm) {
    throw Error(ErrorKind::kDimension, "need one feedback gain per DM");
  }
  const int n0 = spec.n0();
  const int p = spec.p();
  const int nx = spec.nx();
  const double inv_n = 1.0 / spec.n_dm;
  StackedStage s;
  s.D = Mat::Zero(p, nx);
  s.A = Mat::Zero(nx, nx);
  s.C = Mat::Zero(nx, p);
  if (n0 > 0) {
    s.D.leftCols(n0) = spec.env.D.At(t);
    s.A.topLeftCorner(n0, n0) = spec.env.A0.At(t);
  }
  for (int j = 0; j < spec.n_dm; ++j) {
    const DmBlock& dm = spec.per_dm[j];
    const int off = spec.StateOffset(j + 1);
    const int n = dm.n();
    const int m = dm.m();
    if (f[j].rows() != m || f[j].cols() != n) {
      throw Error(ErrorKind::kDimension,
                  "feedback gain of DM " + std::to_string(j) + " has wrong shape");
    }
    const Mat& e1 = spec.env.E1[j].At(t);
    s.D.middleCols(off, n) = inv_n * (e1 * f[j] + spec.env.E2[j].At(t));
    if (n0 > 0) {
      s.A.block(0, off, n0, n) =
          inv_n * (spec.env.B1[j].At(t) * f[j] + spec.env.B2[j].At(t));
    }
    s.A.block(off, off, n, n) = dm.A.At(t) + dm.B.At(t) * f[j];
    s.C.middleRows(off, n) = dm.C.At(t);
    Mat lift_x = Mat::Zero(nx, m);
    if (n0 > 0) lift_x.topRows(n0) = inv_n * spec.env.B1[j].At(t);
    lift_x.middleRows(off, n) = dm.B.At(t);
    s.lift_p.push_back(inv_n * e1);
    s.lift_X.push_back(std::move(lift_x));
  }
  return s;
}

ClosedLoopCoeffs AssembleClosedLoop(const LqGameSpec& spec,
                                    const std::vector<ExoPolicy>& policies) {
  if (static_cast<int>(policies.size()) != spec.n_dm) {
    throw Error(ErrorKind::kDimension, "need one policy per DM");
  }
  ClosedLoopCoeffs c;
  c.infinite = spec.infinite();
  c.horizon = spec.horizon;
  c.p = spec.p();
  c.nx = spec.nx();
  c.policies = policies;
  const int stages = c.infinite ? 1 : spec.horizon;
  for (int t = 0; t < stages; ++t) {
    std::vector<Mat> f;
    for (const auto& pol : policies) f.push_back(pol.FAt(t));
    StackedStage s = StackDynamics(spec, f, t);
    Vec hp = Vec::Zero(c.p);
    Vec hx = Vec::Zero(c.nx);
    for (int j = 0; j < spec.n_dm; ++j) {
      hp.noalias() += s.lift_p[j] * policies[j].HAt(t);
      hx.noalias() += s.lift_X[j] * policies[j].HAt(t);
    }
    c.D.push_back(std::move(s.D));
    c.A.push_back(std::move(s.A));
    c.C.push_back(std::move(s.C));
    c.Hp.push_back(hp);
    c.HX.push_back(hx);
    c.xi_mean.push_back(spec.Xi(t).mean);
    c.w_mean.push_back(spec.WMean(t));
    c.lift_p.push_back(std::move(s.lift_p));
    c.lift_X.push_back(std::move(s.lift_X));
  }
  return c;
}

EnvEquationSlice SolveEnvEquations(const ClosedLoopCoeffs& c, int k) {
  if (c.infinite) {
    throw Error(ErrorKind::kInvalidArgument,
                "stage equations are defined for finite horizons");
  }
  const int horizon = c.horizon;
  if (k < 0 || k >= horizon) {
    throw Error(ErrorKind::kInvalidArgument, "stage out of range");
  }
  const int p = c.p;
  const int nx = c.nx;
  const int len = horizon - k;
  const Eigen::Index unknowns = static_cast<Eigen::Index>(len) * p;

  // Xhat_t = pm Xhat_k + rm yhat + r.
  Mat pm = Eye(nx);
  Mat rm = Mat::Zero(nx, unknowns);
  Vec r = Vec::Zero(nx);
  Mat lambda = Mat::Zero(unknowns, unknowns);
  Mat ups_x(unknowns, nx);
  Vec ups_0(unknowns);
  for (int t = k; t < horizon; ++t) {
    const Eigen::Index row = static_cast<Eigen::Index>(t - k) * p;
    const Mat& d = c.D[t];
    lambda.middleRows(row, p) = d * rm;
    for (int n = t; n < horizon; ++n) {
      lambda.block(row, static_cast<Eigen::Index>(n - k) * p, p, p) += c.Gp(t, n);
    }
    ups_x.middleRows(row, p) = d * pm;
    ups_0.segment(row, p) = d * r + c.Hp[t] + c.xi_mean[t];

    Mat next_r = c.A[t] * rm;
    for (int n = t; n < horizon; ++n) {
      next_r.middleCols(static_cast<Eigen::Index>(n - k) * p, p) += c.GX(t, n);
    }
    next_r.middleCols(row, p) += c.C[t];
    rm = std::move(next_r);
    pm = c.A[t] * pm;
    r = c.A[t] * r + c.HX[t] + c.w_mean[t];
  }
  Mat rhs(unknowns, nx + 1);
  rhs.leftCols(nx) = ups_x;
  rhs.col(nx) = ups_0;
  EnvEquationSlice out;
  const Mat system = Eye(unknowns) - lambda;
  out.determinant = system.partialPivLu().determinant();
  const Mat sol = GatedSolve(system, rhs,
                             "I - Lambda_" + std::to_string(k), &out.condition);
  for (int t = k; t < horizon; ++t) {
    const Eigen::Index row = static_cast<Eigen::Index>(t - k) * p;
    out.a.push_back(sol.block(row, 0, p, nx));
    out.b.push_back(sol.block(row, nx, p, 1));
  }
  return out;
}

Mat EnvAffineSolution::MeanPropagator() const {
  const Eigen::Index nx = A_tilde.rows() - 1;
  return A_tilde.topLeftCorner(nx, nx);
}

Mat EnvAffineSolution::an(int n) const {
  Mat acc = a_tilde;
  for (int i = 0; i < n; ++i) acc = acc * A_tilde;
  return acc.leftCols(acc.cols() - 1);
}

Vec EnvAffineSolution::bn(int n) const {
  Mat acc = a_tilde;
  for (int i = 0; i < n; ++i) acc = acc * A_tilde;
  return acc.col(acc.cols() - 1);
}

namespace {

// G^j_0 a~ + P_j X_j with X_j = V_j a~ A~ + Gamma_j X_j A~: the DM's summed
// response sum_n G^j_n a~ A~^n to the stationary ansatz.
Mat SummedResponse(const ExoPolicy& pol, const Mat& a_tilde, const Mat& A_tilde) {
  const Mat xj = linalg::SolveStein(pol.Gamma, pol.V * a_tilde * A_tilde, A_tilde);
  return pol.G0 * a_tilde + pol.P * xj;
}

double WindowResidual(const ClosedLoopCoeffs& c, const Mat& a_tilde,
                      const Mat& A_tilde, int window) {
  const int nx = c.nx;
  const int p = c.p;
  double rho = 0.0;
  for (const auto& pol : c.policies) {
    rho = std::max(rho, linalg::SpectralRadius(pol.Gamma));
  }
  int nmax = 1;
  if (rho > 0.0) {
    nmax = static_cast<int>(std::ceil(std::log(1e-17) / std::log(rho))) + 10;
    nmax = std::clamp(nmax, 1, 20000);
  }
  // Independent truncated sums of the n-step gains.
  std::vector<Mat> gp(nmax, Mat::Zero(p, p)), gx(nmax, Mat::Zero(nx, p));
  for (std::size_t j = 0; j < c.policies.size(); ++j) {
    const ExoPolicy& pol = c.policies[j];
    const Mat& lp = c.LiftP(0, static_cast<int>(j));
    const Mat& lx = c.LiftX(0, static_cast<int>(j));
    gp[0] += lp * pol.G0;
    gx[0] += lx * pol.G0;
    Mat acc = pol.V;
    for (int n = 1; n < nmax; ++n) {
      const Mat g = pol.P * acc;
      gp[n] += lp * g;
      gx[n] += lx * g;
      acc = pol.Gamma * acc;
    }
  }
  std::mt19937_64 rng(20260417);
  std::normal_distribution<double> nd;
  Vec x0(nx + 1);
  for (int i = 0; i < nx; ++i) x0(i) = nd(rng);
  x0(nx) = 1.0;
  const int len = window + nmax;
  std::vector<Vec> xs(len + 1), ys(len);
  xs[0] = x0;
  for (int t = 0; t < len; ++t) {
    ys[t] = a_tilde * xs[t];
    xs[t + 1] = A_tilde * xs[t];
  }
  double worst = 0.0;
  double scale = 1.0;
  for (int t = 0; t < window; ++t) {
    const Vec xt = xs[t].head(nx);
    Vec y = c.D[0] * xt + c.Hp[0] + c.xi_mean[0];
    Vec x = c.A[0] * xt + c.HX[0] + c.C[0] * ys[t] + c.w_mean[0];
    for (int n = 0; n < nmax; ++n) {
      y.noalias() += gp[n] * ys[t + n];
      x.noalias() += gx[n] * ys[t + n];
    }
    worst = std::max(worst, (y - ys[t]).norm());
    worst = std::max(worst, (x - xs[t + 1].head(nx)).norm());
    scale = std::max(scale, ys[t].norm());
  }
  return worst / scale;
}

}  // namespace

EnvAffineSolution SolveInfiniteEnvFixedPoint(const ClosedLoopCoeffs& c,
                                             const FixedPointOptions& options) {
  if (!c.infinite) {
    throw Error(ErrorKind::kInvalidArgument,
                "stationary fixed point needs an infinite horizon");
  }
  const int nx = c.nx;
  const int p = c.p;
  const Eigen::Index aug = nx + 1;
  Mat base_a(p, aug);
  base_a << c.D[0], c.Hp[0] + c.xi_mean[0];
  Mat base_top(nx, aug);
  base_top << c.A[0], c.HX[0] + c.w_mean[0];

  Mat a = base_a;
  Mat top = base_top + c.C[0] * a;
  auto augmented = [&](const Mat& t) {
    Mat out = Mat::Zero(aug, aug);
    out.topRows(nx) = t;
    out(nx, nx) = 1.0;
    return out;
  };

  EnvAffineSolution sol;
  double damping = options.damping;
  double prev = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < options.budget; ++it) {
    const Mat at = augmented(top);
    Mat new_a = base_a;
    std::vector<Mat> resp;
    for (std::size_t j = 0; j < c.policies.size(); ++j) {
      resp.push_back(SummedResponse(c.policies[j], a, at));
      new_a.noalias() += c.LiftP(0, static_cast<int>(j)) * resp.back();
    }
    Mat new_top = base_top + c.C[0] * new_a;
    for (std::size_t j = 0; j < c.policies.size(); ++j) {
      new_top.noalias() += c.LiftX(0, static_cast<int>(j)) * resp[j];
    }
    const double res = std::sqrt((new_a - a).squaredNorm() +
                                 (new_top - top).squaredNorm());
    sol.residual_trace.push_back(res);
    sol.iterations = it + 1;
    if (!std::isfinite(res)) break;
    const double scale = std::max(1.0, std::sqrt(new_a.squaredNorm() +
                                                 new_top.squaredNorm()));
    if (res <= options.tol * scale) {
      a = new_a;
      top = new_top;
      converged = true;
      break;
    }
    if (res > prev) damping = std::max(damping * 0.5, 1.0 / 1024.0);
    prev = res;
    a += damping * (new_a - a);
    top += damping * (new_top - top);
  }
  if (!converged) {
    std::string tail;
    const std::size_t n = sol.residual_trace.size();
    for (std::size_t i = n > 5 ? n - 5 : 0; i < n; ++i) {
      tail += (tail.empty() ? "" : ", ") + Num(sol.residual_trace[i]);
    }
    throw Error(ErrorKind::kNoConvergence,
                "stationary environment fixed point did not converge; last "
                "residuals: " + tail,
                "unique bounded equilibrium environment means",
                n > 0 ? sol.residual_trace.back() : 0.0);
  }
  sol.a_tilde = a;
  sol.A_tilde = augmented(top);
  const double rho = linalg::SpectralRadius(sol.MeanPropagator());
  if (rho >= 1.0) {
    throw Error(ErrorKind::kInstabilityDetected,
                "mean propagator has spectral radius " + Num(rho),
                "uniformly bounded a_t, b_t", rho);
  }
  sol.window_residual = WindowResidual(c, sol.a_tilde, sol.A_tilde, options.window);
  return sol;
}

InitialPrior PriorFromInit(const LqGameSpec& spec) {
  const int p = spec.p();
  const int nx = spec.nx();
  const GaussianLaw& init = spec.noise.init;
  const Mat cyy = init.cov.topLeftCorner(p, p);
  const Mat cxy = init.cov.block(p, 0, nx, p);
  const Mat cxx = init.cov.block(p, p, nx, nx);
  InitialPrior out;
  out.gain = cxy * linalg::PsdPseudoInverse(cyy);
  out.offset = init.mean.tail(nx) - out.gain * init.mean.head(p);
  out.cov = linalg::Symmetrize(cxx - out.gain * cxy.transpose());
  return out;
}

KalmanEstimator BuildKalmanFinite(const LqGameSpec& spec, const ExoModel& model,
                                  int horizon) {
  const InitialPrior prior = PriorFromInit(spec);
  KalmanEstimator est;
  est.x0_offset = prior.offset;
  est.x0_gain = prior.gain;
  Mat sigma = prior.cov;
  est.Sigma.push_back(sigma);
  for (int t = 0; t < horizon; ++t) {
    const Mat& a = StageAt(model.A, t);
    const Mat& d = StageAt(model.D, t);
    const FilterStep step =
        KalmanStep(a, d, sigma, spec.Xi(t).cov, spec.WCov(t));
    const Mat& l = step.gain;
    est.L.push_back(l);
    est.Phi.push_back(a + StageAt(model.GX, t) - l * (d + StageAt(model.Gp, t)));
    est.Gamma.push_back(StageAt(model.C, t) + l);
    est.kappa.push_back(StageAt(model.hX, t) + spec.WMean(t) -
                        l * (StageAt(model.hp, t) + spec.Xi(t).mean));
    sigma = step.next_cov;
    est.Sigma.push_back(sigma);
  }
  return est;
}

namespace {

ExoModel ModelFromPolicies(const ClosedLoopCoeffs& c,
                           const std::vector<DmPolicy>& policies, int stages) {
  ExoModel model;
  for (int t = 0; t < stages; ++t) {
    Mat gp = Mat::Zero(c.p, c.nx), gx = Mat::Zero(c.nx, c.nx);
    Vec hp = Vec::Zero(c.p), hx = Vec::Zero(c.nx);
    for (std::size_t j = 0; j < policies.size(); ++j) {
      const Mat& lp = c.LiftP(t, static_cast<int>(j));
      const Mat& lx = c.LiftX(t, static_cast<int>(j));
      gp.noalias() += lp * policies[j].GAt(t);
      gx.noalias() += lx * policies[j].GAt(t);
      hp.noalias() += lp * policies[j].HAt(t);
      hx.noalias() += lx * policies[j].HAt(t);
    }
    model.D.push_back(c.D[t]);
    model.A.push_back(c.A[t]);
    model.C.push_back(c.C[t]);
    model.Gp.push_back(gp);
    model.GX.push_back(gx);
    model.hp.push_back(hp);
    model.hX.push_back(hx);
  }
  return model;
}

}  // namespace

SebeuLqProfile BuildSebeuFinite(const LqGameSpec& spec) {
  if (spec.infinite()) {
    throw Error(ErrorKind::kInvalidArgument, "finite construction needs T < inf");
  }
  CheckLqStructure(spec);
  const int horizon = spec.horizon;
  SebeuLqProfile prof;
  prof.infinite = false;
  prof.horizon = horizon;
  prof.exo = SolveAllExo(spec);
  prof.coeffs = AssembleClosedLoop(spec, prof.exo);
  for (int k = 0; k < horizon; ++k) {
    prof.env.slices.push_back(SolveEnvEquations(prof.coeffs, k));
  }
  for (int j = 0; j < spec.n_dm; ++j) {
    const ExoPolicy& pol = prof.exo[j];
    DmPolicy dp;
    dp.F = pol.F;
    for (int t = 0; t < horizon; ++t) {
      const EnvEquationSlice& s = prof.env.slices[t];
      Mat g = Mat::Zero(pol.m(), spec.nx());
      Vec h = pol.HAt(t);
      for (int n = t; n < horizon; ++n) {
        g.noalias() += pol.GAt(t, n) * s.a[n - t];
        h.noalias() += pol.GAt(t, n) * s.b[n - t];
      }
      dp.G.push_back(g);
      dp.H.push_back(h);
    }
    prof.policies.push_back(std::move(dp));
  }
  prof.model = ModelFromPolicies(prof.coeffs, prof.policies, horizon);
  prof.estimator = BuildKalmanFinite(spec, prof.model, horizon);
  return prof;
}

SebeuLqProfile BuildSebeuInfiniteStationary(const LqGameSpec& spec,
                                            const FixedPointOptions& options) {
  if (!spec.infinite()) {
    throw Error(ErrorKind::kInvalidArgument,
                "stationary construction needs an infinite horizon");
  }
  CheckLqStructure(spec);
  const Mat& xi_cov = spec.Xi(0).cov;
  const double xi_min = linalg::MinEigenvalue(xi_cov);
  if (!(xi_min > 0.0)) {
    throw Error(ErrorKind::kDefiniteness,
                "cov[xi] must be positive definite (min eigenvalue " +
                    Num(xi_min) + ")",
                "noise.xi.cov", xi_min);
  }
  const int nx = spec.nx();
  SebeuLqProfile prof;
  prof.infinite = true;
  prof.horizon = kInfiniteHorizon;
  prof.exo = SolveAllExo(spec);
  prof.coeffs = AssembleClosedLoop(spec, prof.exo);
  prof.env = SolveInfiniteEnvFixedPoint(prof.coeffs, options);
  const Mat at = prof.env.A_tilde;
  for (int j = 0; j < spec.n_dm; ++j) {
    const Mat resp = SummedResponse(prof.exo[j], prof.env.a_tilde, at);
    DmPolicy dp;
    dp.F = prof.exo[j].F;
    dp.G = {resp.leftCols(nx)};
    dp.H = {resp.col(nx) + prof.exo[j].HAt(0)};
    prof.policies.push_back(std::move(dp));
  }
  prof.model = ModelFromPolicies(prof.coeffs, prof.policies, 1);

  const ExoModel& m = prof.model;
  const Mat& a = m.A[0];
  const Mat& d = m.D[0];
  const Mat& cc = m.C[0];
  const Mat w_cov = spec.WCov(0);
  const Vec w_mean = spec.WMean(0);
  const Vec& xi_mean = spec.Xi(0).mean;
  StationaryState& ss = prof.stationary;

  // Filter Riccati from cov[W].
  Mat sigma = w_cov;
  bool settled = false;
  const int budget = 100000;
  for (int it = 0; it < budget; ++it) {
    const Mat next = KalmanStep(a, d, sigma, xi_cov, w_cov).next_cov;
    const double step = (next - sigma).norm();
    sigma = next;
    ss.sigma_iterations = it + 1;
    if (!std::isfinite(step) || sigma.norm() > 1e12) break;
    if (step <= 1e-14 * std::max(1.0, sigma.norm())) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    throw Error(ErrorKind::kFilterRiccatiDiverged,
                "filter Riccati iteration did not settle (norm " +
                    Num(sigma.norm()) + ")",
                "stationary filter covariance", sigma.norm());
  }
  const FilterStep fs = KalmanStep(a, d, sigma, xi_cov, w_cov);
  ss.Sigma = sigma;
  ss.sigma_residual = (fs.next_cov - sigma).norm();
  ss.kalman_gain = fs.gain;
  const Mat& l = fs.gain;

  // Stationary mean.
  const Mat abar = a + m.GX[0] + cc * (d + m.Gp[0]);
  const Vec rhs = m.hX[0] + cc * (m.hp[0] + xi_mean) + w_mean;
  ss.x_hat0 = GatedSolve(Mat(Eye(nx) - abar), rhs, "I - Abar", nullptr);
  ss.x_hat_residual = (abar * ss.x_hat0 + rhs - ss.x_hat0).norm();

  // Joint dynamics of (X - xhat0, X - Xhat).
  ss.Acl = Mat::Zero(2 * nx, 2 * nx);
  ss.Acl.topLeftCorner(nx, nx) = a + cc * d + m.GX[0] + cc * m.Gp[0];
  ss.Acl.topRightCorner(nx, nx) = -m.GX[0] - cc * m.Gp[0];
  ss.Acl.bottomRightCorner(nx, nx) = a - l * d;
  const int p = spec.p();
  ss.Bcl = Mat::Zero(2 * nx, nx + p);
  ss.Bcl.topLeftCorner(nx, nx) = Eye(nx);
  ss.Bcl.topRightCorner(nx, p) = cc;
  ss.Bcl.bottomLeftCorner(nx, nx) = Eye(nx);
  ss.Bcl.bottomRightCorner(nx, p) = -l;
  ss.acl_radius = linalg::SpectralRadius(ss.Acl);
  if (ss.acl_radius >= 1.0) {
    const auto ev = linalg::DominantEigenvalue(ss.Acl);
    throw Error(ErrorKind::kClosedLoopUnstable,
                "closed loop has eigenvalue " + Num(ev.real()) + (ev.imag() < 0 ? "" : "+") +
                    Num(ev.imag()) + "i of modulus " + Num(ss.acl_radius),
                "stable A^cl", ss.acl_radius);
  }
  const Mat noise = linalg::BlockDiagonal({w_cov, xi_cov});
  const Mat q = linalg::Symmetrize(ss.Bcl * noise * ss.Bcl.transpose());
  const Mat z = linalg::SolveDiscreteLyapunov(ss.Acl, q);
  ss.Theta = linalg::Symmetrize(z.topLeftCorner(nx, nx));
  double res = (ss.Acl * z * ss.Acl.transpose() + q - z).norm();
  res = std::max(res, (z.topRightCorner(nx, nx) - sigma).norm());
  res = std::max(res, (z.bottomRightCorner(nx, nx) - sigma).norm());
  ss.theta_residual = res;
  const double gap = linalg::MinEigenvalue(ss.Theta - sigma);
  if (gap < -1e-8) {
    throw Error(ErrorKind::kSteadyStateInfeasible,
                "Theta - Sigma has eigenvalue " + Num(gap),
                "Theta >= Sigma", gap);
  }

  KalmanEstimator& est = prof.estimator;
  est.x0_offset = ss.x_hat0;
  est.x0_gain = Mat::Zero(nx, p);
  est.L = {l};
  est.Phi = {a + m.GX[0] - l * (d + m.Gp[0])};
  est.Gamma = {cc + l};
  est.kappa = {m.hX[0] + w_mean - l * (m.hp[0] + xi_mean)};
  est.Sigma = {sigma};
  return prof;
}

SebeuLqProfile BuildSebeu(const LqGameSpec& spec) {
  return spec.infinite() ? BuildSebeuInfiniteStationary(spec)
                         : BuildSebeuFinite(spec);
}

MeanFieldSolution SolveMeanField(const LqGameSpec& spec) {
  auto structure = [](const std::string& what) {
    throw Error(ErrorKind::kStructure, "mean-field model needs " + what,
                "identical DMs, C = 0, y = average of (E1 u + E2 x) + xi");
  };
  if (!spec.infinite()) structure("an infinite horizon");
  if (spec.n0() != 0) structure("no environment state");
  const DmBlock& d0 = spec.per_dm[0];
  for (int j = 0; j < spec.n_dm; ++j) {
    const DmBlock& dj = spec.per_dm[j];
    if (!SameSeries(dj.A, d0.A) || !SameSeries(dj.B, d0.B) ||
        !SameSeries(dj.Q, d0.Q) || !SameSeries(dj.R, d0.R) ||
        !SameSeries(dj.K, d0.K) || !SameSeries(dj.L, d0.L) ||
        dj.beta != d0.beta || !SameSeries(spec.env.E1[j], spec.env.E1[0]) ||
        !SameSeries(spec.env.E2[j], spec.env.E2[0])) {
      structure("identical DMs");
    }
    for (const Mat& c : dj.C.items) {
      if (c.size() > 0 && c.cwiseAbs().maxCoeff() != 0.0) structure("C = 0");
    }
  }
  CheckLqStructure(spec);

  MeanFieldSolution out;
  out.exo = SolveExo(spec, 0);
  const int n = d0.n();
  const int p = spec.p();
  const Mat& a = d0.A.At(0);
  const Mat& b = d0.B.At(0);
  const Mat& e1 = spec.env.E1[0].At(0);
  const Mat& e2 = spec.env.E2[0].At(0);
  out.F = out.exo.FAt(0);
  out.G = out.exo.Gsum;
  out.H = out.exo.HAt(0);
  Mat sys = Mat::Zero(p + n, p + n);
  sys.topLeftCorner(p, p) = Eye(p) - e1 * out.G;
  sys.topRightCorner(p, n) = -(e1 * out.F + e2);
  sys.bottomLeftCorner(n, p) = -b * out.G;
  sys.bottomRightCorner(n, n) = Eye(n) - a - b * out.F;
  Vec rhs(p + n);
  rhs.head(p) = e1 * out.H + spec.Xi(0).mean;
  rhs.tail(n) = b * out.H + spec.noise.w[1].At(0).mean;
  const Vec sol = GatedSolve(sys, rhs, "mean-field system", &out.condition);
  out.y_hat = sol.head(p);
  out.x_hat = sol.tail(n);
  out.offset = out.G * out.y_hat + out.H;

  const Vec& mean = spec.noise.init.mean;
  double mismatch = (mean.head(p) - out.y_hat).cwiseAbs().maxCoeff();
  for (int j = 0; j < spec.n_dm; ++j) {
    const int off = spec.InitOffset(j + 1);
    mismatch = std::max(mismatch, (mean.segment(off, n) - out.x_hat).cwiseAbs().maxCoeff());
  }
  if (mismatch > 1e-9) {
    out.init_matches = false;
    out.warning = "initial means differ from the stationary means by " +
                  Num(mismatch) +
                  "; the policy is a stationary equilibrium only when "
                  "(E[y_-1], E[x_0]) equals (y_hat, x_hat)";
  }
  return out;
}

}  // namespace sebeu
