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

#include "sebeu/epsnash.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "sebeu/error.hpp"
#include "sebeu/scenario_io.hpp"
#include "sebeu/simulate.hpp"

namespace sebeu {
namespace {

template <class Fn>
void ParallelFor(int count, int workers, const Fn& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < count; k = next++) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

void RequireFinite(const LqGameSpec& spec, const SebeuLqProfile& profile, int j) {
  if (spec.infinite() || profile.infinite) {
    throw Error(ErrorKind::kInvalidArgument,
                "deviation search needs a finite horizon");
  }
  if (j < 0 || j >= spec.n_dm) {
    throw Error(ErrorKind::kInvalidArgument, "deviator index out of range");
  }
}

class DeviationObjective final : public ceres::FirstOrderFunction {
 public:
  DeviationObjective(const LqGameSpec& spec, const SebeuLqProfile& profile, int j,
                     double step)
      : spec_(spec), eval_(spec, profile, j), step_(step) {
    const DmBlock& dm = spec.per_dm[j];
    n_ = dm.n();
    m_ = dm.m();
    count_ = AffineParameterCount(spec.horizon, n_, m_, spec.p());
  }

  int NumParameters() const override { return count_; }

  double Cost(const std::vector<double>& theta) const {
    return eval_.Cost(UnflattenAffine(theta, spec_.horizon, n_, m_, spec_.p()));
  }

  bool Evaluate(const double* parameters, double* cost,
                double* gradient) const override {
    std::vector<double> theta(parameters, parameters + count_);
    *cost = Cost(theta);
    if (!std::isfinite(*cost)) return false;
    if (gradient != nullptr) {
      for (int k = 0; k < count_; ++k) {
        const double h = step_ * std::max(1.0, std::abs(theta[k]));
        const double keep = theta[k];
        theta[k] = keep + h;
        const double up = Cost(theta);
        theta[k] = keep - h;
        const double down = Cost(theta);
        theta[k] = keep;
        gradient[k] = (up - down) / (2.0 * h);
      }
    }
    return true;
  }

 private:
  const LqGameSpec& spec_;
  DeviationEvaluator eval_;
  double step_;
  int n_ = 0, m_ = 0, count_ = 0;
};

struct StartResult {
  std::vector<double> theta;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

}  // namespace

TwoStageGains TwoStageNashResponse(const ScalarGameParams& s, double n) {
  if (s.horizon != 2 || s.beta != 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "closed forms need T = 2 and beta = 1");
  }
  if (!(n >= 1.0) || s.r <= 0.0 || s.q <= 0.0 || s.var_x0 <= 0.0 || s.var_xi <= 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "need N >= 1 and positive weights");
  }
  const double a = s.a, b = s.b, q = s.q, r = s.r;
  TwoStageGains g;
  const double m2 = q;
  const double m1 = q + r * m2 * a * a / (r + m2 * b * b);
  g.f1 = -m2 * b * a / (r + m2 * b * b);
  g.f0 = -m1 * b * a / (r + m1 * b * b);
  const double cov_bar = s.var_x0 / n;
  const double drift = g.f1 * (a + b * g.f0);
  g.k1 = -1.0 / (1.0 + r + q * b * b) * drift * cov_bar * g.f0 /
         (cov_bar * g.f0 * g.f0 + s.var_xi);

  const double cov_minus = s.var_x0 * (n - 1.0) / (n * n);
  const double den = r + q * b * b + 2.0 / n;
  const double ratio = g.f0 * cov_minus / (g.f0 * g.f0 * cov_minus + s.var_xi);
  const double others = (n - 1.0) / n;
  g.ft1 = -q * b * a / den;
  g.kt1 = -drift / den * ratio - g.k1 * others / den;
  g.nt1 = drift / den * ratio / n;

  const double sv = g.ft1 * b + g.kt1 / n + g.nt1;
  const double next = a + b * g.ft1 + g.kt1 / n + g.nt1;
  const double num = q * b * a + (r + 2.0 / n) * g.ft1 * a * sv +
                     2.0 * g.ft1 * a * others * g.k1 / n +
                     q * (a + b * g.ft1) * a * b * next;
  const double dnm = r + 2.0 / n + q * b * b + (r + 2.0 / n) * sv * sv +
                     2.0 * sv * others * g.k1 / n + q * b * b * next * next;
  if (dnm == 0.0) throw Error(ErrorKind::kInvalidArgument, "zero denominator");
  g.ft0 = -num / dnm;
  return g;
}

int AffineParameterCount(int horizon, int n, int m, int p) {
  int count = 0;
  for (int t = 0; t < horizon; ++t) count += (t + 1) * m * (n + p) + m;
  return count;
}

std::vector<double> FlattenAffine(const AffinePolicy& policy) {
  std::vector<double> out;
  auto put = [&](const auto& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k) out.push_back(x.data()[k]);
  };
  for (int t = 0; t < policy.horizon(); ++t) {
    for (const Mat& p : policy.P[t]) put(p);
    for (const Mat& q : policy.Q[t]) put(q);
    put(policy.h[t]);
  }
  return out;
}

AffinePolicy UnflattenAffine(const std::vector<double>& theta, int horizon, int n,
                             int m, int p) {
  if (static_cast<int>(theta.size()) != AffineParameterCount(horizon, n, m, p)) {
    throw Error(ErrorKind::kDimension, "affine parameter count mismatch");
  }
  AffinePolicy out;
  std::size_t at = 0;
  auto take = [&](int rows, int cols) {
    Mat x = Eigen::Map<const Mat>(theta.data() + at, rows, cols);
    at += static_cast<std::size_t>(rows) * cols;
    return x;
  };
  for (int t = 0; t < horizon; ++t) {
    out.P.emplace_back();
    out.Q.emplace_back();
    for (int s = 0; s <= t; ++s) out.P[t].push_back(take(m, n));
    for (int s = 0; s <= t; ++s) out.Q[t].push_back(take(m, p));
    out.h.push_back(take(m, 1).col(0));
  }
  return out;
}

AffinePolicy SebeuAsAffine(const LqGameSpec& spec, const SebeuLqProfile& profile,
                           int j) {
  RequireFinite(spec, profile, j);
  const DmPolicy& pol = profile.policies.at(j);
  const KalmanEstimator& est = profile.estimator;
  const int n = spec.per_dm[j].n(), m = spec.per_dm[j].m();
  const int nx = spec.nx();
  // Xhat_t = c + sum_s coef[s] y_{s-1}.
  Vec c = est.x0_offset;
  std::vector<Mat> coef = {est.x0_gain};
  AffinePolicy out;
  for (int t = 0; t < spec.horizon; ++t) {
    const Mat& g = pol.GAt(t);
    out.P.emplace_back(t + 1, Mat::Zero(m, n));
    out.P[t][t] = pol.FAt(t);
    out.Q.emplace_back();
    for (const Mat& k : coef) out.Q[t].push_back(g * k);
    out.h.push_back(pol.HAt(t) + g * c);
    const Mat& phi = StageAt(est.Phi, t);
    for (Mat& k : coef) k = phi * k;
    coef.push_back(StageAt(est.Gamma, t));
    c = phi * c + StageAt(est.kappa, t);
    if (coef.back().rows() != nx) throw Error(ErrorKind::kDimension, "estimator shape");
  }
  return out;
}

double DeviationCost(const LqGameSpec& spec, const SebeuLqProfile& profile, int j,
                     const AffinePolicy& policy) {
  RequireFinite(spec, profile, j);
  const DeviatorControl control = [&](int t, const LoopForms& sofar) {
    Form u = Form::Constant(policy.h[t], sofar.space.width());
    for (int s = 0; s <= t; ++s) u.AddProduct(policy.P[t][s], sofar.x[s][j + 1]);
    u.AddProduct(policy.Q[t][0], sofar.y_prev);
    for (int s = 0; s < t; ++s) u.AddProduct(policy.Q[t][s + 1], sofar.y[s]);
    return u;
  };
  const LoopForms forms =
      RollOutForms(spec, profile, InitMode::kPrior, spec.horizon, j, control);
  return ExpectedCostOfForms(spec, forms, j);
}

DeviationEvaluator::DeviationEvaluator(const LqGameSpec& spec,
                                       const SebeuLqProfile& profile, int j)
    : spec_(&spec), j_(j), horizon_(spec.horizon) {
  RequireFinite(spec, profile, j);
  const int m = spec.per_dm[j].m();
  const int n = spec.per_dm[j].n();
  const int p = spec.p();
  auto pulse = [&](int at, int k) {
    return [&, at, k](int t, const LoopForms& sofar) {
      Form u = Form::Zero(m, sofar.space.width());
      if (t == at) u.offset(k) = 1.0;
      return u;
    };
  };
  base_ = RollOutForms(spec, profile, InitMode::kPrior, horizon_, j, pulse(-1, 0));
  dx_.assign(horizon_ + 1, std::vector<Mat>(horizon_, Mat::Zero(n, m)));
  dy_.assign(horizon_, std::vector<Mat>(horizon_, Mat::Zero(p, m)));
  for (int r = 0; r < horizon_; ++r) {
    for (int k = 0; k < m; ++k) {
      const LoopForms hit =
          RollOutForms(spec, profile, InitMode::kPrior, horizon_, j, pulse(r, k));
      for (int s = r; s <= horizon_; ++s) {
        dx_[s][r].col(k) = hit.x[s][j + 1].offset - base_.x[s][j + 1].offset;
        if (s < horizon_) dy_[s][r].col(k) = hit.y[s].offset - base_.y[s].offset;
      }
    }
  }
}

double DeviationEvaluator::Cost(const AffinePolicy& policy) const {
  const Eigen::Index width = base_.space.width();
  LoopForms f;
  f.y_prev = base_.y_prev;
  f.x.assign(horizon_ + 1, std::vector<Form>(j_ + 2));
  f.u.assign(horizon_, std::vector<Form>(j_ + 1));
  f.y.resize(horizon_);
  std::vector<Form> u;
  auto state = [&](int s) {
    Form x = base_.x[s][j_ + 1];
    for (int r = 0; r < s && r < horizon_; ++r) x.AddProduct(dx_[s][r], u[r]);
    return x;
  };
  for (int t = 0; t < horizon_; ++t) {
    f.x[t][j_ + 1] = state(t);
    Form ut = Form::Constant(policy.h[t], width);
    for (int s = 0; s <= t; ++s) ut.AddProduct(policy.P[t][s], f.x[s][j_ + 1]);
    ut.AddProduct(policy.Q[t][0], f.y_prev);
    for (int s = 0; s < t; ++s) ut.AddProduct(policy.Q[t][s + 1], f.y[s]);
    u.push_back(ut);
    Form y = base_.y[t];
    for (int r = 0; r <= t; ++r) y.AddProduct(dy_[t][r], u[r]);
    f.y[t] = std::move(y);
    f.u[t][j_] = std::move(ut);
  }
  f.x[horizon_][j_ + 1] = state(horizon_);
  return ExpectedCostOfForms(*spec_, f, j_);
}

GapEntry EpsGapLqAffine(const LqGameSpec& spec, const SebeuLqProfile& profile,
                        int j, const DeviationSearchOptions& o) {
  RequireFinite(spec, profile, j);
  if (o.starts < 1) throw Error(ErrorKind::kInvalidArgument, "need one start");
  GapEntry entry;
  entry.n_dm = spec.n_dm;
  entry.dm = j;
  const LoopForms base = RollOutForms(spec, profile, InitMode::kPrior, spec.horizon);
  entry.sebeu_cost = ExpectedCostOfForms(spec, base, j);
  if (!std::isfinite(entry.sebeu_cost)) {
    throw Error(ErrorKind::kInvalidArgument, "profile cost is not finite");
  }
  const std::vector<double> anchor = FlattenAffine(SebeuAsAffine(spec, profile, j));

  std::vector<StartResult> results(o.starts);
  ParallelFor(o.starts, o.workers, [&](int k) {
    std::vector<double> theta = anchor;
    if (k > 0) {
      std::mt19937_64 rng(SplitMix64(o.seed ^ SplitMix64(static_cast<std::uint64_t>(k))));
      std::normal_distribution<double> z(0.0, o.start_spread);
      for (double& v : theta) v += z(rng);
    }
    ceres::GradientProblem problem(
        new DeviationObjective(spec, profile, j, o.fd_step));
    ceres::GradientProblemSolver::Options opts;
    opts.line_search_direction_type = ceres::BFGS;
    opts.max_num_iterations = o.budget;
    opts.gradient_tolerance = o.gradient_tolerance;
    opts.function_tolerance = 1e-16;
    opts.parameter_tolerance = 1e-16;
    opts.logging_type = ceres::SILENT;
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(opts, problem, theta.data(), &summary);
    StartResult& r = results[k];
    r.theta = theta;
    r.cost = summary.final_cost;
    r.iterations = static_cast<int>(summary.iterations.size());
    r.converged = summary.termination_type == ceres::CONVERGENCE;
  });

  int best = 0;
  for (int k = 1; k < o.starts; ++k) {
    if (results[k].cost < results[best].cost) best = k;
  }
  const int n = spec.per_dm[j].n(), m = spec.per_dm[j].m();
  std::vector<double> theta = results[best].theta;
  entry.deviation_cost = results[best].cost;
  if (!(entry.deviation_cost <= entry.sebeu_cost)) {
    theta = anchor;
    entry.deviation_cost = entry.sebeu_cost;
  }
  entry.policy = UnflattenAffine(theta, spec.horizon, n, m, spec.p());
  entry.best_start = best;
  entry.iterations = results[best].iterations;
  entry.converged = results[best].converged;
  entry.gap = entry.sebeu_cost - entry.deviation_cost;
  return entry;
}

GapReport EpsGapLq(const LqGameSpec& spec, const SebeuLqProfile& profile,
                   const DeviationSearchOptions& o, const std::vector<int>& dms) {
  std::vector<int> who = dms;
  if (who.empty()) {
    for (int j = 0; j < spec.n_dm; ++j) who.push_back(j);
  }
  GapReport rep;
  rep.deviation_class = "affine in own states and past observations";
  for (int j : who) {
    rep.entries.push_back(EpsGapLqAffine(spec, profile, j, o));
    rep.max_gap = std::max(rep.max_gap, rep.entries.back().gap);
  }
  return rep;
}

GapReport SweepN(const SpecFamily& family, const std::vector<int>& grid,
                 const DeviationSearchOptions& o, bool first_only) {
  GapReport rep;
  rep.deviation_class = "affine in own states and past observations";
  for (int n : grid) {
    const LqGameSpec spec = family(n);
    const SebeuLqProfile prof = BuildSebeuFinite(spec);
    const GapReport one =
        EpsGapLq(spec, prof, o, first_only ? std::vector<int>{0} : std::vector<int>{});
    for (const GapEntry& e : one.entries) rep.entries.push_back(e);
    rep.max_gap = std::max(rep.max_gap, one.max_gap);
  }
  return rep;
}

void WriteGapCsv(const GapReport& report, std::ostream& os) {
  os << "N,dm,sebeu_cost,deviation_cost,gap\n";
  for (const GapEntry& e : report.entries) {
    os << e.n_dm << ',' << e.dm + 1 << ',' << FormatDouble(e.sebeu_cost) << ','
       << FormatDouble(e.deviation_cost) << ',' << FormatDouble(e.gap) << '\n';
  }
}

FiniteGapReport EpsGapFinite(const FiniteGameSpec& spec, const RationalProfile& profile) {
  CheckProfile(spec, profile);
  FiniteGapReport rep;
  for (int i = 0; i < spec.n_dm; ++i) {
    FiniteGapEntry e;
    e.dm = i;
    const int actions = static_cast<int>(spec.actions[i].size());
    for (int a = 0; a < actions; ++a) {
      const Rational c =
          ExpectedCost(spec, i, a, ConditionalEnvDistribution(spec, profile, i, a));
      if (profile[i][a] != Rational(0)) e.cost += profile[i][a] * c;
      if (a == 0 || c < e.best_cost) {
        e.best_cost = c;
        e.best_action = a;
      }
    }
    e.gap = e.cost - e.best_cost;
    if (i == 0 || rep.max_gap < e.gap) rep.max_gap = e.gap;
    rep.entries.push_back(e);
  }
  return rep;
}

void WriteGapCsv(const FiniteGapReport& report, std::ostream& os) {
  const int n = static_cast<int>(report.entries.size());
  os << "N,dm,sebeu_cost,deviation_cost,gap\n";
  for (const FiniteGapEntry& e : report.entries) {
    os << n << ',' << e.dm + 1 << ',' << FormatDouble(e.cost.ToDouble()) << ','
       << FormatDouble(e.best_cost.ToDouble()) << ',' << FormatDouble(e.gap.ToDouble())
       << '\n';
  }
}

InverseNFit FitInverseN(const std::vector<double>& n, const std::vector<double>& v) {
  if (n.size() != v.size() || n.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "need at least two points");
  }
  const double k = static_cast<double>(n.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sx += 1.0 / n[i];
    sy += v[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = 1.0 / n[i] - mx, dy = v[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  InverseNFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return fit;
}

}  // namespace sebeu
