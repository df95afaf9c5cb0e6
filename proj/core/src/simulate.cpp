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

#include "sebeu/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "sebeu/error.hpp"
#include "sebeu/scenario_io.hpp"

namespace sebeu {
namespace {

using Index = Eigen::Index;

Vec Rows(const Vec& v, Index start, Index len) { return v.segment(start, len); }
Form Rows(const Form& f, Index start, Index len) { return f.Rows(start, len); }
Vec Apply(const Mat& m, const Vec& v) { return m * v; }
Form Apply(const Mat& m, const Form& f) { return m * f; }

GaussianLaw SteadyInit(const SebeuLqProfile& prof) {
  const StationaryState& ss = prof.stationary;
  if (!prof.infinite || ss.Theta.size() == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "steady-state initialization needs a stationary profile");
  }
  const Index nx = ss.Theta.rows();
  GaussianLaw law;
  law.mean.resize(2 * nx);
  law.mean << ss.x_hat0, ss.x_hat0;
  const Mat gap = ss.Theta - ss.Sigma;
  law.cov.resize(2 * nx, 2 * nx);
  law.cov << ss.Theta, gap, gap, gap;
  law.cov = linalg::Symmetrize(law.cov);
  return law;
}

GaussianLaw InitLaw(const LqGameSpec& spec, const SebeuLqProfile& prof,
                    InitMode mode) {
  if (mode == InitMode::kSteadyState) return SteadyInit(prof);
  // Z_0 = M (y_{-1}, X_0) + c.
  const int p = spec.p();
  const int nx = spec.nx();
  Mat m = Mat::Zero(2 * nx, p + nx);
  m.topRightCorner(nx, nx) = Mat::Identity(nx, nx);
  m.bottomLeftCorner(nx, p) = prof.estimator.x0_gain;
  Vec c = Vec::Zero(2 * nx);
  c.tail(nx) = prof.estimator.x0_offset;
  GaussianLaw out;
  out.mean = m * spec.noise.init.mean + c;
  out.cov = linalg::Symmetrize(m * spec.noise.init.cov * m.transpose());
  return out;
}

LoopStage MakeStage(const Mat& d, const Mat& a, const Mat& c, const Mat& gp,
                    const Mat& gx, const Vec& hp, const Vec& hx, const Mat& phi,
                    const Mat& gamma, const Vec& kappa) {
  const Index nx = a.rows();
  const Index p = d.rows();
  LoopStage s;
  s.Y.resize(p, 2 * nx);
  s.Y << d, gp;
  s.y0 = hp;
  s.Zz = Mat::Zero(2 * nx, 2 * nx);
  s.Zz.topLeftCorner(nx, nx) = a;
  s.Zz.topRightCorner(nx, nx) = gx;
  s.Zz.bottomRightCorner(nx, nx) = phi;
  s.Zy.resize(2 * nx, p);
  s.Zy << c, gamma;
  s.z0.resize(2 * nx);
  s.z0 << hx, kappa;
  return s;
}

int StageCount(const SebeuLqProfile& prof) {
  return prof.infinite ? 1 : prof.horizon;
}

void FillNoise(const LqGameSpec& spec, int stages, LoopSystem& loop) {
  for (int t = 0; t < stages; ++t) {
    loop.w.push_back(GaussianLaw{spec.WMean(t), spec.WCov(t)});
    loop.xi.push_back(spec.Xi(t));
  }
}

}  // namespace

LoopSystem TrueLoop(const LqGameSpec& spec, const SebeuLqProfile& profile,
                    InitMode mode, const std::vector<DmPolicy>* policies) {
  const std::vector<DmPolicy>& pol = policies ? *policies : profile.policies;
  if (static_cast<int>(pol.size()) != spec.n_dm) {
    throw Error(ErrorKind::kDimension, "need one policy per DM");
  }
  LoopSystem loop;
  loop.nx = spec.nx();
  loop.p = spec.p();
  const int stages = StageCount(profile);
  const KalmanEstimator& est = profile.estimator;
  for (int t = 0; t < stages; ++t) {
    std::vector<Mat> f;
    for (const auto& d : pol) f.push_back(d.FAt(t));
    const StackedStage s = StackDynamics(spec, f, t);
    Mat gp = Mat::Zero(loop.p, loop.nx), gx = Mat::Zero(loop.nx, loop.nx);
    Vec hp = Vec::Zero(loop.p), hx = Vec::Zero(loop.nx);
    for (int j = 0; j < spec.n_dm; ++j) {
      gp.noalias() += s.lift_p[j] * pol[j].GAt(t);
      gx.noalias() += s.lift_X[j] * pol[j].GAt(t);
      hp.noalias() += s.lift_p[j] * pol[j].HAt(t);
      hx.noalias() += s.lift_X[j] * pol[j].HAt(t);
    }
    loop.stages.push_back(MakeStage(s.D, s.A, s.C, gp, gx, hp, hx,
                                    StageAt(est.Phi, t), StageAt(est.Gamma, t),
                                    StageAt(est.kappa, t)));
  }
  FillNoise(spec, stages, loop);
  loop.z_init = InitLaw(spec, profile, mode);
  return loop;
}

LoopSystem ExoModelLoop(const LqGameSpec& spec, const SebeuLqProfile& profile,
                        InitMode mode) {
  LoopSystem loop;
  loop.nx = spec.nx();
  loop.p = spec.p();
  const int stages = StageCount(profile);
  const ExoModel& m = profile.model;
  const KalmanEstimator& est = profile.estimator;
  for (int t = 0; t < stages; ++t) {
    loop.stages.push_back(MakeStage(
        StageAt(m.D, t), StageAt(m.A, t), StageAt(m.C, t), StageAt(m.Gp, t),
        StageAt(m.GX, t), StageAt(m.hp, t), StageAt(m.hX, t),
        StageAt(est.Phi, t), StageAt(est.Gamma, t), StageAt(est.kappa, t)));
  }
  FillNoise(spec, stages, loop);
  loop.z_init = InitLaw(spec, profile, mode);
  return loop;
}

MomentModel PropagateMoments(const LoopSystem& loop, int horizon, int max_lag) {
  const Index nx = loop.nx;
  const Index p = loop.p;
  const Index nz = 2 * nx;
  MomentModel out;
  out.nx = loop.nx;
  out.p = loop.p;
  Vec m = loop.z_init.mean;
  Mat pz = loop.z_init.cov;
  std::vector<Mat> acl(horizon);
  std::vector<Mat> zy_cov(horizon);  // cov(Z_{t+1}, y_t)
  for (int t = 0; t < horizon; ++t) {
    const LoopStage& s = loop.At(t);
    const GaussianLaw& xi = StageAt(loop.xi, t);
    const GaussianLaw& w = StageAt(loop.w, t);
    const Vec ym = s.Y * m + s.y0 + xi.mean;
    const Mat pzy = pz * s.Y.transpose();
    Vec mean(nz + p);
    mean << m, ym;
    Mat cov(nz + p, nz + p);
    cov << pz, pzy, pzy.transpose(), s.Y * pzy + xi.cov;
    out.mean.push_back(mean);
    out.cov.push_back(linalg::Symmetrize(cov));

    acl[t] = s.Zz + s.Zy * s.Y;
    zy_cov[t] = acl[t] * pzy + s.Zy * xi.cov;
    Vec wm = Vec::Zero(nz);
    wm.head(nx) = w.mean;
    m = acl[t] * m + s.Zy * (s.y0 + xi.mean) + s.z0 + wm;
    Mat q = s.Zy * xi.cov * s.Zy.transpose();
    q.topLeftCorner(nx, nx) += w.cov;
    pz = linalg::Symmetrize(acl[t] * pz * acl[t].transpose() + q);
  }
  out.y_lag.resize(horizon);
  for (int t = 0; t < horizon; ++t) {
    out.y_lag[t].push_back(out.cov[t].bottomRightCorner(p, p));
    Mat c = zy_cov[t];
    for (int h = 1; h <= max_lag && t + h < horizon; ++h) {
      out.y_lag[t].push_back(loop.At(t + h).Y * c);
      c = acl[t + h] * c;
    }
  }
  return out;
}

MomentModel PropagateMoments(const LqGameSpec& spec, const SebeuLqProfile& profile,
                             int horizon, InitMode mode, int max_lag) {
  return PropagateMoments(TrueLoop(spec, profile, mode), horizon, max_lag);
}

namespace {

// Signals of one sampled run.
struct VecTrace {
  Vec y_prev;
  std::vector<Vec> y, xhat;
  std::vector<std::vector<Vec>> x, u;
};

// V is Vec (sampled) or Form (exact); TR is VecTrace or LoopForms.
// src provides Init(), W(t), Xi(t) and Const(v).
template <class V, class TR, class Src, class Control>
void RollOut(const LqGameSpec& spec, const SebeuLqProfile& prof,
             const std::vector<DmPolicy>& pol, InitMode mode, int horizon,
             Src& src, TR& tr, int deviator, const Control& control) {
  const int n0 = spec.n0();
  const int p = spec.p();
  const int nx = spec.nx();
  const int n_dm = spec.n_dm;
  const double inv_n = 1.0 / n_dm;
  const KalmanEstimator& est = prof.estimator;

  const V init = src.Init();
  V x_all = src.Const(Vec::Zero(nx));
  V xhat = src.Const(Vec::Zero(nx));
  if (mode == InitMode::kPrior) {
    tr.y_prev = Rows(init, 0, p);
    x_all = Rows(init, p, nx);
    xhat = Apply(est.x0_gain, tr.y_prev);
    xhat += est.x0_offset;
  } else {
    tr.y_prev = src.Const(Vec::Zero(p));
    x_all = Rows(init, 0, nx);
    xhat = Rows(init, nx, nx);
  }
  std::vector<V> xs;
  xs.push_back(Rows(x_all, 0, n0));
  for (int j = 0; j < n_dm; ++j) {
    xs.push_back(Rows(x_all, spec.StateOffset(j + 1), spec.per_dm[j].n()));
  }
  tr.x.push_back(xs);
  tr.xhat.push_back(xhat);

  for (int t = 0; t < horizon; ++t) {
    std::vector<V> us;
    for (int j = 0; j < n_dm; ++j) {
      if (j == deviator) {
        us.push_back(control(t, tr));
        continue;
      }
      V u = Apply(pol[j].FAt(t), xs[j + 1]);
      u += Apply(pol[j].GAt(t), xhat);
      u += pol[j].HAt(t);
      us.push_back(std::move(u));
    }
    const V xi = src.Xi(t);
    const V w = src.W(t);
    V y = Apply(spec.env.D.At(t), xs[0]);
    y += xi;
    V x0_next = Apply(spec.env.A0.At(t), xs[0]);
    x0_next += Rows(w, 0, n0);
    for (int j = 0; j < n_dm; ++j) {
      y += Apply(inv_n * spec.env.E1[j].At(t), us[j]);
      y += Apply(inv_n * spec.env.E2[j].At(t), xs[j + 1]);
      if (n0 > 0) {
        x0_next += Apply(inv_n * spec.env.B1[j].At(t), us[j]);
        x0_next += Apply(inv_n * spec.env.B2[j].At(t), xs[j + 1]);
      }
    }
    std::vector<V> next;
    next.push_back(std::move(x0_next));
    for (int j = 0; j < n_dm; ++j) {
      const DmBlock& dm = spec.per_dm[j];
      V xj = Apply(dm.A.At(t), xs[j + 1]);
      xj += Apply(dm.B.At(t), us[j]);
      xj += Apply(dm.C.At(t), y);
      xj += Rows(w, spec.StateOffset(j + 1), dm.n());
      next.push_back(std::move(xj));
    }
    V xhat_next = Apply(StageAt(est.Phi, t), xhat);
    xhat_next += Apply(StageAt(est.Gamma, t), y);
    xhat_next += StageAt(est.kappa, t);

    tr.u.push_back(std::move(us));
    tr.y.push_back(y);
    xs = std::move(next);
    xhat = std::move(xhat_next);
    tr.x.push_back(xs);
    tr.xhat.push_back(xhat);
  }
}

class FormSource {
 public:
  FormSource(const LqGameSpec& spec, const SebeuLqProfile& prof, InitMode mode,
             int horizon, PrimitiveSpace& space)
      : space_(space) {
    if (mode == InitMode::kPrior) {
      init_ = space_.AddBlock(spec.noise.init);
    } else {
      init_ = space_.AddBlock(SteadyInit(prof));
    }
    for (int t = 0; t < horizon; ++t) {
      w_.push_back(space_.AddBlock(GaussianLaw{spec.WMean(t), spec.WCov(t)}));
      xi_.push_back(space_.AddBlock(spec.Xi(t)));
    }
  }
  Form Init() const { return space_.BlockForm(init_); }
  Form W(int t) const { return space_.BlockForm(w_[t]); }
  Form Xi(int t) const { return space_.BlockForm(xi_[t]); }
  Form Const(const Vec& v) const { return Form::Constant(v, space_.width()); }

 private:
  PrimitiveSpace& space_;
  int init_ = 0;
  std::vector<int> w_, xi_;
};

struct SampledLaw {
  Vec mean;
  Mat factor;
  Vec Draw(std::mt19937_64& rng) const {
    std::normal_distribution<double> nd;
    Vec eps(factor.cols());
    for (Index i = 0; i < eps.size(); ++i) eps(i) = nd(rng);
    return mean + factor * eps;
  }
};

SampledLaw Prepare(const GaussianLaw& law) {
  return {law.mean, linalg::PsdLowerFactor(law.cov)};
}

class SampleSource {
 public:
  SampleSource(const SampledLaw& init, const std::vector<SampledLaw>& w,
               const std::vector<SampledLaw>& xi, std::mt19937_64& rng)
      : init_(init), w_(w), xi_(xi), rng_(rng) {}
  Vec Init() { return init_.Draw(rng_); }
  Vec W(int t) { return StageAt(w_, t).Draw(rng_); }
  Vec Xi(int t) { return StageAt(xi_, t).Draw(rng_); }
  Vec Const(const Vec& v) const { return v; }

 private:
  const SampledLaw& init_;
  const std::vector<SampledLaw>& w_;
  const std::vector<SampledLaw>& xi_;
  std::mt19937_64& rng_;
};

}  // namespace

LoopForms RollOutForms(const LqGameSpec& spec, const SebeuLqProfile& profile,
                       InitMode mode, int horizon, int deviator,
                       const DeviatorControl& control,
                       const std::vector<DmPolicy>* policies) {
  const std::vector<DmPolicy>& pol = policies ? *policies : profile.policies;
  if (deviator >= 0 && !control) {
    throw Error(ErrorKind::kInvalidArgument, "deviator needs a control");
  }
  LoopForms out;
  FormSource src(spec, profile, mode, horizon, out.space);
  RollOut<Form>(spec, profile, pol, mode, horizon, src, out, deviator, control);
  return out;
}

double ExpectedCostOfForms(const LqGameSpec& spec, const LoopForms& forms, int j) {
  const DmBlock& dm = spec.per_dm.at(j);
  const int horizon = static_cast<int>(forms.y.size());
  double total = 0.0;
  double disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    const Form& x = forms.x[t][j + 1];
    const Form& u = forms.u[t][j];
    const Form& y = forms.y[t];
    double c = ExpectQuad(x, dm.Q.At(t)) + ExpectQuad(u, dm.R.At(t));
    c += 2.0 * (ExpectQuad(y, dm.K.At(t), u) + ExpectQuad(y, dm.L.At(t), x));
    total += disc * c;
    disc *= dm.beta;
  }
  if (!spec.infinite() && dm.QT.size() > 0) {
    total += disc * ExpectQuad(forms.x[horizon][j + 1], dm.QT);
  }
  return total;
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

TrajectoryBatch SimulateTrajectories(const LqGameSpec& spec,
                                     const SebeuLqProfile& profile,
                                     const SimulationOptions& o) {
  if (o.n_paths < 1 || o.horizon < 1) {
    throw Error(ErrorKind::kInvalidArgument, "need at least one path and stage");
  }
  if (!spec.infinite() && o.horizon > spec.horizon) {
    throw Error(ErrorKind::kInvalidArgument,
                "simulation horizon exceeds the game horizon");
  }
  const SampledLaw init = Prepare(o.mode == InitMode::kPrior
                                      ? spec.noise.init
                                      : SteadyInit(profile));
  const int laws = spec.infinite() ? 1 : o.horizon;
  std::vector<SampledLaw> w, xi;
  for (int t = 0; t < laws; ++t) {
    w.push_back(Prepare(GaussianLaw{spec.WMean(t), spec.WCov(t)}));
    xi.push_back(Prepare(spec.Xi(t)));
  }

  TrajectoryBatch batch;
  batch.n_paths = o.n_paths;
  batch.horizon = o.horizon;
  batch.n_dm = spec.n_dm;
  batch.seed = o.seed;
  batch.x.resize(o.n_paths);
  batch.u.resize(o.n_paths);
  batch.y.resize(o.n_paths);
  batch.d.resize(o.n_paths);

  bool same_shape = true;
  for (const auto& dm : spec.per_dm) {
    same_shape = same_shape && dm.n() == spec.per_dm[0].n() &&
                 dm.m() == spec.per_dm[0].m();
  }
  const auto no_control = [](int, const VecTrace&) -> Vec { return Vec(); };

  auto run = [&](int path) {
    std::mt19937_64 rng(SplitMix64(o.seed ^ SplitMix64(static_cast<std::uint64_t>(path))));
    SampleSource src(init, w, xi, rng);
    VecTrace tr;
    RollOut<Vec>(spec, profile, profile.policies, o.mode, o.horizon, src, tr, -1,
                 no_control);
    auto& bx = batch.x[path];
    auto& bu = batch.u[path];
    for (int t = 0; t < o.horizon; ++t) {
      bx.emplace_back(tr.x[t].begin() + 1, tr.x[t].end());
      bu.push_back(tr.u[t]);
      batch.y[path].push_back(tr.y[t]);
      if (same_shape) {
        Vec d = Vec::Zero(spec.per_dm[0].n() + spec.per_dm[0].m());
        for (int j = 0; j < spec.n_dm; ++j) {
          d.head(spec.per_dm[0].n()) += bx.back()[j];
          d.tail(spec.per_dm[0].m()) += bu.back()[j];
        }
        batch.d[path].push_back(d / spec.n_dm);
      } else {
        batch.d[path].push_back(Vec());
      }
    }
  };

  int workers = o.workers > 0 ? o.workers
                              : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, o.n_paths);
  if (workers == 1) {
    for (int k = 0; k < o.n_paths; ++k) run(k);
  } else {
    std::vector<std::thread> pool;
    for (int wk = 0; wk < workers; ++wk) {
      pool.emplace_back([&, wk] {
        for (int k = wk; k < o.n_paths; k += workers) run(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  return batch;
}

namespace {

std::string Cell(const Vec& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ';';
    s += FormatDouble(v(i));
  }
  return s;
}

}  // namespace

void WriteTrajectoriesCsv(const TrajectoryBatch& batch, std::ostream& os) {
  os << "path,t,dm,x,u,y,d\n";
  for (int k = 0; k < batch.n_paths; ++k) {
    for (int t = 0; t < batch.horizon; ++t) {
      const std::string y = Cell(batch.y[k][t]);
      const std::string d = Cell(batch.d[k][t]);
      for (int j = 0; j < batch.n_dm; ++j) {
        os << k << ',' << t << ',' << j + 1 << ',' << Cell(batch.x[k][t][j]) << ','
           << Cell(batch.u[k][t][j]) << ',' << y << ',' << d << '\n';
      }
    }
  }
}

namespace {

void Record(ConsistencyReport& rep, const std::string& quantity, int t, int s,
            const Mat& closed, const Mat& model, double* bucket) {
  const Mat diff = closed - model;
  Index r = 0, c = 0;
  const double gap = diff.size() ? diff.cwiseAbs().maxCoeff(&r, &c) : 0.0;
  const double cl = diff.size() ? closed(r, c) : 0.0;
  const double md = diff.size() ? model(r, c) : 0.0;
  rep.rows.push_back({quantity, t, s, cl, md, gap});
  *bucket = std::max(*bucket, gap);
}

}  // namespace

ConsistencyReport ConsistencyCheck(const LqGameSpec& spec,
                                   const SebeuLqProfile& profile,
                                   const ConsistencyOptions& o,
                                   const std::vector<DmPolicy>* policies) {
  const InitMode mode = profile.infinite ? InitMode::kSteadyState : InitMode::kPrior;
  const int horizon = profile.infinite ? o.window : profile.horizon;
  const int lags = profile.infinite ? o.max_lag : horizon;
  const MomentModel truth =
      PropagateMoments(TrueLoop(spec, profile, mode, policies), horizon, lags);
  const MomentModel model =
      PropagateMoments(ExoModelLoop(spec, profile, mode), horizon, lags);

  ConsistencyReport rep;
  rep.tol = o.tol;
  for (int t = 0; t < horizon; ++t) {
    Record(rep, "mean", t, t, truth.YMean(t), model.YMean(t), &rep.max_mean_gap);
    for (std::size_t h = 0; h < truth.y_lag[t].size(); ++h) {
      Record(rep, h == 0 ? "cov" : "lag", t + static_cast<int>(h), t,
             truth.y_lag[t][h], model.y_lag[t][h], &rep.max_cov_gap);
    }
  }

  // Forecasts the policies were built on, checked against the true loop:
  // e = y_n - (a Xhat_t + b) must have mean zero and be uncorrelated with
  // the observed past.
  const int fc_len = profile.infinite ? 2 * o.max_lag : horizon;
  const LoopForms forms = RollOutForms(spec, profile, mode, fc_len, -1, {}, policies);
  const int p = spec.p();
  auto forecast = [&](int t, int n, Mat* a, Vec* b) {
    if (profile.infinite) {
      *a = profile.env.an(n - t);
      *b = profile.env.bn(n - t);
    } else {
      *a = profile.env.slices[t].a[n - t];
      *b = profile.env.slices[t].b[n - t];
    }
  };
  const int t_max = profile.infinite ? o.max_lag : horizon;
  for (int t = 0; t < t_max; ++t) {
    const int n_max = profile.infinite ? std::min(fc_len, t + o.max_lag) : horizon;
    for (int n = t; n < n_max; ++n) {
      Mat a;
      Vec b;
      forecast(t, n, &a, &b);
      Form e = forms.y[n] - a * forms.xhat[t];
      e.offset -= b;
      Record(rep, "forecast_mean", n, t, Mean(e), Vec::Zero(p), &rep.max_forecast_gap);
      Mat worst = Mat::Zero(p, p);
      if (mode == InitMode::kPrior) {
        const Mat c = Cov(e, forms.y_prev);
        if (c.size() > 0 && c.cwiseAbs().maxCoeff() > worst.cwiseAbs().maxCoeff()) worst = c;
      }
      const int s_lo = profile.infinite ? std::max(0, t - o.max_lag) : 0;
      for (int s = s_lo; s < t; ++s) {
        const Mat c = Cov(e, forms.y[s]);
        if (c.cwiseAbs().maxCoeff() > worst.cwiseAbs().maxCoeff()) worst = c;
      }
      Record(rep, "forecast_cov", n, t, worst, Mat::Zero(p, p), &rep.max_forecast_gap);
    }
  }
  rep.max_gap = std::max({rep.max_mean_gap, rep.max_cov_gap, rep.max_forecast_gap});
  rep.passed = rep.max_gap <= o.tol;
  return rep;
}

void WriteConsistencyCsv(const ConsistencyReport& report, std::ostream& os) {
  os << "quantity,t,s,closed_loop,model,gap\n";
  for (const auto& r : report.rows) {
    os << r.quantity << ',' << r.t << ',' << r.s << ',' << FormatDouble(r.closed_loop)
       << ',' << FormatDouble(r.model) << ',' << FormatDouble(r.gap) << '\n';
  }
}

}  // namespace sebeu
