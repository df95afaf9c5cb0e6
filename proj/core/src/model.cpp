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

#include "sebeu/model.hpp"

#include <cmath>
#include <sstream>

namespace sebeu {
namespace {

std::string DmName(int i, const char* field) {
  std::ostringstream os;
  os << "per_dm[" << i << "]." << field;
  return os.str();
}

std::string EnvName(const char* field, int j = -1) {
  std::ostringstream os;
  os << "env." << field;
  if (j >= 0) os << "[" << j << "]";
  return os.str();
}

[[noreturn]] void DimError(const std::string& block, Eigen::Index rows,
                           Eigen::Index cols, Eigen::Index want_rows,
                           Eigen::Index want_cols) {
  std::ostringstream os;
  os << "dimension mismatch in " << block << ": got " << rows << "x" << cols
     << ", expected " << want_rows << "x" << want_cols;
  throw Error(ErrorKind::kDimension, os.str(), block);
}

void CheckShape(const Mat& m, Eigen::Index rows, Eigen::Index cols,
                const std::string& block) {
  if (m.rows() != rows || m.cols() != cols) {
    DimError(block, m.rows(), m.cols(), rows, cols);
  }
}

void CheckSeries(const MatSeries& s, const LqGameSpec& spec,
                 Eigen::Index rows, Eigen::Index cols,
                 const std::string& block) {
  const std::size_t len = s.items.size();
  if (len == 0) {
    throw Error(ErrorKind::kDimension, "missing matrix " + block, block);
  }
  if (len != 1 && (spec.infinite() ||
                   len != static_cast<std::size_t>(spec.horizon))) {
    std::ostringstream os;
    os << block << " has " << len
       << " stages; expected 1 or the horizon length";
    throw Error(ErrorKind::kDimension, os.str(), block);
  }
  for (std::size_t t = 0; t < len; ++t) {
    std::string name = block;
    if (len > 1) name += "(t=" + std::to_string(t) + ")";
    CheckShape(s.items[t], rows, cols, name);
  }
}

void CheckLaw(const GaussianLaw& law, int dim, const std::string& block) {
  if (law.mean.size() != dim) {
    DimError(block + ".mean", law.mean.size(), 1, dim, 1);
  }
  CheckShape(law.cov, dim, dim, block + ".cov");
  if (!linalg::IsSymmetric(law.cov, 1e-12)) {
    throw Error(ErrorKind::kDefiniteness, block + ".cov is not symmetric",
                block + ".cov");
  }
  const double min_eig = linalg::MinEigenvalue(law.cov);
  const double scale =
      law.cov.size() ? std::max(1.0, law.cov.cwiseAbs().maxCoeff()) : 1.0;
  if (min_eig < -1e-10 * scale) {
    std::ostringstream os;
    os << block << ".cov is not positive semidefinite (minimum eigenvalue "
       << min_eig << ")";
    throw Error(ErrorKind::kDefiniteness, os.str(), block + ".cov", min_eig);
  }
}

void CheckLawSeries(const Series<GaussianLaw>& s, const LqGameSpec& spec,
                    int dim, const std::string& block) {
  if (s.items.empty()) {
    throw Error(ErrorKind::kDimension, "missing noise law " + block, block);
  }
  if (s.items.size() != 1 &&
      (spec.infinite() ||
       s.items.size() != static_cast<std::size_t>(spec.horizon))) {
    throw Error(ErrorKind::kDimension,
                block + " must have 1 or horizon-many stages", block);
  }
  for (const auto& law : s.items) CheckLaw(law, dim, block);
}

void CheckPositiveDefinite(const Mat& m, const std::string& block) {
  if (!linalg::IsSymmetric(m, 1e-12)) {
    throw Error(ErrorKind::kDefiniteness, block + " is not symmetric", block);
  }
  const double min_eig = linalg::MinEigenvalue(m);
  if (!(min_eig > 0.0)) {
    std::ostringstream os;
    os << block << " is not positive definite (minimum eigenvalue " << min_eig
       << ")";
    throw Error(ErrorKind::kDefiniteness, os.str(), block, min_eig);
  }
}

}  // namespace

int LqGameSpec::nx() const {
  int total = env.n0;
  for (const auto& dm : per_dm) total += dm.n();
  return total;
}

int LqGameSpec::StateOffset(int j) const {
  if (j == 0) return 0;
  int off = env.n0;
  for (int i = 0; i + 1 < j; ++i) off += per_dm[i].n();
  return off;
}

Vec LqGameSpec::WMean(int t) const {
  Vec out(nx());
  int off = 0;
  for (std::size_t j = 0; j < noise.w.size(); ++j) {
    const auto& law = noise.w[j].At(t);
    out.segment(off, law.dim()) = law.mean;
    off += law.dim();
  }
  return out;
}

Mat LqGameSpec::WCov(int t) const {
  std::vector<Mat> blocks;
  blocks.reserve(noise.w.size());
  for (const auto& s : noise.w) blocks.push_back(s.At(t).cov);
  return linalg::BlockDiagonal(blocks);
}

std::size_t FiniteGameSpec::JointCount() const {
  std::size_t n = 1;
  for (const auto& a : actions) n *= a.size();
  return n;
}

std::size_t FiniteGameSpec::JointIndex(const std::vector<int>& a) const {
  std::size_t idx = 0;
  for (int i = 0; i < n_dm; ++i) idx = idx * actions[i].size() + a[i];
  return idx;
}

std::vector<int> FiniteGameSpec::JointDecode(std::size_t index) const {
  std::vector<int> a(n_dm);
  for (int i = n_dm - 1; i >= 0; --i) {
    const std::size_t k = actions[i].size();
    a[i] = static_cast<int>(index % k);
    index /= k;
  }
  return a;
}

bool ValidationReport::AllPassed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ValidationCheck* ValidationReport::Find(
    const std::string& prefix) const {
  for (const auto& c : checks) {
    if (!c.passed && c.name.rfind(prefix, 0) == 0) return &c;
  }
  return nullptr;
}

void CheckLqStructure(const LqGameSpec& spec) {
  if (spec.n_dm < 1) {
    throw Error(ErrorKind::kInvalidArgument, "n_dm must be positive", "n_dm");
  }
  if (!spec.infinite() && spec.horizon < 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "horizon must be a positive integer or \"infinite\"",
                "horizon");
  }
  if (static_cast<int>(spec.per_dm.size()) != spec.n_dm) {
    throw Error(ErrorKind::kDimension,
                "per_dm must list exactly n_dm blocks", "per_dm");
  }
  const int p = spec.env.p;
  const int n0 = spec.env.n0;
  if (p < 1 || n0 < 0) {
    throw Error(ErrorKind::kDimension, "environment dimensions invalid", "env");
  }
  for (int i = 0; i < spec.n_dm; ++i) {
    const DmBlock& dm = spec.per_dm[i];
    if (dm.A.items.empty() || dm.B.items.empty()) {
      throw Error(ErrorKind::kDimension, "missing A or B for DM " +
                                             std::to_string(i),
                  DmName(i, "A"));
    }
    const int n = dm.n();
    const int m = dm.m();
    CheckSeries(dm.A, spec, n, n, DmName(i, "A"));
    CheckSeries(dm.B, spec, n, m, DmName(i, "B"));
    CheckSeries(dm.C, spec, n, p, DmName(i, "C"));
    CheckSeries(dm.Q, spec, n, n, DmName(i, "Q"));
    CheckSeries(dm.R, spec, m, m, DmName(i, "R"));
    CheckSeries(dm.K, spec, p, m, DmName(i, "K"));
    CheckSeries(dm.L, spec, p, n, DmName(i, "L"));
    if (!spec.infinite()) CheckShape(dm.QT, n, n, DmName(i, "QT"));
    const bool beta_ok = spec.infinite() ? (dm.beta >= 0.0 && dm.beta < 1.0)
                                         : (dm.beta >= 0.0 && dm.beta <= 1.0);
    if (!beta_ok) {
      std::ostringstream os;
      os << DmName(i, "beta") << " = " << dm.beta << " out of range "
         << (spec.infinite() ? "[0,1)" : "[0,1]");
      throw Error(ErrorKind::kInvalidArgument, os.str(), DmName(i, "beta"),
                  dm.beta);
    }
    for (std::size_t t = 0; t < dm.Q.items.size(); ++t) {
      CheckPositiveDefinite(dm.Q.items[t], DmName(i, "Q"));
    }
    for (std::size_t t = 0; t < dm.R.items.size(); ++t) {
      CheckPositiveDefinite(dm.R.items[t], DmName(i, "R"));
    }
    if (!spec.infinite()) CheckPositiveDefinite(dm.QT, DmName(i, "QT"));
  }
  const EnvBlock& env = spec.env;
  CheckSeries(env.A0, spec, n0, n0, EnvName("A0"));
  CheckSeries(env.D, spec, p, n0, EnvName("D"));
  for (const auto* list : {&env.B1, &env.B2, &env.E1, &env.E2}) {
    if (static_cast<int>(list->size()) != spec.n_dm) {
      throw Error(ErrorKind::kDimension,
                  "environment coupling lists must have n_dm entries", "env");
    }
  }
  for (int j = 0; j < spec.n_dm; ++j) {
    const int n = spec.per_dm[j].n();
    const int m = spec.per_dm[j].m();
    CheckSeries(env.B1[j], spec, n0, m, EnvName("B1", j));
    CheckSeries(env.B2[j], spec, n0, n, EnvName("B2", j));
    CheckSeries(env.E1[j], spec, p, m, EnvName("E1", j));
    CheckSeries(env.E2[j], spec, p, n, EnvName("E2", j));
  }
  CheckLaw(spec.noise.init, p + spec.nx(), "noise.init");
  if (static_cast<int>(spec.noise.w.size()) != spec.n_dm + 1) {
    throw Error(ErrorKind::kDimension,
                "noise.w must list the environment noise and one law per DM",
                "noise.w");
  }
  CheckLawSeries(spec.noise.w[0], spec, n0, "noise.w[0]");
  for (int j = 1; j <= spec.n_dm; ++j) {
    CheckLawSeries(spec.noise.w[j], spec, spec.per_dm[j - 1].n(),
                   "noise.w[" + std::to_string(j) + "]");
  }
  CheckLawSeries(spec.noise.xi, spec, p, "noise.xi");
}

void CheckFiniteStructure(const FiniteGameSpec& spec) {
  if (spec.n_dm < 1) {
    throw Error(ErrorKind::kInvalidArgument, "n_dm must be positive", "n_dm");
  }
  if (static_cast<int>(spec.actions.size()) != spec.n_dm ||
      static_cast<int>(spec.cost.size()) != spec.n_dm) {
    throw Error(ErrorKind::kDimension,
                "actions and cost must list one entry per DM", "actions");
  }
  for (int i = 0; i < spec.n_dm; ++i) {
    if (spec.actions[i].empty()) {
      throw Error(ErrorKind::kDimension, "empty action set", "actions");
    }
    if (spec.cost[i].size() != spec.actions[i].size()) {
      throw Error(ErrorKind::kDimension,
                  "cost table rows must match the action set", "cost");
    }
    for (const auto& row : spec.cost[i]) {
      if (row.size() != spec.env_values.size()) {
        throw Error(ErrorKind::kDimension,
                    "cost table columns must match env_values", "cost");
      }
    }
  }
  if (spec.env_values.empty()) {
    throw Error(ErrorKind::kDimension, "env_values is empty", "env_values");
  }
  if (spec.disturbance_pmf.empty()) {
    throw Error(ErrorKind::kDimension, "disturbance set is empty",
                "disturbance");
  }
  Rational total(0);
  for (const auto& pr : spec.disturbance_pmf) {
    if (pr < Rational(0)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "disturbance pmf has a negative entry", "disturbance");
    }
    total += pr;
  }
  if (std::abs(total.ToDouble() - 1.0) > 1e-12) {
    throw Error(ErrorKind::kInvalidArgument,
                "disturbance pmf does not sum to one", "disturbance",
                total.ToDouble());
  }
  const std::size_t need = spec.JointCount() * spec.disturbance_pmf.size();
  if (spec.outcome.size() != need) {
    throw Error(ErrorKind::kDimension,
                "outcome table is not total over (joint action, disturbance)",
                "outcome", static_cast<double>(spec.outcome.size()));
  }
  for (int y : spec.outcome) {
    if (y < 0 || y >= static_cast<int>(spec.env_values.size())) {
      throw Error(ErrorKind::kDimension,
                  "outcome table has an undefined entry", "outcome");
    }
  }
}

ValidationReport ValidateLqSpec(const LqGameSpec& spec) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  try {
    CheckLqStructure(spec);
    add("dimensions", true);
    add("definiteness", true);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kDimension) {
      add("dimensions", false, e.what());
      return report;
    }
    add("dimensions", true);
    add("definiteness", false, e.what());
  }
  // Independence is structural in the schema: (y_{-1}, X_0), each W_t and
  // each xi_t are separate laws.
  add("independence structure", true,
      "(y_{-1}, X_0), W_t, xi_t declared as separate Gaussian blocks");
  if (!spec.infinite()) return report;

  bool invariant = true;
  for (const auto& dm : spec.per_dm) {
    for (const auto* s : {&dm.A, &dm.B, &dm.C, &dm.Q, &dm.R, &dm.K, &dm.L}) {
      invariant = invariant && !s->time_varying();
    }
  }
  add("time invariant", invariant);
  add("noise iid", spec.noise.iid);

  const Mat& a0 = spec.env.A0.At(0);
  const double rho0 = linalg::SpectralRadius(a0);
  {
    std::ostringstream os;
    os << "spectral radius " << rho0;
    add("A0 stable", rho0 < 1.0, os.str());
  }
  for (int i = 0; i < spec.n_dm; ++i) {
    const auto& dm = spec.per_dm[i];
    const bool ok = linalg::IsStabilizable(dm.A.At(0), dm.B.At(0), 1e-9);
    add("stabilizable (DM " + std::to_string(i + 1) + ")", ok,
        ok ? "" : "PBH rank test failed for an unstable mode");
  }
  return report;
}

LqGameSpec MakeScalarGame(const ScalarGameParams& params, int n_dm) {
  LqGameSpec spec;
  spec.n_dm = n_dm;
  spec.horizon = params.horizon;
  const Mat one = Mat::Constant(1, 1, 1.0);
  DmBlock dm;
  dm.A = MatSeries(Mat::Constant(1, 1, params.a));
  dm.B = MatSeries(Mat::Constant(1, 1, params.b));
  dm.C = MatSeries(Mat::Zero(1, 1));
  dm.Q = MatSeries(Mat::Constant(1, 1, params.q));
  dm.R = MatSeries(Mat::Constant(1, 1, params.r));
  dm.K = MatSeries(one);
  dm.L = MatSeries(Mat::Zero(1, 1));
  dm.QT = params.horizon == kInfiniteHorizon ? Mat() : Mat(Mat::Constant(1, 1, params.q));
  dm.beta = params.beta;
  spec.per_dm.assign(n_dm, dm);

  spec.env.n0 = 0;
  spec.env.p = 1;
  spec.env.A0 = MatSeries(Mat::Zero(0, 0));
  spec.env.D = MatSeries(Mat::Zero(1, 0));
  spec.env.B1.assign(n_dm, MatSeries(Mat::Zero(0, 1)));
  spec.env.B2.assign(n_dm, MatSeries(Mat::Zero(0, 1)));
  spec.env.E1.assign(n_dm, MatSeries(one));
  spec.env.E2.assign(n_dm, MatSeries(Mat::Zero(1, 1)));

  // y_{-1} is degenerate at zero.
  spec.noise.init.mean = Vec::Zero(1 + n_dm);
  spec.noise.init.cov = Mat::Zero(1 + n_dm, 1 + n_dm);
  for (int j = 0; j < n_dm; ++j) {
    spec.noise.init.cov(1 + j, 1 + j) = params.var_x0;
  }
  spec.noise.w.clear();
  spec.noise.w.push_back(Series<GaussianLaw>(GaussianLaw{Vec(0), Mat(0, 0)}));
  for (int j = 0; j < n_dm; ++j) {
    spec.noise.w.push_back(Series<GaussianLaw>(
        GaussianLaw{Vec::Zero(1), Mat::Constant(1, 1, params.var_w)}));
  }
  spec.noise.xi = Series<GaussianLaw>(
      GaussianLaw{Vec::Zero(1), Mat::Constant(1, 1, params.var_xi)});
  spec.noise.iid = true;
  return spec;
}

LqGameSpec ReplicateDm(const LqGameSpec& single, int n_dm) {
  if (single.n_dm != 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "ReplicateDm expects a one-DM template", "n_dm");
  }
  LqGameSpec spec = single;
  spec.n_dm = n_dm;
  spec.per_dm.assign(n_dm, single.per_dm[0]);
  spec.env.B1.assign(n_dm, single.env.B1[0]);
  spec.env.B2.assign(n_dm, single.env.B2[0]);
  spec.env.E1.assign(n_dm, single.env.E1[0]);
  spec.env.E2.assign(n_dm, single.env.E2[0]);

  const int p = single.p();
  const int n0 = single.n0();
  const int n = single.per_dm[0].n();
  const int head = p + n0;
  const int dim = head + n_dm * n;
  const GaussianLaw& src = single.noise.init;
  GaussianLaw init{Vec::Zero(dim), Mat::Zero(dim, dim)};
  init.mean.head(head) = src.mean.head(head);
  init.cov.topLeftCorner(head, head) = src.cov.topLeftCorner(head, head);
  for (int j = 0; j < n_dm; ++j) {
    const int off = head + j * n;
    init.mean.segment(off, n) = src.mean.segment(head, n);
    init.cov.block(off, off, n, n) = src.cov.block(head, head, n, n);
    init.cov.block(0, off, head, n) = src.cov.block(0, head, head, n);
    init.cov.block(off, 0, n, head) = src.cov.block(head, 0, n, head);
  }
  spec.noise.init = init;
  spec.noise.w.resize(1);
  for (int j = 0; j < n_dm; ++j) spec.noise.w.push_back(single.noise.w[1]);
  return spec;
}

FiniteGameSpec MakeDemandResponseGame(int n_dm) {
  FiniteGameSpec spec;
  spec.n_dm = n_dm;
  spec.actions.assign(n_dm, {"0", "1", "2"});
  for (int k = 0; k <= 2 * n_dm; ++k) {
    spec.env_values.emplace_back(k, n_dm);
  }
  spec.disturbance_labels = {"0"};
  spec.disturbance_pmf = {Rational(1)};
  const std::size_t joint = spec.JointCount();
  spec.outcome.resize(joint);
  for (std::size_t idx = 0; idx < joint; ++idx) {
    int total = 0;
    for (int a : spec.JointDecode(idx)) total += a;
    spec.outcome[idx] = total;  // env_values[total] == total / N
  }
  spec.cost.assign(n_dm, {});
  for (int i = 0; i < n_dm; ++i) {
    for (int u = 0; u <= 2; ++u) {
      std::vector<Rational> row;
      for (const auto& y : spec.env_values) row.push_back(Rational(u) * y - u);
      spec.cost[i].push_back(std::move(row));
    }
  }
  return spec;
}

}  // namespace sebeu
