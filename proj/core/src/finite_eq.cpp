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

#include "sebeu/finite_eq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "sebeu/error.hpp"

namespace sebeu {
namespace {

std::size_t Values(const FiniteGameSpec& spec) {
  return spec.env_values.size();
}

// Law of y under the pure joint action `joint`.
Pmf PureLaw(const FiniteGameSpec& spec, std::size_t joint) {
  Pmf out(Values(spec), Rational(0));
  for (int k = 0; k < spec.NumDisturbances(); ++k) {
    out[spec.Outcome(joint, k)] += spec.disturbance_pmf[k];
  }
  return out;
}

// Exact expected cost of DM i playing `action` when the joint action is
// `joint` (i's entry already replaced).
Rational TrueCost(const FiniteGameSpec& spec, int i, int action,
                  std::size_t joint) {
  Rational total(0);
  for (int k = 0; k < spec.NumDisturbances(); ++k) {
    total += spec.disturbance_pmf[k] * spec.cost[i][action][spec.Outcome(joint, k)];
  }
  return total;
}

void CheckBudget(const FiniteGameSpec& spec, std::size_t budget) {
  // Overflow-safe product.
  std::size_t n = 1;
  for (const auto& a : spec.actions) {
    if (a.empty() || n > budget / a.size()) {
      throw Error(ErrorKind::kBudgetExceeded,
                  "joint action space exceeds the enumeration budget of " +
                      std::to_string(budget),
                  "enumeration budget", static_cast<double>(budget));
    }
    n *= a.size();
  }
}

// Joint indices satisfying `keep`, in increasing order.
std::vector<PureProfile> ParallelFilter(
    const FiniteGameSpec& spec, const EnumerationOptions& o,
    const std::function<bool(std::size_t)>& keep) {
  CheckFiniteStructure(spec);
  CheckBudget(spec, o.budget);
  const std::size_t total = spec.JointCount();
  int workers = o.workers > 0 ? o.workers
                              : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, workers);
  if (total < 4096) workers = 1;
  std::vector<std::vector<std::size_t>> found(workers);
  auto run = [&](int w) {
    const std::size_t lo = total * w / workers;
    const std::size_t hi = total * (w + 1) / workers;
    for (std::size_t idx = lo; idx < hi; ++idx) {
      if (keep(idx)) found[w].push_back(idx);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  std::vector<PureProfile> out;
  for (const auto& chunk : found) {
    for (std::size_t idx : chunk) out.push_back(spec.JointDecode(idx));
  }
  return out;
}

bool SebeuAt(const FiniteGameSpec& spec, std::size_t joint) {
  const PureProfile u = spec.JointDecode(joint);
  const Pmf law = PureLaw(spec, joint);
  for (int i = 0; i < spec.n_dm; ++i) {
    const Rational own = ExpectedCost(spec, i, u[i], law);
    for (int v = 0; v < spec.NumActions(i); ++v) {
      if (ExpectedCost(spec, i, v, law) < own) return false;
    }
  }
  return true;
}

bool NashAt(const FiniteGameSpec& spec, std::size_t joint) {
  PureProfile u = spec.JointDecode(joint);
  for (int i = 0; i < spec.n_dm; ++i) {
    const int own = u[i];
    const Rational base = TrueCost(spec, i, own, joint);
    for (int v = 0; v < spec.NumActions(i); ++v) {
      if (v == own) continue;
      u[i] = v;
      const bool better = TrueCost(spec, i, v, spec.JointIndex(u)) < base;
      u[i] = own;
      if (better) return false;
    }
  }
  return true;
}

// Off-path beliefs are free, so a deviation ruins support only if it beats
// the on-path cost under every belief, i.e. even at its worst y.
bool KalaiAt(const FiniteGameSpec& spec, std::size_t joint) {
  const PureProfile u = spec.JointDecode(joint);
  const Pmf law = PureLaw(spec, joint);
  for (int i = 0; i < spec.n_dm; ++i) {
    const Rational on_path = ExpectedCost(spec, i, u[i], law);
    for (int v = 0; v < spec.NumActions(i); ++v) {
      if (v == u[i]) continue;
      const auto& row = spec.cost[i][v];
      const Rational worst = *std::max_element(row.begin(), row.end());
      if (worst < on_path) return false;
    }
  }
  return true;
}

template <class T>
void CheckPmfShape(const FiniteGameSpec& spec, const std::vector<std::vector<T>>& p) {
  if (static_cast<int>(p.size()) != spec.n_dm) {
    throw Error(ErrorKind::kInvalidArgument, "profile needs one pmf per DM");
  }
  for (int i = 0; i < spec.n_dm; ++i) {
    if (static_cast<int>(p[i].size()) != spec.NumActions(i)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "pmf of DM " + std::to_string(i) + " has the wrong length");
    }
  }
}

// Calls visit(joint, weight) for every joint action with positive weight.
template <class T, class Visit>
void ForEachJoint(const FiniteGameSpec& spec,
                  const std::vector<std::vector<T>>& profile, int pinned_dm,
                  int pinned_action, Visit visit) {
  std::vector<int> a(spec.n_dm, 0);
  const std::size_t total = spec.JointCount();
  for (std::size_t idx = 0; idx < total; ++idx) {
    a = spec.JointDecode(idx);
    T w(1);
    bool zero = false;
    for (int j = 0; j < spec.n_dm; ++j) {
      if (j == pinned_dm) {
        if (a[j] != pinned_action) {
          zero = true;
          break;
        }
        continue;
      }
      if (profile[j][a[j]] == T(0)) {
        zero = true;
        break;
      }
      w *= profile[j][a[j]];
    }
    if (!zero) visit(idx, w);
  }
}

}  // namespace

RationalProfile PointProfile(const FiniteGameSpec& spec, const PureProfile& u) {
  RationalProfile out;
  for (int i = 0; i < spec.n_dm; ++i) {
    Pmf p(spec.NumActions(i), Rational(0));
    p.at(u.at(i)) = Rational(1);
    out.push_back(std::move(p));
  }
  return out;
}

RationalProfile UniformProfile(const FiniteGameSpec& spec) {
  RationalProfile out;
  for (int i = 0; i < spec.n_dm; ++i) {
    out.emplace_back(spec.NumActions(i), Rational(1, spec.NumActions(i)));
  }
  return out;
}

void CheckProfile(const FiniteGameSpec& spec, const RationalProfile& profile) {
  CheckPmfShape(spec, profile);
  for (int i = 0; i < spec.n_dm; ++i) {
    Rational sum(0);
    for (const Rational& v : profile[i]) {
      if (v < Rational(0)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "negative probability for DM " + std::to_string(i));
      }
      sum += v;
    }
    if (sum != Rational(1)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "pmf of DM " + std::to_string(i) + " sums to " + sum.ToString());
    }
  }
}

void CheckProfile(const FiniteGameSpec& spec, const MixedProfile& profile,
                  double tol) {
  CheckPmfShape(spec, profile);
  for (int i = 0; i < spec.n_dm; ++i) {
    double sum = 0.0;
    for (double v : profile[i]) {
      if (!(v >= 0.0)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "negative probability for DM " + std::to_string(i));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw Error(ErrorKind::kInvalidArgument,
                  "pmf of DM " + std::to_string(i) + " does not sum to one");
    }
  }
}

Pmf InducedEnvDistribution(const FiniteGameSpec& spec,
                           const RationalProfile& profile) {
  CheckProfile(spec, profile);
  Pmf out(Values(spec), Rational(0));
  ForEachJoint(spec, profile, -1, -1, [&](std::size_t joint, const Rational& w) {
    for (int k = 0; k < spec.NumDisturbances(); ++k) {
      out[spec.Outcome(joint, k)] += w * spec.disturbance_pmf[k];
    }
  });
  return out;
}

std::vector<double> InducedEnvDistribution(const FiniteGameSpec& spec,
                                           const MixedProfile& profile) {
  CheckProfile(spec, profile, 1e-9);
  std::vector<double> xi;
  for (const Rational& r : spec.disturbance_pmf) xi.push_back(r.ToDouble());
  std::vector<double> out(Values(spec), 0.0);
  ForEachJoint(spec, profile, -1, -1, [&](std::size_t joint, double w) {
    for (int k = 0; k < spec.NumDisturbances(); ++k) {
      out[spec.Outcome(joint, k)] += w * xi[k];
    }
  });
  return out;
}

Pmf ConditionalEnvDistribution(const FiniteGameSpec& spec,
                               const RationalProfile& profile, int i,
                               int action) {
  CheckProfile(spec, profile);
  if (i < 0 || i >= spec.n_dm || action < 0 || action >= spec.NumActions(i)) {
    throw Error(ErrorKind::kInvalidArgument, "DM or action out of range");
  }
  Pmf out(Values(spec), Rational(0));
  ForEachJoint(spec, profile, i, action, [&](std::size_t joint, const Rational& w) {
    for (int k = 0; k < spec.NumDisturbances(); ++k) {
      out[spec.Outcome(joint, k)] += w * spec.disturbance_pmf[k];
    }
  });
  return out;
}

Rational ExpectedCost(const FiniteGameSpec& spec, int i, int action,
                      const Pmf& belief) {
  Rational total(0);
  for (std::size_t y = 0; y < belief.size(); ++y) {
    if (belief[y] != Rational(0)) total += belief[y] * spec.cost[i][action][y];
  }
  return total;
}

BestReplySet BestReplyToBelief(const FiniteGameSpec& spec, int i,
                               const Pmf& belief) {
  BestReplySet out;
  for (int a = 0; a < spec.NumActions(i); ++a) {
    const Rational v = ExpectedCost(spec, i, a, belief);
    if (out.actions.empty() || v < out.value) {
      out.actions = {a};
      out.value = v;
    } else if (v == out.value) {
      out.actions.push_back(a);
    }
  }
  return out;
}

BestReplySetD BestReplyToBelief(const FiniteGameSpec& spec, int i,
                                const std::vector<double>& belief,
                                double tie_tol) {
  std::vector<double> values;
  for (int a = 0; a < spec.NumActions(i); ++a) {
    double v = 0.0;
    for (std::size_t y = 0; y < belief.size(); ++y) {
      v += belief[y] * spec.cost[i][a][y].ToDouble();
    }
    values.push_back(v);
  }
  BestReplySetD out;
  out.value = *std::min_element(values.begin(), values.end());
  for (int a = 0; a < spec.NumActions(i); ++a) {
    if (values[a] <= out.value + tie_tol) out.actions.push_back(a);
  }
  return out;
}

std::vector<PureProfile> EnumeratePureSebeu(const FiniteGameSpec& spec,
                                            const EnumerationOptions& o) {
  return ParallelFilter(spec, o, [&](std::size_t j) { return SebeuAt(spec, j); });
}

std::vector<PureProfile> EnumeratePureNash(const FiniteGameSpec& spec,
                                           const EnumerationOptions& o) {
  return ParallelFilter(spec, o, [&](std::size_t j) { return NashAt(spec, j); });
}

std::vector<PureProfile> EnumeratePureKalai(const FiniteGameSpec& spec,
                                            const EnumerationOptions& o) {
  return ParallelFilter(spec, o, [&](std::size_t j) { return KalaiAt(spec, j); });
}

EquilibriumSets EnumerateAll(const FiniteGameSpec& spec,
                             const EnumerationOptions& o) {
  return {EnumeratePureSebeu(spec, o), EnumeratePureNash(spec, o),
          EnumeratePureKalai(spec, o)};
}

bool IsPureSebeu(const FiniteGameSpec& spec, const PureProfile& u) {
  return SebeuAt(spec, spec.JointIndex(u));
}
bool IsPureNash(const FiniteGameSpec& spec, const PureProfile& u) {
  return NashAt(spec, spec.JointIndex(u));
}
bool IsPureKalai(const FiniteGameSpec& spec, const PureProfile& u) {
  return KalaiAt(spec, spec.JointIndex(u));
}

IterationReport SebeuFixedPointIteration(const FiniteGameSpec& spec,
                                         const IterationOptions& options) {
  CheckFiniteStructure(spec);
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "damping must lie in (0, 1]");
  }
  MixedProfile gamma = options.start;
  if (gamma.empty()) {
    for (int i = 0; i < spec.n_dm; ++i) {
      gamma.emplace_back(spec.NumActions(i), 1.0 / spec.NumActions(i));
    }
  }
  CheckProfile(spec, gamma, 1e-9);

  IterationReport rep;
  auto regret = [&](int i, const std::vector<double>& belief) {
    const BestReplySetD br = BestReplyToBelief(spec, i, belief, 0.0);
    double r = 0.0;
    for (int a = 0; a < spec.NumActions(i); ++a) {
      double v = 0.0;
      for (std::size_t y = 0; y < belief.size(); ++y) {
        v += belief[y] * spec.cost[i][a][y].ToDouble();
      }
      r += gamma[i][a] * (v - br.value);
    }
    return r;
  };

  for (int it = 1; it <= options.budget; ++it) {
    const std::vector<double> belief = InducedEnvDistribution(spec, gamma);
    double worst = 0.0;
    MixedProfile next = gamma;
    for (int i = 0; i < spec.n_dm; ++i) {
      const BestReplySetD br = BestReplyToBelief(spec, i, belief);
      std::vector<double> target(spec.NumActions(i), 0.0);
      for (int a : br.actions) target[a] = 1.0 / br.actions.size();
      double tv = 0.0;
      for (int a = 0; a < spec.NumActions(i); ++a) {
        next[i][a] = (1.0 - options.damping) * gamma[i][a] +
                     options.damping * target[a];
        tv += std::abs(next[i][a] - gamma[i][a]);
      }
      tv *= 0.5;
      worst = std::max(worst, tv);
      rep.trace.push_back({it, i, tv, regret(i, belief)});
    }
    gamma = std::move(next);
    rep.iterations = it;
    if (worst <= options.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.profile = gamma;
  rep.env_pmf = InducedEnvDistribution(spec, gamma);
  rep.max_residual = 0.0;
  // Off-support mass left at convergence is O(tol); scale the verifier to
  // the cost range so it does not depend on units.
  double range = 1.0;
  int most = 1;
  for (int i = 0; i < spec.n_dm; ++i) {
    most = std::max(most, spec.NumActions(i));
    for (const auto& row : spec.cost[i]) {
      const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
      range = std::max(range, (*hi - *lo).ToDouble());
    }
  }
  const double slack = 4.0 * options.tol * range * most;
  bool supports_ok = true;
  for (int i = 0; i < spec.n_dm; ++i) {
    rep.br_residual.push_back(regret(i, rep.env_pmf));
    rep.max_residual = std::max(rep.max_residual, rep.br_residual.back());
    const BestReplySetD br = BestReplyToBelief(spec, i, rep.env_pmf, slack);
    for (int a = 0; a < spec.NumActions(i); ++a) {
      if (gamma[i][a] > 4.0 * options.tol &&
          std::find(br.actions.begin(), br.actions.end(), a) == br.actions.end()) {
        supports_ok = false;
      }
    }
  }
  rep.verified = rep.converged && supports_ok && rep.max_residual <= slack;
  return rep;
}

}  // namespace sebeu
