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

#include "cli.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <ceres/version.h>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sebeu/epsnash.hpp"
#include "sebeu/error.hpp"
#include "sebeu/finite_eq.hpp"
#include "sebeu/scenario_io.hpp"
#include "sebeu/sebeu_lq.hpp"
#include "sebeu/simulate.hpp"

#ifndef SEBEU_VERSION
#define SEBEU_VERSION "unknown"
#endif

namespace sebeu::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Not a sebeu::Error: bad flags or a command that does not fit the spec.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json Num(double v) { return FormatDouble(v); }

json VecJson(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(Num(v(i)));
  return out;
}

json MatJson(const Mat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(VecJson(m.row(i).transpose()));
  return out;
}

template <class T>
json ListJson(const std::vector<T>& items) {
  json out = json::array();
  for (const auto& x : items) {
    if constexpr (std::is_same_v<T, Vec>) {
      out.push_back(VecJson(x));
    } else {
      out.push_back(MatJson(x));
    }
  }
  return out;
}

std::string Dump(const json& doc) { return doc.dump(1) + "\n"; }

class Run {
 public:
  Run(const RunConfig& config, std::ostream& log) : cfg_(config), log_(log) {}

  int Execute();

 private:
  void Write(const std::string& name, const std::string& bytes);
  void WriteManifest(const std::string& status, double seconds, const json& error);

  void SolveLq(const LqGameSpec& spec);
  void SolveMeanFieldCmd(const LqGameSpec& spec);
  void Enumerate(const FiniteGameSpec& spec);
  int Iterate(const FiniteGameSpec& spec);
  void Simulate(const LqGameSpec& spec);
  int Consistency(const LqGameSpec& spec);
  void EpsGap(const LqGameSpec& spec);
  void EpsGap(const FiniteGameSpec& spec);
  void SweepNCmd(const LqGameSpec& spec);

  SebeuLqProfile Solve(const LqGameSpec& spec) const;
  DeviationSearchOptions SearchOptions() const;

  const RunConfig& cfg_;
  std::ostream& log_;
  std::string spec_bytes_;
  std::map<std::string, std::string> artifacts_;  // name -> sha256
};

template <class T>
const T& Want(const Scenario& s, const std::string& command) {
  if (const T* p = std::get_if<T>(&s)) return *p;
  const bool lq = std::is_same_v<T, LqGameSpec>;
  throw UsageError(command + " needs " + (lq ? "an LQ" : "a finite") + " scenario");
}

void Run::Write(const std::string& name, const std::string& bytes) {
  const fs::path dir(cfg_.out_dir);
  const fs::path final_path = dir / name;
  const fs::path tmp = dir / (name + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw UsageError("cannot write " + tmp.string());
    os << bytes;
    if (!os.flush()) throw UsageError("cannot write " + tmp.string());
  }
  fs::rename(tmp, final_path);
  if (name != "manifest.json") artifacts_[name] = Sha256Hex(bytes);
}

void Run::WriteManifest(const std::string& status, double seconds, const json& error) {
  json m;
  m["command"] = cfg_.command;
  m["status"] = status;
  json in;
  in["spec_path"] = cfg_.spec_path;
  in["spec_sha256"] = Sha256Hex(spec_bytes_);
  m["inputs"] = in;
  json opts;
  opts["seed"] = std::to_string(cfg_.seed);
  if (cfg_.paths) opts["paths"] = std::to_string(*cfg_.paths);
  if (cfg_.horizon) opts["horizon"] = std::to_string(*cfg_.horizon);
  if (cfg_.tol) opts["tol"] = Num(*cfg_.tol);
  if (cfg_.budget) opts["budget"] = std::to_string(*cfg_.budget);
  if (!cfg_.n_grid.empty()) {
    json g = json::array();
    for (int n : cfg_.n_grid) g.push_back(std::to_string(n));
    opts["n_grid"] = g;
  }
  m["options"] = opts;
  m["seed"] = std::to_string(cfg_.seed);
  json v;
  v["sebeu"] = SEBEU_VERSION;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
               std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["ceres"] = CERES_VERSION_STRING;
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["openssl"] = OPENSSL_VERSION_TEXT;
  m["versions"] = v;
  json art = json::object();
  for (const auto& [name, hash] : artifacts_) art[name] = hash;
  m["artifacts"] = art;
  json t;
  t["wall_seconds"] = Num(seconds);
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  t["finished_utc"] = stamp;
  m["timings"] = t;
  if (!error.is_null()) m["error"] = error;
  Write("manifest.json", Dump(m));
}

SebeuLqProfile Run::Solve(const LqGameSpec& spec) const {
  if (!spec.infinite()) return BuildSebeuFinite(spec);
  FixedPointOptions o;
  if (cfg_.tol) o.tol = *cfg_.tol;
  if (cfg_.budget) o.budget = static_cast<int>(*cfg_.budget);
  return BuildSebeuInfiniteStationary(spec, o);
}

DeviationSearchOptions Run::SearchOptions() const {
  DeviationSearchOptions o;
  o.seed = cfg_.seed;
  o.workers = cfg_.workers;
  if (cfg_.tol) o.gradient_tolerance = *cfg_.tol;
  if (cfg_.budget) o.budget = static_cast<int>(*cfg_.budget);
  return o;
}

json AffineJson(const AffinePolicy& pol) {
  json out;
  json p = json::array(), q = json::array();
  for (int t = 0; t < pol.horizon(); ++t) {
    p.push_back(ListJson(pol.P[t]));
    q.push_back(ListJson(pol.Q[t]));
  }
  out["P"] = p;
  out["Q"] = q;
  out["h"] = ListJson(pol.h);
  return out;
}

void Run::SolveLq(const LqGameSpec& spec) {
  const SebeuLqProfile prof = Solve(spec);
  json doc;
  doc["kind"] = "sebeu_lq";
  doc["n_dm"] = std::to_string(spec.n_dm);
  doc["horizon"] = spec.infinite() ? std::string("infinite") : std::to_string(spec.horizon);
  json pols = json::array();
  for (int j = 0; j < spec.n_dm; ++j) {
    const DmPolicy& d = prof.policies[j];
    json e;
    e["dm"] = std::to_string(j + 1);
    e["F"] = ListJson(d.F);
    e["G"] = ListJson(d.G);
    e["H"] = ListJson(d.H);
    if (!spec.infinite()) e["affine"] = AffineJson(SebeuAsAffine(spec, prof, j));
    pols.push_back(e);
  }
  doc["policies"] = pols;
  const KalmanEstimator& est = prof.estimator;
  json k;
  k["x0_offset"] = VecJson(est.x0_offset);
  k["x0_gain"] = MatJson(est.x0_gain);
  k["Phi"] = ListJson(est.Phi);
  k["Gamma"] = ListJson(est.Gamma);
  k["kappa"] = ListJson(est.kappa);
  doc["estimator"] = k;
  if (prof.infinite) {
    const StationaryState& ss = prof.stationary;
    json s;
    s["Sigma"] = MatJson(ss.Sigma);
    s["Theta"] = MatJson(ss.Theta);
    s["x_hat0"] = VecJson(ss.x_hat0);
    s["Acl_spectral_radius"] = Num(ss.acl_radius);
    s["sigma_residual"] = Num(ss.sigma_residual);
    s["theta_residual"] = Num(ss.theta_residual);
    s["x_hat_residual"] = Num(ss.x_hat_residual);
    s["fixed_point_iterations"] = std::to_string(prof.env.iterations);
    s["fixed_point_window_residual"] = Num(prof.env.window_residual);
    doc["stationary"] = s;
  }
  Write("profile.json", Dump(doc));
  log_ << "solved " << spec.n_dm << "-DM LQ game\n";
}

void Run::SolveMeanFieldCmd(const LqGameSpec& spec) {
  const MeanFieldSolution mf = SolveMeanField(spec);
  json doc;
  doc["kind"] = "mean_field";
  doc["n_dm"] = std::to_string(spec.n_dm);
  doc["F"] = MatJson(mf.F);
  doc["G"] = MatJson(mf.G);
  doc["H"] = VecJson(mf.H);
  doc["offset"] = VecJson(mf.offset);
  doc["y_hat"] = VecJson(mf.y_hat);
  doc["x_hat"] = VecJson(mf.x_hat);
  doc["condition"] = Num(mf.condition);
  doc["init_matches"] = mf.init_matches;
  doc["warning"] = mf.warning;
  Write("profile.json", Dump(doc));
  if (!mf.warning.empty()) log_ << "warning: " << mf.warning << "\n";
}

json SetJson(const FiniteGameSpec& spec, const std::string& concept_name,
             const std::vector<PureProfile>& set) {
  json doc;
  doc["concept"] = concept_name;
  doc["n_dm"] = std::to_string(spec.n_dm);
  doc["count"] = std::to_string(set.size());
  json labels = json::array(), idx = json::array();
  for (const PureProfile& u : set) {
    json l = json::array(), k = json::array();
    for (int i = 0; i < spec.n_dm; ++i) {
      l.push_back(spec.actions[i][u[i]]);
      k.push_back(std::to_string(u[i]));
    }
    labels.push_back(l);
    idx.push_back(k);
  }
  doc["profiles"] = labels;
  doc["action_indices"] = idx;
  return doc;
}

EnumerationOptions EnumOptions(const RunConfig& cfg) {
  EnumerationOptions o;
  o.workers = cfg.workers;
  if (cfg.budget) o.budget = static_cast<std::size_t>(*cfg.budget);
  return o;
}

void Run::Enumerate(const FiniteGameSpec& spec) {
  const EquilibriumSets sets = EnumerateAll(spec, EnumOptions(cfg_));
  Write("equilibria_sebeu.json", Dump(SetJson(spec, "sebeu", sets.sebeu)));
  Write("equilibria_nash.json", Dump(SetJson(spec, "nash", sets.nash)));
  Write("equilibria_kalai.json", Dump(SetJson(spec, "kalai", sets.kalai)));
  log_ << "sebeu " << sets.sebeu.size() << ", nash " << sets.nash.size() << ", kalai "
       << sets.kalai.size() << "\n";
}

int Run::Iterate(const FiniteGameSpec& spec) {
  IterationOptions o;
  if (cfg_.tol) o.tol = *cfg_.tol;
  if (cfg_.budget) o.budget = static_cast<int>(*cfg_.budget);
  const IterationReport rep = SebeuFixedPointIteration(spec, o);
  json doc;
  doc["converged"] = rep.converged;
  doc["verified"] = rep.verified;
  doc["iterations"] = std::to_string(rep.iterations);
  doc["max_residual"] = Num(rep.max_residual);
  json prof = json::array();
  for (const auto& mix : rep.profile) {
    json p = json::array();
    for (double v : mix) p.push_back(Num(v));
    prof.push_back(p);
  }
  doc["profile"] = prof;
  json env = json::array(), res = json::array();
  for (double v : rep.env_pmf) env.push_back(Num(v));
  for (double v : rep.br_residual) res.push_back(Num(v));
  doc["env_pmf"] = env;
  doc["br_residual"] = res;
  Write("iteration.json", Dump(doc));
  std::ostringstream csv;
  csv << "iter,dm,tv_change,br_residual\n";
  for (const IterationRow& r : rep.trace) {
    csv << r.iter << ',' << r.dm + 1 << ',' << FormatDouble(r.tv_change) << ','
        << FormatDouble(r.br_residual) << '\n';
  }
  Write("iteration_trace.csv", csv.str());
  if (!rep.verified) {
    log_ << "iteration did not reach a verified fixed point after " << rep.iterations
         << " rounds\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}

void Run::Simulate(const LqGameSpec& spec) {
  const SebeuLqProfile prof = Solve(spec);
  SimulationOptions o;
  o.seed = cfg_.seed;
  o.workers = cfg_.workers;
  o.n_paths = cfg_.paths.value_or(1000);
  o.horizon = cfg_.horizon.value_or(spec.infinite() ? 10 : spec.horizon);
  o.mode = spec.infinite() ? InitMode::kSteadyState : InitMode::kPrior;
  std::ostringstream csv;
  WriteTrajectoriesCsv(SimulateTrajectories(spec, prof, o), csv);
  Write("trajectories.csv", csv.str());
}

int Run::Consistency(const LqGameSpec& spec) {
  const SebeuLqProfile prof = Solve(spec);
  ConsistencyOptions o;
  if (cfg_.tol) o.tol = *cfg_.tol;
  if (cfg_.horizon) o.window = *cfg_.horizon;
  const ConsistencyReport rep = ConsistencyCheck(spec, prof, o);
  std::ostringstream csv;
  WriteConsistencyCsv(rep, csv);
  Write("consistency.csv", csv.str());
  json doc;
  doc["passed"] = rep.passed;
  doc["tol"] = Num(rep.tol);
  doc["max_mean_gap"] = Num(rep.max_mean_gap);
  doc["max_cov_gap"] = Num(rep.max_cov_gap);
  doc["max_forecast_gap"] = Num(rep.max_forecast_gap);
  doc["max_gap"] = Num(rep.max_gap);
  Write("consistency.json", Dump(doc));
  if (!rep.passed) {
    log_ << "environment law differs from the exogenous model by " << rep.max_gap << "\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}

json GapSummary(const GapReport& rep) {
  json doc;
  doc["deviation_class"] = rep.deviation_class;
  doc["max_gap"] = Num(rep.max_gap);
  json rows = json::array();
  for (const GapEntry& e : rep.entries) {
    json r;
    r["N"] = std::to_string(e.n_dm);
    r["dm"] = std::to_string(e.dm + 1);
    r["gap"] = Num(e.gap);
    r["converged"] = e.converged;
    r["best_start"] = std::to_string(e.best_start);
    r["policy"] = AffineJson(e.policy);
    rows.push_back(r);
  }
  doc["entries"] = rows;
  return doc;
}

void Run::EpsGap(const LqGameSpec& spec) {
  if (spec.infinite()) throw UsageError("eps-gap needs a finite-horizon LQ scenario");
  const SebeuLqProfile prof = BuildSebeuFinite(spec);
  const GapReport rep = EpsGapLq(spec, prof, SearchOptions());
  std::ostringstream csv;
  WriteGapCsv(rep, csv);
  Write("gaps.csv", csv.str());
  Write("gaps.json", Dump(GapSummary(rep)));
  log_ << "max gap " << FormatDouble(rep.max_gap) << " (" << rep.deviation_class << ")\n";
}

void Run::EpsGap(const FiniteGameSpec& spec) {
  const std::vector<PureProfile> set = EnumeratePureSebeu(spec, EnumOptions(cfg_));
  std::ostringstream csv;
  csv << "profile,N,dm,sebeu_cost,deviation_cost,gap\n";
  json doc;
  json gaps = json::array();
  for (std::size_t k = 0; k < set.size(); ++k) {
    const FiniteGapReport rep = EpsGapFinite(spec, PointProfile(spec, set[k]));
    for (const FiniteGapEntry& e : rep.entries) {
      csv << k << ',' << spec.n_dm << ',' << e.dm + 1 << ','
          << FormatDouble(e.cost.ToDouble()) << ',' << FormatDouble(e.best_cost.ToDouble())
          << ',' << FormatDouble(e.gap.ToDouble()) << '\n';
    }
    gaps.push_back(rep.max_gap.ToString());
  }
  Write("gaps.csv", csv.str());
  doc["equilibria"] = SetJson(spec, "sebeu", set);
  doc["max_gap_exact"] = gaps;
  Write("gaps.json", Dump(doc));
}

void Run::SweepNCmd(const LqGameSpec& spec) {
  if (spec.n_dm != 1 || spec.infinite()) {
    throw UsageError("sweep-n needs a finite-horizon one-DM LQ template");
  }
  const std::vector<int> grid =
      cfg_.n_grid.empty() ? std::vector<int>{1, 4, 16, 64} : cfg_.n_grid;
  const SpecFamily family = [&](int n) { return ReplicateDm(spec, n); };
  const GapReport rep = SweepN(family, grid, SearchOptions());
  std::ostringstream csv;
  WriteGapCsv(rep, csv);
  Write("gaps.csv", csv.str());
  json doc = GapSummary(rep);
  if (grid.size() >= 2) {
    std::vector<double> n, g;
    for (const GapEntry& e : rep.entries) {
      n.push_back(e.n_dm);
      g.push_back(e.gap);
    }
    const InverseNFit fit = FitInverseN(n, g);
    doc["fit_slope_vs_inverse_n"] = Num(fit.slope);
    doc["fit_intercept"] = Num(fit.intercept);
    doc["fit_r_squared"] = Num(fit.r_squared);
  }
  Write("gaps.json", Dump(doc));
}

int Run::Execute() {
  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  std::error_code ec;
  fs::create_directories(cfg_.out_dir, ec);
  if (!fs::is_directory(cfg_.out_dir)) {
    log_ << "error: cannot create output directory " << cfg_.out_dir << "\n";
    return kExitUsage;
  }
  const auto& cmds = Commands();
  if (std::find(cmds.begin(), cmds.end(), cfg_.command) == cmds.end()) {
    log_ << "error: unknown command '" << cfg_.command << "'\n";
    return kExitUsage;
  }
  int code = kExitOk;
  json error;
  try {
    std::ifstream in(cfg_.spec_path, std::ios::binary);
    if (!in) throw UsageError("cannot read spec file '" + cfg_.spec_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    spec_bytes_ = buf.str();
    const Scenario scenario = LoadSpec(spec_bytes_);
    const std::string& c = cfg_.command;
    if (c == "solve-lq") {
      SolveLq(Want<LqGameSpec>(scenario, c));
    } else if (c == "solve-meanfield") {
      SolveMeanFieldCmd(Want<LqGameSpec>(scenario, c));
    } else if (c == "enumerate") {
      Enumerate(Want<FiniteGameSpec>(scenario, c));
    } else if (c == "iterate-sebeu") {
      code = Iterate(Want<FiniteGameSpec>(scenario, c));
    } else if (c == "simulate") {
      Simulate(Want<LqGameSpec>(scenario, c));
    } else if (c == "consistency") {
      code = Consistency(Want<LqGameSpec>(scenario, c));
    } else if (c == "eps-gap") {
      std::visit([&](const auto& s) { EpsGap(s); }, scenario);
    } else {
      SweepNCmd(Want<LqGameSpec>(scenario, c));
    }
  } catch (const Error& e) {
    code = IsSolverFailure(e.kind()) ? kExitSolverFailure : kExitUsage;
    error["kind"] = std::string(ErrorKindName(e.kind()));
    error["message"] = e.what();
    error["assumption"] = e.assumption();
    error["metric"] = Num(e.metric());
    log_ << "error [" << ErrorKindName(e.kind()) << "]: " << e.what() << "\n";
  } catch (const UsageError& e) {
    code = kExitUsage;
    error["kind"] = "usage";
    error["message"] = e.what();
    log_ << "error: " << e.what() << "\n";
  }
  if (!error.is_null()) Write("failure.json", Dump(error));
  const std::string status = code == kExitOk               ? "ok"
                             : code == kExitSolverFailure ? "solver_failure"
                                                          : "usage_error";
  try {
    WriteManifest(status, seconds(), error);
  } catch (const std::exception& e) {
    log_ << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return code;
}

}  // namespace

const std::vector<std::string>& Commands() {
  static const std::vector<std::string> kCommands = {
      "solve-lq", "solve-meanfield", "enumerate", "iterate-sebeu",
      "simulate", "consistency",     "eps-gap",   "sweep-n"};
  return kCommands;
}

int RunScenario(const RunConfig& config, std::ostream& log) {
  return Run(config, log).Execute();
}

std::string Sha256Hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibria of games with exogenous beliefs about the environment"};
  RunConfig cfg;
  std::string grid;
  double tol = 0.0;
  long long budget = 0;
  int paths = 0, horizon = 0;
  app.add_option("command", cfg.command, "one of: solve-lq, solve-meanfield, enumerate, "
                                         "iterate-sebeu, simulate, consistency, eps-gap, sweep-n")
      ->required();
  app.add_option("--spec", cfg.spec_path, "scenario JSON")->required();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  auto* o_paths = app.add_option("--paths", paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
  auto* o_horizon = app.add_option("--horizon", horizon, "stages to simulate or compare")
                        ->check(CLI::PositiveNumber);
  app.add_option("--n-grid", grid, "comma separated N values for sweep-n");
  auto* o_tol = app.add_option("--tol", tol, "tolerance override")->check(CLI::PositiveNumber);
  auto* o_budget =
      app.add_option("--budget", budget, "iteration or enumeration budget")->check(CLI::PositiveNumber);
  app.add_option("--workers", cfg.workers, "threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  try {
    app.parse(argc, argv);
    if (*o_paths) cfg.paths = paths;
    if (*o_horizon) cfg.horizon = horizon;
    if (*o_tol) cfg.tol = tol;
    if (*o_budget) cfg.budget = budget;
    if (!grid.empty()) {
      std::stringstream ss(grid);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const double v = ParseDouble(item, "--n-grid");
        if (v < 1 || v != static_cast<int>(v)) throw CLI::ValidationError("--n-grid", "entries must be positive integers");
        cfg.n_grid.push_back(static_cast<int>(v));
      }
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return RunScenario(cfg, err);
}

}  // namespace sebeu::cli
