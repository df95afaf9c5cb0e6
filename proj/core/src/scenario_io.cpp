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

#include "sebeu/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sebeu {
namespace {

using json = nlohmann::json;

[[noreturn]] void SchemaError(const std::string& where,
                              const std::string& what) {
  throw Error(ErrorKind::kParse, "at " + where + ": " + what, where);
}

std::string Child(const std::string& path, const std::string& key) {
  return path + "/" + key;
}

std::string Child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

const json& Require(const json& obj, const std::string& key,
                    const std::string& path) {
  if (!obj.is_object()) SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) SchemaError(Child(path, key), "missing required key");
  return *it;
}

double Scalar(const json& j, const std::string& path) {
  if (j.is_string()) return ParseDouble(j.get<std::string>(), path);
  if (j.is_number()) return j.get<double>();
  SchemaError(path, "expected a decimal string");
}

int Integer(const json& j, const std::string& path) {
  const double v = Scalar(j, path);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    SchemaError(path, "expected an integer");
  }
  return static_cast<int>(v);
}

Rational RationalValue(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return Rational::Parse(j.get<std::string>());
    } catch (const Error& e) {
      SchemaError(path, e.what());
    }
  }
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  SchemaError(path, "expected a rational given as a string");
}

// [] is a matrix with zero rows; [[]] has one row and zero columns. The
// column count of a zero-row matrix comes from the caller.
Mat ParseMatrix(const json& j, const std::string& path, int zero_row_cols) {
  if (!j.is_array()) SchemaError(path, "expected a matrix (array of rows)");
  if (j.empty()) return Mat::Zero(0, std::max(0, zero_row_cols));
  const std::size_t rows = j.size();
  if (!j[0].is_array()) SchemaError(Child(path, 0), "expected a row array");
  const std::size_t cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = Child(path, r);
    if (!j[r].is_array() || j[r].size() != cols) {
      SchemaError(rp, "ragged matrix row");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = Scalar(j[r][c], Child(rp, c));
    }
  }
  return m;
}

Vec ParseVector(const json& j, const std::string& path) {
  if (!j.is_array()) SchemaError(path, "expected a vector");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = Scalar(j[i], Child(path, i));
  return v;
}

// A matrix, or {"stages": [matrix, ...]}. Absent keys become a zero matrix
// of the expected shape.
MatSeries ParseSeries(const json& obj, const std::string& key,
                      const std::string& path, int rows, int cols,
                      bool required) {
  const std::string p = Child(path, key);
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) SchemaError(p, "missing required key");
    return MatSeries(Mat::Zero(std::max(rows, 0), std::max(cols, 0)));
  }
  if (it->is_object()) {
    const json& stages = Require(*it, "stages", p);
    if (!stages.is_array() || stages.empty()) {
      SchemaError(Child(p, "stages"), "expected a non-empty list");
    }
    std::vector<Mat> items;
    for (std::size_t t = 0; t < stages.size(); ++t) {
      items.push_back(ParseMatrix(stages[t], Child(Child(p, "stages"), t), cols));
    }
    return MatSeries(std::move(items));
  }
  return MatSeries(ParseMatrix(*it, p, cols));
}

GaussianLaw ParseLaw(const json& j, const std::string& path) {
  GaussianLaw law;
  law.mean = ParseVector(Require(j, "mean", path), Child(path, "mean"));
  law.cov = ParseMatrix(Require(j, "cov", path), Child(path, "cov"),
                        static_cast<int>(law.mean.size()));
  return law;
}

Series<GaussianLaw> ParseLawSeries(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("stages")) {
    const json& stages = j["stages"];
    std::vector<GaussianLaw> items;
    for (std::size_t t = 0; t < stages.size(); ++t) {
      items.push_back(ParseLaw(stages[t], Child(Child(path, "stages"), t)));
    }
    if (items.empty()) SchemaError(path, "empty stage list");
    return Series<GaussianLaw>(std::move(items));
  }
  return Series<GaussianLaw>(ParseLaw(j, path));
}

// Per-DM coupling list: [m_1, ..., m_N] or {"all": m}.
std::vector<MatSeries> ParseCouplings(const json& env, const std::string& key,
                                      const std::string& path, int n_dm,
                                      int rows,
                                      const std::vector<int>& cols) {
  const std::string p = Child(path, key);
  std::vector<MatSeries> out;
  auto it = env.find(key);
  if (it == env.end()) {
    for (int j = 0; j < n_dm; ++j) {
      out.push_back(MatSeries(Mat::Zero(rows, cols[j])));
    }
    return out;
  }
  if (it->is_object() && it->contains("all")) {
    for (int j = 0; j < n_dm; ++j) {
      out.push_back(ParseSeries(*it, "all", p, rows, cols[j], true));
    }
    return out;
  }
  if (!it->is_array() || static_cast<int>(it->size()) != n_dm) {
    SchemaError(p, "expected one entry per DM or {\"all\": matrix}");
  }
  for (int j = 0; j < n_dm; ++j) {
    json wrap = json::object();
    wrap["m"] = (*it)[j];
    out.push_back(ParseSeries(wrap, "m", Child(p, j), rows, cols[j], true));
  }
  return out;
}

LqGameSpec ParseLq(const json& doc) {
  LqGameSpec spec;
  spec.n_dm = Integer(Require(doc, "n_dm", ""), "/n_dm");
  if (spec.n_dm < 1) SchemaError("/n_dm", "must be positive");
  const json& hz = Require(doc, "horizon", "");
  if (hz.is_string() && hz.get<std::string>() == "infinite") {
    spec.horizon = kInfiniteHorizon;
  } else {
    spec.horizon = Integer(hz, "/horizon");
  }
  const json& env = Require(doc, "env", "");
  spec.env.n0 = Integer(Require(env, "n0", "/env"), "/env/n0");
  spec.env.p = Integer(Require(env, "p", "/env"), "/env/p");
  const int n0 = spec.env.n0;
  const int p = spec.env.p;

  const json& per_dm = Require(doc, "per_dm", "");
  if (!per_dm.is_array() || static_cast<int>(per_dm.size()) != spec.n_dm) {
    SchemaError("/per_dm", "expected n_dm entries");
  }
  std::vector<int> ns;
  std::vector<int> ms;
  for (int i = 0; i < spec.n_dm; ++i) {
    const std::string path = Child("/per_dm", i);
    const json& d = per_dm[i];
    DmBlock dm;
    dm.A = ParseSeries(d, "A", path, -1, -1, true);
    const int n = static_cast<int>(dm.A.At(0).rows());
    dm.B = ParseSeries(d, "B", path, n, -1, true);
    const int m = static_cast<int>(dm.B.At(0).cols());
    dm.C = ParseSeries(d, "C", path, n, p, false);
    dm.Q = ParseSeries(d, "Q", path, n, n, true);
    dm.R = ParseSeries(d, "R", path, m, m, true);
    dm.K = ParseSeries(d, "K", path, p, m, false);
    dm.L = ParseSeries(d, "L", path, p, n, false);
    if (!spec.infinite()) {
      dm.QT = ParseMatrix(Require(d, "QT", path), Child(path, "QT"), n);
    }
    dm.beta = Scalar(Require(d, "beta", path), Child(path, "beta"));
    ns.push_back(n);
    ms.push_back(m);
    spec.per_dm.push_back(std::move(dm));
  }
  spec.env.A0 = ParseSeries(env, "A0", "/env", n0, n0, false);
  spec.env.D = ParseSeries(env, "D", "/env", p, n0, false);
  spec.env.B1 = ParseCouplings(env, "B1", "/env", spec.n_dm, n0, ms);
  spec.env.B2 = ParseCouplings(env, "B2", "/env", spec.n_dm, n0, ns);
  spec.env.E1 = ParseCouplings(env, "E1", "/env", spec.n_dm, p, ms);
  spec.env.E2 = ParseCouplings(env, "E2", "/env", spec.n_dm, p, ns);

  const json& noise = Require(doc, "noise", "");
  const json& init = Require(noise, "init", "/noise");
  if (init.is_object() && init.contains("blocks")) {
    const json& blocks = init["blocks"];
    std::vector<GaussianLaw> laws;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      laws.push_back(ParseLaw(blocks[b], Child("/noise/init/blocks", b)));
    }
    int dim = 0;
    for (const auto& l : laws) dim += l.dim();
    spec.noise.init.mean = Vec(dim);
    std::vector<Mat> covs;
    int off = 0;
    for (const auto& l : laws) {
      spec.noise.init.mean.segment(off, l.dim()) = l.mean;
      covs.push_back(l.cov);
      off += l.dim();
    }
    spec.noise.init.cov = linalg::BlockDiagonal(covs);
  } else {
    spec.noise.init = ParseLaw(init, "/noise/init");
  }
  const json& w = Require(noise, "w", "/noise");
  if (!w.is_array()) SchemaError("/noise/w", "expected a list");
  std::size_t first = 0;
  if (static_cast<int>(w.size()) == spec.n_dm && n0 == 0) {
    spec.noise.w.push_back(Series<GaussianLaw>(GaussianLaw{Vec(0), Mat(0, 0)}));
  } else if (static_cast<int>(w.size()) != spec.n_dm + 1) {
    SchemaError("/noise/w", "expected n_dm + 1 laws (environment first)");
  }
  for (std::size_t j = first; j < w.size(); ++j) {
    spec.noise.w.push_back(ParseLawSeries(w[j], Child("/noise/w", j)));
  }
  spec.noise.xi = ParseLawSeries(Require(noise, "xi", "/noise"), "/noise/xi");
  spec.noise.iid = true;
  if (noise.contains("iid")) {
    if (!noise["iid"].is_boolean()) SchemaError("/noise/iid", "expected bool");
    spec.noise.iid = noise["iid"].get<bool>();
  }
  CheckLqStructure(spec);
  return spec;
}

FiniteGameSpec ParseFinite(const json& doc) {
  FiniteGameSpec spec;
  spec.n_dm = Integer(Require(doc, "n_dm", ""), "/n_dm");
  if (spec.n_dm < 1) SchemaError("/n_dm", "must be positive");
  const json& actions = Require(doc, "actions", "");
  if (!actions.is_array() || static_cast<int>(actions.size()) != spec.n_dm) {
    SchemaError("/actions", "expected one action list per DM");
  }
  std::vector<std::map<std::string, int>> action_index(spec.n_dm);
  for (int i = 0; i < spec.n_dm; ++i) {
    const std::string path = Child("/actions", i);
    if (!actions[i].is_array()) SchemaError(path, "expected a list");
    std::vector<std::string> labels;
    for (std::size_t a = 0; a < actions[i].size(); ++a) {
      if (!actions[i][a].is_string()) {
        SchemaError(Child(path, a), "action labels are strings");
      }
      const std::string label = actions[i][a].get<std::string>();
      if (!action_index[i].emplace(label, static_cast<int>(a)).second) {
        SchemaError(Child(path, a), "duplicate action label");
      }
      labels.push_back(label);
    }
    spec.actions.push_back(std::move(labels));
  }
  const json& values = Require(doc, "env_values", "");
  if (!values.is_array()) SchemaError("/env_values", "expected a list");
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Rational v = RationalValue(values[k], Child("/env_values", k));
    for (const auto& prev : spec.env_values) {
      if (prev == v) SchemaError(Child("/env_values", k), "duplicate value");
    }
    spec.env_values.push_back(v);
  }
  const json& dist = Require(doc, "disturbance", "");
  const json& pmf = Require(dist, "pmf", "/disturbance");
  if (!pmf.is_array()) SchemaError("/disturbance/pmf", "expected a list");
  for (std::size_t k = 0; k < pmf.size(); ++k) {
    spec.disturbance_pmf.push_back(
        RationalValue(pmf[k], Child("/disturbance/pmf", k)));
  }
  if (dist.contains("labels")) {
    for (const auto& l : dist["labels"]) spec.disturbance_labels.push_back(l.get<std::string>());
  } else {
    for (std::size_t k = 0; k < pmf.size(); ++k) {
      spec.disturbance_labels.push_back(std::to_string(k));
    }
  }
  if (spec.disturbance_labels.size() != spec.disturbance_pmf.size()) {
    SchemaError("/disturbance/labels", "must match the pmf length");
  }

  const std::size_t n_xi = spec.disturbance_pmf.size();
  spec.outcome.assign(spec.JointCount() * n_xi, -1);
  const json& outcome = Require(doc, "outcome", "");
  if (!outcome.is_array()) SchemaError("/outcome", "expected a table");
  for (std::size_t r = 0; r < outcome.size(); ++r) {
    const std::string path = Child("/outcome", r);
    const json& row = outcome[r];
    const json& u = Require(row, "u", path);
    if (!u.is_array() || static_cast<int>(u.size()) != spec.n_dm) {
      SchemaError(Child(path, "u"), "expected one action label per DM");
    }
    std::vector<int> a(spec.n_dm);
    for (int i = 0; i < spec.n_dm; ++i) {
      auto it = action_index[i].find(u[i].is_string() ? u[i].get<std::string>()
                                                      : u[i].dump());
      if (it == action_index[i].end()) {
        SchemaError(Child(Child(path, "u"), i), "unknown action label");
      }
      a[i] = it->second;
    }
    const int xi = row.contains("xi") ? Integer(row["xi"], Child(path, "xi")) : 0;
    if (xi < 0 || xi >= static_cast<int>(n_xi)) {
      SchemaError(Child(path, "xi"), "disturbance index out of range");
    }
    const Rational y = RationalValue(Require(row, "y", path), Child(path, "y"));
    int yi = -1;
    for (std::size_t k = 0; k < spec.env_values.size(); ++k) {
      if (spec.env_values[k] == y) yi = static_cast<int>(k);
    }
    if (yi < 0) SchemaError(Child(path, "y"), "value not in env_values");
    int& slot = spec.outcome[spec.JointIndex(a) * n_xi + xi];
    if (slot >= 0) SchemaError(path, "duplicate outcome entry");
    slot = yi;
  }
  for (std::size_t k = 0; k < spec.outcome.size(); ++k) {
    if (spec.outcome[k] < 0) {
      std::ostringstream os;
      os << "outcome table is not total: missing joint action";
      for (int a : spec.JointDecode(k / n_xi)) os << ' ' << a;
      os << ", disturbance " << k % n_xi;
      throw Error(ErrorKind::kDimension, os.str(), "outcome");
    }
  }
  const json& cost = Require(doc, "cost", "");
  if (!cost.is_array() || static_cast<int>(cost.size()) != spec.n_dm) {
    SchemaError("/cost", "expected one table per DM");
  }
  for (int i = 0; i < spec.n_dm; ++i) {
    const std::string path = Child("/cost", i);
    std::vector<std::vector<Rational>> table;
    if (!cost[i].is_array() ||
        cost[i].size() != spec.actions[i].size()) {
      SchemaError(path, "expected one row per action");
    }
    for (std::size_t a = 0; a < cost[i].size(); ++a) {
      const json& row = cost[i][a];
      if (!row.is_array() || row.size() != spec.env_values.size()) {
        SchemaError(Child(path, a), "expected one entry per env value");
      }
      std::vector<Rational> r;
      for (std::size_t k = 0; k < row.size(); ++k) {
        r.push_back(RationalValue(row[k], Child(Child(path, a), k)));
      }
      table.push_back(std::move(r));
    }
    spec.cost.push_back(std::move(table));
  }
  CheckFiniteStructure(spec);
  return spec;
}

json MatrixJson(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(FormatDouble(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorJson(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(FormatDouble(v(i)));
  return out;
}

json SeriesJson(const MatSeries& s) {
  if (s.items.size() == 1) return MatrixJson(s.items[0]);
  json stages = json::array();
  for (const auto& m : s.items) stages.push_back(MatrixJson(m));
  return json{{"stages", stages}};
}

json LawJson(const GaussianLaw& law) {
  return json{{"mean", VectorJson(law.mean)}, {"cov", MatrixJson(law.cov)}};
}

json LawSeriesJson(const Series<GaussianLaw>& s) {
  if (s.items.size() == 1) return LawJson(s.items[0]);
  json stages = json::array();
  for (const auto& l : s.items) stages.push_back(LawJson(l));
  return json{{"stages", stages}};
}

}  // namespace

std::string FormatDouble(double value) {
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double ParseDouble(std::string_view text, std::string_view where) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  // "a/b" is accepted for convenience.
  const auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    return ParseDouble(s.substr(0, slash), where) /
           ParseDouble(s.substr(slash + 1), where);
  }
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kParse,
                "at " + std::string(where) + ": not a decimal number '" +
                    std::string(text) + "'",
                std::string(where));
  }
  return v;
}

Scenario LoadSpec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "malformed document at byte " << e.byte << ": " << e.what();
    throw Error(ErrorKind::kParse, os.str(), "document",
                static_cast<double>(e.byte));
  }
  const json& kind = Require(doc, "kind", "");
  if (!kind.is_string()) SchemaError("/kind", "expected \"lq\" or \"finite\"");
  try {
    if (kind == "lq") return ParseLq(doc);
    if (kind == "finite") return ParseFinite(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, e.what(), "document");
  }
  SchemaError("/kind", "expected \"lq\" or \"finite\"");
}

Scenario LoadSpecFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kInvalidArgument, "cannot read spec file " + path,
                "spec");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return LoadSpec(buf.str());
}

std::string SerializeSpec(const LqGameSpec& spec) {
  json doc;
  doc["kind"] = "lq";
  doc["n_dm"] = std::to_string(spec.n_dm);
  doc["horizon"] =
      spec.infinite() ? std::string("infinite") : std::to_string(spec.horizon);
  json per_dm = json::array();
  for (const auto& dm : spec.per_dm) {
    json d;
    d["A"] = SeriesJson(dm.A);
    d["B"] = SeriesJson(dm.B);
    d["C"] = SeriesJson(dm.C);
    d["Q"] = SeriesJson(dm.Q);
    d["R"] = SeriesJson(dm.R);
    d["K"] = SeriesJson(dm.K);
    d["L"] = SeriesJson(dm.L);
    if (!spec.infinite()) d["QT"] = MatrixJson(dm.QT);
    d["beta"] = FormatDouble(dm.beta);
    per_dm.push_back(std::move(d));
  }
  doc["per_dm"] = std::move(per_dm);
  json env;
  env["n0"] = std::to_string(spec.env.n0);
  env["p"] = std::to_string(spec.env.p);
  env["A0"] = SeriesJson(spec.env.A0);
  env["D"] = SeriesJson(spec.env.D);
  for (const auto& [key, list] :
       {std::pair<const char*, const std::vector<MatSeries>*>{"B1", &spec.env.B1},
        {"B2", &spec.env.B2},
        {"E1", &spec.env.E1},
        {"E2", &spec.env.E2}}) {
    json arr = json::array();
    for (const auto& s : *list) arr.push_back(SeriesJson(s));
    env[key] = std::move(arr);
  }
  doc["env"] = std::move(env);
  json noise;
  noise["init"] = LawJson(spec.noise.init);
  json w = json::array();
  for (const auto& s : spec.noise.w) w.push_back(LawSeriesJson(s));
  noise["w"] = std::move(w);
  noise["xi"] = LawSeriesJson(spec.noise.xi);
  noise["iid"] = spec.noise.iid;
  doc["noise"] = std::move(noise);
  return doc.dump(1) + "\n";
}

std::string SerializeSpec(const FiniteGameSpec& spec) {
  json doc;
  doc["kind"] = "finite";
  doc["n_dm"] = std::to_string(spec.n_dm);
  doc["actions"] = spec.actions;
  json values = json::array();
  for (const auto& v : spec.env_values) values.push_back(v.ToString());
  doc["env_values"] = std::move(values);
  json pmf = json::array();
  for (const auto& v : spec.disturbance_pmf) pmf.push_back(v.ToString());
  doc["disturbance"] = {{"labels", spec.disturbance_labels}, {"pmf", pmf}};
  json outcome = json::array();
  const std::size_t n_xi = spec.disturbance_pmf.size();
  for (std::size_t k = 0; k < spec.outcome.size(); ++k) {
    const auto a = spec.JointDecode(k / n_xi);
    json u = json::array();
    for (int i = 0; i < spec.n_dm; ++i) u.push_back(spec.actions[i][a[i]]);
    outcome.push_back({{"u", u},
                       {"xi", std::to_string(k % n_xi)},
                       {"y", spec.env_values[spec.outcome[k]].ToString()}});
  }
  doc["outcome"] = std::move(outcome);
  json cost = json::array();
  for (const auto& table : spec.cost) {
    json t = json::array();
    for (const auto& row : table) {
      json r = json::array();
      for (const auto& v : row) r.push_back(v.ToString());
      t.push_back(std::move(r));
    }
    cost.push_back(std::move(t));
  }
  doc["cost"] = std::move(cost);
  return doc.dump(1) + "\n";
}

std::string SerializeSpec(const Scenario& scenario) {
  return std::visit([](const auto& s) { return SerializeSpec(s); }, scenario);
}

}  // namespace sebeu
