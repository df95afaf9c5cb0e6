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

#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "doctest.h"
#include "sebeu/model.hpp"
#include "sebeu/scenario_io.hpp"

namespace sebeu {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sebeu_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Scenario(const std::string& file) {
  return (fs::path(SEBEU_SCENARIO_DIR) / file).string();
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int Call(std::vector<std::string> args, std::string* log = nullptr) {
  args.insert(args.begin(), "sebeu");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::Main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (log) *log = out.str() + err.str();
  return code;
}

std::map<std::string, std::string> DataFiles(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name != "manifest.json") out[name] = Slurp(e.path());
  }
  return out;
}

double Number(const json& j) { return std::stod(j.get<std::string>()); }

TEST_CASE("sha256 of a known string") {
  CHECK(cli::Sha256Hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("solve-lq writes the two-stage gains") {
  const fs::path out = Scratch("solve");
  REQUIRE(Call({"solve-lq", "--spec", Scenario("two_stage_scalar_n1.json"), "--out",
                out.string()}) == 0);
  const json doc = json::parse(Slurp(out / "profile.json"));
  const json& aff = doc["policies"][0]["affine"];
  CHECK(Number(aff["P"][0][0][0][0]) == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(Number(aff["P"][1][1][0][0]) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(Number(aff["Q"][1][1][0][0]) == doctest::Approx(-1.0 / 34.0).epsilon(1e-12));
  const json manifest = json::parse(Slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["inputs"]["spec_sha256"] ==
        cli::Sha256Hex(Slurp(Scenario("two_stage_scalar_n1.json"))));
  CHECK(manifest["artifacts"]["profile.json"] == cli::Sha256Hex(Slurp(out / "profile.json")));
  for (const auto& e : fs::directory_iterator(out)) {
    CHECK(e.path().extension() != ".tmp");
  }
}

TEST_CASE("enumerate writes three equilibrium sets") {
  const fs::path out = Scratch("enumerate");
  REQUIRE(Call({"enumerate", "--spec", Scenario("demand_response_n2.json"), "--out",
                out.string()}) == 0);
  CHECK(json::parse(Slurp(out / "equilibria_sebeu.json"))["count"] == "3");
  CHECK(json::parse(Slurp(out / "equilibria_kalai.json"))["count"] == "6");
  CHECK(json::parse(Slurp(out / "equilibria_nash.json"))["count"] == "3");
}

TEST_CASE("sweep-n gaps are positive and decreasing") {
  const fs::path out = Scratch("sweep");
  REQUIRE(Call({"sweep-n", "--spec", Scenario("two_stage_scalar_n1.json"), "--out",
                out.string(), "--n-grid", "1,4,16,64"}) == 0);
  std::istringstream csv(Slurp(out / "gaps.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "N,dm,sebeu_cost,deviation_cost,gap");
  std::vector<double> gaps;
  while (std::getline(csv, line)) gaps.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  REQUIRE(gaps.size() == 4u);
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    CHECK(gaps[k] > 0.0);
    if (k > 0) CHECK(gaps[k] < gaps[k - 1]);
  }
}

TEST_CASE("same seed gives byte-identical artifacts") {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"solve-lq", "stationary_scalar_n2.json"},
      {"solve-meanfield", "stationary_scalar_n2.json"},
      {"enumerate", "demand_response_n4.json"},
      {"iterate-sebeu", "demand_response_n2.json"},
      {"simulate", "two_stage_scalar_n4.json"},
      {"consistency", "stationary_scalar_n2.json"},
      {"eps-gap", "two_stage_scalar_n4.json"},
      {"eps-gap", "demand_response_n2.json"},
  };
  int k = 0;
  for (const auto& [cmd, file] : runs) {
    const fs::path a = Scratch("repro_a" + std::to_string(k));
    const fs::path b = Scratch("repro_b" + std::to_string(k));
    ++k;
    for (const fs::path& dir : {a, b}) {
      CHECK(Call({cmd, "--spec", Scenario(file), "--out", dir.string(), "--seed", "7",
                  "--paths", "50"}) == 0);
    }
    const auto fa = DataFiles(a), fb = DataFiles(b);
    CHECK(!fa.empty());
    CHECK(fa == fb);
  }
  const fs::path c = Scratch("repro_c");
  CHECK(Call({"simulate", "--spec", Scenario("two_stage_scalar_n4.json"), "--out",
              c.string(), "--seed", "8", "--paths", "50"}) == 0);
  const fs::path d = Scratch("repro_d");
  CHECK(Call({"simulate", "--spec", Scenario("two_stage_scalar_n4.json"), "--out",
              d.string(), "--seed", "7", "--paths", "50"}) == 0);
  CHECK(Slurp(c / "trajectories.csv") != Slurp(d / "trajectories.csv"));
}

TEST_CASE("usage errors exit 1") {
  const fs::path out = Scratch("usage");
  std::string log;
  CHECK(Call({"solve-lq"}, &log) == 1);
  CHECK(Call({"frobnicate", "--spec", Scenario("two_stage_scalar_n1.json"), "--out",
              out.string()}, &log) == 1);
  CHECK(log.find("unknown command") != std::string::npos);
  CHECK(Call({"solve-lq", "--spec", (out / "missing.json").string(), "--out",
              out.string()}) == 1);
  CHECK(Call({"enumerate", "--spec", Scenario("two_stage_scalar_n1.json"), "--out",
              out.string()}) == 1);
  CHECK(json::parse(Slurp(out / "failure.json"))["kind"] == "usage");
  CHECK(Call({"sweep-n", "--spec", Scenario("two_stage_scalar_n4.json"), "--out",
              out.string()}) == 1);
  CHECK(Call({"sweep-n", "--spec", Scenario("two_stage_scalar_n1.json"), "--out",
              out.string(), "--n-grid", "1,x"}) == 1);
  CHECK(Call({"simulate", "--spec", Scenario("two_stage_scalar_n1.json"), "--out",
              out.string(), "--paths", "-3"}) == 1);
}

TEST_CASE("solver failures exit 2 with a report") {
  const fs::path out = Scratch("singular");
  LqGameSpec spec = MakeScalarGame({}, 1);
  spec.env.E1[0] = MatSeries(Mat::Constant(1, 1, -2.0));
  spec.horizon = 1;
  spec.noise.w[1].items.resize(1);
  spec.noise.xi.items.resize(1);
  const fs::path file = out / "singular.json";
  std::ofstream(file) << SerializeSpec(spec);
  REQUIRE(Call({"solve-lq", "--spec", file.string(), "--out", out.string()}) == 2);
  const json failure = json::parse(Slurp(out / "failure.json"));
  CHECK(failure["kind"] == "SingularEquilibrium");
  CHECK(json::parse(Slurp(out / "manifest.json"))["status"] == "solver_failure");
}

}  // namespace
}  // namespace sebeu
