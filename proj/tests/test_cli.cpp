// Copyright 2026 The hexnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hexnas/cli.hpp"
#include "hexnas/hexdata.hpp"
#include "hexnas/textio.hpp"
#include "hexnas/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hexnas;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  return {code, o.str(), e.str()};
}

// Fresh directory per test case, removed afterwards.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("hexnas_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

std::size_t line_count(const std::string& path) {
  std::size_t n = 0;
  for (char c : read_file(path)) n += c == '\n';
  return n;
}

nlohmann::json manifest(const std::string& path) {
  return nlohmann::json::parse(read_file(path));
}

}  // namespace

TEST_CASE("help, version and unknown input") {
  CHECK(run({"--help"}).code == cli::kOk);
  const auto v = run({"--version"});
  CHECK(v.code == cli::kOk);
  CHECK(v.out.find("0.1.0") != std::string::npos);
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
}

TEST_CASE("gendata writes the CSV and a manifest") {
  TempDir d("gendata");
  const auto r = run({"gendata", "--op", "add", "--digits", "4", "--count", "10000",
                      "--seed", "42", "--out", d / "a.csv"});
  REQUIRE(r.code == cli::kOk);
  CHECK(line_count(d / "a.csv") == 10001);
  const auto m = manifest(d / "a.csv.manifest.json");
  CHECK(m["subcommand"] == "gendata");
  CHECK(m["status"] == "ok");
  CHECK(m["seeds"]["data"] == 42);

  REQUIRE(run({"gendata", "--op", "add", "--digits", "4", "--count", "10000",
               "--seed", "42", "--out", d / "b.csv"})
              .code == cli::kOk);
  CHECK(read_file(d / "a.csv") == read_file(d / "b.csv"));

  REQUIRE(run({"gendata", "--op", "div", "--digits", "2", "--count", "500",
               "--out", d / "div.csv"})
              .code == cli::kOk);
  for (const auto& s : hexdata::read_dataset(d / "div.csv").samples) {
    REQUIRE(s.a.value() > 0);
    REQUIRE(s.b.value() > 0);
    REQUIRE(s.b.value() <= 0xFF);
  }
}

TEST_CASE("gendata rejects bad arguments") {
  TempDir d("gendata_bad");
  CHECK(run({"gendata", "--op", "pow", "--out", d / "x.csv"}).code == cli::kUsage);
  CHECK(run({"gendata", "--digits", "5", "--out", d / "x.csv"}).code == cli::kUsage);
  CHECK(run({"gendata", "--count", "0", "--out", d / "x.csv"}).code == cli::kUsage);
  CHECK(run({"gendata"}).code == cli::kUsage);
  CHECK_FALSE(fs::exists(d / "x.csv"));
}

TEST_CASE("train, then eval reproduces the final train loss") {
  TempDir d("train");
  REQUIRE(run({"gendata", "--count", "600", "--seed", "1", "--out", d / "tr.csv"})
              .code == cli::kOk);
  REQUIRE(run({"gendata", "--count", "150", "--seed", "2", "--out", d / "va.csv"})
              .code == cli::kOk);
  const auto r = run({"train", "--arch", "fc", "--data", d / "tr.csv", "--val",
                      d / "va.csv", "--epochs", "25", "--hidden", "16", "--seed",
                      "3", "--out", d / "m"});
  REQUIRE(r.code == cli::kOk);
  const auto curve = trainer::parse_loss_curve(read_file(d / "m.curve.csv"));
  CHECK(curve.records.size() == 25);
  CHECK(fs::exists(d / "m.ckpt"));
  CHECK(fs::exists(d / "m.spec.json"));
  const auto m = manifest(d / "m.manifest.json");
  CHECK(m["results"]["parameter_count"] == 128 + 64 * 16 + 16 + 16 * 16 + 16 + 17);
  CHECK(m["results"]["final_val_mse"].get<double>() == curve.records.back().val_mse);

  const auto e = run({"eval", "--checkpoint", d / "m", "--data", d / "tr.csv"});
  REQUIRE(e.code == cli::kOk);
  const double got = *parse_real(e.out.substr(0, e.out.find('\n')));
  const double want = m["results"]["final_train_mse"].get<double>();
  CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  CHECK(fs::exists(d / "m.eval.manifest.json"));
}

TEST_CASE("train without --val splits the data") {
  TempDir d("train_split");
  REQUIRE(run({"gendata", "--count", "200", "--out", d / "tr.csv"}).code == cli::kOk);
  REQUIRE(run({"train", "--arch", "lstm", "--hidden", "4", "--data", d / "tr.csv",
               "--epochs", "1", "--out", d / "m"})
              .code == cli::kOk);
  const auto m = manifest(d / "m.manifest.json");
  CHECK(m["parameters"]["train_count"] == 160);
  CHECK(m["parameters"]["val_count"] == 40);
}

TEST_CASE("train failures and exit codes") {
  TempDir d("train_bad");
  CHECK(run({"train", "--data", d / "missing.csv", "--out", d / "m"}).code ==
        cli::kUsage);
  CHECK(run({"train", "--arch", "cnn", "--data", d / "x.csv", "--out", d / "m"})
            .code == cli::kUsage);
  std::ofstream(d / "bad.csv") << "not,a,dataset\n";
  CHECK(run({"train", "--data", d / "bad.csv", "--out", d / "m"}).code ==
        cli::kUsage);
}

TEST_CASE("a divergent run exits 3 and keeps the partial curve") {
  TempDir d("diverge");
  REQUIRE(run({"gendata", "--count", "300", "--out", d / "tr.csv"}).code == cli::kOk);
  const auto r = run({"train", "--data", d / "tr.csv", "--epochs", "50", "--lr",
                      "1e150", "--out", d / "m"});
  CHECK(r.code == cli::kRuntime);
  CHECK(fs::exists(d / "m.curve.csv.diverged"));
  CHECK_FALSE(fs::exists(d / "m.ckpt"));
  CHECK(manifest(d / "m.manifest.json")["status"] == "diverged");
}

TEST_CASE("eval of a missing checkpoint is a usage error") {
  TempDir d("eval_bad");
  REQUIRE(run({"gendata", "--count", "10", "--out", d / "x.csv"}).code == cli::kOk);
  CHECK(run({"eval", "--checkpoint", d / "nope", "--data", d / "x.csv"}).code ==
        cli::kUsage);
}

TEST_CASE("nas writes a log row per trial epoch") {
  TempDir d("nas");
  REQUIRE(run({"gendata", "--count", "300", "--out", d / "tr.csv"}).code == cli::kOk);
  const auto r = run({"nas", "--experiment", "valuechoice", "--data", d / "tr.csv",
                      "--budget", "4", "--seed", "2", "--out", d / "v"});
  REQUIRE(r.code == cli::kOk);
  CHECK(line_count(d / "v.trials.csv") == 21);
  CHECK(read_file(d / "v.winner.csv").starts_with("choice_bindings,final_val_loss\nhidden="));

  REQUIRE(run({"nas", "--experiment", "layerchoice", "--data", d / "tr.csv",
               "--epochs", "2", "--out", d / "l"})
              .code == cli::kOk);
  CHECK(line_count(d / "l.trials.csv") == 1 + 2 * 2);
  CHECK(run({"nas", "--experiment", "evolution", "--data", d / "tr.csv", "--out",
             d / "e"})
            .code == cli::kUsage);
}

TEST_CASE("config file values, overridden by flags") {
  TempDir d("config");
  std::ofstream(d / "g.cfg") << "# dataset\nop = sub\ndigits = 3\ncount = 50\nout = "
                             << (d / "c.csv") << "\n";
  REQUIRE(run({"gendata", "--config", d / "g.cfg"}).code == cli::kOk);
  CHECK(line_count(d / "c.csv") == 51);
  CHECK(hexdata::read_dataset(d / "c.csv").op == hexdata::Operation::Sub);
  REQUIRE(run({"gendata", "--config", d / "g.cfg", "--count", "7"}).code == cli::kOk);
  CHECK(line_count(d / "c.csv") == 8);
  std::ofstream(d / "bad.cfg") << "[gendata]\ncount = 3\n";
  CHECK(run({"gendata", "--config", d / "bad.cfg", "--out", d / "z.csv"}).code ==
        cli::kUsage);
  CHECK(run({"gendata", "--config", d / "absent.cfg"}).code == cli::kUsage);
}

TEST_CASE("gradcheck exit codes") {
  TempDir d("gradcheck");
  const auto ok = run({"gradcheck", "--layer", "linear", "--manifest", d / "g.json"});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find("ok") != std::string::npos);
  CHECK(manifest(d / "g.json")["status"] == "ok");
  CHECK(run({"gradcheck", "--layer", "conv", "--manifest", d / "g.json"}).code ==
        cli::kUsage);
  CHECK(run({"gradcheck", "--layer", "fc", "--precision", "single", "--manifest",
             d / "g.json"})
            .code == cli::kUsage);
}

TEST_CASE("report: grid rows plus the search comparison") {
  TempDir d("report");
  REQUIRE(run({"gendata", "--count", "200", "--out", d / "tr.csv"}).code == cli::kOk);
  REQUIRE(run({"nas", "--data", d / "tr.csv", "--budget", "1", "--epochs", "1",
               "--out", d / "v"})
              .code == cli::kOk);
  const auto r = run({"report", "--archs", "fc,attn,lstm", "--widths", "4,3,2",
                      "--train-count", "120", "--test-count", "40", "--epochs", "1",
                      "--hidden", "4", "--nas-winner", d / "v.winner.csv", "--out",
                      d / "rep"});
  REQUIRE(r.code == cli::kOk);
  CHECK(line_count(d / "rep.csv") == 1 + 9 + 2);
  CHECK(fs::exists(d / "rep.comparison.csv"));
  const std::string table = read_file(d / "rep.txt");
  CHECK(table.find("NAS, 2 Digits") != std::string::npos);
  CHECK(table.find("Human, 2 Digits") != std::string::npos);
  CHECK(r.out == table);
}

TEST_CASE("dot to stdout and to a file") {
  TempDir d("dot");
  const auto r = run({"dot", "--arch", "fc", "--slot2", "identity", "--manifest",
                      d / "d.json"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("Identity 64") != std::string::npos);
  REQUIRE(run({"dot", "--arch", "lstm", "--out", d / "g.dot"}).code == cli::kOk);
  CHECK(read_file(d / "g.dot").starts_with("digraph"));
}
