// Copyright 2026 The qi-sim Authors
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

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qisim/cli.hpp"
#include "qisim/config.hpp"
#include "qisim/csv.hpp"
#include "qisim/error.hpp"

namespace fs = std::filesystem;
using namespace qisim;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qi-sim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(int(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("qisim-test-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spew(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.seed == 1);
  CHECK(c.etas.size() == 20);
  CHECK(c.etas.front() == doctest::Approx(0.05));
  CHECK(c.etas.back() == doctest::Approx(1.0));
  CHECK(c.snrs.size() == 11);
  CHECK(c.distances.size() == 101);
  CHECK(c.detector.pair_rate == 7000);
  CHECK(c.detector.dark_rate == 175);
  CHECK(c.detector.integration_time == 5);
  CHECK(c.repeats == 3);
  CHECK(c.window_ps == kDefaultWindowPs);
  CHECK(c.output_directory == ".");
}

TEST_CASE("config parsing and overrides") {
  const std::string ini =
      "seed = 12\n"
      "[detector]\ndark_rate = 50\nrepeats = 2\n"
      "[object]\nvariant = postselected\netas = 0.2, 0.6, 1\n"
      "[angles]\nunits = deg\nalpha = 0\nalpha_prime = 45\nbeta = 22.5\nbeta_prime = 67.5\n"
      "[output]\ndirectory = from_file\n";
  const RunConfig c = parse_config(ini);
  CHECK(c.seed == 12);
  CHECK(c.detector.dark_rate == 50);
  CHECK(c.repeats == 2);
  CHECK(c.object_variant == LossVariant::postselected);
  CHECK(c.etas == std::vector<double>{0.2, 0.6, 1});
  CHECK(c.angles.beta == doctest::Approx(std::numbers::pi / 8));
  CHECK(c.output_directory == "from_file");

  const std::vector<std::string> over = {"detector.dark_rate=7", "output.directory=from_set"};
  const RunConfig o = parse_config(ini, over, "from_env");
  CHECK(parse_config("[detector]\ndark_rate = 9   ; c/s\n").detector.dark_rate == 9);
  CHECK(o.detector.dark_rate == 7);
  CHECK(o.output_directory == "from_set");
  CHECK(parse_config(ini, {}, "from_env").output_directory == "from_env");
}

TEST_CASE("config errors name the field") {
  auto field_of = [](const std::string& ini, std::vector<std::string> over = {}) -> std::string {
    try {
      parse_config(ini, over);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  CHECK(field_of("[detector]\nbogus = 1\n") == "detector.bogus");
  CHECK(field_of("[detector]\npair_rate = fast\n") == "detector.pair_rate");
  CHECK(field_of("[detector]\ndark_rate = -1\n") == "detector.dark_rate");
  CHECK(field_of("[object]\netas = 0, 0.5\n") == "object.etas");
  CHECK(field_of("", {"noise.snrs=1,-2"}) == "noise.snrs");
  CHECK(field_of("[state]\nkind = cat\n") == "state.kind");
  CHECK_FALSE(field_of("[nowhere]\nx = 1\n").empty());
  CHECK_THROWS_AS(parse_config("[detector\n"), ConfigError);
  CHECK_THROWS_AS(load_config(std::string("/nonexistent/qisim.ini")), ConfigError);
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("1, 2,3", "f") == std::vector<double>{1, 2, 3});
  const auto r = parse_number_list("0:1:0.25", "f");
  REQUIRE(r.size() == 5);
  CHECK(r.back() == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_number_list("0:1:0", "f"), ConfigError);
  CHECK_THROWS_AS(parse_number_list("", "f"), ConfigError);
}

TEST_CASE("csv formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(schema_comment("eta", 3, "def") == "# qi-sim v0.1.0 axis=eta seed=3 snr_def=def");

  SweepResult s;
  s.axis = SweepAxis::eta;
  s.extra_columns = {"w"};
  SweepPoint p;
  p.x = 0.5;
  p.s = 2;
  p.verdict = Verdict::residual_quantum;
  p.extras = {0.25};
  s.points.push_back(p);
  const std::string csv = sweep_to_csv(s, 4);
  CHECK(csv.find("x,S,S_err,Sbar,Sbar_err,verdict,w\n") != std::string::npos);
  CHECK(csv.find("0.5,2,0,0,0,residual_quantum,0.25\n") != std::string::npos);
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("basic exit codes") {
  CHECK(run({"--help"}).code == kExitOk);
  const Run v = run({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find("0.1.0") != std::string::npos);
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
  CHECK(run({"sweep", "colour"}).code == kExitConfig);
  const Run bad = run({"state-report", "-s", "detector.bogus=1"});
  CHECK(bad.code == kExitConfig);
  CHECK(bad.err.find("detector.bogus") != std::string::npos);
}

TEST_CASE("state report") {
  const Run r = run({"state-report", "-s", "state.kind=singlet"});
  REQUIRE(r.code == kExitOk);
  CHECK(value_after(r.out, "S_max=") == doctest::Approx(2 * std::numbers::sqrt2));
  CHECK(value_after(r.out, "purity=") == doctest::Approx(1.0));
  const Run w = run({"state-report", "-s", "state.kind=werner", "-s", "state.visibility=0.955"});
  CHECK(value_after(w.out, "S_max=") == doctest::Approx(2.70).epsilon(0.01));
  const Run hv = run({"state-report", "-s", "state.kind=hv"});
  CHECK(value_after(hv.out, "\nS=") == doctest::Approx(std::numbers::sqrt2));
  CHECK(hv.out.find("verdict=residual_quantum") != std::string::npos);
}

TEST_CASE("sweep eta writes stable files") {
  TempDir dir;
  const std::vector<std::string> args = {"sweep", "eta", "-s", "output.directory=" + dir.path().string(),
                                         "-s", "object.etas=0.25,0.5,1", "-s", "detector.ideal=true",
                                         "-s", "detector.repeats=2"};
  const Run r = run(args);
  REQUIRE(r.code == kExitOk);
  const std::string sweep = slurp(dir / "sweep_eta.csv");
  const std::string theory = slurp(dir / "theory_eta.csv");
  CHECK(sweep.rfind("# qi-sim v0.1.0 axis=eta seed=1 snr_def=", 0) == 0);
  CHECK(theory.rfind("# qi-sim v0.1.0 axis=eta", 0) == 0);

  const auto rows = csv_rows(theory);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"x", "S", "S_err", "Sbar", "Sbar_err", "verdict",
                                            "coincidence_weight"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][1]) == doctest::Approx(2 * std::numbers::sqrt2));
    if (i > 1) CHECK(std::stod(rows[i][3]) > std::stod(rows[i - 1][3]));
  }

  REQUIRE(run(args).code == kExitOk);
  CHECK(slurp(dir / "sweep_eta.csv") == sweep);
  CHECK(slurp(dir / "theory_eta.csv") == theory);
}

TEST_CASE("sweep snr verdict transitions") {
  TempDir dir;
  const Run r = run({"sweep", "snr", "-s", "output.directory=" + dir.path().string(), "-s",
                     "detector.repeats=1"});
  REQUIRE(r.code == kExitOk);
  for (const char* file : {"theory_snr.csv", "sweep_snr.csv"}) {
    const auto rows = csv_rows(slurp(dir / file));
    // Rows ascend in SNR, so walk them backwards.
    std::vector<std::string> seen;
    for (std::size_t i = rows.size() - 1; i >= 1; --i) {
      if (seen.empty() || seen.back() != rows[i][5]) seen.push_back(rows[i][5]);
    }
    CHECK(seen == std::vector<std::string>{"quantum", "residual_quantum", "unresolved"});
  }
}

TEST_CASE("sweep range prints crossings") {
  TempDir dir;
  const Run r = run({"sweep", "range", "-s", "output.directory=" + dir.path().string(), "-s",
                     "attenuation.distances=0:40:10", "-s", "detector.repeats=1"});
  REQUIRE(r.code == kExitOk);
  CHECK(value_after(r.out, "Lambda_per_km=") == doctest::Approx(0.0161181).epsilon(1e-5));
  CHECK(value_after(r.out, "sqrt2_crossing_km amplitude=") == doctest::Approx(21.5).epsilon(0.001));
  CHECK(value_after(r.out, "probability=") == doctest::Approx(43.0).epsilon(0.001));
  const auto rows = csv_rows(slurp(dir / "theory_range.csv"));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].back() == "survival");
}

TEST_CASE("sweep depol writes both files") {
  TempDir dir;
  const Run r = run({"sweep", "depol", "-s", "output.directory=" + dir.path().string(), "-s",
                     "depolarization.mode=theta", "-s", "depolarization.values=0:0.785398:0.2",
                     "-s", "detector.repeats=1"});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir / "sweep_depol.csv"));
  CHECK(csv_rows(slurp(dir / "theory_depol.csv"))[0].back() == "visibility_ad");
}

TEST_CASE("unwritable output directory is a data error") {
  const Run r = run({"sweep", "eta", "-s", "output.directory=/proc/qisim-nowhere", "-s",
                     "object.etas=1", "-s", "detector.repeats=1"});
  CHECK(r.code == kExitData);
}

TEST_CASE("simulate-tags") {
  TempDir dir;
  const std::string a = dir / "a.bin", b = dir / "b.bin";
  REQUIRE(run({"simulate-tags", a, "-f", "binary", "-s", "state.kind=singlet"}).code == kExitOk);
  REQUIRE(run({"simulate-tags", b, "-f", "binary", "-s", "state.kind=singlet"}).code == kExitOk);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).size() % 9 == 0);
  CHECK(slurp(a).size() > 0);

  const std::vector<std::string> zero = {"-s", "detector.pair_rate=0", "-s", "detector.dark_rate=0"};
  std::vector<std::string> args = {"simulate-tags", dir / "z.bin", "-f", "binary"};
  args.insert(args.end(), zero.begin(), zero.end());
  REQUIRE(run(args).code == kExitOk);
  CHECK(slurp(dir / "z.bin").empty());
  args = {"simulate-tags", dir / "z.csv", "-f", "csv"};
  args.insert(args.end(), zero.begin(), zero.end());
  REQUIRE(run(args).code == kExitOk);
  CHECK(slurp(dir / "z.csv") == "channel,timestamp_ps\n");
  CHECK(run({"simulate-tags", "/proc/nowhere/x.bin"}).code == kExitData);
  CHECK(run({"simulate-tags", a, "-f", "xml"}).code == kExitConfig);
}

TEST_CASE("simulate then analyze closes the loop") {
  TempDir dir;
  const std::string f = dir / "loop.csv";
  const std::vector<std::string> common = {"-s", "state.kind=singlet", "-s",
                                           "detector.integration_time=20"};
  std::vector<std::string> sim = {"simulate-tags", f};
  sim.insert(sim.end(), common.begin(), common.end());
  REQUIRE(run(sim).code == kExitOk);
  std::vector<std::string> ana = {"chsh-from-tags", f, "-n"};
  ana.insert(ana.end(), common.begin(), common.end());
  const Run r = run(ana);
  REQUIRE(r.code == kExitOk);
  const double s = value_after(r.out, "S=");
  const double err = value_after(r.out, "S_err=");
  CHECK(err > 0);
  CHECK(std::abs(s - 2 * std::numbers::sqrt2) < 5 * err);
  CHECK(r.out.find("verdict=quantum") != std::string::npos);
  CHECK(r.out.find("Sbar=") != std::string::npos);
  CHECK(r.out.find("setting a,b': total=") != std::string::npos);
  CHECK(r.out.find("accidental_estimate=") != std::string::npos);
}

TEST_CASE("noise-only tag file is unresolved") {
  TempDir dir;
  const std::string f = dir / "noise.bin";
  const std::vector<std::string> common = {"-f", "binary", "-s", "detector.pair_rate=0", "-s",
                                           "detector.dark_rate=20000", "-s", "tags.window_ps=100000"};
  std::vector<std::string> sim = {"simulate-tags", f};
  sim.insert(sim.end(), common.begin(), common.end());
  REQUIRE(run(sim).code == kExitOk);
  std::vector<std::string> ana = {"chsh-from-tags", f};
  ana.insert(ana.end(), common.begin(), common.end());
  const Run r = run(ana);
  REQUIRE(r.code == kExitOk);
  CHECK(value_after(r.out, "S=") < 0.5);
  CHECK(r.out.find("verdict=unresolved") != std::string::npos);
}

TEST_CASE("chsh-from-tags data errors") {
  TempDir dir;
  CHECK(run({"chsh-from-tags", dir / "missing.csv"}).code == kExitData);

  spew(dir / "empty.csv", "");
  const Run empty = run({"chsh-from-tags", dir / "empty.csv"});
  CHECK(empty.code == kExitData);
  CHECK(empty.err.find("a',b'") != std::string::npos);

  spew(dir / "bad.csv", "1,100\n2,oops\n");
  const Run bad = run({"chsh-from-tags", dir / "bad.csv"});
  CHECK(bad.code == kExitData);
  CHECK(bad.err.find("line 2") != std::string::npos);

  spew(dir / "unknown.csv", "1,100\n99,200\n");
  CHECK(run({"chsh-from-tags", dir / "unknown.csv"}).code == kExitData);

  spew(dir / "short.bin", std::string("\x01\x02\x03", 3));
  CHECK(run({"chsh-from-tags", dir / "short.bin", "-f", "binary"}).code == kExitData);

  const std::string f = dir / "noref.csv";
  REQUIRE(run({"simulate-tags", f, "-s", "tags.include_reference=false"}).code == kExitOk);
  CHECK(run({"chsh-from-tags", f, "-n", "-s", "tags.include_reference=false"}).code == kExitData);
  CHECK(run({"chsh-from-tags", f, "-s", "tags.include_reference=false"}).code == kExitOk);
  CHECK(run({"chsh-from-tags", f, "-w", "0"}).code == kExitConfig);
}

TEST_CASE("installed binary") {
  const std::string exe = QISIM_CLI_PATH;
  CHECK(std::system((exe + " --version > /dev/null").c_str()) == 0);
  const int rc = std::system((exe + " state-report -s state.kind=cat > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(rc) == kExitConfig);
}
