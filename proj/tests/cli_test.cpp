// Copyright 2026 The oscqubit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the real binary: exit codes, file names, reproducibility.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "oscqubit/redfield.hpp"

namespace fs = std::filesystem;

namespace oscq {
namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::path(testing::TempDir()) / ("oscqubit_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code = -1;
  std::string log;
};

Result run_cli(const fs::path& cfg, const std::string& extra = "") {
  const fs::path log = cfg.parent_path() / "stdout.txt";
  const std::string cmd = std::string(OSCQUBIT_CLI) + " --config " + cfg.string() + " " + extra + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.log = slurp(log);
  return r;
}

double field(const std::string& text, const std::string& key) {
  const std::regex re("(^|\\s)" + key + "=([-+0-9.eE]+)");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nan("");
  return std::stod(m[2]);
}

const char* kTls =
    "tls.Delta = 1\n"
    "tls.eps0 = 1.5\n"
    "noise.G = 0.5\n"
    "noise.tau_c = 0.5\n";

TEST(Cli, TimesReportMatchesTheLibrary) {
  const auto dir = scratch("times");
  const auto cfg = write_config(dir, std::string("mode = times\ntag = t\n") + kTls);
  const Result r = run_cli(cfg, "--out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.log;
  const std::string rep = slurp(dir / "times_t.txt");
  const auto rt = relaxation_times(build_generator(TLSParams{1.0, 1.5, 0.0, 0.0, 0.0}, OUParams{0.5, 0.5, 0}));
  EXPECT_NEAR(field(rep, "T1_inv"), rt.T1_inv, 1e-9);
  EXPECT_NEAR(field(rep, "T2_inv"), rt.T2_inv, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "config_t.resolved"));
  EXPECT_TRUE(fs::exists(dir / "run.meta"));
}

TEST(Cli, NoiselessEnsembleEqualsEnvelope) {
  const auto dir = scratch("g0");
  const std::string common = std::string(kTls) +
                             "noise.G = 0\n"
                             "tls.D = 0.2\ntls.omega = 1.8\n"
                             "grid.dt = 0.01\ngrid.T = 5\ngrid.stride = 10\n"
                             "initial.x = 1\ninitial.y = 0\ninitial.z = 0\n";
  // later keys win, so noise.G = 0 overrides the block above
  ASSERT_EQ(run_cli(write_config(dir, "mode = envelope\ntag = a\n" + common), "--out " + dir.string()).code, 0);
  ASSERT_EQ(run_cli(write_config(dir, "mode = ensemble\ntag = a\nensemble.n_traj = 8\n" + common),
                    "--out " + dir.string())
                .code,
            0);
  std::ifstream env(dir / "envelope_a.csv"), ens(dir / "ensemble_a.csv");
  std::string le, ln;
  std::getline(env, le);
  std::getline(ens, ln);
  int rows = 0;
  while (std::getline(env, le) && std::getline(ens, ln)) {
    double a[4], b[4];
    char comma;
    std::istringstream ea(le), eb(ln);
    for (int k = 0; k < 4; ++k) ea >> a[k] >> comma;
    for (int k = 0; k < 4; ++k) eb >> b[k] >> comma;
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(a[k], b[k], 1e-12) << "row " << rows;
    ++rows;
  }
  EXPECT_EQ(rows, 51);
}

TEST(Cli, UnknownKeyIsAConfigError) {
  const auto dir = scratch("unknown");
  const Result r = run_cli(write_config(dir, std::string("mode = times\nnoise.Gamma = 1\n") + kTls),
                           "--out " + dir.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.log.find("noise.Gamma"), std::string::npos) << r.log;
}

TEST(Cli, BadModeAndBadFlags) {
  const auto dir = scratch("bad");
  EXPECT_EQ(run_cli(write_config(dir, "mode = nonsense\n")).code, 2);
  EXPECT_EQ(run_cli(write_config(dir, "mode = times\ntls.Delta = abc\n")).code, 2);
  EXPECT_EQ(run_cli(write_config(dir, "mode = times\n"), "--workers banana").code, 2);
  EXPECT_EQ(run_cli(dir / "missing.cfg").code, 2);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  const std::string body = std::string("mode = ensemble\ntag = r\n") + kTls +
                           "grid.dt = 0.01\ngrid.T = 4\ngrid.stride = 20\nensemble.n_traj = 64\n";
  ASSERT_EQ(run_cli(write_config(a, body), "--out " + a.string() + " --seed 5 --workers 1").code, 0);
  ASSERT_EQ(run_cli(write_config(b, body), "--out " + b.string() + " --seed 5 --workers 3").code, 0);
  const std::string ca = slurp(a / "ensemble_r.csv");
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(b / "ensemble_r.csv"));
  // the echo records what was actually used, overrides included
  const std::string ra = slurp(a / "config_r.resolved"), rb = slurp(b / "config_r.resolved");
  EXPECT_NE(ra.find("seed=5\n"), std::string::npos);
  EXPECT_NE(ra.find("ensemble.workers=1\n"), std::string::npos);
  EXPECT_NE(rb.find("ensemble.workers=3\n"), std::string::npos);
  EXPECT_NE(rb.find("output.dir=" + b.string() + "\n"), std::string::npos);
  // a different seed changes the numbers
  const auto c = scratch("rerun_c");
  ASSERT_EQ(run_cli(write_config(c, body), "--out " + c.string() + " --seed 6").code, 0);
  EXPECT_NE(ca, slurp(c / "ensemble_r.csv"));
}

TEST(Cli, SveaCheckPassesAndFailsWithExitCodes) {
  const auto dir = scratch("svea");
  const std::string body =
      "mode = svea-check\ntag = s\ntls.Delta = 1\ntls.eps0 = 1.5\nnoise.G = 0.1\nnoise.tau_c = 0.5\n"
      "initial.x = 0\ninitial.y = 0\ninitial.z = 1\nsvea.omega0 = 100\nsvea.periods = 3\n";
  const Result ok = run_cli(write_config(dir, body), "--out " + dir.string() + " --seed 7");
  EXPECT_EQ(ok.code, 0) << ok.log;
  EXPECT_EQ(ok.log.rfind("PASS", 0), 0u) << ok.log;
  EXPECT_TRUE(fs::exists(dir / "svea-check_s.csv"));
  const Result bad =
      run_cli(write_config(dir, body + "svea.tolerance = 1e-12\n"), "--out " + dir.string() + " --seed 7");
  EXPECT_EQ(bad.code, 4) << bad.log;
  EXPECT_EQ(bad.log.rfind("FAIL", 0), 0u) << bad.log;
  EXPECT_NE(slurp(dir / "run.meta").find("checks=fail"), std::string::npos);
}

TEST(Cli, DivergenceExitCode) {
  const auto dir = scratch("diverge");
  const std::string body = std::string("mode = redfield\ntag = d\n") + kTls +
                           "noise.G = 400\nnoise.tau_c = 0\ngrid.dt = 0.5\ngrid.T = 400\n";
  const Result r = run_cli(write_config(dir, body), "--out " + dir.string());
  EXPECT_EQ(r.code, 3) << r.log;
}

}  // namespace
}  // namespace oscq
