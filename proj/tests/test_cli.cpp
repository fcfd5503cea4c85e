#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "resonance/resonance.hpp"

using namespace resonance;
namespace fs = std::filesystem;

namespace {

std::string spec(const std::string& name) { return std::string(RESONANCE_SPECS) + "/" + name; }

struct CliResult {
  int code;
  std::string out, err;
};

CliResult run_cli(RunConfig cfg) {
  std::ostringstream out, err;
  const int code = run(cfg, out, err);
  return {code, out.str(), err.str()};
}

RunConfig command(const std::string& cmd, const std::string& spec_name) {
  RunConfig c;
  c.command = cmd;
  c.spec_path = spec(spec_name);
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "resonance_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, ExitCodesAcrossTheGallery) {
  const std::pair<const char*, int> cases[] = {
      {"ll_interval_holds.ini", exit_ok},
      {"williams_square.ini", exit_ok},
      {"system_case_B.ini", exit_ok},
      {"ll_interval_fails_gated.ini", exit_condition_violated},
      {"system_linear_nonorthogonal.ini", exit_condition_violated},
      {"no_convergence.ini", exit_no_convergence},
      {"invalid_domain.ini", exit_invalid},
      {"invalid_unknown_key.ini", exit_invalid},
  };
  for (const auto& [name, code] : cases) {
    RunConfig c = command("solve", name);
    c.quiet = true;
    EXPECT_EQ(run_cli(c).code, code) << name;
  }
}

TEST(Cli, MissingFileIsInvalid) {
  EXPECT_EQ(run_cli(command("solve", "does_not_exist.ini")).code, exit_invalid);
}

TEST(Cli, InvalidThresholdsNamesTheField) {
  const CliResult r = run_cli(command("check", "invalid_thresholds.ini"));
  EXPECT_EQ(r.code, exit_invalid);
  EXPECT_NE(r.err.find("thresholds.C must be < thresholds.D"), std::string::npos) << r.err;
}

TEST(Cli, QuietJsonIsByteIdentical) {
  RunConfig c = command("solve", "system_case_A.ini");
  c.quiet = true;
  c.json_path = "-";
  const CliResult a = run_cli(c), b = run_cli(c);
  EXPECT_EQ(a.code, exit_ok);
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(Json::parse(a.out).contains("metadata"));
}

TEST(Cli, EchoRoundTrips) {
  for (const char* name : {"lazer_leach.ini", "system_case_C.ini", "williams_square.ini", "korman_li.ini"}) {
    const fs::path echo = scratch(std::string(name) + ".echo");
    RunConfig c = command("check", name);
    c.quiet = true;
    c.echo_path = echo.string();
    run_cli(c);
    EXPECT_EQ(load_spec(echo.string()), load_spec(spec(name))) << name;
  }
}

TEST(Cli, JordanCanonicalFormReported) {
  RunConfig c = command("solve", "system_nonresonant.ini");
  c.quiet = true;
  c.json_path = "-";
  const CliResult r = run_cli(c);
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_NE(r.out.find("jordan(3)"), std::string::npos);
}

TEST(Cli, CheckReportsLazerLeachMargin) {
  RunConfig c = command("check", "lazer_leach.ini");
  c.quiet = true;
  c.json_path = "-";
  const CliResult r = run_cli(c);
  EXPECT_EQ(r.code, exit_ok);
  const Json j = Json::parse(r.out);
  // A = pi, B = 0 against 2 (pi/2 + pi/2).
  EXPECT_NEAR(j["conditions"][0]["margin"].get<double>(), std::numbers::pi, 1e-9);
}

TEST(Cli, VerifyAcceptsSolverOutputAndRejectsZero) {
  const fs::path csv = scratch("lazer_leach.csv");
  RunConfig s = command("solve", "lazer_leach.ini");
  s.quiet = true;
  s.csv_path = csv.string();
  ASSERT_EQ(run_cli(s).code, exit_ok);

  RunConfig v = command("verify", "lazer_leach.ini");
  v.quiet = true;
  v.json_path = "-";
  v.solution_path = csv.string();
  CliResult r = run_cli(v);
  EXPECT_EQ(r.code, exit_ok);
  EXPECT_LT(Json::parse(r.out)["verify"]["residual_l2"].get<double>(), 1e-8);

  // The zero function leaves the full forcing cos t as residual: sqrt(pi).
  const SpectralBasis b = load_spec(spec("lazer_leach.ini")).basis();
  const fs::path zero = scratch("zero.csv");
  {
    std::ofstream os(zero);
    write_solution_csv(os, b, {zero_field(b)});
  }
  v.solution_path = zero.string();
  r = run_cli(v);
  EXPECT_EQ(r.code, exit_no_convergence);
  EXPECT_NEAR(Json::parse(r.out)["verify"]["residual_l2"].get<double>(), std::sqrt(std::numbers::pi), 1e-9);
}

TEST(Cli, VerifyRejectsMismatchedGrid) {
  const fs::path csv = scratch("short.csv");
  {
    std::ofstream os(csv);
    os << "t,u\n0.1,0\n";
  }
  RunConfig v = command("verify", "lazer_leach.ini");
  v.quiet = true;
  v.solution_path = csv.string();
  EXPECT_EQ(run_cli(v).code, exit_invalid);
}

TEST(Cli, SweepFindsLazerLeachThreshold) {
  RunConfig c = command("sweep", "lazer_leach.ini");
  c.quiet = true;
  c.json_path = "-";
  c.gate = true;
  c.refine = true;
  c.sweep = SweepSpec{"amplitude", 0.5, 3.0, 6};
  const CliResult r = run_cli(c);
  EXPECT_EQ(r.code, exit_ok);
  const Json j = Json::parse(r.out)["sweep"];
  EXPECT_EQ(j["rows"].size(), 6u);
  const double lo = j["threshold"]["lower"].get<double>(), hi = j["threshold"]["upper"].get<double>();
  EXPECT_LE(lo, 2.0);
  EXPECT_GE(hi, 2.0);
  EXPECT_LE(hi - lo, 1e-3);
}

TEST(Cli, SweepNeedsARange) {
  RunConfig c = command("sweep", "lazer_leach.ini");
  EXPECT_EQ(run_cli(c).code, exit_invalid);
}

TEST(Cli, SelftestPasses) {
  RunConfig c;
  c.command = "selftest";
  c.quiet = true;
  EXPECT_EQ(run_cli(c).code, exit_ok);
}

TEST(Cli, BinaryMapsExitCodes) {
  const std::string base = std::string("\"") + RESONANCE_CLI + "\" ";
  auto status = [&](const std::string& args) {
    const int s = std::system((base + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("solve \"" + spec("korman_li.ini") + "\" --quiet"), 0);
  EXPECT_EQ(status("solve \"" + spec("lazer_leach_fails.ini") + "\" --quiet"), 2);
  EXPECT_EQ(status("solve \"" + spec("ll_interval_drift.ini") + "\" --quiet"), 3);
  EXPECT_EQ(status("frobnicate"), 4);
}
