#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "cli.hpp"
#include "specdet/errors.hpp"

using namespace specdet;
using namespace specdet::cli;

namespace {

RunConfig resolve_flags(const Settings& flags) {
  std::ostringstream log;
  return resolve_config({}, flags, log);
}

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(SPECDET_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r{-1, {}};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST(Config, FlagsResolve) {
  const RunConfig c = resolve_flags({{"potential", "linear"}, {"alpha", "0"}, {"z", "-1,0"}, {"z0", "0,0"}});
  EXPECT_EQ(c.potential.kind, "linear");
  EXPECT_EQ(c.alpha.alpha(), 0.0);
  EXPECT_EQ(c.z, cplx(-1.0, 0.0));
  EXPECT_EQ(c.z0, cplx(0.0, 0.0));
  EXPECT_EQ(c.format, OutputFormat::Human);
}

TEST(Config, RejectsAlphaAtOrAbovePi) {
  EXPECT_THROW(resolve_flags({{"alpha", "3.2"}}), UsageError);
  EXPECT_THROW(resolve_flags({{"alpha", "3.141592653589793"}}), UsageError);
  EXPECT_THROW(resolve_flags({{"alpha2", "-0.1"}}), UsageError);
}

TEST(Config, RejectsMalformedValues) {
  EXPECT_THROW(resolve_flags({{"z", "1,2,3"}}), UsageError);
  EXPECT_THROW(resolve_flags({{"x0", "abc"}}), UsageError);
  EXPECT_THROW(resolve_flags({{"count", "2.5"}}), UsageError);
  EXPECT_THROW(resolve_flags({{"format", "xml"}}), UsageError);
  EXPECT_THROW(resolve_flags({{"potential", "cubic"}}), UsageError);
}

TEST(Config, RejectsConflicts) {
  // c and p describe only the power potential.
  EXPECT_THROW(resolve_flags({{"potential", "linear"}, {"p", "2"}}), UsageError);
  EXPECT_NO_THROW(resolve_flags({{"potential", "power"}, {"p", "2"}, {"c", "3"}}));
}

TEST(Config, FileParsing) {
  const Settings s = read_config_text("# comment\npotential = quadratic\n\n  alpha=0.5   # trailing\n");
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.at("potential"), "quadratic");
  EXPECT_EQ(s.at("alpha"), "0.5");
  EXPECT_THROW(read_config_text("unknown_key = 1\n"), UsageError);
  EXPECT_THROW(read_config_text("alpha 0.5\n"), UsageError);
  EXPECT_THROW(read_config_text("alpha = 0.5\nalpha = 0.6\n"), UsageError);
  EXPECT_THROW(read_config_file("/nonexistent/specdet.cfg"), UsageError);
}

TEST(Config, FlagOverridesFileAndIsLogged) {
  std::ostringstream log;
  const RunConfig c = resolve_config({{"alpha", "0.5"}, {"count", "7"}}, {{"alpha", "1.0"}}, log);
  EXPECT_EQ(c.alpha.alpha(), 1.0);
  EXPECT_EQ(c.count, 7u);
  EXPECT_NE(log.str().find("--alpha 1.0 overrides config value 0.5"), std::string::npos);
}

TEST(Config, GridParsing) {
  const std::vector<cplx> g = parse_grid("-2; -1.5 ;0.5,0.25");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[2], cplx(0.5, 0.25));
  EXPECT_THROW(parse_grid(" ; "), UsageError);
}

TEST(Config, PowerPotentialKeepsOwnConstants) {
  RunConfig c = resolve_flags({{"potential", "power"}, {"c", "2"}, {"p", "1.5"}});
  EXPECT_EQ(make_potential(c.potential).C0(), 2.0);
  c = resolve_flags({{"potential", "power"}, {"c", "2"}, {"p", "1.5"}, {"x0", "3"}});
  const Potential pot = make_potential(c.potential);
  EXPECT_EQ(pot.x0(), 3.0);
  EXPECT_EQ(pot.C0(), 2.0);
}

TEST(Commands, EigReturnsAiryZeros) {
  const RunConfig c = resolve_flags({{"potential", "linear"}, {"alpha", "0"}, {"count", "3"}, {"format", "json"}});
  std::ostringstream out, err;
  EXPECT_EQ(run_command("eig", c, out, err), kPass);
  const auto j = nlohmann::json::parse(out.str());
  ASSERT_EQ(j["eigenvalues"].size(), 3u);
  EXPECT_NEAR(j["eigenvalues"][0].get<double>(), 2.33810741045976703849, 1e-9);
  EXPECT_NEAR(j["eigenvalues"][1].get<double>(), 4.08794944413097061664, 1e-9);
  EXPECT_NEAR(j["eigenvalues"][2].get<double>(), 5.52055982809555105913, 1e-9);
  EXPECT_EQ(j["alpha"].get<double>(), 0.0);
  EXPECT_TRUE(j.contains("residuals"));
  EXPECT_LT(j["oracle_max_dev"].get<double>(), 1e-8);
}

TEST(Commands, TraceJsonCarriesComplexPairs) {
  const RunConfig c = resolve_flags({{"z", "-1,0.5"}, {"z0", "0,0"}, {"format", "json"}});
  std::ostringstream out, err;
  EXPECT_EQ(run_command("trace", c, out, err), kPass);
  const auto j = nlohmann::json::parse(out.str());
  ASSERT_TRUE(j["closed_form"].is_array());
  EXPECT_EQ(j["closed_form"].size(), 2u);
  EXPECT_TRUE(j["terms"].contains("half_correction_integral"));
  EXPECT_LT(j["residuals"]["closed_vs_green"].get<double>(), 1e-6);
}

TEST(Commands, IdenticalConfigGivesIdenticalBytes) {
  const RunConfig c = resolve_flags({{"potential", "quadratic"}, {"alpha", "0.3"}, {"z", "-2,1"}, {"z0", "-1,0"},
                                     {"eigenvalues", "40"}, {"format", "json"}});
  std::ostringstream a, b, err;
  run_command("det2", c, a, err);
  run_command("det2", c, b, err);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Commands, Det2RejectsSecondCondition) {
  const RunConfig c = resolve_flags({{"alpha2", "1.0"}});
  std::ostringstream out, err;
  EXPECT_THROW(run_command("det2", c, out, err), UsageError);
}

TEST(Commands, ResidualFailureExitCode) {
  const RunConfig c = resolve_flags({{"z", "-1,0.5"}, {"threshold", "1e-30"}});
  std::ostringstream out, err;
  EXPECT_EQ(run_command("trace", c, out, err), kResidualFail);
}

TEST(Commands, CsvEigenvalues) {
  const RunConfig c = resolve_flags({{"count", "2"}, {"format", "csv"}, {"oracle", "false"}});
  std::ostringstream out, err;
  EXPECT_EQ(run_command("eig", c, out, err), kPass);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "k,eigenvalue,residual");
}

TEST(ErrorObjects, KindsAndCodes) {
  int code = 0;
  auto j = nlohmann::json::parse(error_json(UsageError("bad"), code));
  EXPECT_EQ(code, kUsage);
  EXPECT_EQ(j["error"]["kind"], "usage");
  j = nlohmann::json::parse(error_json(BranchError("cut", 2.5), code));
  EXPECT_EQ(code, kNumerical);
  EXPECT_EQ(j["error"]["kind"], "branch");
  EXPECT_EQ(j["error"]["position"].get<double>(), 2.5);
}

TEST(Executable, MissingConfigExitsWithUsageError) {
  const CliRun r = run_cli("trace --config /nonexistent/specdet.cfg");
  EXPECT_EQ(r.code, 2);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["error"]["kind"], "usage");
}

TEST(Executable, EigJson) {
  const CliRun r = run_cli("eig --potential linear --alpha 0 --count 3 --json");
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["eigenvalues"][2].get<double>(), 5.52055982809555105913, 1e-9);
}

TEST(Executable, NumericalFailureExitCode) {
  // Real z above q(x0) puts the principal root on its cut.
  const CliRun r = run_cli("trace --z 3,0 --json");
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(nlohmann::json::parse(r.out)["error"]["kind"], "branch");
}

TEST(Executable, AlphaOutOfRange) {
  EXPECT_EQ(run_cli("eig --alpha 3.2").code, 2);
}
