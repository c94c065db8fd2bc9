#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mnar_cli/cli.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  RunResult r;
  r.code = mnar::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("mnar_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    ASSERT_EQ(run({"generate", "--scenario", "example1", "--alpha0", "-1.7", "--delta", "0", "--n", "2000",
                   "--seed", "7", "--output", path("ex1.csv")})
                  .code,
              0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static std::string path(const std::string& name) { return (dir_ / name).string(); }
  static fs::path dir_;
};
fs::path Cli::dir_;

TEST_F(Cli, GenerateIsDeterministic) {
  ASSERT_EQ(run({"generate", "--scenario", "example1", "--alpha0", "-1.7", "--delta", "0", "--n", "2000", "--seed",
                 "7", "--output", path("ex1_again.csv")})
                .code,
            0);
  EXPECT_EQ(slurp(path("ex1.csv")), slurp(path("ex1_again.csv")));
  const RunResult stdout_run = run({"generate", "--scenario", "example2", "--alpha0", "-2.2", "--delta", "1", "--n", "5"});
  EXPECT_EQ(stdout_run.code, 0);
  EXPECT_EQ(stdout_run.out.substr(0, 7), "r,y,x1\n");
}

TEST_F(Cli, FitRecoversTruthAndReportsEverything) {
  const RunResult r = run({"fit", "--data", path("ex1.csv"), "--x1", "1", "--degree", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);  // strict parser
  EXPECT_EQ(j.at("schema_version"), 1);
  EXPECT_EQ(j.at("h1_variant"), "as_printed");
  // Monte Carlo SD of tau_hat at n = 2000 is about 0.1.
  EXPECT_NEAR(j.at("tau_hat").get<double>(), 2.177, 0.3);
  for (const char* key : {"xi_hat", "theta_hat", "alpha0_hat", "eta_hat", "sigma2_tau", "wald_ci",
                          "identifiability_report"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.at("xi_hat").size(), 3u);
  EXPECT_TRUE(j.at("identifiability_report").at("identifiable").get<bool>());
  EXPECT_LT(j.at("wald_ci").at("lower").get<double>(), j.at("wald_ci").at("upper").get<double>());
}

TEST_F(Cli, FitWithBootstrapIsByteIdentical) {
  const std::vector<std::string> args{"fit",         "--data", path("ex1.csv"), "--bootstrap", "99",
                                      "--seed",      "11",     "--diagnostics", "--output"};
  auto a = args, b = args;
  a.push_back(path("fit_a.json"));
  b.push_back(path("fit_b.json"));
  b.insert(b.end(), {"--threads", "3"});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(slurp(path("fit_a.json")), slurp(path("fit_b.json")));
  const json j = json::parse(slurp(path("fit_a.json")));
  EXPECT_EQ(j.at("bootstrap_ci").at("method"), "bootstrap_t");
  EXPECT_EQ(j.at("bootstrap_ci").at("seed"), 11u);
  EXPECT_TRUE(j.at("diagnostics").contains("ncv"));
  EXPECT_TRUE(j.at("diagnostics").contains("uss"));
}

TEST_F(Cli, NonIdentifiableModelExitsTwo) {
  {
    std::ofstream f(path("one_cov.csv"));
    f << "y,x1\n1.0,0.1\n,0.5\n2.0,0.9\n0.5,-0.3\n,1.2\n1.5,0.0\n";
  }
  const RunResult r = run({"fit", "--data", path("one_cov.csv"), "--x1", "1", "--degree", "1"});
  EXPECT_EQ(r.code, 2);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("error").at("code"), "IDENTIFIABILITY");
  EXPECT_NE(r.err.find("IDENTIFIABILITY"), std::string::npos);
}

TEST_F(Cli, MissingFileIsIoError) {
  for (const char* cmd : {"fit", "diagnose"}) {
    const RunResult r = run({cmd, "--data", path("does_not_exist.csv")});
    EXPECT_EQ(r.code, 2) << cmd;
    EXPECT_EQ(json::parse(r.out).at("error").at("code"), "IO") << cmd;
  }
}

TEST_F(Cli, MalformedCsvIsParseError) {
  {
    std::ofstream f(path("bad.csv"));
    f << "r,y,x1,x2\n1,1.0,0.1,0.2\n1,,0.5,0.3\n";
  }
  const RunResult r = run({"fit", "--data", path("bad.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.out).at("error").at("code"), "PARSE");
}

TEST_F(Cli, DiagnoseEmitsValidJson) {
  const RunResult a = run({"diagnose", "--data", path("ex1.csv")});
  ASSERT_EQ(a.code, 0) << a.err;
  const json j = json::parse(a.out);
  for (const char* test : {"ncv", "uss"}) {
    const double p = j.at(test).at("p_value");
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_EQ(run({"diagnose", "--data", path("ex1.csv")}).out, a.out);
}

TEST_F(Cli, SimulateOracleAndDeterminism) {
  const std::vector<std::string> base{"simulate", "--scenario", "example1", "--alpha0", "-1.7", "--delta", "0",
                                      "--n", "300", "--reps", "8", "--methods", "oracle,proposed,gmm2",
                                      "--coverage", "wald"};
  auto a = base, b = base;
  a.insert(a.end(), {"--output", path("sim_a.csv"), "--coverage-output", path("cov_a.csv"), "--json", path("sim_a.json")});
  b.insert(b.end(), {"--output", path("sim_b.csv"), "--coverage-output", path("cov_b.csv"), "--json", path("sim_b.json"),
                     "--threads", "4"});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  EXPECT_EQ(slurp(path("sim_a.csv")), slurp(path("sim_b.csv")));
  EXPECT_EQ(slurp(path("cov_a.csv")), slurp(path("cov_b.csv")));
  EXPECT_EQ(slurp(path("sim_a.json")), slurp(path("sim_b.json")));

  std::istringstream csv(slurp(path("sim_a.csv")));
  std::string header, oracle;
  std::getline(csv, header);
  std::getline(csv, oracle);
  EXPECT_EQ(header, "method,rb_percent,mse_x100,ncr,n_reps,mean_tau,sd_tau,mean_gamma,sd_gamma");
  EXPECT_EQ(oracle.substr(0, 14), "oracle,0,0,0,8");
  EXPECT_TRUE(json::accept(slurp(path("sim_a.json"))));
}

TEST_F(Cli, SimulateUsageErrors) {
  for (const auto& extra : std::vector<std::vector<std::string>>{{"--reps", "0"}, {"--methods", "nonsense"}}) {
    std::vector<std::string> args{"simulate", "--scenario", "example1", "--alpha0", "-1.7", "--n", "100"};
    args.insert(args.end(), extra.begin(), extra.end());
    const RunResult r = run(args);
    EXPECT_EQ(r.code, 2) << extra[0];
    EXPECT_EQ(json::parse(r.out).at("error").at("code"), "USAGE") << extra[0];
  }
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  EXPECT_EQ(run({"fit"}).code, 2);  // --data is required
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, ProfileGammaFindsTwoRootsOnSelectionDesign) {
  ASSERT_EQ(run({"generate", "--scenario", "selection", "--n", "20000", "--output", path("sel.csv")}).code, 0);
  const std::vector<std::string> args{"profile-gamma", "--data", path("sel.csv"), "--alpha0", "-1", "--beta", "-1",
                                      "--lo", "-5", "--hi", "10", "--step", "0.01"};
  const RunResult r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# roots,2\n"), std::string::npos);
  EXPECT_EQ(r.out.substr(0, 24), "gamma,M_gamma,is_root_br");
  EXPECT_EQ(run(args).out, r.out);
}

TEST_F(Cli, ProfileGammaUsage) {
  const RunResult r = run({"profile-gamma", "--data", path("ex1.csv"), "--alpha0", "-1", "--beta", "-1", "--lo", "1",
                           "--hi", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.out).at("error").at("code"), "USAGE");
}

}  // namespace
