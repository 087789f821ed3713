#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "lweak/cli.hpp"

using namespace lweak;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lweak");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string model(const std::string &name) { return std::string(LWEAK_MODELS_DIR) + "/" + name; }

std::vector<std::vector<std::string>> csv_rows(const std::string &text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string &name) {
  auto d = fs::temp_directory_path() / ("lweak_cli_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(Grid, Parsing) {
  const auto g = cli::parse_grid("0:10:0.5");
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 10.0);
  EXPECT_EQ(cli::parse_grid("0:1:0.1").size(), 11u);
  EXPECT_EQ(cli::parse_grid("1,2.5,4"), (std::vector<double>{1, 2.5, 4}));
  EXPECT_THROW(cli::parse_grid("1:0:1"), std::invalid_argument);
  EXPECT_THROW(cli::parse_grid("0:1:0"), std::invalid_argument);
  EXPECT_THROW(cli::parse_grid("a,b"), std::invalid_argument);
  EXPECT_EQ(cli::parse_size_grid("256,512"), (std::vector<std::size_t>{256, 512}));
  EXPECT_EQ(cli::parse_index_range("2:4"), (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_THROW(cli::parse_index_range("4:2"), std::invalid_argument);
}

TEST(Cli, VersionAndChecks) {
  auto r = invoke({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "lweak 1.0.0\n");
  r = invoke({"--list-checks"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "cov\ntail\nnewman\nquasi\nslln\nclt\nfclt\nemp\n");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"coeffs"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--model", model("ma11_uniform.json")}).code, 2);
  EXPECT_EQ(invoke({"verify", "--check", "nope", "--model", model("ma11_uniform.json")}).code, 2);
  EXPECT_EQ(invoke({"verify", "--check", "newman", "--model", model("ma11_uniform.json"), "--replicates", "5"}).code, 2);
  EXPECT_EQ(invoke({"verify", "--check", "newman", "--model", model("ma11_uniform.json"), "--out", "xml"}).code, 2);
  const auto r = invoke({"bound", "--x-grid", "0:10:0.5", "--theta", "1.2", "--c", "1", "--sigma2", "1", "--v", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("theta"), std::string::npos);
}

TEST(Cli, MalformedModel) {
  const auto bad = scratch("bad.json");
  std::ofstream(bad) << "{\"schema_version\": 1, \"variant\": \"moving_average\", \"coeffs\": [1,";
  const auto r = invoke({"coeffs", "--model", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error:", 0), 0u);
  std::ofstream(bad, std::ios::trunc) << "{\"schema_version\": 99, \"variant\": \"iid\"}";
  EXPECT_EQ(invoke({"coeffs", "--model", bad.string()}).code, 2);
  EXPECT_EQ(invoke({"coeffs", "--model", scratch("missing.json").string()}).code, 2);
  fs::remove_all(bad.parent_path());
}

TEST(Cli, Coeffs) {
  const auto r = invoke({"coeffs", "--model", model("ma3_uniform.json"), "--n-max", "10"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "gamma", "v"}));
  // Three coefficients: gamma_1 and gamma_2 nonzero, zeros after.
  for (std::size_t k = 1; k <= 10; ++k) {
    const double g = std::stod(rows[k][1]);
    if (k < 3)
      EXPECT_GT(g, 0.0) << k;
    else
      EXPECT_EQ(g, 0.0) << k;
  }
}

TEST(Cli, Decompose) {
  const auto r = invoke({"decompose", "--model", model("ma11_uniform.json"), "--n", "100", "--p", "7", "--seed", "3"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 1u + 14u);
  EXPECT_EQ(rows[1][1], "odd");
  EXPECT_EQ(rows[2][1], "even");
  const auto pos = r.out.find("# n=100 p=7 r=7 z_odd=");
  ASSERT_NE(pos, std::string::npos);
  // Block sums add up to the summary totals.
  double odd = 0.0, even = 0.0;
  for (std::size_t j = 1; j < rows.size(); ++j) (rows[j][1] == "odd" ? odd : even) += std::stod(rows[j][2]);
  const auto summary = r.out.substr(pos);
  const double z_odd = std::stod(summary.substr(summary.find("z_odd=") + 6));
  const double z_even = std::stod(summary.substr(summary.find("z_even=") + 7));
  EXPECT_NEAR(odd, z_odd, 1e-12);
  EXPECT_NEAR(even, z_even, 1e-12);
}

TEST(Cli, BoundFromModelAndConstants) {
  const auto r = invoke({"bound", "--model", model("ma11_uniform.json"), "--n", "4096", "--x-grid", "0:100:10"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 12u);
  double prev = 2.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double b = std::stod(rows[i][1]);
    EXPECT_LE(b, prev);
    prev = b;
  }
  EXPECT_EQ(invoke({"bound", "--x-grid", "1,2", "--c", "1", "--sigma2", "1", "--v", "0"}).code, 0);
  EXPECT_EQ(invoke({"bound", "--x-grid", "1,2", "--c", "1"}).code, 2);
}

TEST(Cli, Schedule) {
  auto r = invoke({"schedule", "--kind", "bounded", "--n-grid", "1024,65536", "--theta", "0.55"});
  EXPECT_EQ(r.code, 0);
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].size(), 8u);
  EXPECT_EQ(rows[1][0], "1024");
  EXPECT_EQ(rows[2][7], "true");
  EXPECT_EQ(invoke({"schedule", "--kind", "sideways"}).code, 2);
}

TEST(Cli, VerifyNewmanIidExitsZero) {
  const auto r = invoke({"verify", "--check", "newman", "--model", model("iid_uniform.json"), "--replicates", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0].size(), 9u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(std::stod(rows[i][4]), 0.0);
    EXPECT_EQ(rows[i][6], "DOMINATED");
  }
}

TEST(Cli, VerifyJsonToFile) {
  const auto path = scratch("out.json");
  const auto r = invoke({"verify", "--check", "cov", "--model", model("ma11_uniform.json"), "--n", "3",
                      "--replicates", "2000", "--out", "json", "--output", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto reports = reports_from_json(s);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].check, "cov");
  EXPECT_EQ(reports[0].replicates, 2000u);
  fs::remove_all(path.parent_path());
}

TEST(Cli, VerifyIsDeterministic) {
  const std::vector<std::string> args{"verify", "--check", "tail", "--model", model("ma11_uniform.json"),
                                      "--n", "512", "--replicates", "1000", "--seed", "9"};
  auto a = args, b = args;
  b.insert(b.end(), {"--workers", "3"});
  EXPECT_EQ(invoke(a).out, invoke(b).out);
}

TEST(Cli, ViolatedCheckExitsOne) {
  // The wrong long-run variance makes the KS distance far exceed its band.
  const auto r = invoke({"verify", "--check", "clt", "--model", model("ma11_uniform.json"), "--n", "1024",
                      "--replicates", "2000", "--sigma2", "0.1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("VIOLATED"), std::string::npos);
}

TEST(Binary, RunsAsProcess) {
  const std::string cmd = std::string(LWEAK_CLI_PATH) + " --version";
  FILE *p = ::popen(cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  char buf[64] = {};
  const auto got = std::fgets(buf, sizeof buf, p);
  const int status = ::pclose(p);
  ASSERT_NE(got, nullptr);
  EXPECT_EQ(std::string(buf), "lweak 1.0.0\n");
  EXPECT_EQ(WEXITSTATUS(status), 0);
  const std::string bad = std::string(LWEAK_CLI_PATH) + " bound --theta 1.2 --x-grid 0:1:1 >/dev/null 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), 2);
}
