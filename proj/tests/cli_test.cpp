#include "ensel/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ensel;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "ensel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("ensel_cli_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(ParseGrid, Forms) {
  EXPECT_EQ(parse_grid("0.1,0.5,1"), (std::vector<double>{0.1, 0.5, 1.0}));
  const auto lin = parse_grid("lin:0:1:5");
  ASSERT_EQ(lin.size(), 5u);
  EXPECT_DOUBLE_EQ(lin[2], 0.5);
  const auto log = parse_grid("log:0.02:1:8");
  ASSERT_EQ(log.size(), 8u);
  EXPECT_EQ(log.front(), 0.02);
  EXPECT_EQ(log.back(), 1.0);
  EXPECT_THROW(parse_grid(""), ConfigError);
  EXPECT_THROW(parse_grid("lin:0:1"), ConfigError);
  EXPECT_THROW(parse_grid("a,b"), ConfigError);
}

TEST(ConfigFile, FlagsOverrideFile) {
  TempDir dir;
  const auto cfg = dir.file("run.json");
  write(cfg, R"({"problem": {"alpha": 2.5, "rho": 0.3, "delta": 0.01, "lambda": 0.5},
                "solver": {"damping": 0.5}})");
  RunConfig config;
  apply_config_file(cfg, config);
  EXPECT_EQ(config.problem.alpha, 2.5);
  EXPECT_EQ(config.problem.lambda, 0.5);

  const CliResult from_file = run({"solve", "--config", cfg});
  ASSERT_EQ(from_file.code, kExitOk) << from_file.err;
  EXPECT_EQ(split(lines(from_file.out)[1])[0], "0.5");
  const CliResult overridden = run({"solve", "--config", cfg, "--lambda", "0.25"});
  ASSERT_EQ(overridden.code, kExitOk) << overridden.err;
  EXPECT_EQ(split(lines(overridden.out)[1])[0], "0.25");
}

TEST(ConfigFile, UnknownKeysAndBadValuesAreUsageErrors) {
  TempDir dir;
  const auto cfg = dir.file("bad.json");
  write(cfg, R"({"problem": {"alpah": 2.0}})");
  EXPECT_EQ(run({"solve", "--config", cfg}).code, kExitUsage);
  write(cfg, "{ not json");
  EXPECT_EQ(run({"solve", "--config", cfg}).code, kExitUsage);
  EXPECT_EQ(run({"solve", "--config", dir.file("missing.json")}).code, kExitUsage);
}

TEST(ExitCodes, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"solve", "--alpha", "-1"}).code, kExitUsage);
  EXPECT_EQ(run({"solve", "--method", "ko"}).code, kExitUsage);
  EXPECT_EQ(run({"solve", "--damping", "0"}).code, kExitUsage);
  EXPECT_EQ(run({"compare"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(ExitCodes, UnconvergedSolveIsNumericalFailure) {
  const CliResult r = run({"solve", "--max-iter", "2", "--lambda", "0.1"});
  EXPECT_EQ(r.code, kExitNumerical);
  // The table is still written, with the point flagged.
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(split(rows[1])[11], "0");
}

TEST(Solve, RowsAscendInLambda) {
  const CliResult r = run({"solve", "--lambda-grid", "0.5,0.05,0.1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0],
            "lambda,q,m,chi,v,q_hat,m_hat,chi_hat,v_hat,residual,iterations,converged,"
            "prediction_error,tpr,fdr");
  EXPECT_EQ(split(rows[1])[0], "0.05");
  EXPECT_EQ(split(rows[2])[0], "0.1");
  EXPECT_EQ(split(rows[3])[0], "0.5");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(split(rows[i])[11], "1");
}

TEST(Solve, HugeLambdaRowIsZero) {
  const CliResult r = run({"solve", "--method", "dko", "--lambda", "100"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto header = split(lines(r.out)[0]);
  const auto row = split(lines(r.out)[1]);
  ASSERT_EQ(header.size(), row.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "q" || header[c] == "m" || header[c] == "v" || header[c] == "v_knock" ||
        header[c] == "tpr" || header[c] == "fdr") {
      EXPECT_NEAR(std::strtod(row[c].c_str(), nullptr), 0.0, 1e-9) << header[c];
    }
  }
  EXPECT_EQ(row[std::find(header.begin(), header.end(), "converged") - header.begin()], "1");
}

TEST(PhaseBoundary, Columns) {
  const CliResult r = run({"phase-boundary", "--rho-grid", "0.1,0.4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "rho,alpha_c_ss_mu1,alpha_c_ss_mu2,alpha_c_dko");
  const auto cells = split(rows[1]);
  EXPECT_LT(std::stod(cells[2]), std::stod(cells[3]));
  EXPECT_LT(std::stod(cells[3]), std::stod(cells[1]));
}

TEST(PowerCurve, ExplicitGridAndLambda) {
  const CliResult r = run({"power-curve", "--method", "ss", "--lambda", "0.05", "--threshold-grid", "0.999"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "threshold,fdr,tpr");
  EXPECT_EQ(split(rows[1])[0], "0.999");
}

TEST(Simulate, ByteIdenticalForAFixedSeed) {
  TempDir dir;
  const std::vector<std::string> args{"simulate", "--method", "dko", "--n", "16", "--repeats", "4",
                                      "--realizations", "8", "--seed", "99", "--lambda-grid", "0.1,0.5"};
  auto a = args;
  a.insert(a.end(), {"--out", dir.file("a.json")});
  auto b = args;
  b.insert(b.end(), {"--out", dir.file("b.json"), "--workers", "2"});
  ASSERT_EQ(run(a).code, kExitOk);
  ASSERT_EQ(run(b).code, kExitOk);
  const auto text = slurp(dir.file("a.json"));
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(dir.file("b.json")));
  EXPECT_NE(text.find("\"master_seed\": 99"), std::string::npos);
}

TEST(Compare, EndToEndAgainstItsOwnTheory) {
  TempDir dir;
  const auto theory = dir.file("theory.csv");
  const auto empirical = dir.file("empirical.json");
  ASSERT_EQ(run({"solve", "--lambda-grid", "0.1,0.5", "--out", theory}).code, kExitOk);
  ASSERT_EQ(run({"simulate", "--n", "16", "--repeats", "4", "--realizations", "8",
                 "--lambda-grid", "0.1,0.6", "--out", empirical}).code,
            kExitOk);
  EXPECT_EQ(run({"compare", "--theory", theory, "--empirical", empirical}).code, kExitUsage);
}

TEST(Compare, ExactMatchPassesAndZeroErrorMismatchFails) {
  TempDir dir;
  const auto theory = dir.file("theory.csv");
  const auto empirical = dir.file("empirical.json");
  write(theory, "lambda,q,tpr\n0.1,0.25,0.5\n0.2,0.125,0.25\n");
  write(empirical, R"({"results": [
      {"lambda": 0.1, "statistics": {"q": {"mean": 0.25, "std_error": 0.0},
                                     "tpr": {"mean": 0.5, "std_error": 0.01},
                                     "knock_mean": {"mean": 0.0, "std_error": 0.1}}},
      {"lambda": 0.2, "statistics": {"q": {"mean": 0.125, "std_error": 0.0},
                                     "tpr": {"mean": 0.25, "std_error": 0.01}}}]})");
  const CliResult ok = run({"compare", "--theory", theory, "--empirical", empirical});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_EQ(lines(ok.out).size(), 5u);  // knock_mean has no theory column

  write(empirical, R"({"results": [
      {"lambda": 0.1, "statistics": {"q": {"mean": 0.26, "std_error": 0.0}}},
      {"lambda": 0.2, "statistics": {"q": {"mean": 0.125, "std_error": 0.0}}}]})");
  const CliResult bad = run({"compare", "--theory", theory, "--empirical", empirical});
  EXPECT_EQ(bad.code, kExitVerdict);
  const auto row = split(lines(bad.out)[1]);
  EXPECT_EQ(row[5], "inf");
  EXPECT_EQ(row[6], "0");
}

TEST(Compare, CellRule) {
  EXPECT_TRUE(compare_cell("q", 0.1, 1.0, 1.0 + 5e-9, 0.0).pass);
  EXPECT_FALSE(compare_cell("q", 0.1, 1.0, 1.1, 0.0).pass);
  EXPECT_NEAR(compare_cell("q", 0.1, 1.0, 1.3, 0.1).z, 3.0, 1e-12);

  std::vector<CompareRow> rows(20, compare_cell("q", 0.1, 0.0, 0.0, 1.0));
  EXPECT_TRUE(compare_overall_pass(rows));
  rows[0] = compare_cell("q", 0.1, 0.0, 5.0, 1.0);
  rows[1] = compare_cell("q", 0.1, 0.0, 5.0, 1.0);
  EXPECT_TRUE(compare_overall_pass(rows));  // 90% within 4 SE, none beyond 6
  rows[2] = compare_cell("q", 0.1, 0.0, 5.0, 1.0);
  EXPECT_FALSE(compare_overall_pass(rows));
  rows[2] = compare_cell("q", 0.1, 0.0, 0.0, 1.0);
  rows[0] = compare_cell("q", 0.1, 0.0, 7.0, 1.0);
  EXPECT_FALSE(compare_overall_pass(rows));
}

TEST(LambdaOpt, ReportsEveryMethodByDefault) {
  const CliResult r = run({"lambda-opt", "--alpha", "1.12", "--rho", "0.5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "method,mu_b,lambda,prediction_error");
  EXPECT_EQ(split(rows[4])[0], "lasso");
}
