#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixprice/cli.hpp"
#include "fixprice/distributions.hpp"
#include "fixprice/evt_fit.hpp"
#include "fixprice/guarantees.hpp"
#include "fixprice/policy_eval.hpp"

namespace fixprice {
namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "fixprice");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<double> fields_of(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("fixprice_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

TEST(Cli, GuaranteesTable) {
  const RunResult r = run({"guarantees", "--k-max", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], "k,phi_k_alpha2,sqrt_bound");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = fields_of(lines[i]);
    EXPECT_EQ(f[0], static_cast<double>(i));
    EXPECT_GE(f[1], f[2]);
  }
}

TEST(Cli, GuaranteesSingleRowAndUsageError) {
  const RunResult one = run({"guarantees", "--k-max", "1"});
  ASSERT_EQ(one.code, 0);
  const auto lines = lines_of(one.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_NEAR(fields_of(lines[1])[1], phi_1_closed(2.0), 1e-10);
  EXPECT_EQ(run({"guarantees", "--k-max", "0"}).code, kExitUsage);
}

TEST(Cli, GuaranteesAlphaGridColumns) {
  const RunResult r = run({"guarantees", "--k-max", "2", "--alpha-grid", "1.5,3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  EXPECT_EQ(lines[0], "k,phi_k_alpha2,sqrt_bound,phi_k_alpha_1.5,phi_k_alpha_3");
  EXPECT_NEAR(fields_of(lines[1])[3], phi_1_closed(1.5), 1e-10);
}

TEST(Cli, ScalarOptimizationsAreDeterministic) {
  const RunResult a = run({"phi1-min"});
  const RunResult b = run({"phi1-min"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_NEAR(j["alpha"].get<double>(), 1.656, 2e-3);
  EXPECT_NEAR(j["value"].get<double>(), 0.712, 1e-3);
  const RunResult g = run({"adaptivity-gap"});
  ASSERT_EQ(g.code, 0);
  EXPECT_EQ(g.out, run({"adaptivity-gap"}).out);
  EXPECT_GE(nlohmann::json::parse(g.out)["value"].get<double>(), 1.0);
}

TEST(Cli, ConvergeCsv) {
  const RunResult r = run({"converge", "--dist", "pareto:alpha=2", "--k", "1", "--n-grid",
                           "10,100,1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "n,k,threshold,fp_value,prophet_value,ratio");
  const double limit = phi_1_closed(2.0);
  double prev_gap = 1.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double gap = fields_of(lines[i])[5] - limit;
    EXPECT_GE(gap, -1e-9);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  const RunResult expo = run({"converge", "--dist", "exp:rate=1", "--n-grid", "10,1000,100000"});
  ASSERT_EQ(expo.code, 0);
  const auto e = lines_of(expo.out);
  EXPECT_LT(fields_of(e[1])[5], fields_of(e[2])[5]);
  EXPECT_LT(fields_of(e[2])[5], fields_of(e[3])[5]);
}

TEST(Cli, BadDistributionIsUsageErrorNamingKey) {
  const RunResult r = run({"converge", "--dist", "pareto:alpah=2", "--n-grid", "10"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("alpah"), std::string::npos) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, TheoryModeNeedsUForLightTails) {
  EXPECT_EQ(run({"converge", "--dist", "exp:rate=1", "--n-grid", "10", "--mode", "theory"}).code,
            kExitUsage);
  EXPECT_EQ(run({"converge", "--dist", "exp:rate=1", "--n-grid", "10", "--mode", "theory", "--u",
                 "0.5"})
                .code,
            0);
  EXPECT_EQ(run({"converge", "--dist", "pareto:alpha=2", "--n-grid", "10", "--mode", "other"}).code,
            kExitUsage);
}

TEST(Cli, Evaluate) {
  const RunResult r = run({"evaluate", "--dist", "pareto:alpha=2", "--n", "1", "--threshold", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["fp_value"].get<double>(), 1.0, 1e-10);
  EXPECT_EQ(run({"evaluate", "--dist", "pareto:alpha=2", "--n", "2", "--k", "3"}).code,
            kExitComputation);
}

TEST(Cli, Competition) {
  const RunResult r = run({"competition", "--dist", "uniform:a=0,b=1", "--n", "500"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["records"][0]["empirical_ratio"].get<double>() / 2.0, 1.0, 0.05);
  const RunResult e = run({"competition", "--dist", "exp:rate=1", "--n", "500"});
  ASSERT_EQ(e.code, 0);
  EXPECT_NEAR(nlohmann::json::parse(e.out)["records"][0]["empirical_ratio"].get<double>() / 1.781,
              1.0, 0.05);
  const RunResult bad = run({"competition", "--dist", "pareto:alpha=0.9", "--n", "10"});
  EXPECT_EQ(bad.code, kExitComputation);
  EXPECT_FALSE(bad.err.empty());
}

TEST(Cli, SimulateIsByteIdentical) {
  const std::vector<std::string> args{"simulate", "--dist", "exp:rate=1", "--n", "10", "--k", "2",
                                      "--threshold", "1.5", "--reps", "2000", "--seed", "9"};
  const RunResult a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(a.out, run(threaded).out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 9u);
  EXPECT_LE(std::abs(j["z_score"].get<double>()), 4.0);
}

TEST(Cli, FitSyntheticFrechet) {
  TempDir dir;
  const std::string csv = dir.file("bids.csv");
  {
    std::ofstream f(csv);
    f.precision(17);
    f << "auctionid,bid,bidder\n";
    const auto v = draw_sample(Distribution::frechet(0.0, 300.0, 2.24), 10000, 4242);
    for (std::size_t i = 0; i < v.size(); ++i) {
      f << i % 97 << ',' << v[i] << ",bidder" << i << '\n';
      if (i % 5 == 0) f << i % 97 << ',' << v[i] * 0.5 << ",bidder" << i << '\n';
    }
  }
  const std::string hist = dir.file("hist.csv");
  const std::string hill = dir.file("hill.csv");
  const RunResult r = run({"fit", "--input", csv, "--k-hill", "500", "--realized-max", "5400",
                           "--histogram-csv", hist, "--hill-csv", hill, "--k-range", "10,600"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["n_valuations"].get<long>(), 10000);
  EXPECT_EQ(j["n_bids"].get<long>(), 12000);
  EXPECT_NEAR(j["alpha_hat"].get<double>() / 2.24, 1.0, 0.15);
  auto sorted = draw_sample(Distribution::frechet(0.0, 300.0, 2.24), 10000, 4242);
  std::sort(sorted.begin(), sorted.end());
  FitOptions options;
  options.k_hill = 500;
  const FitResult direct = fit_frechet(sorted, options);
  EXPECT_NEAR(j["alpha_hat"].get<double>(), direct.alpha_hat, 1e-9 * direct.alpha_hat);
  EXPECT_NEAR(j["s_hat"].get<double>(), direct.s_hat, 1e-9 * direct.s_hat);
  EXPECT_TRUE(j.contains("realized_ratio"));
  EXPECT_EQ(lines_of(std::string(std::istreambuf_iterator<char>(std::ifstream(hill).rdbuf()), {}))
                .size(),
            592u);
  std::ifstream h(hist);
  std::string header;
  std::getline(h, header);
  EXPECT_EQ(header, "bin_lo,bin_hi,relative_frequency");
}

TEST(Cli, FitUsageErrors) {
  EXPECT_EQ(run({"fit"}).code, kExitUsage);
  EXPECT_EQ(run({"fit", "--input", "/nonexistent/bids.csv"}).code, kExitUsage);
}

TEST(Cli, OutputFileIsAtomic) {
  TempDir dir;
  const std::string target = dir.file("table.csv");
  ASSERT_EQ(run({"guarantees", "--k-max", "3", "--output", target}).code, 0);
  std::ifstream in(target);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "k,phi_k_alpha2,sqrt_bound");

  const std::string failed = dir.file("failed.json");
  EXPECT_EQ(run({"competition", "--dist", "pareto:alpha=0.5", "--n", "5", "--output", failed}).code,
            kExitComputation);
  EXPECT_FALSE(std::filesystem::exists(failed));
  EXPECT_FALSE(std::filesystem::exists(failed + ".tmp"));
}

TEST(Cli, UnknownFlagsAndSubcommands) {
  EXPECT_EQ(run({"phi1-min", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"nonsense"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, 0);
}

}  // namespace
}  // namespace fixprice
