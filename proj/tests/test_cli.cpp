#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "binmem/cli.hpp"
#include "binmem/errors.hpp"
#include "binmem/io.hpp"
#include "binmem/kernel.hpp"
#include "oracles.hpp"

using namespace binmem;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("binmem_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& name, nlohmann::json doc) {
    doc["output"]["directory"] = (root_ / name).string();
    const fs::path path = root_ / (name + ".json");
    std::ofstream(path) << doc.dump(2);
    return path;
  }

  int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"binmem"};
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  fs::path root_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Io, FormatDoubleRoundTrips) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  for (double v : {1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Io, JsonWriterUsesFullPrecisionAndNull) {
  const nlohmann::json j{{"a", 0.1}, {"b", std::numeric_limits<double>::quiet_NaN()},
                         {"c", {1, 2}}, {"d", "x\"y"}};
  const std::string text = to_json_text(j);
  EXPECT_NE(text.find("\"a\": 0.10000000000000001"), std::string::npos);
  EXPECT_NE(text.find("\"b\": null"), std::string::npos);
  EXPECT_NE(text.find("\"d\": \"x\\\"y\""), std::string::npos);
  const auto back = nlohmann::json::parse(text);
  EXPECT_EQ(back["a"].get<double>(), 0.1);
  EXPECT_TRUE(back["b"].is_null());
}

TEST(Config, EchoRoundTrips) {
  const nlohmann::json doc = {
      {"kernel", {{"kind", "memory"}, {"p", -0.3}, {"q", 1.1}}},
      {"market", {{"N_sweep", {8, 16}}, {"T", 0.7}, {"r", 0.01}, {"b", 0.02}, {"sigma", 0.3}}},
      {"experiment",
       {{"seed", 99}, {"alpha", 0.4}, {"n_list", {10, 20}}, {"times", {0.1, 0.7}},
        {"statistics", {"variance", "qv"}}, {"bands", {{"qv_max", 0.2}}}}}};
  const auto config = cli::RunConfig::from_json(doc);
  const auto echoed = nlohmann::json::parse(to_json_text(config.to_json()));
  EXPECT_EQ(cli::RunConfig::from_json(echoed), config);
  EXPECT_EQ(config.market.N, (std::vector<std::size_t>{8, 16}));
  EXPECT_TRUE(config.market.sweep);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  const nlohmann::json base = {{"kernel", {{"kind", "constant"}, {"c", 2.0}}}};
  EXPECT_NO_THROW(cli::RunConfig::from_json(base));
  auto extra = base;
  extra["kernel"]["p"] = 1.0;
  EXPECT_THROW(cli::RunConfig::from_json(extra), ConfigError);
  auto top = base;
  top["plot"] = true;
  EXPECT_THROW(cli::RunConfig::from_json(top), ConfigError);
  auto bad_q = nlohmann::json{{"kernel", {{"kind", "memory"}, {"p", 1.0}, {"q", -1.0}}}};
  EXPECT_THROW(cli::RunConfig::from_json(bad_q), ConfigError);
  auto fractional_N = base;
  fractional_N["market"]["N"] = 8.5;
  EXPECT_THROW(cli::RunConfig::from_json(fractional_N), ConfigError);
  auto stat = base;
  stat["experiment"]["statistics"] = {"skorohod"};
  EXPECT_THROW(cli::RunConfig::from_json(stat), ConfigError);
}

TEST_F(CliTest, KernelTableWienerCaseAndOracle) {
  const auto wiener = write_config("w", {{"kernel", {{"kind", "memory"}, {"p", 0.0}, {"q", 1.0}}},
                                         {"experiment", {{"grid", 6}}}});
  ASSERT_EQ(run({"kernel-table", "--config", wiener.string()}), 0) << err_.str();
  auto rows = read_csv(slurp(root_ / "w" / "kernel_table.csv"));
  ASSERT_EQ(rows.size(), 37u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "u", "l", "z", "y"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][4], "1");

  const auto mem = write_config("m", {{"kernel", {{"kind", "memory"}, {"p", 1.0}, {"q", 1.0}}},
                                      {"experiment", {{"grid", 5}}}});
  ASSERT_EQ(run({"kernel-table", "--config", mem.string()}), 0);
  rows = read_csv(slurp(root_ / "m" / "kernel_table.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]), u = std::stod(rows[i][1]);
    if (u >= t) {
      EXPECT_EQ(rows[i][3], "0");
      EXPECT_EQ(rows[i][4], "1");
      if (u > t) {
        EXPECT_EQ(rows[i][2], "0");
      }
    } else {
      EXPECT_NEAR(std::stod(rows[i][3]), oracle::memory_z_gauss(1.0, 1.0, t, u), 1e-12);
    }
  }
}

TEST_F(CliTest, SimulateIsDeterministicAndEnginesAgree) {
  nlohmann::json doc = {{"kernel", {{"kind", "memory"}, {"p", 1.0}, {"q", 1.0}}},
                        {"market", {{"N", 64}, {"T", 1.0}, {"sigma", 0.2}, {"b", 0.01}}},
                        {"experiment", {{"seed", 5}, {"paths", 3}, {"engine", "fast"}}}};
  const auto fast = write_config("fast", doc);
  doc["experiment"]["engine"] = "direct";
  const auto direct = write_config("direct", doc);
  ASSERT_EQ(run({"simulate", "--config", fast.string()}), 0) << err_.str();
  const std::string first = slurp(root_ / "fast" / "path_N64_0002.csv");
  ASSERT_EQ(run({"simulate", "--config", fast.string(), "--workers", "3"}), 0);
  EXPECT_EQ(slurp(root_ / "fast" / "path_N64_0002.csv"), first);
  ASSERT_EQ(run({"simulate", "--config", direct.string()}), 0);
  const auto a = read_csv(first);
  const auto b = read_csv(slurp(root_ / "direct" / "path_N64_0002.csv"));
  ASSERT_EQ(a.size(), 66u);
  EXPECT_EQ(a[0], (std::vector<std::string>{"step", "t", "xi", "W", "Y", "S"}));
  for (std::size_t i = 1; i < a.size(); ++i) {
    EXPECT_EQ(a[i][2], b[i][2]);
    const double ya = std::stod(a[i][4]), yb = std::stod(b[i][4]);
    EXPECT_NEAR(ya, yb, 1e-10 * std::max(1.0, std::abs(yb)));
  }
  const auto echo = nlohmann::json::parse(slurp(root_ / "fast" / "config_echo.json"));
  EXPECT_EQ(cli::RunConfig::from_json(echo), cli::load_config(fast));
  EXPECT_TRUE(fs::exists(root_ / "fast" / "run.log"));
}

TEST_F(CliTest, SimulateReportsNonPositiveFactor) {
  const auto cfg = write_config(
      "bad", {{"kernel", {{"kind", "memory"}, {"p", 0.0}, {"q", 1.0}}},
              {"market", {{"N", 4}, {"T", 1.0}, {"sigma", 5.0}}},
              {"experiment", {{"paths", 4}}}});
  EXPECT_EQ(run({"simulate", "--config", cfg.string()}), 4);
  EXPECT_NE(err_.str().find("step"), std::string::npos);
}

TEST_F(CliTest, ArbitrageExactQuarterAndWitness) {
  const auto cfg = write_config(
      "arb", {{"kernel", {{"kind", "constant"}, {"c", 2.0}}},
              {"market", {{"N", 8}, {"T", 1.0}, {"r", 0.03}, {"b", 0.03}, {"sigma", 0.2}}},
              {"experiment", {{"mode", "exact"}, {"witness", true}}}});
  ASSERT_EQ(run({"arbitrage", "--config", cfg.string()}), 0) << err_.str();
  const auto report = nlohmann::json::parse(slurp(root_ / "arb" / "report_N8.json"));
  EXPECT_EQ(report["p_hat"].get<double>(), 0.25);
  const auto cert = nlohmann::json::parse(slurp(root_ / "arb" / "certificate_N8.json"));
  EXPECT_FALSE(cert["arbitrage_free"].get<bool>());
  const auto witness = nlohmann::json::parse(slurp(root_ / "arb" / "witness_N8.json"));
  EXPECT_TRUE(witness["verified"].get<bool>());
  const auto rows = read_csv(slurp(root_ / "arb" / "pn_sweep.csv"));
  EXPECT_EQ(rows[0], (std::vector<std::string>{"N", "p_hat", "ci_lo", "ci_hi", "trials", "seed"}));
}

TEST_F(CliTest, ArbitrageFreeRegimeAndPrecondition) {
  nlohmann::json doc = {{"kernel", {{"kind", "memory"}, {"p", 1.0}, {"q", 1.0}}},
                        {"market", {{"N", 40}, {"T", 0.5}, {"r", 0.05}, {"b", 0.03}, {"sigma", 0.1}}},
                        {"experiment", {{"trials", 500}}}};
  const auto free_cfg = write_config("free", doc);
  ASSERT_EQ(run({"arbitrage", "--config", free_cfg.string(), "--use-theorem41"}), 0) << err_.str();
  const auto cert = nlohmann::json::parse(slurp(root_ / "free" / "certificate_N40.json"));
  EXPECT_TRUE(cert["arbitrage_free"].get<bool>());
  EXPECT_TRUE(cert.contains("N0"));
  const auto report = nlohmann::json::parse(slurp(root_ / "free" / "report_N40.json"));
  EXPECT_EQ(report["p_hat"].get<double>(), 0.0);

  doc["market"]["T"] = 2.0;
  const auto long_cfg = write_config("long", doc);
  EXPECT_EQ(run({"arbitrage", "--config", long_cfg.string(), "--use-theorem41"}), 3);
  EXPECT_NE(err_.str().find("precondition"), std::string::npos);
}

TEST_F(CliTest, ConvergenceExitCodes) {
  nlohmann::json doc = {{"kernel", {{"kind", "memory"}, {"p", 0.0}, {"q", 1.0}}},
                        {"market", {{"T", 1.0}}},
                        {"experiment", {{"n_list", {10, 20, 40}}, {"times", {0.5, 1.0}},
                                        {"statistics", {"variance"}}}}};
  const auto zero = write_config("zero", doc);
  // Integer n t everywhere: the discrepancy is exactly zero and no slope exists.
  EXPECT_EQ(run({"convergence", "--config", zero.string()}), 1);
  const auto rows = read_csv(slurp(root_ / "zero" / "variance.csv"));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(std::stod(rows[i][1]), 0.0);

  doc["kernel"] = {{"kind", "memory"}, {"p", 1.0}, {"q", 1.0}};
  doc["experiment"]["n_list"] = {50, 100, 200};
  doc["experiment"]["times"] = {1.0};
  const auto mem = write_config("mem", doc);
  EXPECT_EQ(run({"convergence", "--config", mem.string()}), 0) << out_.str();

  doc["experiment"]["n_list"] = nlohmann::json::array();
  const auto empty = write_config("empty", doc);
  EXPECT_EQ(run({"convergence", "--config", empty.string()}), 2);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"simulate", "--config", (root_ / "missing.json").string()}), 2);
  const auto unknown = write_config("u", {{"kernel", {{"kind", "constant"}, {"c", 1.0}}},
                                          {"market", {{"N", 4}, {"volatility", 0.2}}}});
  EXPECT_EQ(run({"simulate", "--config", unknown.string()}), 2);
  EXPECT_NE(err_.str().find("volatility"), std::string::npos);
  EXPECT_EQ(run({"simulate"}), 2);
  EXPECT_EQ(run({"frobnicate", "--config", unknown.string()}), 2);
}

TEST_F(CliTest, FlagOverridesReachTheEcho) {
  const auto cfg = write_config(
      "o", {{"kernel", {{"kind", "constant"}, {"c", 2.0}}},
            {"market", {{"N", 30}, {"T", 1.0}, {"sigma", 0.2}}},
            {"experiment", {{"trials", 100}}}});
  const auto dir = root_ / "elsewhere";
  ASSERT_EQ(run({"arbitrage", "--config", cfg.string(), "--seed", "12", "--trials", "300", "--out",
                 dir.string()}),
            0)
      << err_.str();
  const auto echo = nlohmann::json::parse(slurp(dir / "config_echo.json"));
  EXPECT_EQ(echo["experiment"]["seed"].get<int>(), 12);
  EXPECT_EQ(echo["experiment"]["trials"].get<int>(), 300);
  const auto report = nlohmann::json::parse(slurp(dir / "report_N30.json"));
  EXPECT_EQ(report["trials"].get<int>(), 300);
}
