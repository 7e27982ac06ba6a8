#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "binmem/kernel.hpp"
#include "json.hpp"

namespace binmem::cli {

struct KernelBlock {
  std::string kind = "memory";  ///< "memory" or "constant"
  double p = 0.0;
  double q = 1.0;
  double c = 0.0;

  bool operator==(const KernelBlock&) const = default;
};

struct MarketBlock {
  /// Either a single N or an N sweep; empty when the command needs none.
  std::vector<std::size_t> N;
  bool sweep = false;
  double T = 1.0;
  double r = 0.0;
  double b = 0.0;
  double sigma = 0.2;
  double s0 = 1.0;

  bool operator==(const MarketBlock&) const = default;
};

struct Bands {
  double variance_slope_low = -1.2;
  double variance_slope_high = -0.8;
  std::optional<double> qv_max;
  std::optional<double> fdd_max;

  bool operator==(const Bands&) const = default;
};

struct ExperimentBlock {
  std::uint64_t seed = 1;
  std::size_t trials = 10'000;
  std::size_t paths = 200;
  std::size_t samples = 10'000;
  std::string innovation = "rademacher";  ///< rademacher | standard_normal
  std::string engine = "auto";            ///< auto | fast | direct
  std::string mode = "auto";              ///< auto | exact | monte_carlo
  std::size_t budget = 26;
  bool use_theorem41 = false;
  std::optional<double> alpha;
  bool witness = false;
  std::size_t grid = 11;
  std::vector<std::size_t> n_list;
  std::vector<double> times;
  std::vector<std::string> statistics;
  Bands bands;

  bool operator==(const ExperimentBlock&) const = default;
};

struct OutputBlock {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
  KernelBlock kernel;
  MarketBlock market;
  ExperimentBlock experiment;
  OutputBlock output;

  bool operator==(const RunConfig&) const = default;

  /// Parses and validates; ConfigError on unknown keys, wrong types or values
  /// violating a module invariant.
  static RunConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  void validate() const;

  KernelModel make_kernel() const;
};

RunConfig load_config(const std::filesystem::path& path);

enum ExitCode : int {
  kExitOk = 0,
  kExitBandFailure = 1,
  kExitConfig = 2,
  kExitPrecondition = 3,
  kExitNumericalRegime = 4,
};

int cmd_kernel_table(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::size_t workers, std::ostream& out);
int cmd_arbitrage(const RunConfig& config, std::size_t workers, std::ostream& out);
int cmd_convergence(const RunConfig& config, std::size_t workers, std::ostream& out);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace binmem::cli
