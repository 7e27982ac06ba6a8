#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "CLI11.hpp"
#include "binmem/arbitrage.hpp"
#include "binmem/cli.hpp"
#include "binmem/convergence.hpp"
#include "binmem/errors.hpp"
#include "binmem/io.hpp"
#include "binmem/parallel.hpp"
#include "binmem/rng.hpp"

namespace binmem::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

bool wants(const RunConfig& config, const char* format) {
  const auto& f = config.output.formats;
  return std::find(f.begin(), f.end(), format) != f.end();
}

fs::path out_dir(const RunConfig& config) { return fs::path(config.output.directory); }

void echo_config(const RunConfig& config) {
  write_text_file(out_dir(config) / "config_echo.json", to_json_text(config.to_json()));
}

const std::vector<std::size_t>& require_N(const RunConfig& config, const char* command) {
  if (config.market.N.empty()) {
    throw ConfigError(std::string(command) + " needs market.N or market.N_sweep");
  }
  return config.market.N;
}

MarketParams market_for(const RunConfig& config, std::size_t N) {
  const auto& m = config.market;
  MarketParams params{N, m.T, m.r, m.b, m.sigma, m.s0};
  params.validate();
  return params;
}

InnovationLaw law_of(const RunConfig& config) {
  return config.experiment.innovation == "standard_normal" ? InnovationLaw::standard_normal
                                                           : InnovationLaw::rademacher;
}

EngineChoice engine_of(const RunConfig& config) {
  if (config.experiment.engine == "fast") return EngineChoice::fast;
  if (config.experiment.engine == "direct") return EngineChoice::direct;
  return EngineChoice::automatic;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

std::string padded(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", k);
  return buf;
}

json report_json(std::size_t N, const ArbitrageReport& r) {
  json hist = json::array();
  for (const auto& [step, mass] : r.first_violation_histogram) {
    hist.push_back({{"step", step}, {"mass", mass}});
  }
  json j{{"N", N},
         {"mode", r.mode == EstimateMode::exact ? "exact" : "monte_carlo"},
         {"p_hat", r.p_hat},
         {"ci_low", r.ci_low},
         {"ci_high", r.ci_high},
         {"trials", r.trials},
         {"first_violation_histogram", hist}};
  if (r.example_prefix) j["example_prefix"] = vector_json(*r.example_prefix);
  if (r.example_step) j["example_step"] = *r.example_step;
  return j;
}

json convergence_json(const ConvergenceReport& r) {
  json j{{"pass", r.pass}, {"criterion", r.criterion}, {"slope", r.slope}};
  j["n"] = r.n_values;
  j["discrepancy"] = r.discrepancy;
  return j;
}

std::string convergence_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "n,discrepancy,std_error\n";
  for (std::size_t j = 0; j < r.n_values.size(); ++j) {
    os << r.n_values[j] << ',' << format_double(r.discrepancy[j]) << ','
       << format_double(r.std_error[j]) << '\n';
  }
  return os.str();
}

}  // namespace

int cmd_kernel_table(const RunConfig& config, std::ostream& out) {
  const KernelModel kernel = config.make_kernel();
  const std::size_t G = config.experiment.grid;
  const double T = config.market.T;
  std::vector<double> grid(G);
  for (std::size_t i = 0; i < G; ++i) {
    grid[i] = i + 1 == G ? T : T * static_cast<double>(i) / static_cast<double>(G - 1);
  }
  std::ostringstream csv;
  csv << "t,u,l,z,y\n";
  for (double t : grid) {
    for (double u : grid) {
      csv << format_double(t) << ',' << format_double(u) << ',' << format_double(eval_l(kernel, t, u))
          << ',' << format_double(eval_z(kernel, t, u)) << ',' << format_double(eval_y(kernel, t, u))
          << '\n';
    }
  }
  echo_config(config);
  if (wants(config, "csv")) write_text_file(out_dir(config) / "kernel_table.csv", csv.str());
  out << "kernel-table: " << G * G << " rows for " << kernel.describe() << '\n';
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::size_t workers, std::ostream& out) {
  const KernelModel kernel = config.make_kernel();
  const auto& Ns = require_N(config, "simulate");
  const std::size_t paths = config.experiment.paths;
  echo_config(config);
  for (std::size_t N : Ns) {
    const MarketParams params = market_for(config, N);
    const PathSampler sampler(kernel, N, params.T, engine_of(config));
    const std::uint64_t seed = mix_seed(config.experiment.seed, N);
    std::vector<std::string> files(paths);
    parallel_chunks(paths, workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const auto xi = sample_innovations({law_of(config), seed, k}, sampler.steps());
        DiscretePath path = sampler.sample(xi);
        path.S = sample_S(path, params.b, params.sigma, params.s0);
        std::ostringstream os;
        write_path_csv(os, path);
        files[k] = os.str();
      }
    });
    if (wants(config, "csv")) {
      for (std::size_t k = 0; k < paths; ++k) {
        write_text_file(out_dir(config) / ("path_N" + std::to_string(N) + "_" + padded(k) + ".csv"),
                        files[k]);
      }
    }
    out << "simulate: N=" << N << ", " << paths << " paths ("
        << (sampler.uses_fast_engine() ? "fast" : "direct") << " engine)\n";
  }
  return kExitOk;
}

int cmd_arbitrage(const RunConfig& config, std::size_t workers, std::ostream& out) {
  const KernelModel kernel = config.make_kernel();
  const auto& Ns = require_N(config, "arbitrage");
  const auto& ex = config.experiment;
  echo_config(config);
  std::ostringstream sweep;
  sweep << "N,p_hat,ci_lo,ci_hi,trials,seed\n";
  std::vector<DecayPoint> points;
  for (std::size_t N : Ns) {
    const MarketParams params = market_for(config, N);
    const CoefficientTable table(kernel, N, params.T);
    NoArbCertificate cert = is_arbitrage_free_exact(table, params);
    if (ex.use_theorem41) cert.N0 = theorem41_N0(params, kernel.lipschitz_constant());

    const bool exact = ex.mode == "exact" || (ex.mode == "auto" && params.steps() <= ex.budget);
    ArbitrageReport report;
    if (exact) {
      report = exact_PN(table, params, ex.budget);
    } else {
      const McOptions mc{ex.trials, ex.seed, workers};
      report = kernel.memory_params() ? mc_PN(*kernel.memory_params(), params, mc)
                                      : mc_PN(table, params, mc);
    }
    points.push_back({static_cast<double>(N), report.p_hat});
    sweep << N << ',' << format_double(report.p_hat) << ',' << format_double(report.ci_low) << ','
          << format_double(report.ci_high) << ',' << report.trials << ',' << ex.seed << '\n';

    if (wants(config, "json")) {
      json c{{"N", N},
             {"arbitrage_free", cert.arbitrage_free},
             {"min_margin", cert.min_margin},
             {"argmin_step", cert.argmin_step},
             {"margins", cert.margins},
             {"lipschitz_constant", kernel.lipschitz_constant()}};
      if (cert.N0) c["N0"] = *cert.N0;
      const std::string tag = "_N" + std::to_string(N) + ".json";
      write_text_file(out_dir(config) / ("certificate" + tag), to_json_text(c));
      write_text_file(out_dir(config) / ("report" + tag), to_json_text(report_json(N, report)));
      if (ex.witness && report.example_prefix && report.example_step) {
        const auto w = extract_strategy(table, params, *report.example_prefix, *report.example_step);
        json wj{{"N", N},
                {"step", w.step},
                {"prefix", vector_json(w.prefix)},
                {"direction", w.direction == Position::long_stock ? "long" : "short"},
                {"stake", w.stake},
                {"payoff_up", w.payoff_up},
                {"payoff_down", w.payoff_down},
                {"verified", verify_strategy(w, table, params)}};
        write_text_file(out_dir(config) / ("witness" + tag), to_json_text(wj));
      }
    }
    out << "arbitrage: N=" << N << " " << (cert.arbitrage_free ? "free" : "not free")
        << ", p_hat=" << format_double(report.p_hat) << '\n';
  }
  if (wants(config, "csv")) write_text_file(out_dir(config) / "pn_sweep.csv", sweep.str());

  if (wants(config, "json") && points.size() > 1) {
    json fit;
    try {
      const DecayFit f = decay_fit(points);
      fit = {{"status", "fitted"},
             {"slope", f.slope},
             {"intercept", f.intercept},
             {"residuals", vector_json(f.residuals)}};
    } catch (const NoDecayDataError& e) {
      fit = {{"status", e.what()}};
    } catch (const DomainError& e) {
      fit = {{"status", e.what()}};
    }
    json pts = json::array();
    for (const auto& p : points) pts.push_back({{"N", p.N}, {"p_hat", p.p_hat}});
    fit["points"] = pts;
    write_text_file(out_dir(config) / "decay_fit.json", to_json_text(fit));
  }
  if (ex.alpha) {
    const MarketParams params = market_for(config, Ns.front());
    const std::size_t n_alpha = theorem42_Nalpha(*ex.alpha, params, kernel.lipschitz_constant());
    if (wants(config, "json")) {
      write_text_file(out_dir(config) / "theorem42.json",
                      to_json_text({{"alpha", *ex.alpha}, {"N_alpha", n_alpha}}));
    }
    out << "arbitrage: N(alpha=" << format_double(*ex.alpha) << ")=" << n_alpha << '\n';
  }
  return kExitOk;
}

int cmd_convergence(const RunConfig& config, std::size_t workers, std::ostream& out) {
  const KernelModel kernel = config.make_kernel();
  const auto& ex = config.experiment;
  if (ex.n_list.empty()) throw ConfigError("convergence needs a non-empty experiment.n_list");
  const double T = config.market.T;
  const std::vector<double> times = ex.times.empty() ? std::vector<double>{T} : ex.times;
  const std::vector<std::string> stats =
      ex.statistics.empty() ? std::vector<std::string>{"variance"} : ex.statistics;
  const MonteCarloOptions mc{ex.paths, ex.seed, workers, law_of(config)};
  echo_config(config);

  json summary = json::object();
  bool all_pass = true;
  for (const auto& stat : stats) {
    ConvergenceReport r;
    if (stat == "variance") {
      r = variance_discrepancy(kernel, times, ex.n_list,
                               {ex.bands.variance_slope_low, ex.bands.variance_slope_high});
    } else if (stat == "qv") {
      r = qv_convergence(kernel, T, ex.n_list, mc);
      if (ex.bands.qv_max) {
        r.pass = r.pass && r.discrepancy.back() <= *ex.bands.qv_max;
        r.criterion += "; last <= " + format_double(*ex.bands.qv_max);
      }
    } else if (stat == "jump") {
      r = jump_convergence(kernel, T, ex.n_list, mc);
    } else if (stat == "fdd") {
      r.statistic = "fdd";
      const double allowance = 1.358 / std::sqrt(static_cast<double>(ex.samples));
      for (std::size_t n : ex.n_list) {
        r.n_values.push_back(n);
        r.discrepancy.push_back(fdd_distance(kernel, times.back(), n, ex.samples, ex.seed, workers));
        r.std_error.push_back(0.0);
      }
      r.slope = log_log_slope(r.n_values, r.discrepancy);
      if (ex.bands.fdd_max) {
        r.pass = r.discrepancy.back() <= *ex.bands.fdd_max;
        r.criterion = "KS distance at largest n <= " + format_double(*ex.bands.fdd_max);
      } else {
        r.pass = true;
        for (std::size_t j = 1; j < r.n_values.size(); ++j) {
          if (r.discrepancy[j] > r.discrepancy[j - 1] + allowance) r.pass = false;
        }
        r.criterion = "KS distance decreasing up to 1.358/sqrt(samples)";
      }
    } else {
      const PriceDynamics dyn{T, config.market.b, config.market.sigma, config.market.s0};
      r = terminal_price_ladder(dyn, kernel, ex.n_list, ex.samples, ex.seed, workers);
    }
    all_pass = all_pass && r.pass;
    summary[stat] = convergence_json(r);
    if (wants(config, "csv")) write_text_file(out_dir(config) / (stat + ".csv"), convergence_csv(r));
    out << "convergence: " << stat << (r.pass ? " PASS" : " FAIL") << " (" << r.criterion << ")\n";
  }
  if (wants(config, "json")) {
    write_text_file(out_dir(config) / "summary.json", to_json_text(summary));
  }
  return all_pass ? kExitOk : kExitBandFailure;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary market with memory: kernels, lattice paths, arbitrage and convergence"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> out_override;
  std::size_t workers = 1;
  bool use_theorem41 = false;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"kernel-table", "Tabulate l, z and y on a grid"},
      {"simulate", "Write lattice paths W, Y and S"},
      {"arbitrage", "Certificates, P_N estimates, decay fit and witnesses"},
      {"convergence", "Convergence diagnostics along an n ladder"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "Override experiment.seed");
    sub->add_option("--trials", trials, "Override experiment.trials");
    sub->add_option("--out", out_override, "Override output.directory");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--use-theorem41", use_theorem41, "Also compute the sufficient-condition N0");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  int code = kExitOk;
  std::optional<fs::path> log_dir;
  try {
    RunConfig config = load_config(config_path);
    if (seed) config.experiment.seed = *seed;
    if (trials) config.experiment.trials = *trials;
    if (out_override) config.output.directory = *out_override;
    if (use_theorem41) config.experiment.use_theorem41 = true;
    config.validate();
    log_dir = out_dir(config);

    if (command == "kernel-table") code = cmd_kernel_table(config, out);
    else if (command == "simulate") code = cmd_simulate(config, workers, out);
    else if (command == "arbitrage") code = cmd_arbitrage(config, workers, out);
    else code = cmd_convergence(config, workers, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    code = kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    code = kExitConfig;
  } catch (const BudgetExceededError& e) {
    err << "config error: " << e.what() << '\n';
    code = kExitConfig;
  } catch (const PreconditionError& e) {
    err << "precondition error: " << e.what() << '\n';
    code = kExitPrecondition;
  } catch (const NumericalRegimeError& e) {
    err << "numerical regime error: " << e.what() << " (step " << e.step() << ")\n";
    code = kExitNumericalRegime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitBandFailure;
  }

  if (log_dir) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::ostringstream log;
    log << "timestamp " << stamp << "\ncommand " << command << "\nworkers " << workers
        << "\nexit " << code << '\n';
    try {
      write_text_file(*log_dir / "run.log", log.str());
    } catch (const std::exception&) {
    }
  }
  return code;
}

}  // namespace binmem::cli
