#include "binmem/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binmem/errors.hpp"
#include "binmem/parallel.hpp"
#include "binmem/quadrature.hpp"
#include "binmem/rng.hpp"

namespace binmem {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate summarize(const std::vector<double>& values) {
  const double count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / count;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

void require_n_list(std::span<const std::size_t> n_list) {
  if (n_list.empty()) throw DomainError("n ladder is empty");
  for (std::size_t n : n_list) {
    if (n < 1) throw DomainError("n ladder entries must be positive");
  }
}

/// Per-path statistic f(Y) for `options.paths` paths; slot k always uses
/// stream k of the n-specific seed.
template <typename Stat>
std::vector<double> per_path(const KernelModel& kernel, double T, std::size_t n,
                             const MonteCarloOptions& options, Stat&& stat) {
  const PathSampler sampler(kernel, n, T);
  std::vector<double> out(options.paths);
  const std::uint64_t seed = mix_seed(options.seed, n);
  parallel_chunks(options.paths, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto xi = sample_innovations({options.law, seed, k}, sampler.steps());
      out[k] = stat(sampler.sample(xi));
    }
  });
  return out;
}

/// floor(n t), with t = 0 allowed.
std::size_t lattice_index(std::size_t n, double t) { return t > 0.0 ? step_count(n, t) : 0; }

std::vector<double> y_weights(const KernelModel& kernel, std::size_t k, std::size_t n) {
  const double dn = static_cast<double>(n);
  const double t = static_cast<double>(k) / dn;
  std::vector<double> w(k);
  for (std::size_t i = 1; i <= k; ++i) w[i - 1] = eval_y(kernel, t, static_cast<double>(i) / dn);
  return w;
}

}  // namespace

double limit_covariance(const KernelModel& kernel, double s, double t, double tol) {
  const double T = kernel.horizon();
  check_time(s, T, "s");
  check_time(t, T, "t");
  const double upper = std::min(s, t);
  return adaptive_simpson(
      [&](double u) { return eval_y(kernel, s, u) * eval_y(kernel, t, u); }, 0.0, upper, tol);
}

double limit_variance(const KernelModel& kernel, double t, double tol) {
  return limit_covariance(kernel, t, t, tol);
}

Eigen::MatrixXd limit_covariance_matrix(const KernelModel& kernel, std::span<const double> times) {
  const auto k = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      out(a, b) = out(b, a) = limit_covariance(kernel, times[a], times[b]);
    }
  }
  return out;
}

double discrete_covariance(const KernelModel& kernel, double s, double t, std::size_t n) {
  if (n < 1) throw DomainError("n must be positive");
  const double T = kernel.horizon();
  check_time(s, T, "s");
  check_time(t, T, "t");
  const auto ws = y_weights(kernel, lattice_index(n, s), n);
  const auto wt = y_weights(kernel, lattice_index(n, t), n);
  const std::size_t common = std::min(ws.size(), wt.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < common; ++i) sum += ws[i] * wt[i];
  return sum / static_cast<double>(n);
}

Eigen::MatrixXd discrete_covariance_matrix(const KernelModel& kernel, std::span<const double> times,
                                           std::size_t n) {
  if (n < 1) throw DomainError("n must be positive");
  const auto k = static_cast<Eigen::Index>(times.size());
  std::vector<std::vector<double>> rows;
  rows.reserve(times.size());
  for (double t : times) {
    check_time(t, kernel.horizon(), "t");
    rows.push_back(y_weights(kernel, lattice_index(n, t), n));
  }
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      const auto& ra = rows[static_cast<std::size_t>(a)];
      const auto& rb = rows[static_cast<std::size_t>(b)];
      const std::size_t common = std::min(ra.size(), rb.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < common; ++i) sum += ra[i] * rb[i];
      out(a, b) = out(b, a) = sum / static_cast<double>(n);
    }
  }
  return out;
}

LogNormalLaw terminal_log_price_law(const KernelModel& kernel, const PriceDynamics& dynamics) {
  const double T = dynamics.T;
  const double sigma = dynamics.sigma;
  return {std::log(dynamics.s0) + dynamics.b * T - 0.5 * sigma * sigma * T,
          std::abs(sigma) * std::sqrt(limit_variance(kernel, T))};
}

double log_log_slope(std::span<const std::size_t> n_values, std::span<const double> values) {
  if (n_values.size() != values.size()) throw DomainError("slope inputs differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] > 0.0 && std::isfinite(values[j])) {
      pts.emplace_back(std::log(static_cast<double>(n_values[j])), std::log(values[j]));
    }
  }
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) {
    A(static_cast<Eigen::Index>(j), 0) = pts[j].first;
    A(static_cast<Eigen::Index>(j), 1) = 1.0;
    rhs[static_cast<Eigen::Index>(j)] = pts[j].second;
  }
  return A.colPivHouseholderQr().solve(rhs)[0];
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left) {
  if (samples.empty()) throw DomainError("KS distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double count = static_cast<double>(samples.size());
  const auto& left = cdf_left ? cdf_left : cdf;
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = samples[i];
    d = std::max(d, static_cast<double>(i + 1) / count - cdf(x));
    d = std::max(d, left(x) - static_cast<double>(i) / count);
  }
  return d;
}

ConvergenceReport variance_discrepancy(const KernelModel& kernel, std::span<const double> times,
                                       std::span<const std::size_t> n_list, SlopeBand band) {
  require_n_list(n_list);
  if (times.empty()) throw DomainError("variance discrepancy needs at least one time");
  const Eigen::MatrixXd limit = limit_covariance_matrix(kernel, times);
  ConvergenceReport report;
  report.statistic = "variance";
  for (std::size_t n : n_list) {
    const Eigen::MatrixXd disc = discrete_covariance_matrix(kernel, times, n);
    report.n_values.push_back(n);
    report.discrepancy.push_back((disc - limit).cwiseAbs().maxCoeff());
    report.std_error.push_back(0.0);
  }
  report.slope = log_log_slope(report.n_values, report.discrepancy);
  report.pass = std::isfinite(report.slope) && report.slope >= band.low && report.slope <= band.high;
  report.criterion = "log-log slope in [" + std::to_string(band.low) + ", " +
                     std::to_string(band.high) + "]";
  return report;
}

double qv_sup_discrepancy(const Eigen::VectorXd& path, std::size_t n, double T) {
  const Eigen::VectorXd qv = quadratic_variation(path);
  const double dn = static_cast<double>(n);
  const Eigen::Index m = qv.size() - 1;
  double sup = 0.0;
  for (Eigen::Index k = 0; k <= m; ++k) {
    const double start = static_cast<double>(k) / dn;
    const double stop = k < m ? static_cast<double>(k + 1) / dn : T;
    sup = std::max({sup, std::abs(qv[k] - start), std::abs(qv[k] - stop)});
  }
  return sup;
}

ConvergenceReport qv_convergence(const KernelModel& kernel, double T,
                                 std::span<const std::size_t> n_list,
                                 const MonteCarloOptions& options) {
  require_n_list(n_list);
  if (options.paths < 1) throw DomainError("qv convergence needs at least one path");
  ConvergenceReport report;
  report.statistic = "qv";
  for (std::size_t n : n_list) {
    const auto values = per_path(kernel, T, n, options, [&](const DiscretePath& path) {
      return qv_sup_discrepancy(path.Y, n, T);
    });
    const auto est = summarize(values);
    report.n_values.push_back(n);
    report.discrepancy.push_back(est.mean);
    report.std_error.push_back(est.std_error);
  }
  report.slope = log_log_slope(report.n_values, report.discrepancy);
  report.pass = true;
  for (std::size_t j = 1; j < report.n_values.size(); ++j) {
    const double next_low = report.discrepancy[j] - kZ95 * report.std_error[j];
    const double prev_high = report.discrepancy[j - 1] + kZ95 * report.std_error[j - 1];
    if (next_low > prev_high) report.pass = false;
  }
  report.criterion = "non-increasing up to overlapping 95% intervals";
  return report;
}

ConvergenceReport jump_convergence(const KernelModel& kernel, double T,
                                   std::span<const std::size_t> n_list,
                                   const MonteCarloOptions& options) {
  require_n_list(n_list);
  if (options.paths < 1) throw DomainError("jump convergence needs at least one path");
  ConvergenceReport report;
  report.statistic = "jump";
  for (std::size_t n : n_list) {
    const double dn = static_cast<double>(n);
    const auto values = per_path(kernel, T, n, options, [&](const DiscretePath& path) {
      const double jump = sup_jump(path.Y);
      return dn * jump * jump * jump * jump;
    });
    const auto est = summarize(values);
    report.n_values.push_back(n);
    report.discrepancy.push_back(est.mean);
    report.std_error.push_back(est.std_error);
  }
  report.slope = log_log_slope(report.n_values, report.discrepancy);
  const double last_low = report.discrepancy.back() - kZ95 * report.std_error.back();
  const double first_high = report.discrepancy.front() + kZ95 * report.std_error.front();
  report.pass = last_low <= first_high;
  report.criterion = "n E[sup jump^4] bounded: last <= first up to overlapping 95% intervals";
  return report;
}

double fdd_distance(const KernelModel& kernel, double t, std::size_t n, std::size_t samples,
                    std::uint64_t seed, std::size_t workers) {
  if (n < 1 || samples < 1) throw DomainError("fdd distance needs n >= 1 and samples >= 1");
  check_time(t, kernel.horizon(), "t");
  const auto w = y_weights(kernel, lattice_index(n, t), n);
  const Eigen::Map<const Eigen::VectorXd> weights(w.data(), static_cast<Eigen::Index>(w.size()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const std::uint64_t stream_seed = mix_seed(seed, n);
  std::vector<double> draws(samples);
  parallel_chunks(samples, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      if (w.empty()) continue;
      const auto xi = sample_innovations({InnovationLaw::rademacher, stream_seed, k}, w.size());
      draws[k] = scale * weights.dot(xi);
    }
  });
  const double sd = std::sqrt(limit_variance(kernel, t));
  if (sd == 0.0) {
    return ks_distance(
        std::move(draws), [](double x) { return x >= 0.0 ? 1.0 : 0.0; },
        [](double x) { return x > 0.0 ? 1.0 : 0.0; });
  }
  return ks_distance(std::move(draws), [sd](double x) { return normal_cdf(x / sd); });
}

double terminal_price_distance(const PriceDynamics& dynamics, const KernelModel& kernel,
                               std::size_t n, std::size_t samples, std::uint64_t seed,
                               std::size_t workers) {
  if (n < 1 || samples < 1) throw DomainError("price distance needs n >= 1 and samples >= 1");
  if (!(dynamics.s0 > 0.0)) throw DomainError("s0 must be positive");
  const PathSampler sampler(kernel, n, dynamics.T);
  const std::uint64_t stream_seed = mix_seed(seed, n);
  std::vector<double> draws(samples);
  parallel_chunks(samples, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto xi =
          sample_innovations({InnovationLaw::rademacher, stream_seed, k}, sampler.steps());
      const auto S = sample_S(sampler.sample(xi), dynamics.b, dynamics.sigma, dynamics.s0);
      draws[k] = S[S.size() - 1];
    }
  });
  const LogNormalLaw law = terminal_log_price_law(kernel, dynamics);
  if (law.sd == 0.0) {
    // Compared on the log scale, where the atom is exactly law.mean.
    const double atom = law.mean;
    return ks_distance(
        std::move(draws), [atom](double x) { return x > 0.0 && std::log(x) >= atom ? 1.0 : 0.0; },
        [atom](double x) { return x > 0.0 && std::log(x) > atom ? 1.0 : 0.0; });
  }
  return ks_distance(std::move(draws), [law](double x) {
    return x > 0.0 ? normal_cdf((std::log(x) - law.mean) / law.sd) : 0.0;
  });
}

ConvergenceReport terminal_price_ladder(const PriceDynamics& dynamics, const KernelModel& kernel,
                                        std::span<const std::size_t> n_list, std::size_t samples,
                                        std::uint64_t seed, std::size_t workers) {
  require_n_list(n_list);
  ConvergenceReport report;
  report.statistic = "terminal_price";
  const double allowance = 1.358 / std::sqrt(static_cast<double>(samples));
  for (std::size_t n : n_list) {
    report.n_values.push_back(n);
    report.discrepancy.push_back(
        terminal_price_distance(dynamics, kernel, n, samples, seed, workers));
    report.std_error.push_back(0.0);
  }
  report.slope = log_log_slope(report.n_values, report.discrepancy);
  report.pass = true;
  for (std::size_t j = 1; j < report.n_values.size(); ++j) {
    if (report.discrepancy[j] > report.discrepancy[j - 1] + allowance) report.pass = false;
  }
  report.criterion = "KS distance decreasing up to 1.358/sqrt(samples)";
  return report;
}

DecompositionDiagnostics decomposition_diagnostics(const Eigen::VectorXd& path, double sigma) {
  const auto parts = decompose_by_jump_threshold(path, sigma);
  const Eigen::VectorXd qv = quadratic_variation(parts.large);
  return {parts.large.size() > 0 ? parts.large.cwiseAbs().maxCoeff() : 0.0,
          qv.size() > 0 ? qv[qv.size() - 1] : 0.0};
}

double fourth_moment_ratio(const KernelModel& kernel, double T, std::size_t n,
                           const MonteCarloOptions& options) {
  if (options.paths < 1) throw DomainError("fourth moment needs at least one path");
  const PathSampler sampler(kernel, n, T);
  const auto m = static_cast<Eigen::Index>(sampler.steps());
  const auto paths = static_cast<Eigen::Index>(options.paths);
  const std::uint64_t seed = mix_seed(options.seed, n);
  // Column k holds path k.
  Eigen::MatrixXd Y(m + 1, paths);
  parallel_chunks(options.paths, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto xi = sample_innovations({options.law, seed, k}, sampler.steps());
      Y.col(static_cast<Eigen::Index>(k)) = sampler.sample(xi).Y;
    }
  });
  const Eigen::MatrixXd rows = Y.transpose();
  const double dn = static_cast<double>(n);
  std::vector<double> best(static_cast<std::size_t>(m), 0.0);
  parallel_chunks(static_cast<std::size_t>(m), options.workers,
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t a = begin; a < end; ++a) {
                      for (Eigen::Index b = static_cast<Eigen::Index>(a) + 1; b <= m; ++b) {
                        const auto diff =
                            (rows.col(b) - rows.col(static_cast<Eigen::Index>(a))).array();
                        const double moment = diff.square().square().mean();
                        const double gap = static_cast<double>(b - static_cast<Eigen::Index>(a)) / dn;
                        best[a] = std::max(best[a], moment / (gap * gap));
                      }
                    }
                  });
  return best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
}

}  // namespace binmem
