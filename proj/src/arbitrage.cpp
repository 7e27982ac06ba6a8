#include "binmem/arbitrage.hpp"

#include <cmath>
#include <string>

#include "binmem/errors.hpp"
#include "binmem/parallel.hpp"
#include "binmem/rng.hpp"

namespace binmem {

namespace {

double prefix_drift(const CoefficientTable& table, std::size_t n, double h,
                    const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (n == 1) return 0.0;
  const auto row = table.delta_row(n);
  const Eigen::Map<const Eigen::VectorXd> coeffs(row.data(), static_cast<Eigen::Index>(n - 1));
  return h * coeffs.dot(xi.head(static_cast<Eigen::Index>(n - 1)));
}

struct PrefixSearch {
  const CoefficientTable& table;
  std::size_t m;
  double h;
  double rho;
  Eigen::VectorXd prefix;
  ArbitrageReport& report;

  void visit(std::size_t depth) {
    const std::size_t n = depth + 1;
    if (n > m) return;
    const double mu = prefix_drift(table, n, h, prefix);
    if (violates_no_arbitrage(mu, rho, h)) {
      const double mass = std::ldexp(1.0, -static_cast<int>(depth));
      report.p_hat += mass;
      report.first_violation_histogram[n] += mass;
      if (!report.example_step) {
        report.example_step = n;
        report.example_prefix = prefix.head(static_cast<Eigen::Index>(depth)).eval();
      }
      return;
    }
    if (n == m) return;
    for (const double sign : {-1.0, 1.0}) {
      prefix[static_cast<Eigen::Index>(depth)] = sign;
      visit(depth + 1);
    }
  }
};

// Draws the i-th Rademacher innovation of a stream exactly as
// sample_innovations does, so per-trial paths agree across both MC variants.
double rademacher(Xoshiro256StarStar& gen) { return (gen() >> 63) ? 1.0 : -1.0; }

template <typename FirstViolation>
ArbitrageReport tally(std::size_t m, const McOptions& options,
                      FirstViolation&& first_violation) {
  if (options.trials < 1) throw DomainError("mc_PN needs at least one trial");
  std::vector<std::uint32_t> first(options.trials, 0);
  parallel_chunks(options.trials, options.workers, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd xi(static_cast<Eigen::Index>(m));
    for (std::size_t k = begin; k < end; ++k) {
      auto gen = make_stream(options.seed, k);
      for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = rademacher(gen);
      first[k] = static_cast<std::uint32_t>(first_violation(xi));
    }
  });

  ArbitrageReport report;
  report.mode = EstimateMode::monte_carlo;
  report.trials = options.trials;
  std::map<std::size_t, std::size_t> counts;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < first.size(); ++k) {
    if (first[k] == 0) continue;
    ++hits;
    ++counts[first[k]];
    if (!report.example_step) {
      auto gen = make_stream(options.seed, k);
      Eigen::VectorXd prefix(static_cast<Eigen::Index>(first[k] - 1));
      for (Eigen::Index i = 0; i < prefix.size(); ++i) prefix[i] = rademacher(gen);
      report.example_step = first[k];
      report.example_prefix = std::move(prefix);
    }
  }
  const double n = static_cast<double>(options.trials);
  report.p_hat = static_cast<double>(hits) / n;
  for (const auto& [step, count] : counts) {
    report.first_violation_histogram[step] = static_cast<double>(count) / n;
  }
  const Interval ci = wilson_interval(hits, options.trials, options.confidence_z);
  report.ci_low = ci.low;
  report.ci_high = ci.high;
  return report;
}

}  // namespace

std::optional<std::size_t> violation_step(const CoefficientTable& table, const MarketParams& params,
                                          const Eigen::Ref<const Eigen::VectorXd>& xi) {
  check_compatible(table, params);
  const std::size_t m = params.steps();
  if (static_cast<std::size_t>(xi.size()) + 1 < m) {
    throw DomainError("violation_step needs at least m-1 = " + std::to_string(m - 1) +
                      " innovations");
  }
  const double h = params.half_spread();
  const double rho = params.rho();
  for (std::size_t n = 1; n <= m; ++n) {
    if (violates_no_arbitrage(prefix_drift(table, n, h, xi), rho, h)) return n;
  }
  return std::nullopt;
}

ArbitrageReport exact_PN(const CoefficientTable& table, const MarketParams& params,
                         std::size_t max_steps_budget) {
  params.validate();
  check_compatible(table, params);
  const std::size_t m = params.steps();
  if (m > max_steps_budget) {
    throw BudgetExceededError("exact enumeration over " + std::to_string(m) +
                              " steps exceeds the budget of " + std::to_string(max_steps_budget) +
                              "; use the Monte Carlo estimator");
  }
  ArbitrageReport report;
  report.mode = EstimateMode::exact;
  PrefixSearch search{table, m, params.half_spread(), params.rho(),
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)), report};
  search.visit(0);
  report.ci_low = report.ci_high = report.p_hat;
  return report;
}

ArbitrageReport mc_PN(const CoefficientTable& table, const MarketParams& params,
                      const McOptions& options) {
  params.validate();
  check_compatible(table, params);
  const std::size_t m = params.steps();
  const double h = params.half_spread();
  const double rho = params.rho();
  return tally(m, options, [&](const Eigen::VectorXd& xi) -> std::size_t {
    for (std::size_t n = 1; n <= m; ++n) {
      if (violates_no_arbitrage(prefix_drift(table, n, h, xi), rho, h)) return n;
    }
    return 0;
  });
}

ArbitrageReport mc_PN(const MemoryKernelParams& kernel, const MarketParams& params,
                      const McOptions& options) {
  kernel.validate();
  params.validate();
  if (params.T > kernel.T * (1.0 + 1e-12)) throw DomainError("market horizon exceeds kernel horizon");
  const std::size_t m = params.steps();
  const double dN = static_cast<double>(params.N);
  const double h = params.half_spread();
  const double rho = params.rho();
  const double rate = kernel.p + kernel.q;
  const double decay = std::exp(-rate / dN);
  const double coupling = -(kernel.p / rate) * std::expm1(rate / dN);
  std::vector<double> weights(m + 1);
  for (std::size_t n = 1; n <= m; ++n) {
    weights[n] = memory_weight(kernel.p, kernel.q, static_cast<double>(n) / dN);
  }
  return tally(m, options, [&](const Eigen::VectorXd& xi) -> std::size_t {
    double memory = 0.0;
    for (std::size_t n = 1; n <= m; ++n) {
      if (violates_no_arbitrage(h * coupling * memory, rho, h)) return n;
      memory = decay * (memory + weights[n] * xi[static_cast<Eigen::Index>(n - 1)]);
    }
    return 0;
  });
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("Wilson interval needs trials > 0");
  if (successes > trials) throw DomainError("more successes than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.low = 0.0;
  if (successes == trials) ci.high = 1.0;
  return ci;
}

std::size_t theorem42_Nalpha(double alpha, const MarketParams& params, double lipschitz_C) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (!(params.sigma > 0.0)) throw DomainError("sigma must be positive");
  const double half_beta = 0.5 * (alpha + 1.0) / 2.0;
  const double gap = std::abs((params.r - params.b) / params.sigma);
  const double spread = lipschitz_C * std::sqrt(params.T);
  // Both conditions are monotone in N: x - spread x^beta - gap is convex in
  // x = sqrt(N) and non-positive at 0.
  const auto holds = [&](std::size_t N) {
    const double dN = static_cast<double>(N);
    const double scaled = std::pow(dN, half_beta);
    return strictly_less(scaled * spread, std::sqrt(dN) - gap) && strictly_less(4.0, scaled);
  };
  std::size_t hi = 1;
  while (!holds(hi)) hi *= 2;
  std::size_t lo = hi / 2 + 1;
  if (hi == 1) return 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (holds(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return hi;
}

DecayFit decay_fit(std::span<const DecayPoint> points) {
  std::vector<DecayPoint> usable;
  bool any_positive = false;
  for (const auto& pt : points) {
    if (!(pt.N > 0.0) || !(pt.p_hat >= 0.0)) throw DomainError("decay point needs N > 0, p_hat >= 0");
    if (pt.p_hat > 0.0) {
      usable.push_back(pt);
      any_positive = true;
    }
  }
  if (!points.empty() && !any_positive) throw NoDecayDataError();
  if (usable.size() < 3) throw DomainError("decay fit needs at least 3 points with p_hat > 0");

  const auto n = static_cast<Eigen::Index>(usable.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd target(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    design(k, 0) = std::log(usable[static_cast<std::size_t>(k)].N);
    design(k, 1) = 1.0;
    target[k] = std::log(usable[static_cast<std::size_t>(k)].p_hat);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  return {coef[0], coef[1], target - design * coef};
}

StrategyWitness extract_strategy(const CoefficientTable& table, const MarketParams& params,
                                 const Eigen::Ref<const Eigen::VectorXd>& prefix, std::size_t n) {
  if (static_cast<std::size_t>(prefix.size()) + 1 != n) {
    throw DomainError("prefix length must be n - 1 = " + std::to_string(n - 1));
  }
  const StepBounds bounds = step_bounds(table, params, prefix);
  const double rho = params.rho();
  if (!violates_no_arbitrage(bounds.mu, rho, bounds.half_spread)) {
    throw DomainError("step " + std::to_string(n) + " admits no arbitrage for this prefix");
  }
  StrategyWitness w;
  w.prefix = prefix;
  w.step = n;
  // Net one-step return of the stock over the money market: b/N + X - r/N.
  const double excess_up = (params.drift_step() + bounds.u) - params.rate_step();
  const double excess_down = (params.drift_step() + bounds.d) - params.rate_step();
  if (bounds.mu > rho) {
    w.direction = Position::long_stock;
    w.payoff_up = excess_up;
    w.payoff_down = excess_down;
  } else {
    w.direction = Position::short_stock;
    w.payoff_up = -excess_up;
    w.payoff_down = -excess_down;
  }
  return w;
}

bool verify_strategy(const StrategyWitness& witness, const CoefficientTable& table,
                     const MarketParams& params) {
  const std::size_t n = witness.step;
  if (n < 1 || n > params.steps()) return false;
  if (static_cast<std::size_t>(witness.prefix.size()) + 1 != n) return false;
  // Ratios of evolved prices carry O(eps) rounding relative to the unit stake.
  constexpr double tol = 1e-12;
  double payoff[2];
  const double signs[2] = {1.0, -1.0};
  try {
    for (int branch = 0; branch < 2; ++branch) {
      Eigen::VectorXd xi(static_cast<Eigen::Index>(n));
      xi.head(static_cast<Eigen::Index>(n - 1)) = witness.prefix;
      xi[static_cast<Eigen::Index>(n - 1)] = signs[branch];
      const MarketEvolution ev = evolve_market(table, params, xi);
      const auto last = static_cast<Eigen::Index>(n);
      const double excess = ev.S[last] / ev.S[last - 1] - ev.B[last] / ev.B[last - 1];
      payoff[branch] = witness.direction == Position::long_stock ? excess : -excess;
    }
  } catch (const NumericalRegimeError&) {
    return false;
  }
  const double scale = witness.stake;
  if (std::abs(payoff[0] - witness.payoff_up * scale) > tol) return false;
  if (std::abs(payoff[1] - witness.payoff_down * scale) > tol) return false;
  if (payoff[0] < -tol || payoff[1] < -tol) return false;
  return std::max(payoff[0], payoff[1]) > tol;
}

}  // namespace binmem
