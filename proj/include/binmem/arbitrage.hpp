#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "binmem/market.hpp"

namespace binmem {

enum class EstimateMode { exact, monte_carlo };

/// Estimate of the arbitrage probability P_N, the probability that some step
/// of a Rademacher path violates d_n < rho < u_n.
struct ArbitrageReport {
  EstimateMode mode = EstimateMode::exact;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t trials = 0;
  /// First violating step -> probability mass.
  std::map<std::size_t, double> first_violation_histogram;
  /// First violating prefix xi_1..xi_{n-1} encountered (DFS order or trial
  /// order), with its step n.
  std::optional<Eigen::VectorXd> example_prefix;
  std::optional<std::size_t> example_step;
};

inline constexpr std::size_t kDefaultEnumerationBudget = 26;

/// Smallest n in 1..m with |mu_n(xi) - rho| >= sigma/sqrt(N); only
/// xi_1..xi_{m-1} are read.
std::optional<std::size_t> violation_step(const CoefficientTable& table, const MarketParams& params,
                                          const Eigen::Ref<const Eigen::VectorXd>& xi);

/// Exact P_N by depth-first traversal of the prefix tree, pruning each subtree
/// at its first violation and crediting it 2^{-(n-1)}. BudgetExceededError
/// when m exceeds `max_steps_budget`.
ArbitrageReport exact_PN(const CoefficientTable& table, const MarketParams& params,
                         std::size_t max_steps_budget = kDefaultEnumerationBudget);

struct McOptions {
  std::size_t trials = 10'000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  double confidence_z = 1.959963984540054;  ///< 95% two-sided
};

/// Monte Carlo P_N. Trial k draws its innovations from stream k of `seed`, so
/// the estimate is identical for any worker count.
ArbitrageReport mc_PN(const CoefficientTable& table, const MarketParams& params,
                      const McOptions& options);
/// O(m)-per-path variant for the memory kernel.
ArbitrageReport mc_PN(const MemoryKernelParams& kernel, const MarketParams& params,
                      const McOptions& options);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for `successes` out of `trials`.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z);

/// Smallest N such that every N' >= N satisfies
///   N'^{beta/2} C sqrt(T) < sqrt(N') - |(r - b)/sigma|  and  N'^{beta/2} > 4,
/// with beta = (alpha + 1)/2.
std::size_t theorem42_Nalpha(double alpha, const MarketParams& params, double lipschitz_C);

struct DecayPoint {
  double N = 0.0;
  double p_hat = 0.0;
};

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  Eigen::VectorXd residuals;
};

/// Every estimate in the sweep is zero: the decay is already complete on the
/// tested range and no exponent can be fitted.
class NoDecayDataError : public std::runtime_error {
 public:
  NoDecayDataError() : std::runtime_error("identically zero on tested range") {}
};

/// Least-squares fit of log p_hat against log N over the points with
/// p_hat > 0 (at least three required).
DecayFit decay_fit(std::span<const DecayPoint> points);

enum class Position { long_stock, short_stock };

/// One-step arbitrage at step n after `prefix`: one money unit is put into
/// (or taken out of) the stock at time n-1 and financed through the money
/// market. Payoffs are per unit, net of financing.
struct StrategyWitness {
  Eigen::VectorXd prefix;
  std::size_t step = 1;
  Position direction = Position::long_stock;
  double stake = 1.0;
  double payoff_up = 0.0;
  double payoff_down = 0.0;
};

/// Long stock when d_n >= rho, short stock when u_n <= rho. DomainError when
/// the step is arbitrage-free.
StrategyWitness extract_strategy(const CoefficientTable& table, const MarketParams& params,
                                 const Eigen::Ref<const Eigen::VectorXd>& prefix, std::size_t n);

/// Re-simulates both continuations with evolve_market and checks that the
/// recorded payoffs are reproduced, both are non-negative and one is positive.
bool verify_strategy(const StrategyWitness& witness, const CoefficientTable& table,
                     const MarketParams& params);

}  // namespace binmem
