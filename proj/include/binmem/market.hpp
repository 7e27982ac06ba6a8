#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "binmem/processes.hpp"

namespace binmem {

/// Parameters of the floor(N T)-period binary market.
struct MarketParams {
  std::size_t N = 1;
  double T = 1.0;
  double r = 0.0;      ///< money-market rate
  double b = 0.0;      ///< stock drift
  double sigma = 1.0;  ///< volatility
  double s0 = 1.0;     ///< initial price

  void validate() const;

  std::size_t steps() const { return step_count(N, T); }
  double rate_step() const { return r / static_cast<double>(N); }
  double drift_step() const { return b / static_cast<double>(N); }
  /// rho = (r - b) / N.
  double rho() const { return (r - b) / static_cast<double>(N); }
  /// sigma / sqrt(N): half the distance between the two moves.
  double half_spread() const { return sigma / std::sqrt(static_cast<double>(N)); }
};

/// The two values d < u of X_n given xi_1..xi_{n-1}.
struct StepBounds {
  std::size_t n = 1;
  double mu = 0.0;  ///< memory drift
  double d = 0.0;
  double u = 0.0;
  double half_spread = 0.0;
};

/// Relative slack used when classifying boundary equality. Lattice sums such
/// as c (n-1) / N = 1 only hold up to rounding; anything within this band of
/// the boundary is treated as equality, and equality counts as a violation.
inline constexpr double kBoundaryRelTol = 1e-12;

/// True when d_n < rho < u_n fails, i.e. |mu - rho| >= sigma/sqrt(N).
bool violates_no_arbitrage(double mu, double rho, double half_spread);

/// True when lhs < rhs holds with margin beyond rounding noise.
bool strictly_less(double lhs, double rhs);

StepBounds step_bounds(const CoefficientTable& table, const MarketParams& params,
                       const Eigen::Ref<const Eigen::VectorXd>& prefix);

struct NoArbCertificate {
  bool arbitrage_free = false;
  /// margin[n-1] = sigma/sqrt(N) - (|rho| + sigma/sqrt(N) row_abs_sum(n)).
  std::vector<double> margins;
  double min_margin = 0.0;
  std::size_t argmin_step = 1;
  std::optional<std::size_t> N0;
};

/// Exact certificate. The memory drift ranges symmetrically over
/// +/- sigma/sqrt(N) row_abs_sum(n) as the prefix signs vary, so the worst
/// case over all 2^{n-1} prefixes of |mu_n - rho| is |rho| + sigma/sqrt(N)
/// row_abs_sum(n).
NoArbCertificate is_arbitrage_free_exact(const CoefficientTable& table, const MarketParams& params);

/// Smallest N0 such that every N >= N0 satisfies
///   b/N - sigma/sqrt(N) (T C + 1) > -1   and   |r - b| < sqrt(N) (1 - T C) sigma.
/// Requires T < 1/C, otherwise PreconditionError.
std::size_t theorem41_N0(const MarketParams& params, double lipschitz_C);

struct MarketEvolution {
  Eigen::VectorXd B;
  Eigen::VectorXd S;
};

/// B_n = (1 + r/N)^n, S_n = S_{n-1} (1 + b/N + X_n) with X_n = u_n or d_n as
/// xi_n = +1 or -1. Evolves min(len(xi), m) steps.
MarketEvolution evolve_market(const CoefficientTable& table, const MarketParams& params,
                              const Eigen::Ref<const Eigen::VectorXd>& xi);

/// One-step weight q = (rho - d)/(u - d) of the up move. Throws DomainError
/// when the step admits arbitrage.
double risk_neutral_step_prob(const StepBounds& bounds, const MarketParams& params);

/// Throws DomainError unless table and params describe the same lattice.
void check_compatible(const CoefficientTable& table, const MarketParams& params);

}  // namespace binmem
