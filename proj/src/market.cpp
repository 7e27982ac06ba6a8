#include "binmem/market.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "binmem/errors.hpp"

namespace binmem {

namespace {

double memory_drift(const CoefficientTable& table, std::size_t n, double half_spread,
                    const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (n == 1) return 0.0;
  const auto row = table.delta_row(n);
  const Eigen::Map<const Eigen::VectorXd> coeffs(row.data(), static_cast<Eigen::Index>(n - 1));
  return half_spread * coeffs.dot(xi.head(static_cast<Eigen::Index>(n - 1)));
}

}  // namespace

void MarketParams::validate() const {
  if (N < 1) throw DomainError("market needs N >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("market horizon T must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw DomainError("s0 must be positive");
  if (!std::isfinite(r) || !std::isfinite(b)) throw DomainError("r and b must be finite");
  if (steps() < 1) throw DomainError("market has no periods: floor(N T) = 0");
}

bool violates_no_arbitrage(double mu, double rho, double half_spread) {
  const double slack = kBoundaryRelTol * (half_spread + std::abs(mu) + std::abs(rho));
  return std::abs(mu - rho) >= half_spread - slack;
}

bool strictly_less(double lhs, double rhs) {
  return lhs < rhs - kBoundaryRelTol * (std::abs(lhs) + std::abs(rhs));
}

void check_compatible(const CoefficientTable& table, const MarketParams& params) {
  if (table.N() != params.N || table.steps() != params.steps()) {
    throw DomainError("coefficient table (N=" + std::to_string(table.N()) +
                      ") does not match market (N=" + std::to_string(params.N) + ")");
  }
}

StepBounds step_bounds(const CoefficientTable& table, const MarketParams& params,
                       const Eigen::Ref<const Eigen::VectorXd>& prefix) {
  check_compatible(table, params);
  const std::size_t n = static_cast<std::size_t>(prefix.size()) + 1;
  if (n > params.steps()) {
    throw DomainError("prefix length " + std::to_string(prefix.size()) +
                      " leaves no step within the horizon");
  }
  const double h = params.half_spread();
  const double mu = memory_drift(table, n, h, prefix);
  return {n, mu, mu - h, mu + h, h};
}

NoArbCertificate is_arbitrage_free_exact(const CoefficientTable& table,
                                         const MarketParams& params) {
  params.validate();
  check_compatible(table, params);
  const std::size_t m = params.steps();
  const double h = params.half_spread();
  const double rho = params.rho();
  NoArbCertificate cert;
  cert.margins.resize(m);
  cert.min_margin = std::numeric_limits<double>::infinity();
  bool free = true;
  for (std::size_t n = 1; n <= m; ++n) {
    const double worst_drift = h * table.row_abs_sum(n);
    const double margin = h - (std::abs(rho) + worst_drift);
    cert.margins[n - 1] = margin;
    if (margin < cert.min_margin) {
      cert.min_margin = margin;
      cert.argmin_step = n;
    }
    // The extremal prefix puts |mu| = worst_drift on the side opposite rho.
    if (violates_no_arbitrage(rho >= 0.0 ? -worst_drift : worst_drift, rho, h)) free = false;
  }
  cert.arbitrage_free = free;
  return cert;
}

std::size_t theorem41_N0(const MarketParams& params, double lipschitz_C) {
  if (!(lipschitz_C >= 0.0)) throw DomainError("Lipschitz constant must be non-negative");
  const double TC = params.T * lipschitz_C;
  if (!(TC < 1.0)) {
    throw PreconditionError("sufficient no-arbitrage condition needs T < 1/C (T C = " +
                            std::to_string(TC) + ")");
  }
  const double sigma = params.sigma;
  const auto positive_factor = [&](std::size_t N) {
    const double dN = static_cast<double>(N);
    return strictly_less(-1.0, params.b / dN - sigma / std::sqrt(dN) * (TC + 1.0));
  };
  const auto rate_gap = [&](std::size_t N) {
    return strictly_less(std::abs(params.r - params.b),
                         std::sqrt(static_cast<double>(N)) * (1.0 - TC) * sigma);
  };
  // Both candidates come from the continuous threshold; integer neighbours are
  // then re-checked directly so rounding cannot shift the answer.
  const auto settle = [](std::size_t candidate, const auto& holds) {
    candidate = std::max<std::size_t>(candidate, 1);
    while (!holds(candidate)) ++candidate;
    while (candidate > 1 && holds(candidate - 1)) --candidate;
    return candidate;
  };

  // b x^2 - k x + 1 > 0 in x = N^{-1/2} holds below its smallest positive root.
  const double k = sigma * (TC + 1.0);
  const double disc = k * k - 4.0 * params.b;
  std::size_t n_factor = 1;
  if (disc >= 0.0) {
    const double root = 2.0 / (k + std::sqrt(disc));
    n_factor = static_cast<std::size_t>(std::floor(1.0 / (root * root))) + 1;
  }
  n_factor = settle(n_factor, positive_factor);

  const double ratio = std::abs(params.r - params.b) / ((1.0 - TC) * sigma);
  const std::size_t n_gap = settle(static_cast<std::size_t>(std::floor(ratio * ratio)) + 1, rate_gap);
  return std::max(n_factor, n_gap);
}

MarketEvolution evolve_market(const CoefficientTable& table, const MarketParams& params,
                              const Eigen::Ref<const Eigen::VectorXd>& xi) {
  params.validate();
  check_compatible(table, params);
  const Eigen::Index steps =
      std::min<Eigen::Index>(xi.size(), static_cast<Eigen::Index>(params.steps()));
  const double h = params.half_spread();
  const double growth = 1.0 + params.rate_step();
  MarketEvolution out{Eigen::VectorXd(steps + 1), Eigen::VectorXd(steps + 1)};
  out.B[0] = 1.0;
  out.S[0] = params.s0;
  for (Eigen::Index n = 1; n <= steps; ++n) {
    const double mu = memory_drift(table, static_cast<std::size_t>(n), h, xi);
    const double move = xi[n - 1] > 0.0 ? mu + h : mu - h;
    const double factor = 1.0 + params.drift_step() + move;
    if (!(factor > 0.0)) throw NumericalRegimeError(static_cast<std::size_t>(n), factor);
    out.B[n] = out.B[n - 1] * growth;
    out.S[n] = out.S[n - 1] * factor;
  }
  return out;
}

double risk_neutral_step_prob(const StepBounds& bounds, const MarketParams& params) {
  const double rho = params.rho();
  if (violates_no_arbitrage(bounds.mu, rho, bounds.half_spread)) {
    throw DomainError("step " + std::to_string(bounds.n) + " admits arbitrage: no risk-neutral weight");
  }
  return (rho - bounds.d) / (bounds.u - bounds.d);
}

}  // namespace binmem
