#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "binmem/kernel.hpp"
#include "binmem/processes.hpp"

namespace binmem {

/// Finite-n discrepancies of one statistic along an n ladder.
struct ConvergenceReport {
  std::string statistic;
  std::vector<std::size_t> n_values;
  std::vector<double> discrepancy;
  std::vector<double> std_error;  ///< zero for deterministic statistics
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
  std::string criterion;
};

// Limit law of the driving process and the price.

/// Cov(Y_s, Y_t) = int_0^{s ^ t} y(s, u) y(t, u) du by adaptive quadrature.
double limit_covariance(const KernelModel& kernel, double s, double t, double tol = 1e-12);
double limit_variance(const KernelModel& kernel, double t, double tol = 1e-12);
Eigen::MatrixXd limit_covariance_matrix(const KernelModel& kernel, std::span<const double> times);

/// (1/n) sum_{i <= floor(n (s ^ t))} y(floor(ns)/n, i/n) y(floor(nt)/n, i/n).
double discrete_covariance(const KernelModel& kernel, double s, double t, std::size_t n);
/// Gram matrix of the lattice coefficient vectors; positive semidefinite.
Eigen::MatrixXd discrete_covariance_matrix(const KernelModel& kernel, std::span<const double> times,
                                           std::size_t n);

/// Constant-drift price dynamics dS = S (b dt + sigma dY).
struct PriceDynamics {
  double T = 1.0;
  double b = 0.0;
  double sigma = 0.2;
  double s0 = 1.0;
};

/// log S_T ~ Normal(mean, sd^2) with mean = log s0 + b T - sigma^2 T / 2 and
/// sd^2 = sigma^2 Var(Y_T).
struct LogNormalLaw {
  double mean = 0.0;
  double sd = 0.0;
};

LogNormalLaw terminal_log_price_law(const KernelModel& kernel, const PriceDynamics& dynamics);

/// Least-squares slope of log(value) against log(n) over positive values.
double log_log_slope(std::span<const std::size_t> n_values, std::span<const double> values);

/// One-sample Kolmogorov-Smirnov statistic sup |F_emp - F|. `cdf_left` is the
/// left limit F(x-) and only differs from `cdf` for limits with atoms.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf,
                   const std::function<double(double)>& cdf_left = {});

struct SlopeBand {
  double low = -1.2;
  double high = -0.8;
};

/// Deterministic |discrete - limit| covariance discrepancy, maximised over all
/// pairs of `times`, for every n; passes when the log-log slope is in `band`.
ConvergenceReport variance_discrepancy(const KernelModel& kernel, std::span<const double> times,
                                       std::span<const std::size_t> n_list, SlopeBand band = {});

struct MonteCarloOptions {
  std::size_t paths = 200;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  InnovationLaw law = InnovationLaw::rademacher;
};

/// sup over t in [0, T] of |[X]_t - t| for a lattice path with step 1/n,
/// treating [X] as the right-continuous step function.
double qv_sup_discrepancy(const Eigen::VectorXd& path, std::size_t n, double T);

/// E[sup_t |[Y^(n)]_t - t|] per n; passes when the estimates do not increase
/// beyond overlapping 95% intervals.
ConvergenceReport qv_convergence(const KernelModel& kernel, double T,
                                 std::span<const std::size_t> n_list,
                                 const MonteCarloOptions& options);

/// n E[sup_t |dY_t^(n)|^4] per n; passes when the value at the largest n does
/// not exceed the one at the smallest n beyond overlapping 95% intervals.
ConvergenceReport jump_convergence(const KernelModel& kernel, double T,
                                   std::span<const std::size_t> n_list,
                                   const MonteCarloOptions& options);

/// KS distance between `samples` draws of Y_t^(n) and Normal(0, Var(Y_t)).
double fdd_distance(const KernelModel& kernel, double t, std::size_t n, std::size_t samples,
                    std::uint64_t seed, std::size_t workers = 1);

/// KS distance between `samples` draws of S_T^(n) and its lognormal limit
/// (the point mass at s0 e^{bT} when sigma = 0).
double terminal_price_distance(const PriceDynamics& dynamics, const KernelModel& kernel,
                               std::size_t n, std::size_t samples, std::uint64_t seed,
                               std::size_t workers = 1);

/// terminal_price_distance along `n_list`; passes when each distance is at
/// most the previous one plus the 95% KS critical value 1.358/sqrt(samples).
ConvergenceReport terminal_price_ladder(const PriceDynamics& dynamics, const KernelModel& kernel,
                                        std::span<const std::size_t> n_list, std::size_t samples,
                                        std::uint64_t seed, std::size_t workers = 1);

struct DecompositionDiagnostics {
  double sup_large = 0.0;  ///< sup_k |Y2_k|
  double qv_large = 0.0;   ///< [Y2]_T
};

DecompositionDiagnostics decomposition_diagnostics(const Eigen::VectorXd& path, double sigma);

/// max over lattice pairs s < t of the Monte Carlo estimate of
/// E|Y_t - Y_s|^4 / (t - s)^2.
double fourth_moment_ratio(const KernelModel& kernel, double T, std::size_t n,
                           const MonteCarloOptions& options);

}  // namespace binmem
