#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>

#include "binmem/kernel.hpp"

namespace binmem {

enum class InnovationLaw { rademacher, standard_normal };

/// Law and stream coordinates of an i.i.d. innovation sequence. Both laws have
/// mean 0, variance 1 and a finite fourth moment.
struct InnovationSpec {
  InnovationLaw law = InnovationLaw::rademacher;
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;
};

/// m = floor(n T), tolerant to decimal inputs whose product lands one ulp
/// below an integer (0.29 * 100).
std::size_t step_count(std::size_t n, double T);

struct LatticeConfig {
  std::size_t n = 1;
  double T = 1.0;
  std::size_t m = 1;

  static LatticeConfig make(std::size_t n, double T);
  double time(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(n); }
};

/// Weights y(n/N, i/N) of the discrete process and their first differences in
/// the time argument. Rows are 1-based as in the lattice: y(n, i) for
/// 1 <= i <= n <= m, delta(n, i) for 1 <= i < n. Packed lower-triangular
/// storage, ~8 m^2 bytes in total.
class CoefficientTable {
 public:
  CoefficientTable(const KernelModel& kernel, std::size_t N, double T);

  std::size_t N() const noexcept { return lattice_.n; }
  double T() const noexcept { return lattice_.T; }
  std::size_t steps() const noexcept { return lattice_.m; }
  const LatticeConfig& lattice() const noexcept { return lattice_; }

  double y(std::size_t n, std::size_t i) const { return y_[y_offset(n) + i - 1]; }
  double delta(std::size_t n, std::size_t i) const { return delta_[delta_offset(n) + i - 1]; }
  /// sum_{i < n} |delta(n, i)|.
  double row_abs_sum(std::size_t n) const { return row_abs_sum_[n]; }

  /// y(n, 1..n) as a contiguous span (index i-1).
  std::span<const double> y_row(std::size_t n) const { return {y_.data() + y_offset(n), n}; }
  /// delta(n, 1..n-1) as a contiguous span (index i-1).
  std::span<const double> delta_row(std::size_t n) const {
    return {delta_.data() + delta_offset(n), n - 1};
  }

 private:
  static std::size_t y_offset(std::size_t n) { return n * (n - 1) / 2; }
  static std::size_t delta_offset(std::size_t n) { return (n - 1) * (n - 2) / 2; }

  LatticeConfig lattice_;
  std::vector<double> y_;
  std::vector<double> delta_;
  std::vector<double> row_abs_sum_;
};

CoefficientTable build_coefficients(const KernelModel& kernel, std::size_t N, double T);

/// Lattice path. xi has m entries (xi[k-1] is the k-th innovation); W, Y and S
/// have m + 1 entries indexed by grid point. S stays empty until a price is
/// attached.
struct DiscretePath {
  std::size_t N = 1;
  double T = 1.0;
  Eigen::VectorXd xi;
  Eigen::VectorXd W;
  Eigen::VectorXd Y;
  Eigen::VectorXd S;

  std::size_t steps() const { return static_cast<std::size_t>(xi.size()); }
  double time(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(N); }
};

Eigen::VectorXd sample_innovations(const InnovationSpec& spec, std::size_t m);

/// W[k] = N^{-1/2} sum_{i <= k} xi_i.
Eigen::VectorXd wiener_path(std::size_t N, const Eigen::VectorXd& xi);

/// Reference engine: Y[k] = N^{-1/2} sum_{i <= k} y(k, i) xi_i, re-summed at
/// every k. O(m^2).
DiscretePath sample_Y_direct(const CoefficientTable& table, const Eigen::VectorXd& xi);

struct EngineCounters {
  std::size_t recursion_updates = 0;
};

/// O(m) engine for the memory kernel. The memory term of each increment is
/// carried by the exponentially weighted sum
///   M_1 = 0,  M_{n+1} = e^{-(p+q)/N} (M_n + g(n/N) xi_n),
/// which gives sum_{i<n} delta(n, i) xi_i = -(p/(p+q)) (e^{(p+q)/N} - 1) M_n.
DiscretePath sample_Y_fast(const MemoryKernelParams& params, std::size_t N, double T,
                           const Eigen::VectorXd& xi, EngineCounters* counters = nullptr);
/// Rejects kernels other than the memory kernel with DomainError.
DiscretePath sample_Y_fast(const KernelModel& kernel, std::size_t N, double T,
                           const Eigen::VectorXd& xi, EngineCounters* counters = nullptr);

using DriftFunction = std::function<double(double)>;

/// S[k] = s0 prod_{j <= k} (1 + sigma dY_j + b(j/N)/N). Throws
/// NumericalRegimeError at the first non-positive factor.
Eigen::VectorXd sample_S(const DiscretePath& path, const DriftFunction& drift, double sigma,
                         double s0);
Eigen::VectorXd sample_S(const DiscretePath& path, double drift, double sigma, double s0);

enum class EngineChoice { automatic, fast, direct };

/// Draws Y paths with the fast engine for memory kernels and the coefficient
/// table otherwise. Shareable across threads once constructed.
class PathSampler {
 public:
  PathSampler(const KernelModel& kernel, std::size_t N, double T,
              EngineChoice choice = EngineChoice::automatic);

  std::size_t N() const noexcept { return N_; }
  double T() const noexcept { return T_; }
  std::size_t steps() const noexcept { return m_; }
  bool uses_fast_engine() const noexcept { return !table_; }
  const CoefficientTable* table() const noexcept { return table_.get(); }

  DiscretePath sample(const Eigen::VectorXd& xi) const;

 private:
  KernelModel kernel_;
  std::size_t N_;
  double T_;
  std::size_t m_;
  std::shared_ptr<const CoefficientTable> table_;
};

// Path functionals.

/// [X]_k = sum_{j <= k} (X_j - X_{j-1})^2, with [X]_0 = 0.
Eigen::VectorXd quadratic_variation(const Eigen::VectorXd& path);
/// max_k |X_k - X_{k-1}|; 0 for a single-point path.
double sup_jump(const Eigen::VectorXd& path);

/// Split of a path into the sum of its increments below 1/(2 sigma) in
/// absolute value (`small`) and the rest (`large`). small + large reproduces
/// the path up to rounding of the large part; exactly when no increment is
/// large.
struct JumpDecomposition {
  Eigen::VectorXd small;
  Eigen::VectorXd large;
};

JumpDecomposition decompose_by_jump_threshold(const Eigen::VectorXd& path, double sigma);

}  // namespace binmem
