#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace binmem {

/// Parameters (p, q) of the exponential memory kernel together with the
/// horizon T. Valid iff q > 0, p > -q and T > 0.
struct MemoryKernelParams {
  double p = 0.0;
  double q = 1.0;
  double T = 1.0;

  void validate() const;
};

/// Flat kernel l(t, s) = c on the lower triangle; the smallest kernel satisfying
/// a uniform lower bound l >= c, used as a test harness.
struct ConstantKernel {
  double c = 0.0;
  double T = 1.0;

  void validate() const;
};

// Closed forms of the memory kernel. Templated on the scalar so tests can
// evaluate an extended-precision instantiation as an independent reference.

/// Bracket factor g(s) = 1 - 2pq / ((2q + p)^2 e^{2qs} - p^2).
template <typename Scalar>
Scalar memory_weight(Scalar p, Scalar q, Scalar s) {
  using std::exp;
  const Scalar a = Scalar(2) * q + p;
  const Scalar denom = a * a * exp(Scalar(2) * q * s) - p * p;
  return Scalar(1) - Scalar(2) * p * q / denom;
}

/// l(t, s) = p e^{-(p+q)(t-s)} g(s) for s <= t, 0 above the diagonal.
template <typename Scalar>
Scalar memory_l(Scalar p, Scalar q, Scalar t, Scalar s) {
  using std::exp;
  if (s > t) return Scalar(0);
  return p * exp(-(p + q) * (t - s)) * memory_weight(p, q, s);
}

/// z(t, u) = int_u^t l(s, u) ds = g(u) p/(p+q) (1 - e^{-(p+q)(t-u)}).
template <typename Scalar>
Scalar memory_z(Scalar p, Scalar q, Scalar t, Scalar u) {
  using std::expm1;
  if (u >= t) return Scalar(0);
  const Scalar rate = p + q;
  return -memory_weight(p, q, u) * (p / rate) * expm1(-rate * (t - u));
}

enum class KernelKind { memory, constant, general };

/// Bounded Volterra kernel on [0, T]^2 vanishing above the diagonal.
///
/// Immutable value type. Carries the pointwise kernel l(t, s), its time
/// integral z(t, u) (closed form when known, quadrature otherwise), and the
/// supremum bound M, which doubles as the Lipschitz constant C of z in its
/// first argument.
class KernelModel {
 public:
  using Function = std::function<double(double, double)>;

  static KernelModel memory(const MemoryKernelParams& params);
  static KernelModel constant(double c, double T);
  /// Arbitrary bounded kernel; z falls back to adaptive quadrature and the sup
  /// bound to a grid search with `grid_resolution` points per axis.
  static KernelModel general(Function l, double T, std::size_t grid_resolution = 1000);

  KernelKind kind() const noexcept { return kind_; }
  double horizon() const noexcept { return horizon_; }
  /// Memory-kernel parameters, present only for KernelKind::memory.
  const std::optional<MemoryKernelParams>& memory_params() const noexcept { return memory_; }
  /// Level c, present only for KernelKind::constant.
  std::optional<double> constant_level() const noexcept { return constant_; }

  double sup_bound() const noexcept { return sup_bound_; }
  double lipschitz_constant() const noexcept { return sup_bound_; }

  /// Unchecked evaluation of l(t, s) (0 for s > t).
  double l(double t, double s) const;
  bool has_closed_form_z() const noexcept { return kind_ != KernelKind::general; }
  /// Unchecked closed-form z; only valid when has_closed_form_z().
  double closed_form_z(double t, double u) const;

  std::string describe() const;

 private:
  KernelModel() = default;

  KernelKind kind_ = KernelKind::general;
  double horizon_ = 0.0;
  std::optional<MemoryKernelParams> memory_;
  std::optional<double> constant_;
  std::shared_ptr<const Function> general_;
  double sup_bound_ = 0.0;
};

inline constexpr std::size_t kDefaultSupGrid = 10'000;
inline constexpr double kQuadTolerance = 1e-12;

double eval_l(const MemoryKernelParams& params, double t, double s);
double eval_l(const KernelModel& kernel, double t, double s);
double eval_z(const KernelModel& kernel, double t, double u);
double eval_y(const KernelModel& kernel, double t, double u);

/// Independent quadrature route for z(t, u); requires u <= t.
double quad_z(const KernelModel& kernel, double t, double u, double tol);

/// Upper bound for sup |l(t, s)| over 0 <= s <= t <= T that dominates every
/// sample of a `grid_resolution`-point grid.
double sup_bound(const KernelModel& kernel, std::size_t grid_resolution = kDefaultSupGrid);

/// Throws DomainError unless 0 <= x <= T (with a few ulps of slack for lattice
/// points i/N that round past T).
void check_time(double x, double T, const char* what);

}  // namespace binmem
