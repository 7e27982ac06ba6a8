#include "binmem/kernel.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <sstream>

#include "binmem/errors.hpp"
#include "binmem/quadrature.hpp"

namespace binmem {

namespace {

double grid_point(std::size_t k, std::size_t resolution, double T) {
  return T * static_cast<double>(k) / static_cast<double>(resolution - 1);
}

double memory_sup(const MemoryKernelParams& mp, std::size_t resolution) {
  if (mp.p == 0.0) return 0.0;
  // For fixed s, |l(t, s)| decays in t - s because p + q > 0, so the supremum
  // sits on the diagonal where |l(s, s)| = |p g(s)|; g is monotone in s.
  const double analytic = std::abs(mp.p) * std::max(std::abs(memory_weight(mp.p, mp.q, 0.0)),
                                                    std::abs(memory_weight(mp.p, mp.q, mp.T)));
  double sampled = 0.0;
  for (std::size_t k = 0; k < resolution; ++k) {
    const double s = grid_point(k, resolution, mp.T);
    sampled = std::max(sampled, std::abs(memory_l(mp.p, mp.q, s, s)));
  }
  return std::max(analytic, sampled);
}

double grid_sup(const KernelModel::Function& l, double T, std::size_t resolution) {
  double best = 0.0;
  for (std::size_t a = 0; a < resolution; ++a) {
    const double t = grid_point(a, resolution, T);
    for (std::size_t b = 0; b <= a; ++b) {
      best = std::max(best, std::abs(l(t, grid_point(b, resolution, T))));
    }
  }
  return best;
}

}  // namespace

void MemoryKernelParams::validate() const {
  if (!(q > 0.0)) throw DomainError("memory kernel requires q > 0");
  if (!(p > -q)) throw DomainError("memory kernel requires p > -q");
  if (!(T > 0.0)) throw DomainError("horizon T must be positive");
  if (!std::isfinite(p) || !std::isfinite(q) || !std::isfinite(T)) {
    throw DomainError("memory kernel parameters must be finite");
  }
}

void ConstantKernel::validate() const {
  if (!std::isfinite(c)) throw DomainError("constant kernel level must be finite");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive");
}

void check_time(double x, double T, const char* what) {
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, T);
  if (!(x >= 0.0) || x > T + slack) {
    std::ostringstream os;
    os << what << " = " << x << " outside [0, " << T << "]";
    throw DomainError(os.str());
  }
}

KernelModel KernelModel::memory(const MemoryKernelParams& params) {
  params.validate();
  KernelModel k;
  k.kind_ = KernelKind::memory;
  k.horizon_ = params.T;
  k.memory_ = params;
  k.sup_bound_ = memory_sup(params, kDefaultSupGrid);
  return k;
}

KernelModel KernelModel::constant(double c, double T) {
  ConstantKernel{c, T}.validate();
  KernelModel k;
  k.kind_ = KernelKind::constant;
  k.horizon_ = T;
  k.constant_ = c;
  k.sup_bound_ = std::abs(c);
  return k;
}

KernelModel KernelModel::general(Function l, double T, std::size_t grid_resolution) {
  if (!l) throw DomainError("general kernel needs a callable");
  if (!(T > 0.0)) throw DomainError("horizon T must be positive");
  if (grid_resolution < 2) throw DomainError("grid resolution must be >= 2");
  KernelModel k;
  k.kind_ = KernelKind::general;
  k.horizon_ = T;
  k.general_ = std::make_shared<const Function>(std::move(l));
  k.sup_bound_ = grid_sup(*k.general_, T, grid_resolution);
  return k;
}

double KernelModel::l(double t, double s) const {
  if (s > t) return 0.0;
  switch (kind_) {
    case KernelKind::memory:
      return memory_l(memory_->p, memory_->q, t, s);
    case KernelKind::constant:
      return *constant_;
    case KernelKind::general:
      return (*general_)(t, s);
  }
  return 0.0;
}

double KernelModel::closed_form_z(double t, double u) const {
  if (u >= t) return 0.0;
  switch (kind_) {
    case KernelKind::memory:
      return memory_z(memory_->p, memory_->q, t, u);
    case KernelKind::constant:
      return *constant_ * (t - u);
    case KernelKind::general:
      break;
  }
  throw DomainError("kernel has no closed-form z");
}

std::string KernelModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case KernelKind::memory:
      os << "memory(p=" << memory_->p << ", q=" << memory_->q << ", T=" << horizon_ << ")";
      break;
    case KernelKind::constant:
      os << "constant(c=" << *constant_ << ", T=" << horizon_ << ")";
      break;
    case KernelKind::general:
      os << "general(T=" << horizon_ << ")";
      break;
  }
  return os.str();
}

double eval_l(const MemoryKernelParams& params, double t, double s) {
  params.validate();
  check_time(t, params.T, "t");
  check_time(s, params.T, "s");
  if (s > t) return 0.0;
  [[maybe_unused]] const double a = 2.0 * params.q + params.p;
  assert(a * a * std::exp(2.0 * params.q * s) - params.p * params.p > 0.0);
  return memory_l(params.p, params.q, t, s);
}

double eval_l(const KernelModel& kernel, double t, double s) {
  check_time(t, kernel.horizon(), "t");
  check_time(s, kernel.horizon(), "s");
  return kernel.l(t, s);
}

double eval_z(const KernelModel& kernel, double t, double u) {
  check_time(t, kernel.horizon(), "t");
  check_time(u, kernel.horizon(), "u");
  if (u >= t) return 0.0;
  if (kernel.has_closed_form_z()) return kernel.closed_form_z(t, u);
  return quad_z(kernel, t, u, kQuadTolerance);
}

double eval_y(const KernelModel& kernel, double t, double u) {
  return 1.0 - eval_z(kernel, t, u);
}

double quad_z(const KernelModel& kernel, double t, double u, double tol) {
  if (u > t) throw DomainError("quad_z requires u <= t");
  if (!(tol > 0.0)) throw DomainError("quad_z requires tol > 0");
  if (u == t) return 0.0;
  return adaptive_simpson([&](double s) { return kernel.l(s, u); }, u, t, tol);
}

double sup_bound(const KernelModel& kernel, std::size_t grid_resolution) {
  if (grid_resolution < 2) throw DomainError("grid resolution must be >= 2");
  switch (kernel.kind()) {
    case KernelKind::memory:
      return memory_sup(*kernel.memory_params(), grid_resolution);
    case KernelKind::constant:
      return std::abs(*kernel.constant_level());
    case KernelKind::general:
      break;
  }
  return grid_sup([&](double t, double s) { return kernel.l(t, s); }, kernel.horizon(),
                  grid_resolution);
}

}  // namespace binmem
