#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "binmem/errors.hpp"

namespace binmem {

inline constexpr std::size_t kDefaultSubdivisionBudget = 1'000'000;

namespace detail {

template <typename F>
struct SimpsonState {
  const F& f;
  std::size_t budget;
  std::size_t used = 0;
};

template <typename F>
double simpson_step(SimpsonState<F>& st, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (++st.used > st.budget) {
    throw QuadratureError("adaptive Simpson exceeded " + std::to_string(st.budget) +
                          " subdivisions");
  }
  // Interval can no longer be halved in double precision.
  if (depth <= 0 || lm <= a || rm >= b || std::abs(diff) <= 15.0 * tol) {
    return left + right + diff / 15.0;
  }
  return simpson_step(st, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(st, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] with Richardson-corrected
/// interval-halving error estimate. Throws QuadratureError when the total number
/// of subdivisions exceeds `budget`.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol,
                        std::size_t budget = kDefaultSubdivisionBudget) {
  if (!(tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
  if (a == b) return 0.0;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  detail::SimpsonState<F> st{f, budget};
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return sign * detail::simpson_step(st, a, fa, b, fb, m, fm, whole, tol, 60);
}

}  // namespace binmem
