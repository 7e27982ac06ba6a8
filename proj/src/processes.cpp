#include "binmem/processes.hpp"

#include <cmath>
#include <string>

#include "binmem/errors.hpp"
#include "binmem/rng.hpp"

namespace binmem {

std::size_t step_count(std::size_t n, double T) {
  if (n < 1) throw DomainError("lattice needs n >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive");
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * T + 1e-9));
}

LatticeConfig LatticeConfig::make(std::size_t n, double T) {
  const std::size_t m = step_count(n, T);
  if (m < 1) throw DomainError("lattice has no steps: floor(n T) = 0");
  return {n, T, m};
}

CoefficientTable::CoefficientTable(const KernelModel& kernel, std::size_t N, double T)
    : lattice_(LatticeConfig::make(N, T)) {
  const double slack = 1e-12 * std::max(1.0, kernel.horizon());
  if (T > kernel.horizon() + slack) throw DomainError("table horizon exceeds kernel horizon");
  const std::size_t m = lattice_.m;
  y_.resize(m * (m + 1) / 2);
  delta_.resize(m * (m - 1) / 2);
  row_abs_sum_.assign(m + 1, 0.0);
  const double dN = static_cast<double>(N);
  for (std::size_t n = 1; n <= m; ++n) {
    const double t = static_cast<double>(n) / dN;
    double* row = y_.data() + y_offset(n);
    for (std::size_t i = 1; i < n; ++i) row[i - 1] = eval_y(kernel, t, static_cast<double>(i) / dN);
    row[n - 1] = 1.0;
    if (n == 1) continue;
    const double* prev = y_.data() + y_offset(n - 1);
    double* d = delta_.data() + delta_offset(n);
    double abs_sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      d[i - 1] = row[i - 1] - prev[i - 1];
      abs_sum += std::abs(d[i - 1]);
    }
    row_abs_sum_[n] = abs_sum;
  }
}

CoefficientTable build_coefficients(const KernelModel& kernel, std::size_t N, double T) {
  return CoefficientTable(kernel, N, T);
}

Eigen::VectorXd sample_innovations(const InnovationSpec& spec, std::size_t m) {
  if (m < 1) throw DomainError("need at least one innovation");
  auto gen = make_stream(spec.seed, spec.stream_index);
  Eigen::VectorXd xi(static_cast<Eigen::Index>(m));
  switch (spec.law) {
    case InnovationLaw::rademacher:
      for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] = (gen() >> 63) ? 1.0 : -1.0;
      break;
    case InnovationLaw::standard_normal:
      for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] = normal_quantile(uniform_open01(gen));
      break;
  }
  return xi;
}

Eigen::VectorXd wiener_path(std::size_t N, const Eigen::VectorXd& xi) {
  const double h = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::VectorXd W(xi.size() + 1);
  W[0] = 0.0;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    sum += xi[k];
    W[k + 1] = h * sum;
  }
  return W;
}

DiscretePath sample_Y_direct(const CoefficientTable& table, const Eigen::VectorXd& xi) {
  const std::size_t m = table.steps();
  if (static_cast<std::size_t>(xi.size()) != m) {
    throw DomainError("innovation length " + std::to_string(xi.size()) + " != steps " +
                      std::to_string(m));
  }
  DiscretePath path{table.N(), table.T(), xi, wiener_path(table.N(), xi), {}, {}};
  const double h = 1.0 / std::sqrt(static_cast<double>(table.N()));
  path.Y.resize(static_cast<Eigen::Index>(m + 1));
  path.Y[0] = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    const auto row = table.y_row(k);
    const Eigen::Map<const Eigen::VectorXd> weights(row.data(), static_cast<Eigen::Index>(k));
    path.Y[static_cast<Eigen::Index>(k)] = h * weights.dot(xi.head(static_cast<Eigen::Index>(k)));
  }
  return path;
}

DiscretePath sample_Y_fast(const MemoryKernelParams& params, std::size_t N, double T,
                           const Eigen::VectorXd& xi, EngineCounters* counters) {
  params.validate();
  const std::size_t m = step_count(N, T);
  if (T > params.T * (1.0 + 1e-12)) throw DomainError("horizon exceeds kernel horizon");
  if (static_cast<std::size_t>(xi.size()) != m) {
    throw DomainError("innovation length " + std::to_string(xi.size()) + " != steps " +
                      std::to_string(m));
  }
  const double dN = static_cast<double>(N);
  const double h = 1.0 / std::sqrt(dN);
  const double rate = params.p + params.q;
  const double decay = std::exp(-rate / dN);
  const double coupling = -(params.p / rate) * std::expm1(rate / dN);

  DiscretePath path{N, T, xi, wiener_path(N, xi), {}, {}};
  path.Y.resize(static_cast<Eigen::Index>(m + 1));
  path.Y[0] = 0.0;
  double memory = 0.0;
  double unscaled = 0.0;
  for (std::size_t n = 1; n <= m; ++n) {
    const double x = xi[static_cast<Eigen::Index>(n - 1)];
    unscaled += x + coupling * memory;
    path.Y[static_cast<Eigen::Index>(n)] = h * unscaled;
    memory = decay * (memory + memory_weight(params.p, params.q, static_cast<double>(n) / dN) * x);
  }
  if (counters) counters->recursion_updates += m;
  return path;
}

DiscretePath sample_Y_fast(const KernelModel& kernel, std::size_t N, double T,
                           const Eigen::VectorXd& xi, EngineCounters* counters) {
  if (kernel.kind() != KernelKind::memory) {
    throw DomainError("fast engine needs the exponential memory kernel, got " + kernel.describe());
  }
  return sample_Y_fast(*kernel.memory_params(), N, T, xi, counters);
}

Eigen::VectorXd sample_S(const DiscretePath& path, const DriftFunction& drift, double sigma,
                         double s0) {
  if (!(s0 > 0.0)) throw DomainError("initial price must be positive");
  const Eigen::Index m = path.Y.size() - 1;
  const double dN = static_cast<double>(path.N);
  Eigen::VectorXd S(m + 1);
  S[0] = s0;
  for (Eigen::Index j = 1; j <= m; ++j) {
    const double factor =
        1.0 + sigma * (path.Y[j] - path.Y[j - 1]) + drift(static_cast<double>(j) / dN) / dN;
    if (!(factor > 0.0)) throw NumericalRegimeError(static_cast<std::size_t>(j), factor);
    S[j] = S[j - 1] * factor;
  }
  return S;
}

Eigen::VectorXd sample_S(const DiscretePath& path, double drift, double sigma, double s0) {
  return sample_S(path, [drift](double) { return drift; }, sigma, s0);
}

PathSampler::PathSampler(const KernelModel& kernel, std::size_t N, double T, EngineChoice choice)
    : kernel_(kernel), N_(N), T_(T), m_(LatticeConfig::make(N, T).m) {
  const bool fast_possible = kernel.kind() == KernelKind::memory;
  if (choice == EngineChoice::fast && !fast_possible) {
    throw DomainError("fast engine needs the exponential memory kernel, got " + kernel.describe());
  }
  if (choice == EngineChoice::direct || !fast_possible) {
    table_ = std::make_shared<const CoefficientTable>(kernel, N, T);
  } else if (T > kernel.horizon() * (1.0 + 1e-12)) {
    throw DomainError("horizon exceeds kernel horizon");
  }
}

DiscretePath PathSampler::sample(const Eigen::VectorXd& xi) const {
  if (table_) return sample_Y_direct(*table_, xi);
  return sample_Y_fast(*kernel_.memory_params(), N_, T_, xi);
}

Eigen::VectorXd quadratic_variation(const Eigen::VectorXd& path) {
  Eigen::VectorXd qv = Eigen::VectorXd::Zero(path.size());
  for (Eigen::Index k = 1; k < path.size(); ++k) {
    const double d = path[k] - path[k - 1];
    qv[k] = qv[k - 1] + d * d;
  }
  return qv;
}

double sup_jump(const Eigen::VectorXd& path) {
  double best = 0.0;
  for (Eigen::Index k = 1; k < path.size(); ++k) best = std::max(best, std::abs(path[k] - path[k - 1]));
  return best;
}

JumpDecomposition decompose_by_jump_threshold(const Eigen::VectorXd& path, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("jump threshold needs sigma > 0");
  const double threshold = 0.5 / sigma;
  JumpDecomposition out{Eigen::VectorXd::Zero(path.size()), Eigen::VectorXd::Zero(path.size())};
  if (path.size() == 0) return out;
  out.small[0] = path[0];
  for (Eigen::Index k = 1; k < path.size(); ++k) {
    const double d = path[k] - path[k - 1];
    out.large[k] = out.large[k - 1] + (std::abs(d) < threshold ? 0.0 : d);
    out.small[k] = path[k] - out.large[k];
  }
  return out;
}

}  // namespace binmem
