#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "binmem/errors.hpp"
#include "binmem/processes.hpp"
#include "binmem/rng.hpp"

using namespace binmem;

namespace {

Eigen::VectorXd rademacher(std::size_t m, std::uint64_t seed, std::uint64_t stream = 0) {
  return sample_innovations({InnovationLaw::rademacher, seed, stream}, m);
}

}  // namespace

TEST(Lattice, StepCountToleratesDecimalHorizons) {
  EXPECT_EQ(step_count(100, 0.29), 29u);
  EXPECT_EQ(step_count(10, 1.0), 10u);
  EXPECT_EQ(step_count(3, 0.5), 1u);
  EXPECT_EQ(step_count(1, 0.5), 0u);
  EXPECT_THROW(LatticeConfig::make(1, 0.5), DomainError);
  EXPECT_THROW(step_count(0, 1.0), DomainError);
}

TEST(CoefficientTable, MatchesKernelPointwise) {
  const auto k = KernelModel::memory({1.0, 1.0, 1.0});
  const CoefficientTable table(k, 16, 1.0);
  ASSERT_EQ(table.steps(), 16u);
  for (std::size_t n = 1; n <= 16; ++n) {
    EXPECT_EQ(table.y(n, n), 1.0);
    double abs_sum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      EXPECT_NEAR(table.y(n, i), eval_y(k, n / 16.0, i / 16.0), 1e-15);
      if (i < n) {
        EXPECT_EQ(table.delta(n, i), table.y(n, i) - table.y(n - 1, i));
        abs_sum += std::abs(table.delta(n, i));
      }
    }
    EXPECT_NEAR(table.row_abs_sum(n), abs_sum, 1e-15);
    EXPECT_EQ(table.y_row(n).size(), n);
    EXPECT_EQ(table.delta_row(n).size(), n - 1);
  }
}

TEST(CoefficientTable, ConstantKernelDifferences) {
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 10, 1.0);
  for (std::size_t n = 2; n <= 10; ++n) {
    for (std::size_t i = 1; i < n; ++i) EXPECT_NEAR(table.delta(n, i), -0.2, 1e-15);
    EXPECT_NEAR(table.row_abs_sum(n), 0.2 * static_cast<double>(n - 1), 1e-14);
  }
}

TEST(CoefficientTable, RejectsHorizonBeyondKernel) {
  EXPECT_THROW(CoefficientTable(KernelModel::constant(1.0, 1.0), 10, 2.0), DomainError);
}

TEST(DirectEngine, HandComputedConstantKernelValue) {
  // c = 2, N = 4: Y_3 = (1/2)(y(3/4,1/4) xi_1 + y(3/4,1/2) xi_2 + xi_3)
  //             = (1/2)(0 * xi_1 + 0.5 xi_2 + xi_3).
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 4, 1.0);
  Eigen::VectorXd xi(4);
  xi << 1.0, -1.0, 1.0, 1.0;
  const auto path = sample_Y_direct(table, xi);
  EXPECT_NEAR(path.Y[3], 0.25, 1e-15);
  EXPECT_NEAR(path.Y[1], 0.5, 1e-15);
  EXPECT_EQ(path.Y[0], 0.0);
  EXPECT_EQ(path.W[3], 0.5);
}

TEST(DirectEngine, WienerCaseIsBitwiseEqualToW) {
  const auto k = KernelModel::memory({0.0, 1.0, 1.0});
  const CoefficientTable table(k, 64, 1.0);
  const auto xi = rademacher(64, 3);
  const auto path = sample_Y_direct(table, xi);
  EXPECT_EQ(path.Y, path.W);
  const auto fast = sample_Y_fast(k, 64, 1.0, xi);
  EXPECT_EQ(fast.Y, fast.W);
}

TEST(FastEngine, AgreesWithDirectEngine) {
  for (const auto& [p, q] : {std::pair{1.0, 1.0}, {-0.5, 1.0}, {3.0, 0.25}, {0.5, 2.0}}) {
    const auto k = KernelModel::memory({p, q, 1.0});
    for (std::size_t N : {4u, 16u, 64u, 256u}) {
      const CoefficientTable table(k, N, 1.0);
      const auto xi = sample_innovations({InnovationLaw::standard_normal, N, 1}, N);
      const auto direct = sample_Y_direct(table, xi);
      EngineCounters counters;
      const auto fast = sample_Y_fast(k, N, 1.0, xi, &counters);
      EXPECT_EQ(counters.recursion_updates, N);
      for (Eigen::Index i = 0; i <= static_cast<Eigen::Index>(N); ++i) {
        EXPECT_NEAR(fast.Y[i], direct.Y[i], 1e-10 * std::max(1.0, std::abs(direct.Y[i])));
      }
    }
  }
}

TEST(FastEngine, RejectsNonMemoryKernels) {
  const auto xi = rademacher(8, 1);
  EXPECT_THROW(sample_Y_fast(KernelModel::constant(1.0, 1.0), 8, 1.0, xi), DomainError);
  EXPECT_THROW(PathSampler(KernelModel::constant(1.0, 1.0), 8, 1.0, EngineChoice::fast),
               DomainError);
}

TEST(PathSampler, ChoosesEngineByKernel) {
  EXPECT_TRUE(PathSampler(KernelModel::memory({1.0, 1.0, 1.0}), 8, 1.0).uses_fast_engine());
  EXPECT_FALSE(PathSampler(KernelModel::constant(1.0, 1.0), 8, 1.0).uses_fast_engine());
  EXPECT_FALSE(PathSampler(KernelModel::memory({1.0, 1.0, 1.0}), 8, 1.0, EngineChoice::direct)
                   .uses_fast_engine());
}

TEST(Price, ProductOfFactorsRecomputed) {
  const auto k = KernelModel::memory({1.0, 1.0, 1.0});
  const auto xi = rademacher(32, 9);
  const auto path = sample_Y_fast(k, 32, 1.0, xi);
  const auto drift = [](double t) { return 0.05 + 0.1 * t; };
  const auto S = sample_S(path, drift, 0.3, 50.0);
  double s = 50.0;
  for (Eigen::Index j = 1; j < path.Y.size(); ++j) {
    s *= 1.0 + 0.3 * (path.Y[j] - path.Y[j - 1]) + drift(j / 32.0) / 32.0;
    EXPECT_NEAR(S[j], s, 1e-13 * s);
  }
  EXPECT_EQ(S[0], 50.0);
}

TEST(Price, NonPositiveFactorReportsStep) {
  const auto k = KernelModel::memory({0.0, 1.0, 1.0});
  Eigen::VectorXd xi = Eigen::VectorXd::Ones(4);
  xi[2] = -1.0;
  const auto path = sample_Y_fast(k, 4, 1.0, xi);
  // sigma dY = 3 * (-1/2) at step 3 gives factor -0.5.
  try {
    (void)sample_S(path, 0.0, 3.0, 1.0);
    FAIL() << "expected NumericalRegimeError";
  } catch (const NumericalRegimeError& e) {
    EXPECT_EQ(e.step(), 3u);
    EXPECT_DOUBLE_EQ(e.factor(), -0.5);
  }
}

TEST(PathFunctionals, RademacherWienerQuadraticVariationIsExact) {
  // Bitwise when 1/sqrt(N) is dyadic.
  for (std::size_t N : {4u, 64u, 1024u}) {
    const auto xi = rademacher(N, 2, N);
    const auto qv = quadratic_variation(wiener_path(N, xi));
    for (Eigen::Index k = 0; k < qv.size(); ++k) {
      EXPECT_EQ(qv[k], static_cast<double>(k) / static_cast<double>(N));
    }
  }
  for (std::size_t N : {7u, 1000u}) {
    const auto xi = rademacher(N, 2, N);
    const auto qv = quadratic_variation(wiener_path(N, xi));
    for (Eigen::Index k = 0; k < qv.size(); ++k) {
      const double expected = static_cast<double>(k) / static_cast<double>(N);
      EXPECT_NEAR(qv[k], expected, 8.0 * (k + 1) * std::numeric_limits<double>::epsilon());
    }
  }
}

TEST(PathFunctionals, QuadraticVariationIsMonotone) {
  const auto k = KernelModel::memory({1.0, 1.0, 1.0});
  const auto path = sample_Y_fast(k, 128, 1.0,
                                  sample_innovations({InnovationLaw::standard_normal, 4, 0}, 128));
  const auto qv = quadratic_variation(path.Y);
  for (Eigen::Index i = 1; i < qv.size(); ++i) EXPECT_GE(qv[i], qv[i - 1]);
}

TEST(PathFunctionals, SupJump) {
  Eigen::VectorXd p(4);
  p << 0.0, 0.5, -0.25, 0.0;
  EXPECT_EQ(sup_jump(p), 0.75);
  EXPECT_EQ(sup_jump(Eigen::VectorXd::Zero(1)), 0.0);
}

TEST(PathFunctionals, DecompositionSumsToPath) {
  Eigen::VectorXd p(6);
  p << 0.0, 0.1, 1.5, 1.4, -0.2, -0.1;
  const auto parts = decompose_by_jump_threshold(p, 1.0);
  // Increments 1.4 and -1.6 are at least 1/2 in size.
  EXPECT_NEAR(parts.large[5], 1.4 - 1.6, 1e-15);
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(parts.small[k] + parts.large[k], p[k], 1e-15);
  }
  const auto none = decompose_by_jump_threshold(p, 0.01);
  EXPECT_EQ(none.small, p);
  EXPECT_TRUE(none.large.isZero());
}
