#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "binmem/arbitrage.hpp"
#include "binmem/errors.hpp"
#include "binmem/rng.hpp"
#include "oracles.hpp"

using namespace binmem;

namespace {

MarketParams market(std::size_t N, double T, double r, double b, double sigma) {
  return {N, T, r, b, sigma, 1.0};
}

}  // namespace

TEST(ViolationStep, ConstantKernelAllDownPrefix) {
  const auto m = market(20, 1.0, 0.03, 0.03, 0.2);
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 20, 1.0);
  EXPECT_EQ(violation_step(table, m, -Eigen::VectorXd::Ones(19)), std::optional<std::size_t>(11));
  Eigen::VectorXd alternating(19);
  for (Eigen::Index i = 0; i < 19; ++i) alternating[i] = i % 2 == 0 ? 1.0 : -1.0;
  EXPECT_EQ(violation_step(table, m, alternating), std::nullopt);
  EXPECT_THROW(violation_step(table, m, Eigen::VectorXd::Ones(5)), DomainError);
}

TEST(ViolationStep, PrefixSignSymmetryWhenRatesMatch) {
  const auto k = KernelModel::memory({-0.9, 1.0, 3.0});
  const auto m = market(12, 3.0, 0.02, 0.02, 0.1);
  const CoefficientTable table(k, 12, 3.0);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto xi = sample_innovations({InnovationLaw::rademacher, 77, s}, 35);
    EXPECT_EQ(violation_step(table, m, xi), violation_step(table, m, Eigen::VectorXd(-xi)));
  }
}

TEST(ExactPN, ConstantKernelQuarter) {
  const auto m = market(8, 1.0, 0.0, 0.0, 0.2);
  const auto k = KernelModel::constant(2.0, 1.0);
  const CoefficientTable table(k, 8, 1.0);
  const auto report = exact_PN(table, m);
  EXPECT_EQ(report.p_hat, 0.25);
  EXPECT_EQ(report.p_hat, oracle::brute_force_PN(k, m));
  EXPECT_EQ(report.mode, EstimateMode::exact);
  double mass = 0.0;
  for (const auto& [step, w] : report.first_violation_histogram) mass += w;
  EXPECT_EQ(mass, report.p_hat);
  ASSERT_TRUE(report.example_step.has_value());
  EXPECT_EQ(*report.example_step, 5u);
  EXPECT_EQ(*report.example_prefix, -Eigen::VectorXd::Ones(4));
}

TEST(ExactPN, AgreesWithBruteForceAndCertificate) {
  struct Case {
    KernelModel kernel;
    MarketParams params;
  };
  std::vector<Case> cases;
  for (double c : {0.5, 2.0, 3.0}) {
    for (std::size_t N : {6u, 9u, 11u}) {
      cases.push_back({KernelModel::constant(c, 1.0), market(N, 1.0, 0.05, 0.05, 0.2)});
      cases.push_back({KernelModel::constant(c, 1.0), market(N, 1.0, 0.35, 0.05, 0.2)});
    }
  }
  for (const auto& [p, q] : {std::pair{1.0, 1.0}, {-0.9, 1.0}, {3.0, 0.25}}) {
    for (std::size_t N : {3u, 4u}) {
      cases.push_back({KernelModel::memory({p, q, 3.0}), market(N, 3.0, 0.02, 0.02, 0.1)});
    }
  }
  for (const auto& c : cases) {
    const CoefficientTable table(c.kernel, c.params.N, c.params.T);
    const double exact = exact_PN(table, c.params).p_hat;
    EXPECT_EQ(exact, oracle::brute_force_PN(c.kernel, c.params)) << c.kernel.describe();
    EXPECT_EQ(exact == 0.0, is_arbitrage_free_exact(table, c.params).arbitrage_free)
        << c.kernel.describe();
  }
}

TEST(ExactPN, BudgetIsEnforced) {
  const auto m = market(30, 1.0, 0.0, 0.0, 0.2);
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 30, 1.0);
  EXPECT_THROW(exact_PN(table, m, 26), BudgetExceededError);
}

TEST(MonteCarloPN, IndependentOfWorkerCount) {
  const auto m = market(16, 1.0, 0.0, 0.0, 0.2);
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 16, 1.0);
  const auto one = mc_PN(table, m, {5000, 3, 1});
  const auto four = mc_PN(table, m, {5000, 3, 4});
  EXPECT_EQ(one.p_hat, four.p_hat);
  EXPECT_EQ(one.first_violation_histogram, four.first_violation_histogram);
  EXPECT_EQ(*one.example_prefix, *four.example_prefix);
  EXPECT_EQ(one.ci_low, four.ci_low);
}

TEST(MonteCarloPN, MemoryRecursionMatchesTable) {
  const MemoryKernelParams kp{-0.9, 1.0, 3.0};
  const auto m = market(12, 3.0, 0.02, 0.02, 0.1);
  const CoefficientTable table(KernelModel::memory(kp), 12, 3.0);
  const auto via_table = mc_PN(table, m, {20000, 5, 2});
  const auto via_recursion = mc_PN(kp, m, {20000, 5, 3});
  EXPECT_EQ(via_table.p_hat, via_recursion.p_hat);
  EXPECT_EQ(via_table.first_violation_histogram, via_recursion.first_violation_histogram);
  EXPECT_GT(via_table.p_hat, 0.0);
}

TEST(MonteCarloPN, CoversExactValue) {
  const auto m = market(8, 1.0, 0.0, 0.0, 0.2);
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 8, 1.0);
  const auto r = mc_PN(table, m, {20000, 17, 1, 2.5758293035489004});
  EXPECT_LE(r.ci_low, 0.25);
  EXPECT_GE(r.ci_high, 0.25);
  EXPECT_EQ(r.trials, 20000u);
}

TEST(Wilson, ReferenceInterval) {
  const auto ci = wilson_interval(5, 10, 1.959963984540054);
  EXPECT_NEAR(ci.low, 0.2366, 1e-4);
  EXPECT_NEAR(ci.high, 0.7634, 1e-4);
  const auto zero = wilson_interval(0, 100, 1.96);
  EXPECT_EQ(zero.low, 0.0);
  EXPECT_GT(zero.high, 0.0);
  EXPECT_EQ(wilson_interval(100, 100, 1.96).high, 1.0);
  EXPECT_THROW(wilson_interval(1, 0, 1.96), DomainError);
}

TEST(Theorem42, ThresholdExamples) {
  // With C = 0 only N^{3/8} > 4 binds: N > 4^{8/3} = 40.3.
  EXPECT_EQ(theorem42_Nalpha(0.5, market(1, 1.0, 0.0, 0.0, 0.1), 0.0), 41u);
  EXPECT_EQ(theorem42_Nalpha(0.5, market(1, 1.0, 0.0, 0.0, 0.1), 1e-12), 41u);
  // beta/2 = 0.475: N^{0.475} > 4 needs N >= 19, and N^{0.475} < N^{0.5} holds.
  EXPECT_EQ(theorem42_Nalpha(0.9, market(1, 1.0, 0.03, 0.03, 0.1), 1.0), 19u);
  EXPECT_THROW(theorem42_Nalpha(1.0, market(1, 1.0, 0.0, 0.0, 0.1), 1.0), DomainError);
}

TEST(Theorem42, ThresholdIsMinimalAndStable) {
  const auto m = market(1, 0.5, 0.05, 0.03, 0.1);
  const double alpha = 0.6, C = 1.3;
  const std::size_t N = theorem42_Nalpha(alpha, m, C);
  const double hb = (alpha + 1.0) / 4.0;
  const auto holds = [&](std::size_t n) {
    const double dn = static_cast<double>(n);
    return std::pow(dn, hb) * C * std::sqrt(m.T) < std::sqrt(dn) - std::abs((m.r - m.b) / m.sigma) &&
           std::pow(dn, hb) > 4.0;
  };
  EXPECT_FALSE(holds(N - 1));
  for (std::size_t n = N; n < N + 1000; ++n) ASSERT_TRUE(holds(n)) << n;
}

TEST(DecayFit, RecoversPowerLaw) {
  std::vector<DecayPoint> pts;
  for (double N : {8.0, 16.0, 32.0, 64.0}) pts.push_back({N, 3.0 / N});
  const auto fit = decay_fit(pts);
  EXPECT_NEAR(fit.slope, -1.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
  EXPECT_LT(fit.residuals.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DecayFit, DegenerateInputs) {
  const std::vector<DecayPoint> zeros{{8, 0.0}, {16, 0.0}, {32, 0.0}};
  EXPECT_THROW(decay_fit(zeros), NoDecayDataError);
  try {
    decay_fit(zeros);
  } catch (const NoDecayDataError& e) {
    EXPECT_STREQ(e.what(), "identically zero on tested range");
  }
  const std::vector<DecayPoint> two{{8, 0.1}, {16, 0.05}, {32, 0.0}};
  EXPECT_THROW(decay_fit(two), DomainError);
}

TEST(Strategy, BoundaryWitnessHasZeroBranch) {
  const auto m = market(8, 1.0, 0.04, 0.04, 0.2);
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 8, 1.0);
  const Eigen::VectorXd prefix = -Eigen::VectorXd::Ones(4);
  const auto w = extract_strategy(table, m, prefix, 5);
  EXPECT_EQ(w.direction, Position::long_stock);
  EXPECT_EQ(w.payoff_down, 0.0);
  EXPECT_GT(w.payoff_up, 0.0);
  EXPECT_TRUE(verify_strategy(w, table, m));
}

TEST(Strategy, ShortWitnessAndRejection) {
  const auto m = market(20, 1.0, 0.03, 0.03, 0.2);
  const CoefficientTable table(KernelModel::constant(2.0, 1.0), 20, 1.0);
  const Eigen::VectorXd up = Eigen::VectorXd::Ones(12);
  const auto w = extract_strategy(table, m, up, 13);
  EXPECT_EQ(w.direction, Position::short_stock);
  EXPECT_GE(w.payoff_up, 0.0);
  EXPECT_GT(w.payoff_down, 0.0);
  EXPECT_TRUE(verify_strategy(w, table, m));

  auto tampered = w;
  tampered.payoff_down += 1e-6;
  EXPECT_FALSE(verify_strategy(tampered, table, m));
  EXPECT_THROW(extract_strategy(table, m, Eigen::VectorXd::Ones(2), 3), DomainError);
  EXPECT_THROW(extract_strategy(table, m, Eigen::VectorXd::Ones(2), 5), DomainError);
}
