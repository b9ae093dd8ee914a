#include <gtest/gtest.h>

#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <vector>

#include "fixprice/errors.hpp"
#include "fixprice/guarantees.hpp"
#include "fixprice/policy_eval.hpp"

namespace fixprice {
namespace {

// E(X | X > T) from textbook closed forms, independent of the library's
// quadrature.
double closed_form_conditional_mean(const Distribution& d, double T) {
  if (const auto* p = std::get_if<Pareto>(&d.params())) {
    const double t = std::max(T, 1.0);
    return p->alpha * t / (p->alpha - 1.0);
  }
  if (const auto* e = std::get_if<Exponential>(&d.params())) return std::max(T, 0.0) + 1.0 / e->rate;
  if (const auto* u = std::get_if<Uniform>(&d.params())) return 0.5 * (std::max(T, u->a) + u->b);
  ADD_FAILURE() << "no closed form for " << d.spec();
  return 0.0;
}

// Enumerates every exceedance pattern of n buyers: pattern probability times
// the number of units sold times the conditional value per sale.
double enumerate_fixed_price(const Distribution& d, long n, long k, double T) {
  const double p = d.survival(T);
  const double q = 1.0 - p;
  double expected_sales = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const long hits = std::popcount(mask);
    expected_sales += std::pow(p, hits) * std::pow(q, n - hits) * std::min(k, hits);
  }
  return expected_sales * closed_form_conditional_mean(d, T);
}

struct Case {
  Distribution d;
  long n;
  long k;
  double T;
};

std::vector<Case> enumeration_panel() {
  std::vector<Case> cases;
  const std::array<Distribution, 3> dists{Distribution::pareto(2.0), Distribution::exponential(1.0),
                                          Distribution::uniform(0.0, 1.0)};
  for (const auto& d : dists) {
    for (long n : {3L, 6L, 10L}) {
      for (long k : {1L, 2L, 3L}) cases.push_back({d, n, k, d.quantile(0.5 + 0.04 * n)});
    }
  }
  return cases;
}

TEST(FixedPriceExact, Examples) {
  EXPECT_NEAR(fixed_price_value_exact(Distribution::pareto(2.0), 1, 1, 1.0), 2.0, 1e-10);
  EXPECT_NEAR(fixed_price_value_exact(Distribution::pareto(2.0), 1, 1, 2.0), 1.0, 1e-10);
  EXPECT_NEAR(fixed_price_value_exact(Distribution::uniform(0.0, 1.0), 2, 2, 0.0), 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(fixed_price_value_exact(Distribution::uniform(0.0, 1.0), 5, 2, 1.0), 0.0);
  EXPECT_THROW(fixed_price_value_exact(Distribution::uniform(0.0, 1.0), 2, 3, 0.5), DomainError);
  EXPECT_THROW(fixed_price_value_exact(Distribution::pareto(1.0), 2, 1, 3.0), DivergenceError);
}

TEST(FixedPriceExact, MatchesPatternEnumeration) {
  const auto cases = enumeration_panel();
  ASSERT_EQ(cases.size(), 27u);
  for (const auto& c : cases) {
    EXPECT_NEAR(fixed_price_value_exact(c.d, c.n, c.k, c.T), enumerate_fixed_price(c.d, c.n, c.k, c.T),
                1e-8)
        << c.d.spec() << " n=" << c.n << " k=" << c.k << " T=" << c.T;
  }
}

TEST(FixedPriceExact, VanishesAtUpperEndAndIsContinuous) {
  const Distribution d = Distribution::exponential(1.0);
  double prev = fixed_price_value_exact(d, 8, 2, 0.0);
  // The slope is at most k + n (1 + T) e^-T, so steps of 0.005 move the value by under 0.06.
  for (double T = 0.005; T < 40.0; T += 0.005) {
    const double v = fixed_price_value_exact(d, 8, 2, T);
    EXPECT_LT(std::abs(v - prev), 0.06) << T;
    prev = v;
  }
  EXPECT_LT(prev, 1e-12);
  EXPECT_LT(fixed_price_value_exact(Distribution::uniform(0.0, 1.0), 8, 2, 1.0 - 1e-9), 1e-7);
}

TEST(ProphetValue, Examples) {
  EXPECT_NEAR(prophet_value(Distribution::uniform(0.0, 1.0), 3, 1), 0.75, 1e-10);
  EXPECT_NEAR(prophet_value(Distribution::uniform(0.0, 1.0), 2, 2), 1.0, 1e-10);
  EXPECT_NEAR(prophet_value(Distribution::exponential(1.0), 2, 1), 1.5, 1e-10);
}

TEST(BestFixedPrice, Examples) {
  const PolicyEvaluation one = best_fixed_price(Distribution::pareto(2.0), 1, 1);
  EXPECT_NEAR(one.ratio, 1.0, 1e-8);
  EXPECT_NEAR(one.threshold, 1.0, 1e-6);
  // Uniform with one unit: value (1 + T)(1 - T^n) / 2, maximized on a fine grid.
  double grid_best = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double T = i / 200000.0;
    grid_best = std::max(grid_best, 0.5 * (1.0 + T) * (1.0 - std::pow(T, 50)));
  }
  const PolicyEvaluation uni = best_fixed_price(Distribution::uniform(0.0, 1.0), 50, 1);
  EXPECT_GE(uni.fp_value, grid_best - 1e-12);
  EXPECT_NEAR(uni.ratio, grid_best * 51.0 / 50.0, 1e-8);
}

TEST(BestFixedPrice, BeatsThresholdGrid) {
  for (const auto& d : {Distribution::pareto(2.0), Distribution::exponential(1.0)}) {
    const PolicyEvaluation best = best_fixed_price(d, 30, 2);
    for (int i = 1; i < 400; ++i) {
      const double T = d.quantile(i / 400.0);
      EXPECT_GE(best.fp_value, fixed_price_value_exact(d, 30, 2, T) - 1e-10) << d.spec() << T;
    }
  }
}

TEST(BestFixedPrice, RatioNeverExceedsOne) {
  for (const auto& d : {Distribution::pareto(1.3), Distribution::exponential(2.0),
                        Distribution::uniform(0.0, 1.0), Distribution::bounded_power(2.0, 3.0)}) {
    for (long n : {1L, 5L, 200L}) {
      for (long k : {1L, 3L}) {
        if (k > n) continue;
        const PolicyEvaluation e = best_fixed_price(d, n, k);
        EXPECT_LE(e.ratio, 1.0 + 1e-9) << d.spec();
        EXPECT_GE(e.ratio, 0.0);
        EXPECT_LE(e.fp_value, e.prophet_value + 1e-9);
      }
    }
  }
}

TEST(BestFixedPrice, ParetoAtWorstShapeApproachesGuarantee) {
  const double alpha = minimize_phi_1().alpha;
  const PolicyEvaluation e = best_fixed_price(Distribution::pareto(alpha), 10000, 1);
  EXPECT_GE(e.ratio, 0.70);
  EXPECT_LE(e.ratio, 0.73);
  const PolicyEvaluation far = best_fixed_price(Distribution::pareto(1.656), 100000, 1);
  EXPECT_NEAR(far.ratio, 0.712, 0.02);
}

TEST(TheoryThreshold, Examples) {
  EXPECT_NEAR(theory_threshold(Distribution::frechet(0.0, 289.0, 2.24), 509, 0.849), 3962.5, 1.0);
  EXPECT_NEAR(theory_threshold(Distribution::pareto(2.0), 4, 1.0), 2.0, 1e-12);
  EXPECT_NEAR(theory_threshold(Distribution::exponential(1.0), 3, 0.0), std::log(3.0), 1e-12);
  EXPECT_NEAR(theory_threshold(Distribution::uniform(0.0, 1.0), 10, 0.05), 0.95, 1e-15);
  EXPECT_THROW(theory_threshold(Distribution::pareto(2.0), 0, 1.0), DomainError);
}

TEST(MonteCarlo, AgreesWithExactFormula) {
  SimulationConfig cfg;
  cfg.replications = 100000;
  const MonteCarloEstimate mc = monte_carlo_evaluate(Distribution::pareto(2.0), 20, 3, 2.0, cfg);
  const double exact = fixed_price_value_exact(Distribution::pareto(2.0), 20, 3, 2.0);
  EXPECT_LE(std::abs(mc.mean - exact), 4.0 * mc.std_error);
  EXPECT_EQ(mc.replications, 100000);
}

TEST(MonteCarlo, ZScorePanel) {
  SimulationConfig cfg;
  cfg.replications = 100000;
  cfg.parallel_chunks = 2;
  for (const auto& d : {Distribution::pareto(2.5), Distribution::exponential(1.0),
                        Distribution::uniform(0.0, 1.0)}) {
    for (long n : {3L, 8L, 15L}) {
      for (long k : {1L, 2L, 3L}) {
        const double T = d.quantile(1.0 - 1.5 / static_cast<double>(n));
        const MonteCarloEstimate mc = monte_carlo_evaluate(d, n, k, T, cfg);
        const double exact = fixed_price_value_exact(d, n, k, T);
        EXPECT_LE(std::abs(mc.mean - exact), 4.0 * mc.std_error)
            << d.spec() << " n=" << n << " k=" << k;
      }
    }
  }
}

TEST(MonteCarlo, NothingSoldAtUpperEndpoint) {
  SimulationConfig cfg;
  cfg.replications = 1000;
  const MonteCarloEstimate mc = monte_carlo_evaluate(Distribution::uniform(0.0, 1.0), 10, 2, 1.0, cfg);
  EXPECT_DOUBLE_EQ(mc.mean, 0.0);
  EXPECT_DOUBLE_EQ(mc.std_error, 0.0);
}

TEST(MonteCarlo, DeterministicAcrossThreadCounts) {
  SimulationConfig cfg;
  cfg.replications = 5000;
  cfg.seed = 42;
  const Distribution d = Distribution::exponential(1.0);
  const MonteCarloEstimate a = monte_carlo_evaluate(d, 12, 2, 1.0, cfg);
  const MonteCarloEstimate b = monte_carlo_evaluate(d, 12, 2, 1.0, cfg);
  cfg.parallel_chunks = 4;
  const MonteCarloEstimate c = monte_carlo_evaluate(d, 12, 2, 1.0, cfg);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.mean), std::bit_cast<std::uint64_t>(b.mean));
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.mean), std::bit_cast<std::uint64_t>(c.mean));
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.std_error), std::bit_cast<std::uint64_t>(c.std_error));
  cfg.seed = 43;
  EXPECT_NE(monte_carlo_evaluate(d, 12, 2, 1.0, cfg).mean, a.mean);
}

TEST(MonteCarlo, RejectsTooFewReplications) {
  SimulationConfig cfg;
  cfg.replications = 99;
  EXPECT_THROW(monte_carlo_evaluate(Distribution::exponential(1.0), 5, 1, 1.0, cfg), DomainError);
}

TEST(DrawSample, ReproducibleAndDistributed) {
  const Distribution d = Distribution::uniform(0.0, 1.0);
  const auto a = draw_sample(d, 20000, 7);
  EXPECT_EQ(a, draw_sample(d, 20000, 7));
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= static_cast<double>(a.size());
  EXPECT_NEAR(mean, 0.5, 0.01);
}

TEST(ConvergenceTable, ParetoApproachesGuaranteeFromAbove) {
  const std::vector<long> grid{10, 100, 1000, 10000};
  const auto rows = convergence_table(Distribution::pareto(2.0), 1, grid, {ThresholdMode::BestT, 0.0});
  ASSERT_EQ(rows.size(), 4u);
  const double limit = phi_1_closed(2.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].n, grid[i]);
    EXPECT_GE(rows[i].ratio, limit - 1e-9);
    if (i > 0) {
      EXPECT_LE(std::abs(rows[i].ratio - limit), std::abs(rows[i - 1].ratio - limit) + 1e-12);
    }
  }
  EXPECT_NEAR(rows.back().ratio, limit, 2e-3);
}

TEST(ConvergenceTable, LightAndBoundedTailsTrendToOne) {
  const std::vector<long> grid{10, 100, 1000, 10000};
  const auto expo = convergence_table(Distribution::exponential(1.0), 1, grid, {});
  for (std::size_t i = 1; i < expo.size(); ++i) EXPECT_GT(expo[i].ratio, expo[i - 1].ratio);
  const std::vector<long> small{10, 100};
  const auto bounded = convergence_table(Distribution::bounded_power(1.0, 1.0), 2, small, {});
  EXPECT_GT(bounded[1].ratio, bounded[0].ratio);
  EXPECT_GT(bounded[1].ratio, 0.95);
}

TEST(ConvergenceTable, TheoryModeUsesThresholdRule) {
  const std::vector<long> grid{50, 500};
  const double u = u_star(2.0);
  const auto rows = convergence_table(Distribution::pareto(2.0), 1, grid,
                                      {ThresholdMode::TheoryT, u});
  EXPECT_NEAR(rows[1].threshold, u * std::sqrt(500.0), 1e-9);
}

TEST(ConvergenceTable, RejectsBadGrids) {
  const std::vector<long> decreasing{100, 10};
  EXPECT_THROW(convergence_table(Distribution::pareto(2.0), 1, decreasing, {}), DomainError);
  const std::vector<long> small{2, 10};
  EXPECT_THROW(convergence_table(Distribution::pareto(2.0), 3, small, {}), DomainError);
}

TEST(EvaluationCsv, HeaderAndRows) {
  const std::vector<PolicyEvaluation> rows{{10, 1, 2.5, 1.25, 2.0, 0.625}};
  std::ostringstream out;
  write_evaluation_csv(out, rows);
  EXPECT_EQ(out.str(), "n,k,threshold,fp_value,prophet_value,ratio\n10,1,2.5,1.25,2,0.625\n");
}

}  // namespace
}  // namespace fixprice
