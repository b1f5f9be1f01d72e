#include <gtest/gtest.h>

#include <random>

#include <codedgraph/analysis.hpp>

namespace cg = codedgraph;

TEST(Bounds, ErdosRenyiValues) {
  const auto b = cg::er_bounds(0.1, 5, 2);
  EXPECT_NEAR(b.uncoded, 0.06, 1e-15);
  EXPECT_NEAR(b.coded_upper, 0.03, 1e-15);
  ASSERT_TRUE(b.lower.has_value());
  EXPECT_NEAR(*b.lower, 0.03, 1e-15);
  EXPECT_EQ(cg::er_bounds(0.3, 4, 4).coded_upper, 0.0);
  EXPECT_THROW(cg::er_bounds(1.2, 4, 2), cg::ParameterError);
  EXPECT_THROW(cg::er_bounds(0.2, 4, 5), cg::ParameterError);
}

TEST(Bounds, AllocationConverseForUniformProfileMatchesErConverse) {
  cg::MultiplicityProfile prof{{0, 0, 100, 0, 0, 0}};
  EXPECT_NEAR(cg::allocation_lower_bound(prof, 0.1, 5, 100), *cg::er_bounds(0.1, 5, 2).lower, 1e-15);
}

TEST(Bounds, SpreadingMultiplicitiesNeverLowersTheConverse) {
  // Moves keep sum a_j = n and sum j a_j = r n; the concentrated profile is the minimum.
  const std::size_t K = 6, r = 3, n = 120;
  const double p = 0.2;
  std::vector<std::size_t> a(K + 1, 0);
  a[r] = n;
  const double spike = cg::allocation_lower_bound({a}, p, K, n);
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> pick(1, K);
  std::size_t moves = 0;
  for (int step = 0; step < 20000; ++step) {
    const std::size_t i = pick(rng), j = pick(rng);
    // Move one vertex i -> i-1 and one j -> j+1.
    if (i < 2 || j + 1 > K || a[i] == 0 || a[j] == 0 || (i == j && a[i] < 2)) continue;
    --a[i];
    ++a[i - 1];
    --a[j];
    ++a[j + 1];
    ++moves;
    cg::MultiplicityProfile prof{a};
    ASSERT_EQ(prof.total(), n);
    ASSERT_EQ(prof.weighted_total(), r * n);
    EXPECT_GE(cg::allocation_lower_bound(prof, p, K, n), spike - 1e-15);
  }
  EXPECT_GE(moves, 10000u);
}

TEST(Bounds, AllocationConverseValidatesProfile) {
  EXPECT_THROW(cg::allocation_lower_bound({{0, 5, 5}}, 0.1, 3, 10), cg::ParameterError);
  EXPECT_THROW(cg::allocation_lower_bound({{1, 4, 5}}, 0.1, 2, 10), cg::ParameterError);
  EXPECT_THROW(cg::allocation_lower_bound({{0, 4, 5}}, 0.1, 2, 10), cg::ParameterError);
}

TEST(Bounds, RandomBipartiteValues) {
  const auto b = cg::rb_bounds(0.2, 6, 1);
  EXPECT_NEAR(b.uncoded, 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(b.coded_upper, 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(*b.lower, 1.0 / 60.0, 1e-15);
  const auto c = cg::rb_bounds(0.2, 8, 2);
  EXPECT_NEAR(c.coded_upper / *c.lower, 4.0, 1e-12);
  EXPECT_THROW(cg::rb_bounds(0.2, 5, 3), cg::ParameterError);
}

TEST(Bounds, BlockModelWithEqualProbabilitiesIsErdosRenyi) {
  const auto s = cg::sbm_bounds(70, 30, 0.15, 0.15, 5, 2);
  const auto e = cg::er_bounds(0.15, 5, 2);
  EXPECT_NEAR(s.uncoded, e.uncoded, 1e-15);
  EXPECT_NEAR(s.coded_upper, e.coded_upper, 1e-15);
  EXPECT_NEAR(*s.lower, *e.lower, 1e-15);
  EXPECT_THROW(cg::sbm_bounds(70, 30, 0.1, 0.2, 5, 2), cg::ParameterError);
}

TEST(Bounds, BlockModelDensityWeighting) {
  // n1 = n2: density (p + q) / 2.
  const auto s = cg::sbm_bounds(50, 50, 0.4, 0.1, 4, 2);
  EXPECT_NEAR(s.coded_upper, 0.25 * 0.5 * 0.5, 1e-15);
  EXPECT_NEAR(s.uncoded, 2.0 * s.coded_upper, 1e-15);
  EXPECT_NEAR(*s.lower, 0.1 * 0.25, 1e-15);
}

TEST(Bounds, PowerLawTendsToTradeoffForSteepTails) {
  EXPECT_NEAR(cg::pl_bound(1e6, 5, 2).coded_upper, 0.3, 1e-6);
  EXPECT_NEAR(cg::pl_bound(3.0, 5, 2).coded_upper, 0.6, 1e-15);
  EXPECT_NEAR(cg::pl_bound(3.0, 5, 2).uncoded, 1.2, 1e-15);
  EXPECT_FALSE(cg::pl_bound(3.0, 5, 2).lower.has_value());
  EXPECT_THROW(cg::pl_bound(2.0, 5, 2), cg::ParameterError);
}

TEST(Bounds, OrderingHoldsOverAGrid) {
  for (std::size_t K = 2; K <= 10; ++K)
    for (std::size_t r = 1; r <= K; ++r)
      for (double p : {0.0, 0.05, 0.5, 1.0}) {
        const auto b = cg::er_bounds(p, K, r);
        EXPECT_LE(*b.lower, b.coded_upper + 1e-15);
        EXPECT_LE(b.coded_upper, b.uncoded + 1e-15);
        if (2 * r <= K) {
          const auto rb = cg::rb_bounds(p, K, r);
          EXPECT_LE(*rb.lower, rb.coded_upper);
          EXPECT_LE(rb.coded_upper, rb.uncoded + 1e-15);
        }
      }
}

TEST(QEstimate, LoadOneIsUnbiased) {
  const auto e = cg::expected_q_monte_carlo(100, 0.2, 5, 1, 200, 3);
  EXPECT_DOUBLE_EQ(e.g_tilde, 400.0);
  EXPECT_NEAR(e.ratio, 1.0, 4.0 * e.ratio_stderr);
}

TEST(QEstimate, MaximumStaysInsideFiniteSampleWindow) {
  const auto e = cg::expected_q_monte_carlo(300, 0.1, 5, 3, 100, 1);
  EXPECT_GE(e.ratio, 1.0 - 4.0 * e.ratio_stderr);
  EXPECT_LE(e.ratio, cg::q_ratio_window(e.g_tilde, 0.1, 3) + 4.0 * e.ratio_stderr);
  EXPECT_EQ(cg::expected_q_monte_carlo(60, 0.1, 5, 2, 4, 9, 1).mean_q,
            cg::expected_q_monte_carlo(60, 0.1, 5, 2, 4, 9, 3).mean_q);
  EXPECT_THROW(cg::expected_q_monte_carlo(60, 0.1, 5, 5, 4, 9), cg::ParameterError);
}

TEST(RStar, BalancesMapAndShuffle) {
  EXPECT_DOUBLE_EQ(cg::r_star(1.0, 4.0), 2.0);
  EXPECT_DOUBLE_EQ(cg::r_star(2.0, 0.0), 0.0);
  EXPECT_THROW(cg::r_star(0.0, 1.0), cg::ParameterError);
  EXPECT_THROW(cg::r_star(1.0, -1.0), cg::ParameterError);
}
