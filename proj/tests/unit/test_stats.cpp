#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include "kpzlab/parallel.hpp"
#include "kpzlab/stats.hpp"

using namespace kpzlab;

TEST(KsTwoSample, HandExamples) {
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {4, 5, 6}).statistic, 1.0);
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 2, 3}, {3, 2, 1}).statistic, 0.0);
  EXPECT_DOUBLE_EQ(ks_two_sample({1, 1, 2, 2}, {1, 2, 2, 2}).statistic, 0.25);
  const auto r = ks_two_sample({0.0, 1.0}, {0.5});
  EXPECT_DOUBLE_EQ(r.statistic, 0.5);
  EXPECT_DOUBLE_EQ(r.threshold, 1.628 * std::sqrt(1.5));
  EXPECT_TRUE(r.pass);
  EXPECT_THROW(ks_two_sample(std::vector<double>{}, {1.0}), std::invalid_argument);
}

TEST(KsTwoSample, CriticalValues) {
  EXPECT_DOUBLE_EQ(ks_critical_value(0.01), 1.628);
  EXPECT_NEAR(ks_critical_value(0.05), 1.3581, 1e-4);
  EXPECT_THROW(ks_critical_value(0.0), std::invalid_argument);
}

TEST(KsTwoSample, DetectsShiftAndCalibratesNull) {
  CounterRng rng(1);
  std::vector<double> a(1000), b(1000);
  for (auto& x : a) x = rng.normal(0.0, 1.0);
  for (auto& x : b) x = rng.normal(0.3, 1.0);
  EXPECT_FALSE(ks_two_sample(a, b).pass);
  EXPECT_LE(ks_null_rejection_rate(200, 200, 7), 0.05);
}

TEST(Summaries, MeanVariancePearsonWasserstein) {
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 6}), 3.0);
  EXPECT_DOUBLE_EQ(variance({1, 2, 3, 6}), 14.0 / 3.0);
  EXPECT_DOUBLE_EQ(variance({5}), 0.0);
  EXPECT_NEAR(pearson({1, 2, 3}, {2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(pearson({1, 2, 3}, {3, 2, 1}), -1.0, 1e-15);
  EXPECT_DOUBLE_EQ(pearson({1, 2, 3}, {1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1({0, 1}, {1, 3}), 1.5);
  EXPECT_THROW(mean({}), std::invalid_argument);
  EXPECT_THROW(wasserstein1({1}, {1, 2}), std::invalid_argument);
}

TEST(LeastSquares, ExactAndNoisyLines) {
  const auto f = least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-12);
  const auto g = least_squares({0, 1, 2, 3}, {1, 0, 3, 2});
  EXPECT_DOUBLE_EQ(g.slope, 0.6);
  EXPECT_NEAR(g.slope_se, std::sqrt(3.2 / 2.0 / 5.0), 1e-12);
  EXPECT_THROW(least_squares({1, 1}, {0, 1}), std::invalid_argument);
}

TEST(Tails, ExceedanceAndCensoring) {
  EXPECT_EQ(exceedance_curve({-2, 0, 2, 2}), (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(exceedance_curve({-4, -2}), (std::vector<double>{0.0}));
  const auto c = censored_tail({0.5, 0.1, 0.0, 0.0}, 100);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c[2], -std::log(0.01) / 100.0);
  EXPECT_EQ(censored_tail({0.5}, 10).size(), 2u);
}

TEST(Tails, EnvelopeFitRecoversExponential) {
  std::vector<double> tail;
  for (int m = 0; m < 8; ++m) tail.push_back(0.8 * std::exp(-0.7 * m));
  const auto e = fit_exponential_envelope(tail, 1, 7);
  EXPECT_NEAR(e.rate, 0.7, 1e-12);
  EXPECT_NEAR(e.C, 0.8, 1e-12);
  // a bumpy tail is dominated on the fit range
  const std::vector<double> bumpy{1.0, 0.4, 0.3, 0.05, 0.04, 0.001};
  const auto b = fit_exponential_envelope(bumpy, 1, 5);
  for (std::size_t m = 1; m <= 5; ++m) EXPECT_GE(b(static_cast<double>(m)), bumpy[m] * (1 - 1e-12));
  EXPECT_THROW(fit_exponential_envelope({1.0, 0.0, 0.0}, 0, 2), std::invalid_argument);
}

TEST(QuantileTable, InterpolationAndInverse) {
  const QuantileTable t({0.25, 0.5, 0.75}, {0.0, 1.0, 2.0}, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(t.quantile(0.5), 1.0);
  EXPECT_DOUBLE_EQ(t.quantile(0.625), 1.5);
  EXPECT_DOUBLE_EQ(t.quantile(0.125), -0.5);  // linear extension
  EXPECT_DOUBLE_EQ(t.cdf(1.5), 0.625);
  EXPECT_DOUBLE_EQ(t.cdf(-10.0), 0.0);
  EXPECT_DOUBLE_EQ(t.cdf(10.0), 1.0);
  for (double u = 0.05; u < 0.95; u += 0.05) EXPECT_NEAR(t.cdf(t.quantile(u)), u, 1e-12);
  EXPECT_THROW(QuantileTable({0.5, 0.25}, {0.0, 1.0}, 0, 0), std::invalid_argument);
  EXPECT_THROW(QuantileTable({0.25, 0.5}, {1.0, 0.0}, 0, 0), std::invalid_argument);
}

TEST(QuantileTable, OneSampleKsHandExample) {
  const QuantileTable t({0.25, 0.5, 0.75}, {0.0, 1.0, 2.0}, 1.0, 0.5);
  // F(0.5) = 0.375: the empirical CDF jumps from 0 to 1 there
  EXPECT_DOUBLE_EQ(ks_against_table({0.5}, t), 0.625);
  EXPECT_DOUBLE_EQ(ks_against_table({1.0, 1.0}, t), 0.5);
  EXPECT_THROW(ks_against_table({}, t), std::invalid_argument);
}

TEST(QuantileTable, ParseErrors) {
  std::istringstream no_header("# mean,0\n# variance,1\n0.5,0\n");
  EXPECT_THROW(QuantileTable::parse(no_header), std::invalid_argument);
  std::istringstream no_mean("level,quantile\n0.5,0\n");
  EXPECT_THROW(QuantileTable::parse(no_mean), std::invalid_argument);
  std::istringstream ok("# note\n# mean,0.5\n# variance,2\nlevel,quantile\n0.1,-1\n0.9,1\n");
  const auto t = QuantileTable::parse(ok);
  EXPECT_DOUBLE_EQ(t.mean(), 0.5);
  EXPECT_DOUBLE_EQ(t.variance(), 2.0);
  EXPECT_EQ(t.levels().size(), 2u);
  EXPECT_THROW(QuantileTable::load("/nonexistent/table.csv"), std::runtime_error);
}

TEST(QuantileTable, ShippedTableIsTheGueLaw) {
  const auto& t = tw_gue_table();
  EXPECT_NEAR(t.mean(), -1.7711, 1e-4);
  EXPECT_NEAR(t.variance(), 0.8132, 1e-3);
  EXPECT_NEAR(t.quantile(0.5), -1.8055, 2e-3);
  // the table's own mean agrees with the quantile function
  double m = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) m += t.quantile((i + 0.5) / n);
  EXPECT_NEAR(m / n, t.mean(), 0.01);
  // a sample from the table passes its own KS test
  CounterRng rng(3);
  std::vector<double> s(2000);
  for (auto& x : s) x = t.sample(rng);
  EXPECT_LT(ks_against_table(s, t), 1.628 / std::sqrt(2000.0));
}

TEST(Parallel, ResultsIndependentOfJobs) {
  auto run = [](std::size_t jobs) {
    std::vector<std::uint64_t> out(97);
    parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = CounterRng(i)(); });
    return out;
  };
  EXPECT_EQ(run(1), run(4));
  std::atomic<int> calls{0};
  EXPECT_THROW(parallel_for(10, 3,
                            [&](std::size_t i) {
                              ++calls;
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_EQ(calls.load(), 10);
}
