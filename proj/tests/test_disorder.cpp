#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <map>
#include <random>

#include "qheat/disorder.hpp"

using namespace qheat;

namespace {

const DiscreteWaitingDist kBimodal = DiscreteWaitingDist::bimodal(0.01, 3.0, 0.3);

double weight_sum(const std::vector<SequenceRealization>& rs) {
  double s = 0.0;
  for (const auto& r : rs) s += r.weight;
  return s;
}

}  // namespace

TEST(DiscreteWaitingDist, Validation) {
  EXPECT_THROW(DiscreteWaitingDist({0.1, 0.2}, {0.5, 0.6}), Error);
  EXPECT_THROW(DiscreteWaitingDist({0.0}, {1.0}), Error);
  EXPECT_THROW(DiscreteWaitingDist({0.1, 0.1}, {0.5, 0.5}), Error);
  EXPECT_THROW(DiscreteWaitingDist({0.1}, {-0.1}), Error);
  EXPECT_THROW(Fixed(0.0), Error);
  EXPECT_NO_THROW(DiscreteWaitingDist({0.1, 0.2, 0.4}, {0.2, 0.3, 0.5}));
}

TEST(Moments, Definitions) {
  const auto single = DiscreteWaitingDist::single(0.5);
  EXPECT_DOUBLE_EQ(mean_tau(single), 0.5);
  EXPECT_DOUBLE_EQ(second_moment_tau(single), 0.25);
  const auto bimodal = DiscreteWaitingDist::bimodal(0.1, 1.5, 0.3);
  EXPECT_NEAR(mean_tau(bimodal), 0.3 * 0.1 + 0.7 * 1.5, 1e-15);
  EXPECT_NEAR(second_moment_tau(bimodal), 0.3 * 0.01 + 0.7 * 2.25, 1e-15);
}

TEST(Moments, VarianceNonNegative) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> uni(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(4), p(4);
    double total = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      v[j] = uni(gen) + 0.001 * static_cast<double>(j);
      p[j] = uni(gen);
      total += p[j];
    }
    for (auto& x : p) x /= total;
    p[3] = 1.0 - p[0] - p[1] - p[2];
    const DiscreteWaitingDist dist(v, p);
    EXPECT_GE(second_moment_tau(dist) - mean_tau(dist) * mean_tau(dist), -1e-12);
  }
}

TEST(SampleTaus, FixedAndDegenerateQuenched) {
  Rng rng(42);
  EXPECT_EQ(sample_taus(Fixed(0.5), 4, rng), std::vector<double>(4, 0.5));
  const Quenched always_first{DiscreteWaitingDist::bimodal(0.2, 0.7, 1.0)};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_taus(always_first, 3, rng), std::vector<double>(3, 0.2));
  EXPECT_THROW(sample_taus(Fixed(0.5), 0, rng), Error);
}

TEST(SampleTaus, QuenchedIsConstantWithinSequence) {
  Rng rng(43);
  for (int i = 0; i < 200; ++i) {
    const auto taus = sample_taus(Quenched{kBimodal}, 6, rng);
    for (double t : taus) EXPECT_EQ(t, taus.front());
  }
}

TEST(SampleTaus, AnnealedFrequencyWithinBinomialBand) {
  Rng rng(44);
  const int n = 100000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += sample_taus(Annealed{kBimodal}, 1, rng)[0] == 0.01;
  const double sigma = std::sqrt(n * 0.3 * 0.7);
  EXPECT_LT(std::abs(first - 0.3 * n), 3.0 * sigma);
}

TEST(Enumerate, CountsAndWeights) {
  const auto fixed = enumerate_realizations(Fixed(0.4), 5);
  ASSERT_EQ(fixed.size(), 1u);
  EXPECT_EQ(fixed[0].weight, 1.0);
  EXPECT_EQ(fixed[0].taus, std::vector<double>(5, 0.4));

  const auto quenched = enumerate_realizations(Quenched{kBimodal}, 3);
  ASSERT_EQ(quenched.size(), 2u);
  EXPECT_DOUBLE_EQ(quenched[0].weight, 0.3);
  EXPECT_DOUBLE_EQ(quenched[1].weight, 0.7);

  const auto annealed = enumerate_realizations(Annealed{kBimodal}, 3);
  ASSERT_EQ(annealed.size(), 8u);
  // grouped by how many draws hit tau^(1): binomial(3, k) 0.3^k 0.7^(3-k)
  std::map<int, double> by_count;
  for (const auto& r : annealed) {
    int k = 0;
    for (double t : r.taus) k += t == 0.01;
    by_count[k] += r.weight;
  }
  const double binom[] = {1, 3, 3, 1};
  for (int k = 0; k <= 3; ++k) EXPECT_NEAR(by_count[k], binom[k] * std::pow(0.3, k) * std::pow(0.7, 3 - k), 1e-15);
}

TEST(Enumerate, WeightsSumToOneUpToTwelveSteps) {
  const DiscreteWaitingDist three({0.1, 0.4, 0.9}, {0.2, 0.5, 0.3});
  for (int m = 1; m <= 12; ++m) {
    EXPECT_NEAR(weight_sum(enumerate_realizations(Fixed(0.3), m)), 1.0, 1e-12);
    EXPECT_NEAR(weight_sum(enumerate_realizations(Quenched{three}, m)), 1.0, 1e-12);
    EXPECT_NEAR(weight_sum(enumerate_realizations(Annealed{kBimodal}, m)), 1.0, 1e-12);
    for (const auto& r : enumerate_realizations(Quenched{three}, m))
      for (double t : r.taus) EXPECT_EQ(t, r.taus.front());
  }
  for (int m = 1; m <= 9; ++m) EXPECT_NEAR(weight_sum(enumerate_realizations(Annealed{three}, m)), 1.0, 1e-12);
}

TEST(Enumerate, CapIsEnforced) {
  try {
    enumerate_realizations(Annealed{kBimodal}, 21);
    FAIL() << "expected EnumerationTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EnumerationTooLarge);
  }
  EXPECT_NO_THROW(enumerate_realizations(Annealed{kBimodal}, 4, 16));
  EXPECT_THROW(enumerate_realizations(Annealed{kBimodal}, 5, 16), Error);
}

TEST(SampleTaus, EmpiricalLawMatchesEnumerationChiSquare) {
  const int m = 3;
  const auto exact = enumerate_realizations(Annealed{kBimodal}, m);
  std::map<std::vector<double>, int> counts;
  Rng rng(45);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_taus(Annealed{kBimodal}, m, rng)];
  double chi2 = 0.0;
  for (const auto& r : exact) {
    const double expected = r.weight * n;
    const double diff = counts[r.taus] - expected;
    chi2 += diff * diff / expected;
  }
  const boost::math::chi_squared law(static_cast<double>(exact.size() - 1));
  EXPECT_LT(chi2, boost::math::quantile(law, 0.99));
}

TEST(FixedTotalTime, FixedModel) {
  Rng rng(46);
  const auto five = sample_fixed_total_time(Fixed(1.0), 5.0, rng);
  EXPECT_EQ(five.m_count, 5);
  EXPECT_EQ(five.taus, std::vector<double>(5, 1.0));
  EXPECT_EQ(sample_fixed_total_time(Fixed(2.0), 5.0, rng).m_count, 2);
  EXPECT_EQ(sample_fixed_total_time(Fixed(6.0), 5.0, rng).m_count, 0);
  // exact divisors with inexact binary sums stay inclusive
  EXPECT_EQ(sample_fixed_total_time(Fixed(0.1), 1.0, rng).m_count, 10);
  EXPECT_EQ(sample_fixed_total_time(Fixed(0.3), 0.9, rng).m_count, 3);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> uni(0.05, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double tau = uni(gen), total = 5.0 * uni(gen);
    const double ratio = total / tau;
    if (std::abs(ratio - std::round(ratio)) < 1e-6) continue;
    EXPECT_EQ(sample_fixed_total_time(Fixed(tau), total, rng).m_count, static_cast<int>(std::floor(ratio)));
  }
}

TEST(FixedTotalTime, AnnealedMeanCountRenewal) {
  const Annealed model{DiscreteWaitingDist::bimodal(0.1, 0.5, 0.5)};
  Rng rng(47);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto draw = sample_fixed_total_time(model, 5.0, rng);
    double elapsed = 0.0;
    for (double t : draw.taus) elapsed += t;
    ASSERT_LE(elapsed, 5.0 + 1e-12);
    sum += draw.m_count;
    sum2 += double(draw.m_count) * draw.m_count;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  // Exact renewal mean E[M] = sum_n P(S_n <= T), S_n a binomial mixture of the
  // two atoms. T/<tau> = 16.67 is only its leading term (renewal offset ~ -0.3).
  double exact = 0.0;
  for (int steps = 1; steps <= 60; ++steps) {
    for (int a = 0; a <= steps; ++a) {
      if (0.1 * a + 0.5 * (steps - a) > 5.0 + 1e-12) continue;
      exact += std::exp(std::lgamma(steps + 1.0) - std::lgamma(a + 1.0) - std::lgamma(steps - a + 1.0)) *
               std::pow(0.5, steps);
    }
  }
  EXPECT_LT(std::abs(mean - exact), 3.0 * se);
  EXPECT_NEAR(exact, 5.0 / 0.3, 1.0);
}

TEST(FixedTotalTime, EnumerationWeightsSumToOne) {
  EXPECT_NEAR(weight_sum(enumerate_fixed_total_time(Annealed{DiscreteWaitingDist::bimodal(0.3, 0.7, 0.4)}, 3.0)), 1.0, 1e-12);
  const auto q = enumerate_fixed_total_time(Quenched{DiscreteWaitingDist::bimodal(1.0, 2.0, 0.25)}, 5.0);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].taus.size(), 5u);
  EXPECT_EQ(q[1].taus.size(), 2u);
  const auto none = enumerate_fixed_total_time(Fixed(6.0), 5.0);
  ASSERT_EQ(none.size(), 1u);
  EXPECT_TRUE(none[0].taus.empty());
}

TEST(Rng, DerivedStreamsAreReproducible) {
  Rng a = Rng::for_index(99, 5), b = Rng::for_index(99, 5), c = Rng::for_index(99, 6);
  const double x = a.uniform();
  EXPECT_EQ(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  EXPECT_GE(x, 0.0);
  EXPECT_LT(x, 1.0);
}
