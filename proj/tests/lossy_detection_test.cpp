// Copyright 2026 The lrphase Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lrphase.hpp"
#include "test_util.hpp"

namespace lrphase {
namespace {

constexpr double kPi = std::numbers::pi;

double total_probability(const OutcomeLikelihoodTable& t, double phi, double theta) {
  double acc = 0.0;
  for (const auto& e : t.entries()) acc += evaluate_outcome(t, e.outcome, phi, theta);
  return acc;
}

TEST(ACoefficient, Examples) {
  EXPECT_DOUBLE_EQ(a_coefficient(2, 0, 0, 0, 1.0), 1.0);
  EXPECT_NEAR(a_coefficient(2, 2, 0, 1, 0.5), 0.5, 1e-15);
  for (int l = 0; l < 3; ++l)
    for (int r = 0; r <= 3 - l; ++r) EXPECT_EQ(a_coefficient(3, l, r, 0, 0.0), 0.0);
}

TEST(ACoefficient, RejectsOutOfRange) {
  EXPECT_THROW(a_coefficient(2, 3, 0, 0, 0.5), std::out_of_range);
  EXPECT_THROW(a_coefficient(2, 1, 2, 0, 0.5), std::out_of_range);
  EXPECT_THROW(a_coefficient(2, 1, 0, 2, 0.5), std::out_of_range);
  EXPECT_THROW(a_coefficient(2, 1, 0, 0, 1.5), std::invalid_argument);
}

TEST(Table, OutcomeCounts) {
  EXPECT_EQ(build_likelihood_table(make_single_photon(), 0.5).entries().size(), 3u);
  EXPECT_EQ(build_likelihood_table(make_loss_resistant({1, 1.0}), 0.5).entries().size(), 6u);
  EXPECT_EQ(build_likelihood_table(make_loss_resistant({2, 1.0}), 0.5).entries().size(), 15u);
  EXPECT_EQ(outcome_count(4), 15u);
}

TEST(Table, LookupByOutcome) {
  const auto t = build_likelihood_table(make_loss_resistant({2, 1.3}), 0.6);
  for (const auto& e : t.entries()) EXPECT_EQ(t.entry(e.outcome).outcome, e.outcome);
  EXPECT_THROW(t.entry({1, 4}), std::out_of_range);
  EXPECT_THROW(t.entry({5, 0}), std::out_of_range);
}

TEST(Table, LosslessLimit) {
  const auto t = build_likelihood_table(make_loss_resistant({1, 1.7}), 1.0);
  for (const auto& e : t.entries())
    if (e.outcome.lost > 0) EXPECT_EQ(evaluate_outcome(t, e.outcome, 0.3, 1.1), 0.0);
  double detected = 0.0;
  for (int k = 0; k <= 2; ++k) detected += evaluate_outcome(t, {0, k}, 0.3, 1.1);
  EXPECT_NEAR(detected, 1.0, 1e-14);
}

TEST(Table, SinglePhotonFringe) {
  const auto t = build_likelihood_table(make_single_photon(), 1.0);
  for (int i = 0; i < 16; ++i) {
    const double delta = kTwoPi * i / 16;
    const double p0 = evaluate_outcome(t, {0, 0}, delta, 0.0);
    const double p1 = evaluate_outcome(t, {0, 1}, delta, 0.0);
    EXPECT_NEAR(p0, 0.5 * (1 + std::cos(delta)), 1e-15);
    EXPECT_NEAR(p1, 0.5 * (1 - std::cos(delta)), 1e-15);
  }
}

TEST(Table, SinglePhotonLossIsPhaseFree) {
  const auto t = build_likelihood_table(make_single_photon(), 0.6);
  EXPECT_TRUE(t.entry({1, 0}).phase_free());
  for (int i = 0; i < 8; ++i)
    EXPECT_NEAR(evaluate_outcome(t, {1, 0}, 0.7 * i, 0.3 * i), 0.4, 1e-15);
}

TEST(Table, TwoPhotonNoonLossDestroysPhase) {
  const auto t = build_likelihood_table(make_loss_resistant({1, 0.0}), 0.6);
  for (int k = 0; k <= 1; ++k) {
    const auto& e = t.entry({1, k});
    for (int d = -1; d <= 1; ++d)
      if (d != 0) EXPECT_NEAR(std::abs(e.coeff(d)), 0.0, 1e-15);
  }
}

TEST(Table, LossResistantStateKeepsPhaseAfterLoss) {
  const auto t = build_likelihood_table(make_loss_resistant({1, 1.7}), 0.6);
  EXPECT_GT(std::abs(t.entry({1, 0}).coeff(1)), 1e-3);
}

TEST(Table, NoonSuperResolution) {
  const auto noon = make_loss_resistant({1, 0.0});
  const auto a = oracle_probabilities(noon, 1.0, 0.0, 0.0);
  const auto b = oracle_probabilities(noon, 1.0, kPi / 2, 0.0);
  const auto c = oracle_probabilities(noon, 1.0, kPi, 0.0);
  const double even_a = a.at({0, 0}) + a.at({0, 2});
  const double even_b = b.at({0, 0}) + b.at({0, 2});
  EXPECT_GT(std::abs(even_a - even_b), 0.5);
  for (const auto& [o, p] : a) EXPECT_NEAR(p, c.at(o), 1e-14);
}

TEST(Table, MatchesStateVectorOracle) {
  std::mt19937_64 rng(11);
  for (int n : {1, 2, 4})
    for (double eta : {0.25, 0.6, 1.0}) {
      const auto state = n == 1 ? make_single_photon() : make_loss_resistant({n / 2, 1.7});
      const auto t = build_likelihood_table(state, eta);
      for (int s = 0; s < 16; ++s) {
        const double phi = testing::uniform(rng, 0, kTwoPi);
        const double theta = testing::uniform(rng, 0, kTwoPi);
        const auto oracle = oracle_probabilities(state, eta, phi, theta);
        ASSERT_EQ(oracle.size(), t.entries().size());
        for (const auto& [o, p] : oracle) EXPECT_NEAR(evaluate_outcome(t, o, phi, theta), p, 1e-10);
      }
    }
}

TEST(Table, MatchesOracleForRandomComplexStates) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const double eta = testing::uniform(rng, 0.0, 1.0);
    const auto state = testing::random_state(rng, n);
    const auto t = build_likelihood_table(state, eta);
    const double phi = testing::uniform(rng, 0, kTwoPi);
    const double theta = testing::uniform(rng, 0, kTwoPi);
    for (const auto& [o, p] : oracle_probabilities(state, eta, phi, theta))
      EXPECT_NEAR(evaluate_outcome(t, o, phi, theta), p, 1e-10);
  }
}

TEST(Table, CompletenessOnGrid) {
  std::mt19937_64 rng(13);
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i <= 20; ++i)
      for (double eta : {0.0, 0.3, 0.6, 1.0}) {
        const auto t = build_likelihood_table(make_loss_resistant({n, 0.1 * i}), eta);
        for (int s = 0; s < 32; ++s)
          EXPECT_NEAR(total_probability(t, testing::uniform(rng, 0, kTwoPi), testing::uniform(rng, 0, kTwoPi)),
                      1.0, 1e-12);
      }
  const auto t = build_likelihood_table(make_loss_resistant({2, 1.0}), 0.7);
  EXPECT_NEAR(total_probability(t, 1.234, 0.567), 1.0, 1e-12);
}

TEST(Table, LossMarginalIsBinomial) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const double eta = testing::uniform(rng, 0.0, 1.0);
    const auto t = build_likelihood_table(testing::random_state(rng, n), eta);
    const double phi = testing::uniform(rng, 0, kTwoPi);
    const double theta = testing::uniform(rng, 0, kTwoPi);
    for (int l = 0; l <= n; ++l) {
      double acc = 0.0;
      for (int k = 0; k <= n - l; ++k) acc += evaluate_outcome(t, {l, k}, phi, theta);
      EXPECT_NEAR(acc, binomial(n, l) * std::pow(eta, n - l) * std::pow(1 - eta, l), 1e-12);
    }
  }
}

TEST(Table, NonNegativeOnDenseGrid) {
  for (int n = 1; n <= 3; ++n)
    for (int i = 0; i <= 10; ++i) {
      const auto t = build_likelihood_table(make_loss_resistant({n, 0.2 * i}), 0.55);
      for (const auto& e : t.entries())
        for (int j = 0; j < 256; ++j) EXPECT_GE(detail::series_at(e, kTwoPi * j / 256).real(), -1e-12);
    }
}

TEST(Table, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const auto t = build_likelihood_table(testing::random_state(rng, n), testing::uniform(rng, 0.2, 1.0));
    const double phi = testing::uniform(rng, 0, kTwoPi);
    const double theta = testing::uniform(rng, 0, kTwoPi);
    for (const auto& e : t.entries()) {
      const double h = 1e-5;
      const double fd = (detail::series_at(e, phi + h - theta).real() - detail::series_at(e, phi - h - theta).real()) / (2 * h);
      const double an = evaluate_outcome_derivative(t, e.outcome, phi, theta);
      EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST(Oracle, RejectsLargeStates) {
  EXPECT_THROW(oracle_probabilities(make_loss_resistant({4, 1.0}), 0.5, 0.0, 0.0), std::invalid_argument);
}

TEST(Oracle, SinglePhotonLoss) {
  const auto p = oracle_probabilities(make_single_photon(), 0.6, 0.9, 0.1);
  EXPECT_NEAR(p.at({1, 0}), 0.4, 1e-15);
  EXPECT_NEAR(p.at({0, 0}) + p.at({0, 1}), 0.6, 1e-15);
}

TEST(LossChannel, RejectsBadEta) {
  EXPECT_THROW(build_likelihood_table(make_single_photon(), 1.2), std::invalid_argument);
  EXPECT_THROW(build_likelihood_table(make_single_photon(), -0.1), std::invalid_argument);
}

}  // namespace
}  // namespace lrphase
