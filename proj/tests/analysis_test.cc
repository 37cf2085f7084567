// Copyright 2026 The dxtext Authors
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

#include "dxtext/analysis.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.h"

namespace dxtext {
namespace {

using ::dxtext::testing::FiveWordStore;
using ::dxtext::testing::IdentityMechanism;
using ::dxtext::testing::MakeStore;
using ::dxtext::testing::RandomStore;
using ::dxtext::testing::ThreeWordStore;
using ::dxtext::testing::TwoProportionZ;
using ::dxtext::testing::TwoWordStore;
using ::dxtext::testing::UniformMechanism;

// Four mutually equidistant points (pairwise distance sqrt 2).
EmbeddingStore TetrahedronStore() {
  return MakeStore({"t0", "t1", "t2", "t3"},
                   {1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1}, 3);
}

TransitionMatrix Uniform(size_t n, uint64_t fingerprint = 0) {
  return *TransitionMatrix::FromProbabilities(
      n, std::vector<double>(n * n, 1.0 / static_cast<double>(n)), 0,
      fingerprint);
}

TransitionMatrix Identity(size_t n, uint64_t fingerprint = 0) {
  std::vector<double> p(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) p[i * n + i] = 1.0;
  return *TransitionMatrix::FromProbabilities(n, p, 0, fingerprint);
}

TEST(DeniabilityStatsTest, IdentityStub) {
  const EmbeddingStore store = ThreeWordStore();
  RngStream rng(1, 0);
  auto s = ComputeDeniabilityStats(store, rng, IdentityMechanism(), WordId(1), 100);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->p_unchanged, 1.0);
  EXPECT_EQ(s->support_size, 1u);
  EXPECT_EQ(s->entropy, 0.0);
  EXPECT_EQ(s->n_trials, 100u);
}

TEST(DeniabilityStatsTest, UniformStub) {
  const EmbeddingStore store = TetrahedronStore();
  RngStream rng(2, 0);
  auto s = ComputeDeniabilityStats(store, rng, UniformMechanism(4), WordId(0), 100000);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->support_size, 4u);
  EXPECT_NEAR(s->entropy, std::log(4.0), 0.01);
  EXPECT_LE(s->entropy, std::log(4.0) + 1e-12);
  EXPECT_NEAR(s->p_unchanged, 0.25, 0.01);
}

TEST(DeniabilityStatsTest, Errors) {
  const EmbeddingStore store = ThreeWordStore();
  RngStream rng(3, 0);
  EXPECT_FALSE(ComputeDeniabilityStats(store, rng, IdentityMechanism(), WordId(0), 0).ok());
  EXPECT_FALSE(ComputeDeniabilityStats(store, rng, IdentityMechanism(), WordId(7), 10).ok());
  MechanismConfig bad{-1.0, BaselineParams{}};
  EXPECT_FALSE(ComputeDeniabilityStats(store, rng, bad, WordId(0), 10).ok());
}

TEST(DeniabilityStatsTest, BaselineMoreDeniableAtLowEpsilon) {
  const EmbeddingStore store = ThreeWordStore();
  RngStream rng(4, 0);
  constexpr uint64_t kTrials = 100000;
  auto low = ComputeDeniabilityStats(store, rng, MechanismConfig{0.5, BaselineParams{}},
                                     WordId(0), kTrials);
  auto high = ComputeDeniabilityStats(store, rng, MechanismConfig{4.0, BaselineParams{}},
                                      WordId(0), kTrials);
  ASSERT_TRUE(low.ok() && high.ok());
  EXPECT_GT(TwoProportionZ(low->p_unchanged, high->p_unchanged, kTrials, kTrials), 2.326);
}

TEST(VerifyMetricDpTest, IdentityIsFlagged) {
  const EmbeddingStore store = ThreeWordStore();
  auto r = VerifyMetricDp(Identity(3), store, 2.0);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(std::isinf(r->max_violation));
  EXPECT_FALSE(r->private_within_slack);
  EXPECT_GT(r->significant_violations, 0u);
}

TEST(VerifyMetricDpTest, UniformHasNoViolation) {
  const EmbeddingStore store = ThreeWordStore();
  auto r = VerifyMetricDp(Uniform(3), store, 2.0);
  ASSERT_TRUE(r.ok());
  EXPECT_LE(r->max_violation, 0.0);
  EXPECT_TRUE(r->private_within_slack);
  EXPECT_EQ(r->triples_checked, 3u * 2u * 3u);
}

TEST(VerifyMetricDpTest, HandComputedViolationAndSlack) {
  const EmbeddingStore store = TwoWordStore();
  // d(a, b) = 1; with eps = 0.1 the bound is 0.1.
  auto m = *TransitionMatrix::FromCounts(2, {800, 200, 400, 600}, 1000);
  auto r = VerifyMetricDp(m, store, 0.1);
  ASSERT_TRUE(r.ok());
  const double v = std::log(0.6 / 0.2) - 0.1;
  EXPECT_NEAR(r->max_violation, v, 1e-12);
  EXPECT_EQ(r->worst_triple.from, WordId(1));
  EXPECT_EQ(r->worst_triple.output, WordId(1));
  const double slack = 3.0 * std::sqrt(0.4 / (1000 * 0.6) + 0.8 / (1000 * 0.2));
  EXPECT_NEAR(r->slack_at_worst, slack, 1e-12);
  EXPECT_FALSE(r->private_within_slack);
}

TEST(VerifyMetricDpTest, ZeroEstimateUsesUpperBound) {
  const EmbeddingStore store = TwoWordStore();
  auto m = *TransitionMatrix::FromCounts(2, {1000, 0, 1, 999}, 1000);
  auto r = VerifyMetricDp(m, store, 100.0);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->zero_estimate_substitutions, 1u);
  EXPECT_TRUE(std::isfinite(r->max_violation));
  EXPECT_TRUE(r->private_within_slack);
}

TEST(VerifyMetricDpTest, MismatchedMatrix) {
  EXPECT_FALSE(VerifyMetricDp(Uniform(2), ThreeWordStore(), 1.0).ok());
  const EmbeddingStore store = ThreeWordStore();
  EXPECT_FALSE(VerifyMetricDp(Uniform(3, store.fingerprint() ^ 1), store, 1.0).ok());
}

TEST(VerifyMetricDpTest, BaselinePassesOnFiveWordToy) {
  const EmbeddingStore store = FiveWordStore();
  auto m = BuildTransitionMatrix(store, RngStream(5, 6),
                                 MechanismConfig{2.0, BaselineParams{}}, 100000);
  ASSERT_TRUE(m.ok());
  auto r = VerifyMetricDp(*m, store, 2.0);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->private_within_slack) << r->max_excess;
}

TEST(PosteriorTest, SymmetricTwoByTwo) {
  auto m = *TransitionMatrix::FromProbabilities(2, {0.7, 0.3, 0.3, 0.7});
  auto p = ComputePosterior(UniformPrior(2), m, WordId(0));
  ASSERT_TRUE(p.ok());
  EXPECT_NEAR(p->probs[0], 0.7, 1e-12);
  EXPECT_NEAR(p->probs[1], 0.3, 1e-12);
}

TEST(PosteriorTest, PointMassPrior) {
  auto m = *TransitionMatrix::FromProbabilities(3, {0.5, 0.3, 0.2, 0.1, 0.6, 0.3,
                                                    0.2, 0.2, 0.6});
  for (size_t obs = 0; obs < 3; ++obs) {
    auto p = ComputePosterior(std::vector<double>{0, 1, 0}, m, WordId(obs));
    ASSERT_TRUE(p.ok());
    EXPECT_EQ(p->probs, (std::vector<double>{0, 1, 0}));
  }
}

TEST(PosteriorTest, Errors) {
  auto m = *TransitionMatrix::FromProbabilities(2, {1, 0, 1, 0});
  auto p = ComputePosterior(UniformPrior(2), m, WordId(1));
  ASSERT_FALSE(p.ok());
  EXPECT_NE(p.status().message().find("UnreachableObservation"), std::string::npos);
  EXPECT_FALSE(ComputePosterior(std::vector<double>{0.5, 0.4}, m, WordId(0)).ok());
  EXPECT_FALSE(ComputePosterior(UniformPrior(3), m, WordId(0)).ok());
  EXPECT_FALSE(ComputePosterior(UniformPrior(2), m, WordId(2)).ok());
}

TEST(PosteriorTest, UniformPriorIsNormalizedColumn) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const size_t n = 2 + rep % 8;
    std::vector<double> p(n * n);
    for (size_t i = 0; i < n; ++i) {
      double total = 0;
      for (size_t j = 0; j < n; ++j) total += p[i * n + j] = u(gen) + 1e-3;
      for (size_t j = 0; j < n; ++j) p[i * n + j] /= total;
    }
    auto m = *TransitionMatrix::FromProbabilities(n, p);
    std::vector<double> prior(n);
    for (double& x : prior) x = u(gen) + 1e-3;
    const double s = std::accumulate(prior.begin(), prior.end(), 0.0);
    for (double& x : prior) x /= s;
    for (size_t obs = 0; obs < n; ++obs) {
      auto flat = ComputePosterior(UniformPrior(n), m, WordId(obs));
      auto skewed = ComputePosterior(prior, m, WordId(obs));
      ASSERT_TRUE(flat.ok() && skewed.ok());
      double col = 0;
      for (size_t w = 0; w < n; ++w) col += p[w * n + obs];
      double sum = 0;
      for (size_t w = 0; w < n; ++w) {
        EXPECT_NEAR(flat->probs[w], p[w * n + obs] / col, 1e-12);
        sum += skewed->probs[w];
        EXPECT_GE(skewed->probs[w], 0.0);
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(OptimalAttackTest, Examples) {
  const EmbeddingStore store = ThreeWordStore();
  for (size_t u = 0; u < 3; ++u) {
    Posterior point{WordId(0), std::vector<double>(3, 0.0)};
    point.probs[u] = 1.0;
    EXPECT_EQ(*OptimalAttack(store, point), WordId(u));
  }
  // a and c both cost 0.5; the tie goes to a.
  Posterior half{WordId(0), {0.5, 0.0, 0.5}};
  EXPECT_EQ(*OptimalAttack(store, half), WordId(0));
  EXPECT_FALSE(OptimalAttack(store, Posterior{WordId(0), {1.0}}).ok());
}

TEST(OptimalAttackTest, MatchesBruteForceAndIsLabelInvariant) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const EmbeddingStore store = RandomStore(gen, 10, 2);
    std::vector<double> probs(10);
    for (double& x : probs) x = u(gen);
    const double s = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double& x : probs) x /= s;
    size_t best = 0;
    double best_cost = 1e300;
    for (size_t g = 0; g < 10; ++g) {
      double cost = 0;
      for (size_t w = 0; w < 10; ++w) {
        const auto vg = store.vector(WordId(g)), vw = store.vector(WordId(w));
        cost += probs[w] * std::hypot(vg[0] - vw[0], vg[1] - vw[1]);
      }
      if (cost < best_cost) best_cost = cost, best = g;
    }
    const WordId guess = *OptimalAttack(store, Posterior{WordId(0), probs});
    EXPECT_EQ(guess, WordId(best));

    // Reverse the labels; the guess should follow its word.
    std::vector<std::string> words;
    std::vector<double> vectors;
    std::vector<double> reversed(10);
    for (size_t i = 0; i < 10; ++i) {
      const size_t src = 9 - i;
      words.push_back(std::string(store.word(WordId(src))));
      for (double x : store.vector(WordId(src))) vectors.push_back(x);
      reversed[i] = probs[src];
    }
    const EmbeddingStore flipped = MakeStore(words, vectors, 2);
    EXPECT_EQ(*OptimalAttack(flipped, Posterior{WordId(0), reversed}),
              WordId(9 - guess.index()));
  }
}

TEST(AttackAccuracyTest, IdentityStub) {
  const EmbeddingStore store = ThreeWordStore();
  RngStream rng(8, 0);
  auto acc = AttackAccuracy(store, rng, Identity(3), IdentityMechanism(),
                            UniformPrior(3), 1000);
  ASSERT_TRUE(acc.ok());
  EXPECT_EQ(*acc, 1.0);
}

TEST(AttackAccuracyTest, UniformStubOnEquidistantWords) {
  const EmbeddingStore store = TetrahedronStore();
  RngStream rng(9, 0);
  auto acc = AttackAccuracy(store, rng, Uniform(4), UniformMechanism(4),
                            UniformPrior(4), 10000);
  ASSERT_TRUE(acc.ok());
  EXPECT_NEAR(*acc, 0.25, 0.02);
}

TEST(AttackAccuracyTest, UnreachableObservationFallsBackToPrior) {
  const EmbeddingStore store = ThreeWordStore();
  RngStream rng(10, 0);
  // The model says every word maps to a, but the mechanism is the identity.
  auto model = *TransitionMatrix::FromProbabilities(3, {1, 0, 0, 1, 0, 0, 1, 0, 0});
  auto acc = AttackAccuracy(store, rng, model, IdentityMechanism(),
                            std::vector<double>{0.2, 0.7, 0.1}, 1000);
  ASSERT_TRUE(acc.ok());
  EXPECT_GT(*acc, 0.0);
  EXPECT_LT(*acc, 1.0);
}

TEST(AttackAccuracyTest, IncreasesWithEpsilon) {
  const EmbeddingStore store = ThreeWordStore();
  constexpr uint64_t kTrials = 10000;
  RngStream rng_low(11, 0), rng_high(11, 0);
  auto low = AttackAccuracy(store, rng_low, MechanismConfig{0.5, BaselineParams{}},
                            UniformPrior(3), kTrials);
  auto high = AttackAccuracy(store, rng_high, MechanismConfig{4.0, BaselineParams{}},
                             UniformPrior(3), kTrials);
  ASSERT_TRUE(low.ok() && high.ok());
  EXPECT_GT(TwoProportionZ(*low, *high, kTrials, kTrials), 2.326);
}

TEST(PriorTest, ZipfAndValidation) {
  auto z = ZipfPrior(3, 1.0);
  ASSERT_TRUE(z.ok());
  const double h = 1.0 + 0.5 + 1.0 / 3.0;
  EXPECT_NEAR((*z)[0], 1.0 / h, 1e-15);
  EXPECT_NEAR((*z)[2], 1.0 / (3.0 * h), 1e-15);
  EXPECT_EQ(*ZipfPrior(4, 0.0), UniformPrior(4));
  EXPECT_FALSE(ZipfPrior(0, 1.0).ok());
  EXPECT_FALSE(ZipfPrior(3, -1.0).ok());
  EXPECT_FALSE(ValidatePrior(std::vector<double>{0.5, 0.6}, 2).ok());
  EXPECT_FALSE(ValidatePrior(std::vector<double>{-0.5, 1.5}, 2).ok());
}

}  // namespace
}  // namespace dxtext
