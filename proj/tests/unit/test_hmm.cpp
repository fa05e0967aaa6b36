#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "flare/error.hpp"
#include "flare/hmm.hpp"
#include "oracles.hpp"

using namespace flare;
using namespace flare::testing;

namespace {

// Healthy/Faulty health model with observations R (0) and V (1).
Hmm health_model() {
  return Hmm({0.6, 0.4}, {{0.7, 0.3}, {0.4, 0.6}}, {{0.9, 0.1}, {0.2, 0.8}});
}

bool contains(const std::vector<std::vector<int>>& paths, const std::vector<int>& p) {
  return std::find(paths.begin(), paths.end(), p) != paths.end();
}

}  // namespace

TEST(Hmm, SingleObservationProbability) {
  const std::vector<int> r = {0};
  EXPECT_NEAR(sequence_probability(health_model(), r), 0.62, 1e-15);
}

TEST(Hmm, HealthModelDecodingMatchesBruteForce) {
  const Hmm h = health_model();
  const std::vector<int> obs = {1, 1, 1, 1, 0, 1, 1, 1};  // VVVVRVVV
  const BruteForceHmm bf = brute_force(h, obs);
  EXPECT_NEAR(sequence_probability(h, obs), bf.probability, 1e-15);
  const std::vector<int> path = most_likely_states(h, obs);
  ASSERT_EQ(bf.best_paths.size(), 1u);
  EXPECT_EQ(path, bf.best_paths[0]);
  EXPECT_NEAR(path_probability(h, path, obs), bf.best, 1e-18);
}

TEST(Hmm, OneHotChainIsDeterministic) {
  const Hmm h({1, 0, 0}, {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const std::vector<int> obs = {0, 1, 2, 0, 1};
  EXPECT_DOUBLE_EQ(sequence_probability(h, obs), 1.0);
  EXPECT_EQ(most_likely_states(h, obs), obs);
  const std::vector<int> impossible = {0, 2};
  EXPECT_EQ(sequence_probability(h, impossible), 0.0);
  EXPECT_EQ(sequence_log_probability(h, impossible), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(most_likely_states(h, impossible), ZeroProbabilitySequence);
}

TEST(Hmm, RandomModelsAgreeWithBruteForce) {
  Rng rng(17);
  for (int round = 0; round < 300; ++round) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 4));
    const auto m = static_cast<std::size_t>(uniform_int(rng, 1, 3));
    const Hmm h = random_hmm(n, m, round % 3 == 1, round % 3 == 2, rng);
    std::vector<int> obs(static_cast<std::size_t>(uniform_int(rng, 1, 8)));
    for (int& o : obs) o = static_cast<int>(uniform_int(rng, 0, static_cast<std::int64_t>(m) - 1));
    const BruteForceHmm bf = brute_force(h, obs);
    ASSERT_NEAR(sequence_probability(h, obs), bf.probability, 1e-12);
    if (bf.best == 0.0) {
      EXPECT_THROW(most_likely_states(h, obs), ZeroProbabilitySequence);
      continue;
    }
    const std::vector<int> path = most_likely_states(h, obs);
    EXPECT_TRUE(contains(bf.best_paths, path)) << "round " << round;
  }
}

TEST(Hmm, UniformModelTiesResolveToLowestIndex) {
  const Hmm h({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}});
  const std::vector<int> obs = {0, 1, 1, 0};
  EXPECT_EQ(most_likely_states(h, obs), (std::vector<int>{0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(sequence_probability(h, obs), 1.0 / 16.0);
}

TEST(Hmm, AllSequencesSumToOne) {
  Rng rng(3);
  for (int round = 0; round < 20; ++round) {
    const Hmm h = random_hmm(3, 3, false, false, rng);
    const std::size_t len = 5;
    std::vector<int> obs(len, 0);
    double total = 0.0;
    while (true) {
      total += sequence_probability(h, obs);
      std::size_t k = 0;
      while (k < len && ++obs[k] == 3) obs[k++] = 0;
      if (k == len) break;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Hmm, ViterbiBeatsRandomPaths) {
  Rng rng(44);
  for (int round = 0; round < 100; ++round) {
    const Hmm h = random_hmm(4, 2, false, false, rng);
    std::vector<int> obs(12);
    for (int& o : obs) o = static_cast<int>(uniform_int(rng, 0, 1));
    const double best = path_probability(h, most_likely_states(h, obs), obs);
    for (int k = 0; k < 50; ++k) {
      std::vector<int> p(obs.size());
      for (int& s : p) s = static_cast<int>(uniform_int(rng, 0, 3));
      EXPECT_LE(path_probability(h, p, obs), best * (1 + 1e-12));
    }
  }
}

TEST(Hmm, LogAndLinearForwardAgree) {
  Rng rng(8);
  for (int round = 0; round < 100; ++round) {
    const Hmm h = random_hmm(3, 2, round % 2 == 0, false, rng);
    std::vector<int> obs(static_cast<std::size_t>(uniform_int(rng, 1, 40)));
    for (int& o : obs) o = static_cast<int>(uniform_int(rng, 0, 1));
    const double lin = sequence_probability_linear(h, obs);
    const double lg = sequence_log_probability(h, obs);
    if (lin == 0.0) {
      EXPECT_EQ(lg, -std::numeric_limits<double>::infinity());
    } else {
      EXPECT_NEAR(std::log(lin), lg, 1e-9);
    }
  }
  // Long sequences stay finite in log space.
  const Hmm h = health_model();
  std::vector<int> obs(5000, 1);
  EXPECT_TRUE(std::isfinite(sequence_log_probability(h, obs)));
  EXPECT_GE(sequence_probability(h, obs), 0.0);
}

TEST(Hmm, RejectsBadModelsAndObservations) {
  EXPECT_THROW(Hmm({}, {}, {}), DimensionMismatch);
  EXPECT_THROW(Hmm({1.0}, {{1.0}, {1.0}}, {{1.0}}), DimensionMismatch);
  EXPECT_THROW(Hmm({0.5, 0.5}, {{1, 0}, {0, 1}}, {{1.0}, {0.5, 0.5}}), DimensionMismatch);
  EXPECT_THROW(Hmm({0.7, 0.7}, {{1, 0}, {0, 1}}, {{1}, {1}}), NotADistribution);
  EXPECT_THROW(Hmm({1.0, 0.0}, {{1.2, -0.2}, {0, 1}}, {{1}, {1}}), NotADistribution);
  const Hmm h = health_model();
  EXPECT_THROW(sequence_probability(h, std::vector<int>{}), BadObservationIndex);
  EXPECT_THROW(sequence_probability(h, std::vector<int>{0, 2}), BadObservationIndex);
  EXPECT_THROW(most_likely_states(h, std::vector<int>{-1}), BadObservationIndex);
  EXPECT_THROW(path_probability(h, std::vector<int>{0}, std::vector<int>{0, 1}), LengthMismatch);
}

TEST(RandomRowStochastic, RowsAreDistributions) {
  Rng rng(1);
  const Matrix single = random_row_stochastic(5, 1, rng);
  for (const auto& row : single) EXPECT_EQ(row[0], 1.0);
  const Matrix m = random_row_stochastic(1000, 4, rng);
  for (const auto& row : m) {
    double s = 0.0;
    for (double x : row) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  EXPECT_THROW(random_row_stochastic(0, 3, rng), InvalidArgument);
}

TEST(RandomRowStochastic, EntriesAreUniformOnTheSimplex) {
  // A flat Dirichlet(1,...,1) has every marginal mean 1/k.
  Rng rng(2);
  const std::size_t rows = 40000;
  const Matrix m = random_row_stochastic(rows, 4, rng);
  std::vector<double> mean(4, 0.0);
  for (const auto& row : m) {
    for (std::size_t j = 0; j < 4; ++j) mean[j] += row[j] / rows;
  }
  for (double x : mean) EXPECT_NEAR(x, 0.25, 0.01);
}
