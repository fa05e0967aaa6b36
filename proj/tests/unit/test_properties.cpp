#include <gtest/gtest.h>

#include "properties.hpp"

using namespace flare::testing;

namespace {

constexpr std::size_t kInstances = 10'000;

void expect_holds(const PropertyOutcome& r) {
  EXPECT_EQ(r.instances, kInstances);
  EXPECT_EQ(r.failures, 0u) << r.first_failure;
}

}  // namespace

TEST(Properties, KlGibbsInequality) { expect_holds(check_kl_gibbs(kInstances, 1)); }

TEST(Properties, TcNormalization) { expect_holds(check_tc_normalization(kInstances, 2)); }

TEST(Properties, ItcMonotonicity) { expect_holds(check_itc_monotonicity(kInstances, 3)); }

TEST(Properties, Dilution) { expect_holds(check_dilution(kInstances, 4)); }

TEST(Properties, ExamMonotonicity) { expect_holds(check_exam_monotonicity(kInstances, 5)); }
