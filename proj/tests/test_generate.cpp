// Copyright 2026 The tscs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace tscs;

TEST(Generate, SameSeedSameScenario) {
  const auto a = gen_random_scenario(CostClass::general, 3, 2, 3, 17);
  const auto b = gen_random_scenario(CostClass::general, 3, 2, 3, 17);
  EXPECT_EQ(scenario_to_json(a), scenario_to_json(b));
  const auto c = gen_random_scenario(CostClass::general, 3, 2, 3, 18);
  EXPECT_NE(scenario_to_json(a), scenario_to_json(c));
}

TEST(Generate, SubmodularDrawsAreSubmodular) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto s = gen_random_scenario(CostClass::submodular, 1 + seed % 6, 1 + seed % 2, 2, seed);
    for (const auto& p : s.seller_priors) {
      for (const auto& a : p) ASSERT_TRUE(is_submodular(a.type.cost)) << "seed " << seed;
    }
  }
}

TEST(Generate, AdditiveDrawsStayIntegral) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = gen_random_scenario(CostClass::additive, 3, 2, 1, seed);
    EXPECT_NO_THROW(optimal_assignment_ngs(enumerate_realizations(s)[0])) << "seed " << seed;
  }
}

TEST(Generate, ValuesAndProbabilitiesAreValid) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = gen_random_scenario(static_cast<CostClass>(seed % 4), 3, 2, 3, seed);
    EXPECT_NO_THROW(validate(s));
    for (const auto& p : s.buyer_priors) {
      for (const auto& a : p) {
        for (double v : a.type.values) {
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
        }
      }
    }
  }
}

TEST(Generate, RejectsDegenerateShapes) {
  EXPECT_THROW(gen_random_scenario(CostClass::general, 0, 1, 1, 1), DomainError);
  EXPECT_THROW(gen_random_scenario(CostClass::general, 1, 1, 0, 1), DomainError);
  EXPECT_THROW(gen_random_scenario(CostClass::general, 30, 1, 1, 1), SizeError);
}
