//
// Copyright 2026 The SA2 Lab Authors
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
//

#include "sa2/config.h"

#include <cmath>
#include <set>
#include <string>

#include "gtest/gtest.h"
#include "tests/test_util.h"

namespace sa2 {
namespace {

using ::sa2::testing::StatusIs;

std::string ConfigPath(const char* name) {
  return std::string(SA2_SOURCE_DIR) + "/configs/" + name;
}

TEST(ParseRunConfigTest, EmptyGivesDefaults) {
  ASSERT_OK_AND_ASSIGN(RunConfig c, ParseRunConfig(""));
  EXPECT_EQ(c.recipe.spec.kind, RandomizerKind::kRappor);
  EXPECT_EQ(c.recipe.field.modulus, kDefaultModulus);
  EXPECT_EQ(c.recipe.field.fraction_bits, 16);
  EXPECT_EQ(c.recipe.signed_range, 7);
  EXPECT_EQ(c.grid.kind, ExperimentKind::kHistogram);
  EXPECT_EQ(c.grid.methods.size(), 3u);
  EXPECT_EQ(c.recipe.dummy_rate, 0.0);
}

TEST(ParseRunConfigTest, UnknownKeysAndSectionsAreErrors) {
  EXPECT_THAT(ParseRunConfig("[recipe]\nbatch_thresh = 3\n"),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(ParseRunConfig("[recipes]\nbatch_threshold = 3\n"),
              StatusIs(absl::StatusCode::kInvalidArgument));
  EXPECT_THAT(ParseRunConfig("seed = 3\n"),
              StatusIs(absl::StatusCode::kInvalidArgument));
  const absl::StatusOr<RunConfig> bad = ParseRunConfig("[round]\nsedd = 1\n");
  ASSERT_FALSE(bad.ok());
  EXPECT_NE(bad.status().message().find("sedd"), absl::string_view::npos);
}

TEST(ParseRunConfigTest, BadValuesAreErrors) {
  for (const char* text : {"[recipe]\nbatch_threshold = x\n",
                           "[recipe]\nsampling_rate = 2\n",
                           "[recipe]\ndummy_rate = often\n",
                           "[recipe]\nrate_guard = maybe\n",
                           "[recipe]\npredicate = prime\n",
                           "[randomizer]\nkind = laplace\n",
                           "[population]\ndistribution = normal\n",
                           "[adversary]\ncorrupt = both\n",
                           "[experiment]\nkind = other\n",
                           "[experiment]\nmethods = AGG, FOO\n",
                           "[experiment]\ntasks = 1, two\n",
                           "[experiment]\njobs = 0\n",
                           "[recipe]\nmodulus = 2305843009213693953\n",
                           "[recipe\n"}) {
    EXPECT_FALSE(ParseRunConfig(text).ok()) << text;
  }
}

TEST(ParseRunConfigTest, AutoDummyRate) {
  ASSERT_OK_AND_ASSIGN(
      RunConfig c,
      ParseRunConfig("[recipe]\nsampling_rate = 0.01\ndummy_rate = auto\n"
                     "round_eps = 0.5\n[population]\nsize = 20000\n"));
  EXPECT_TRUE(c.dummy_rate_auto);
  EXPECT_DOUBLE_EQ(c.recipe.dummy_rate, 1.0 / (0.5 * 0.01 * 20000));
  ASSERT_OK_AND_ASSIGN(RunConfig d,
                       ParseRunConfig("[recipe]\ndummy_rate = 0.25\n"));
  EXPECT_FALSE(d.dummy_rate_auto);
  EXPECT_DOUBLE_EQ(d.recipe.dummy_rate, 0.25);
}

TEST(ParseRunConfigTest, PredicateSelection) {
  ASSERT_OK_AND_ASSIGN(
      RunConfig c, ParseRunConfig("[recipe]\npredicate = hamming_weight_le\n"
                                  "predicate_bound = 10\n[randomizer]\n"
                                  "alphabet_size = 100\n"));
  EXPECT_EQ(c.recipe.predicate.kind, PredicateKind::kHammingWeightLe);
  EXPECT_EQ(c.recipe.predicate.bound, 10);
  ASSERT_OK_AND_ASSIGN(RunConfig d,
                       ParseRunConfig("[randomizer]\nkind = randomized_response\n"
                                      "alphabet_size = 5\n"));
  EXPECT_EQ(d.recipe.predicate.kind, PredicateKind::kOneHot);
}

TEST(LoadRunConfigTest, ShippedConfigs) {
  ASSERT_OK_AND_ASSIGN(RunConfig rappor, LoadRunConfig(ConfigPath("sim_rappor.ini")));
  EXPECT_EQ(rappor.recipe.task_id, "rappor-demo");
  EXPECT_EQ(rappor.recipe.batch_threshold, 100);
  EXPECT_EQ(rappor.population.distribution, TruthKind::kZipf);
  EXPECT_DOUBLE_EQ(rappor.recipe.dummy_rate, 1.0 / (0.05 * 10000));

  ASSERT_OK_AND_ASSIGN(RunConfig gauss, LoadRunConfig(ConfigPath("sim_gaussian.ini")));
  EXPECT_EQ(gauss.recipe.spec.kind, RandomizerKind::kGaussianVector);
  EXPECT_EQ(gauss.recipe.predicate.kind, PredicateKind::kL2NormLe);
  EXPECT_EQ(gauss.adversary.corrupt_server, CorruptServer::kLeader);
  EXPECT_EQ(gauss.adversary.clients, 10);

  ASSERT_OK_AND_ASSIGN(RunConfig hist, LoadRunConfig(ConfigPath("histogram.ini")));
  EXPECT_EQ(hist.grid.tasks, (std::vector<int64_t>{1, 10, 100, 1000}));
  EXPECT_EQ(hist.output, "histogram.csv");

  ASSERT_OK_AND_ASSIGN(RunConfig needles, LoadRunConfig(ConfigPath("needles.ini")));
  EXPECT_EQ(needles.grid.kind, ExperimentKind::kNeedles);
  EXPECT_EQ(needles.grid.gammas, (std::vector<double>{0.1, 0.01, 0.001}));
  EXPECT_EQ(needles.grid.methods.size(), 4u);

  EXPECT_THAT(LoadRunConfig(ConfigPath("missing.ini")),
              StatusIs(absl::StatusCode::kNotFound));
}

TEST(MakePopulationTest, CategoricalCountsAndDeterminism) {
  PopulationConfig pop;
  pop.size = 1000;
  RandomizerSpec spec{RandomizerKind::kRappor, 10, 1.0};
  ASSERT_OK_AND_ASSIGN(auto a, MakePopulation(pop, spec, 5));
  ASSERT_OK_AND_ASSIGN(auto b, MakePopulation(pop, spec, 5));
  EXPECT_EQ(a, b);
  std::vector<int> counts(10, 0);
  for (const auto& x : a) ++counts[static_cast<int>(x[0])];
  for (int c : counts) EXPECT_EQ(c, 100);
}

TEST(MakePopulationTest, GaussianPointsInBall) {
  PopulationConfig pop;
  pop.size = 500;
  pop.data_norm = 0.7;
  RandomizerSpec spec;
  spec.kind = RandomizerKind::kGaussianVector;
  spec.dimension = 5;
  ASSERT_OK_AND_ASSIGN(auto data, MakePopulation(pop, spec, 6));
  ASSERT_EQ(data.size(), 500u);
  for (const auto& x : data) {
    ASSERT_EQ(x.size(), 5u);
    double n = 0;
    for (double v : x) n += v * v;
    EXPECT_LE(std::sqrt(n), 0.7 + 1e-12);
  }
}

TEST(InvalidMessageTest, FailsPredicate) {
  RunConfig c = *ParseRunConfig("");
  EXPECT_FALSE(CheckValidity(InvalidMessage(c.recipe), c.recipe.predicate));
  c = *ParseRunConfig("[randomizer]\nkind = randomized_response\nalphabet_size = 4\n");
  EXPECT_FALSE(CheckValidity(InvalidMessage(c.recipe), c.recipe.predicate));
  c = *LoadRunConfig(ConfigPath("sim_gaussian.ini"));
  const std::vector<double> m = InvalidMessage(c.recipe);
  const FixedPointCodec codec = *RecipeCodec(c.recipe);
  ASSERT_OK_AND_ASSIGN(ShareVector enc, codec.Encode(m));
  EXPECT_FALSE(CheckValidity(codec.Decode(enc), c.recipe.predicate));
}

}  // namespace
}  // namespace sa2
