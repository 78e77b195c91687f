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

// INI-style run configuration shared by `sa2 sim run` and `sa2 exp`. Every
// key is documented in docs/cli.md; unknown sections and keys are errors.

#ifndef SA2_CONFIG_H_
#define SA2_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "sa2/experiments.h"
#include "sa2/protocol.h"

namespace sa2 {

struct PopulationConfig {
  int64_t size = 1000;
  // Categorical kinds: ground truth of the held categories.
  TruthKind distribution = TruthKind::kUniform;
  double zipf_s = 1.1;
  double gamma = 0.01;
  // Gaussian kind: data points are uniform in the ball of this radius.
  double data_norm = 1.0;
};

struct RunConfig {
  Recipe recipe;
  PopulationConfig population;
  AdversaryConfig adversary;
  // Adversarial clients beyond adversary.clients that submit a message
  // violating the validity predicate.
  int64_t invalid_clients = 0;
  RoundOptions round;
  // Round budget used when dummy_rate = auto.
  double round_eps = 1.0;
  bool dummy_rate_auto = false;
  // "default" selects DefaultPredicate(recipe.spec); otherwise one of
  // one_hot, hamming_weight_le, l2_norm_le with predicate_bound.
  std::string predicate = "default";
  double predicate_bound = 0.0;

  SweepGrid grid = DefaultHistogramGrid();
  SweepOptions sweep;
  std::string output;
};

absl::StatusOr<RunConfig> ParseRunConfig(std::string_view text);
absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path);

// Applies derived defaults (auto dummy rate) and validates everything that
// the config describes.
absl::Status FinalizeRunConfig(RunConfig& config);

// Deterministic population for the recipe's randomizer.
absl::StatusOr<std::vector<std::vector<double>>> MakePopulation(
    const PopulationConfig& pop, const RandomizerSpec& spec, uint64_t seed);

// Adversarial message that fails the recipe's predicate.
std::vector<double> InvalidMessage(const Recipe& recipe);

// Builds the population (seeded from round.seed), appends invalid_clients
// adversarial devices submitting InvalidMessage, and runs one round.
absl::StatusOr<Transcript> RunConfiguredRound(RunConfig config);

}  // namespace sa2

#endif  // SA2_CONFIG_H_
