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

// Local randomizers, their field encodings, the linear decoder applied by the
// aggregator, analyst-side debiasing and server-checkable validity
// predicates.

#ifndef SA2_RANDOMIZERS_H_
#define SA2_RANDOMIZERS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "sa2/field.h"

namespace sa2 {

enum class RandomizerKind { kRappor, kRandomizedResponse, kGaussianVector };

std::string_view RandomizerKindName(RandomizerKind kind);
absl::StatusOr<RandomizerKind> ParseRandomizerKind(std::string_view name);

struct RandomizerSpec {
  RandomizerKind kind = RandomizerKind::kRappor;
  // Categorical kinds.
  int alphabet_size = 2;
  double eps0 = 1.0;
  // Gaussian kind. Per-client noise std is sigma / sqrt(batch).
  int dimension = 1;
  double sigma = 0.0;
  int64_t batch = 1;
  double clip_norm = 1.0;

  // Length of the randomizer output vector.
  int OutputLength() const {
    return kind == RandomizerKind::kGaussianVector ? dimension : alphabet_size;
  }
};

absl::Status ValidateSpec(const RandomizerSpec& spec);

// Bit flip probability f = 1 / (e^eps0 + 1).
double RapporFlipProbability(double eps0);

std::vector<double> OneHot(int category, int alphabet_size);

// One-hot encoding of x with every bit flipped independently w.p. f.
std::vector<double> Rappor(int x, int alphabet_size, double eps0, Rng& rng);

// Reports x w.p. e^eps0 / (e^eps0 + K - 1), otherwise a uniform other
// category. Always one-hot.
std::vector<double> RandomizedResponse(int x, int alphabet_size, double eps0,
                                       Rng& rng);

// Rescales x to norm <= clip_norm.
std::vector<double> ClipToNorm(std::span<const double> x, double clip_norm);

// clip(x, 1) plus N(0, sigma^2/B) on every coordinate.
std::vector<double> GaussianVector(std::span<const double> x, double sigma,
                                   int64_t batch, Rng& rng,
                                   double clip_norm = 1.0);

// Applies the spec's randomizer to a client datum. Categorical kinds read
// datum[0] as the category index.
absl::StatusOr<std::vector<double>> Randomize(const RandomizerSpec& spec,
                                              std::span<const double> datum,
                                              Rng& rng);

// Field encoding of a randomizer output: categorical outputs are integers,
// Gaussian outputs use the fixed-point codec.
absl::StatusOr<ShareVector> EncodeMessage(const RandomizerSpec& spec,
                                          const FixedPointCodec& codec,
                                          std::span<const double> message);

// The aggregator's Dec, applied to a field message or to a field sum of
// messages. It is linear: identity on integer counts for categorical kinds,
// fixed-point decoding for the Gaussian kind. No debiasing happens here.
std::vector<double> Decode(const RandomizerSpec& spec,
                           const FixedPointCodec& codec,
                           std::span<const FieldElement> message);

// Unbiased counts from summed RAPPOR bits: (agg_i - n f) / (1 - 2f).
absl::StatusOr<std::vector<double>> DebiasRappor(std::span<const double> agg,
                                                 int64_t n, double eps0);

enum class PredicateKind { kOneHot, kHammingWeightLe, kL2NormLe };

struct ValidityPredicate {
  PredicateKind kind = PredicateKind::kOneHot;
  // w_max for kHammingWeightLe, the norm bound for kL2NormLe.
  double bound = 0.0;
};

// ceil(1 + (K-1) f + 6 sqrt((K-1) f (1-f))).
int64_t DefaultRapporWeightBound(int alphabet_size, double eps0);

// clip_norm + 6 (sigma / sqrt(B)) sqrt(d).
double DefaultGaussianNormBound(const RandomizerSpec& spec);

// The predicate honest clients of `spec` satisfy with overwhelming
// probability.
ValidityPredicate DefaultPredicate(const RandomizerSpec& spec);

bool CheckValidity(std::span<const double> contribution,
                   const ValidityPredicate& pred);

}  // namespace sa2

#endif  // SA2_RANDOMIZERS_H_
