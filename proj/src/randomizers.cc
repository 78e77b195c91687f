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

#include "sa2/randomizers.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace sa2 {

std::string_view RandomizerKindName(RandomizerKind kind) {
  switch (kind) {
    case RandomizerKind::kRappor:
      return "rappor";
    case RandomizerKind::kRandomizedResponse:
      return "randomized_response";
    case RandomizerKind::kGaussianVector:
      return "gaussian_vector";
  }
  return "unknown";
}

absl::StatusOr<RandomizerKind> ParseRandomizerKind(std::string_view name) {
  for (RandomizerKind k :
       {RandomizerKind::kRappor, RandomizerKind::kRandomizedResponse,
        RandomizerKind::kGaussianVector}) {
    if (name == RandomizerKindName(k)) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown randomizer kind '", std::string(name), "'"));
}

absl::Status ValidateSpec(const RandomizerSpec& spec) {
  switch (spec.kind) {
    case RandomizerKind::kRappor:
    case RandomizerKind::kRandomizedResponse:
      if (spec.alphabet_size < 2) {
        return absl::InvalidArgumentError("alphabet_size must be >= 2");
      }
      if (!(spec.eps0 >= 0) || std::isnan(spec.eps0)) {
        return absl::InvalidArgumentError("eps0 must be >= 0");
      }
      return absl::OkStatus();
    case RandomizerKind::kGaussianVector:
      if (spec.dimension < 1) {
        return absl::InvalidArgumentError("dimension must be >= 1");
      }
      if (!(spec.sigma >= 0) || spec.batch < 1 || !(spec.clip_norm > 0)) {
        return absl::InvalidArgumentError(
            "gaussian randomizer needs sigma >= 0, batch >= 1, clip_norm > 0");
      }
      return absl::OkStatus();
  }
  return absl::InvalidArgumentError("unknown randomizer kind");
}

double RapporFlipProbability(double eps0) { return 1 / (std::exp(eps0) + 1); }

std::vector<double> OneHot(int category, int alphabet_size) {
  std::vector<double> v(alphabet_size, 0.0);
  v[category] = 1.0;
  return v;
}

std::vector<double> Rappor(int x, int alphabet_size, double eps0, Rng& rng) {
  std::bernoulli_distribution flip(RapporFlipProbability(eps0));
  std::vector<double> out = OneHot(x, alphabet_size);
  for (double& bit : out) {
    if (flip(rng)) bit = 1.0 - bit;
  }
  return out;
}

std::vector<double> RandomizedResponse(int x, int alphabet_size, double eps0,
                                       Rng& rng) {
  const double e = std::exp(eps0);
  std::bernoulli_distribution truthful(e / (e + alphabet_size - 1));
  if (truthful(rng)) return OneHot(x, alphabet_size);
  std::uniform_int_distribution<int> other(0, alphabet_size - 2);
  int y = other(rng);
  if (y >= x) ++y;
  return OneHot(y, alphabet_size);
}

std::vector<double> ClipToNorm(std::span<const double> x, double clip_norm) {
  double norm_sq = 0.0;
  for (double v : x) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);
  std::vector<double> out(x.begin(), x.end());
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (double& v : out) v *= scale;
  }
  return out;
}

std::vector<double> GaussianVector(std::span<const double> x, double sigma,
                                   int64_t batch, Rng& rng, double clip_norm) {
  std::vector<double> out = ClipToNorm(x, clip_norm);
  if (sigma > 0) {
    std::normal_distribution<double> noise(
        0.0, sigma / std::sqrt(static_cast<double>(batch)));
    for (double& v : out) v += noise(rng);
  }
  return out;
}

absl::StatusOr<std::vector<double>> Randomize(const RandomizerSpec& spec,
                                              std::span<const double> datum,
                                              Rng& rng) {
  switch (spec.kind) {
    case RandomizerKind::kRappor:
    case RandomizerKind::kRandomizedResponse: {
      if (datum.size() != 1) {
        return absl::InvalidArgumentError(
            "categorical datum must be a single category index");
      }
      const int x = static_cast<int>(datum[0]);
      if (x < 0 || x >= spec.alphabet_size || x != datum[0]) {
        return absl::OutOfRangeError(absl::StrCat(
            "category ", datum[0], " outside [0, ", spec.alphabet_size, ")"));
      }
      return spec.kind == RandomizerKind::kRappor
                 ? Rappor(x, spec.alphabet_size, spec.eps0, rng)
                 : RandomizedResponse(x, spec.alphabet_size, spec.eps0, rng);
    }
    case RandomizerKind::kGaussianVector:
      if (static_cast<int>(datum.size()) != spec.dimension) {
        return absl::InvalidArgumentError(absl::StrCat(
            "datum has dimension ", datum.size(), ", expected ",
            spec.dimension));
      }
      return GaussianVector(datum, spec.sigma, spec.batch, rng,
                            spec.clip_norm);
  }
  return absl::InvalidArgumentError("unknown randomizer kind");
}

absl::StatusOr<ShareVector> EncodeMessage(const RandomizerSpec& spec,
                                          const FixedPointCodec& codec,
                                          std::span<const double> message) {
  if (static_cast<int>(message.size()) != spec.OutputLength()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "message length ", message.size(), " does not match the spec (",
        spec.OutputLength(), ")"));
  }
  if (spec.kind == RandomizerKind::kGaussianVector) {
    return codec.Encode(message);
  }
  ShareVector out;
  out.reserve(message.size());
  for (double v : message) {
    if (v != std::round(v) || std::fabs(v) > (1 << 30)) {
      return absl::InvalidArgumentError(
          absl::StrCat("categorical message entry ", v, " is not an integer"));
    }
    out.push_back(codec.field().FromSigned(static_cast<int64_t>(v)));
  }
  return out;
}

std::vector<double> Decode(const RandomizerSpec& spec,
                           const FixedPointCodec& codec,
                           std::span<const FieldElement> message) {
  if (spec.kind == RandomizerKind::kGaussianVector) {
    return codec.Decode(message);
  }
  std::vector<double> out;
  out.reserve(message.size());
  for (const FieldElement& e : message) {
    out.push_back(static_cast<double>(codec.field().ToSigned(e)));
  }
  return out;
}

absl::StatusOr<std::vector<double>> DebiasRappor(std::span<const double> agg,
                                                 int64_t n, double eps0) {
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  const double f = RapporFlipProbability(eps0);
  if (!(1 - 2 * f > 0)) {
    return absl::InvalidArgumentError("eps0 = 0 carries no signal");
  }
  std::vector<double> out;
  out.reserve(agg.size());
  const double offset = static_cast<double>(n) * f;
  for (double a : agg) out.push_back((a - offset) / (1 - 2 * f));
  return out;
}

int64_t DefaultRapporWeightBound(int alphabet_size, double eps0) {
  const double f = RapporFlipProbability(eps0);
  const double mean = (alphabet_size - 1) * f;
  return static_cast<int64_t>(
      std::ceil(1 + mean + 6 * std::sqrt(mean * (1 - f))));
}

double DefaultGaussianNormBound(const RandomizerSpec& spec) {
  return spec.clip_norm +
         6 * (spec.sigma / std::sqrt(static_cast<double>(spec.batch))) *
             std::sqrt(static_cast<double>(spec.dimension));
}

ValidityPredicate DefaultPredicate(const RandomizerSpec& spec) {
  switch (spec.kind) {
    case RandomizerKind::kRappor:
      return {PredicateKind::kHammingWeightLe,
              static_cast<double>(
                  DefaultRapporWeightBound(spec.alphabet_size, spec.eps0))};
    case RandomizerKind::kRandomizedResponse:
      return {PredicateKind::kOneHot, 0};
    case RandomizerKind::kGaussianVector:
      return {PredicateKind::kL2NormLe, DefaultGaussianNormBound(spec)};
  }
  return {};
}

bool CheckValidity(std::span<const double> contribution,
                   const ValidityPredicate& pred) {
  switch (pred.kind) {
    case PredicateKind::kOneHot:
    case PredicateKind::kHammingWeightLe: {
      double weight = 0;
      for (double v : contribution) {
        if (v != 0.0 && v != 1.0) return false;
        weight += v;
      }
      return pred.kind == PredicateKind::kOneHot ? weight == 1
                                                 : weight <= pred.bound;
    }
    case PredicateKind::kL2NormLe: {
      double norm_sq = 0;
      for (double v : contribution) norm_sq += v * v;
      return std::sqrt(norm_sq) <= pred.bound;
    }
  }
  return false;
}

}  // namespace sa2
