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

// Prime-field arithmetic, fixed-point encoding of real vectors and two-party
// additive secret sharing.

#ifndef SA2_FIELD_H_
#define SA2_FIELD_H_

#include <compare>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace sa2 {

using Rng = std::mt19937_64;

// 2^61 - 1.
inline constexpr uint64_t kDefaultModulus = (uint64_t{1} << 61) - 1;
inline constexpr int kDefaultFractionBits = 16;
inline constexpr int kDefaultSignedRange = 7;

struct FieldElement {
  uint64_t value = 0;

  friend auto operator<=>(const FieldElement&, const FieldElement&) = default;
};

using ShareVector = std::vector<FieldElement>;

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool IsPrime(uint64_t n);

// A prime field F_p with 2^31 <= p < 2^63. The upper bound keeps the sum of
// two reduced elements inside one machine word.
class PrimeField {
 public:
  static absl::StatusOr<PrimeField> Create(uint64_t modulus = kDefaultModulus);

  uint64_t modulus() const { return modulus_; }

  FieldElement Add(FieldElement a, FieldElement b) const {
    uint64_t s = a.value + b.value;
    return {s >= modulus_ ? s - modulus_ : s};
  }
  FieldElement Sub(FieldElement a, FieldElement b) const {
    return {a.value >= b.value ? a.value - b.value
                               : a.value + (modulus_ - b.value)};
  }
  FieldElement Neg(FieldElement a) const {
    return {a.value == 0 ? 0 : modulus_ - a.value};
  }
  // Reduces a signed integer into [0, p).
  FieldElement FromSigned(int64_t x) const;
  // Centered representative in (-p/2, p/2].
  int64_t ToSigned(FieldElement a) const;

  FieldElement Uniform(Rng& rng) const;

  // Coordinate-wise a + b. Lengths must match.
  absl::StatusOr<ShareVector> Add(std::span<const FieldElement> a,
                                  std::span<const FieldElement> b) const;
  // In-place accumulate; lengths must match.
  absl::Status AddInPlace(ShareVector& acc,
                          std::span<const FieldElement> v) const;

 private:
  explicit PrimeField(uint64_t modulus) : modulus_(modulus) {}
  uint64_t modulus_;
};

struct FieldParams {
  uint64_t modulus = kDefaultModulus;
  int fraction_bits = kDefaultFractionBits;
};

// Maps reals in (-2^s, 2^s) to field elements with scale 2^f. Rounding is
// half away from zero; decoding uses the centered representative.
class FixedPointCodec {
 public:
  static absl::StatusOr<FixedPointCodec> Create(
      FieldParams params = {}, int signed_range = kDefaultSignedRange);

  const PrimeField& field() const { return field_; }
  int fraction_bits() const { return fraction_bits_; }
  int signed_range() const { return signed_range_; }
  double scale() const { return scale_; }

  absl::StatusOr<ShareVector> Encode(std::span<const double> x) const;
  std::vector<double> Decode(std::span<const FieldElement> v) const;

  // Checks that summing up to `max_summands` encodings cannot wrap around:
  // max_summands * 2^(f+s) < p/2.
  absl::Status CheckNoOverflow(uint64_t max_summands) const;

 private:
  FixedPointCodec(PrimeField field, int fraction_bits, int signed_range)
      : field_(field),
        fraction_bits_(fraction_bits),
        signed_range_(signed_range),
        scale_(static_cast<double>(uint64_t{1} << fraction_bits)) {}

  PrimeField field_;
  int fraction_bits_;
  int signed_range_;
  double scale_;
};

struct SharePair {
  ShareVector leader;
  ShareVector helper;
};

// Splits v into a uniformly random leader share and helper = v - leader.
absl::StatusOr<SharePair> Share(const PrimeField& field,
                                std::span<const FieldElement> v, Rng& rng);

// Same split with a caller-chosen leader share.
absl::StatusOr<SharePair> ShareWithLeader(const PrimeField& field,
                                          std::span<const FieldElement> v,
                                          ShareVector leader);

absl::StatusOr<ShareVector> Reconstruct(const PrimeField& field,
                                        std::span<const FieldElement> leader,
                                        std::span<const FieldElement> helper);

}  // namespace sa2

#endif  // SA2_FIELD_H_
