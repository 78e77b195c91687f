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

#include "sa2/field.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace sa2 {
namespace {

using u128 = unsigned __int128;

uint64_t MulMod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<u128>(a) * b % m);
}

uint64_t PowMod(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = MulMod(result, base, m);
    base = MulMod(base, base, m);
    exp >>= 1;
  }
  return result;
}

}  // namespace

bool IsPrime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  // These witnesses are sufficient for n < 2^64.
  for (uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    uint64_t x = PowMod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = MulMod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

absl::StatusOr<PrimeField> PrimeField::Create(uint64_t modulus) {
  if (modulus < (uint64_t{1} << 31) || modulus >= (uint64_t{1} << 63)) {
    return absl::InvalidArgumentError(
        absl::StrCat("modulus must lie in [2^31, 2^63), got ", modulus));
  }
  if (!IsPrime(modulus)) {
    return absl::InvalidArgumentError(
        absl::StrCat("modulus ", modulus, " is not prime"));
  }
  return PrimeField(modulus);
}

FieldElement PrimeField::FromSigned(int64_t x) const {
  if (x >= 0) return {static_cast<uint64_t>(x) % modulus_};
  // -(x+1) avoids overflow at INT64_MIN.
  uint64_t mag = static_cast<uint64_t>(-(x + 1)) + 1;
  return Neg({mag % modulus_});
}

int64_t PrimeField::ToSigned(FieldElement a) const {
  if (a.value > modulus_ / 2) {
    return -static_cast<int64_t>(modulus_ - a.value);
  }
  return static_cast<int64_t>(a.value);
}

FieldElement PrimeField::Uniform(Rng& rng) const {
  std::uniform_int_distribution<uint64_t> dist(0, modulus_ - 1);
  return {dist(rng)};
}

absl::StatusOr<ShareVector> PrimeField::Add(
    std::span<const FieldElement> a, std::span<const FieldElement> b) const {
  if (a.size() != b.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "length mismatch: ", a.size(), " vs ", b.size()));
  }
  ShareVector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = Add(a[i], b[i]);
  return out;
}

absl::Status PrimeField::AddInPlace(ShareVector& acc,
                                    std::span<const FieldElement> v) const {
  if (acc.size() != v.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "length mismatch: ", acc.size(), " vs ", v.size()));
  }
  for (size_t i = 0; i < v.size(); ++i) acc[i] = Add(acc[i], v[i]);
  return absl::OkStatus();
}

absl::StatusOr<FixedPointCodec> FixedPointCodec::Create(FieldParams params,
                                                        int signed_range) {
  absl::StatusOr<PrimeField> field = PrimeField::Create(params.modulus);
  if (!field.ok()) return field.status();
  if (params.fraction_bits < 0 || params.fraction_bits >= 62) {
    return absl::InvalidArgumentError(absl::StrCat(
        "fraction_bits must lie in [0, 62), got ", params.fraction_bits));
  }
  if (signed_range < 0 || params.fraction_bits + signed_range >= 63) {
    return absl::InvalidArgumentError(
        absl::StrCat("signed_range out of range: ", signed_range));
  }
  const uint64_t bound = uint64_t{1} << (params.fraction_bits + signed_range);
  if (bound >= params.modulus / 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "2^(f+s) = ", bound, " must be below p/2 for unambiguous decoding"));
  }
  return FixedPointCodec(*field, params.fraction_bits, signed_range);
}

absl::StatusOr<ShareVector> FixedPointCodec::Encode(
    std::span<const double> x) const {
  const double limit = std::ldexp(1.0, signed_range_);
  ShareVector out;
  out.reserve(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || std::fabs(x[i]) >= limit) {
      return absl::OutOfRangeError(absl::StrCat(
          "coordinate ", i, " = ", x[i], " outside (-2^", signed_range_,
          ", 2^", signed_range_, ")"));
    }
    // std::round rounds half away from zero.
    const auto scaled = static_cast<int64_t>(std::round(x[i] * scale_));
    out.push_back(field_.FromSigned(scaled));
  }
  return out;
}

std::vector<double> FixedPointCodec::Decode(
    std::span<const FieldElement> v) const {
  std::vector<double> out;
  out.reserve(v.size());
  for (const FieldElement& e : v) {
    out.push_back(static_cast<double>(field_.ToSigned(e)) / scale_);
  }
  return out;
}

absl::Status FixedPointCodec::CheckNoOverflow(uint64_t max_summands) const {
  const u128 worst = static_cast<u128>(max_summands)
                     << (fraction_bits_ + signed_range_);
  if (worst >= field_.modulus() / 2) {
    return absl::FailedPreconditionError(absl::StrCat(
        "sum of ", max_summands, " encodings with f=", fraction_bits_,
        ", s=", signed_range_, " can wrap modulo ", field_.modulus()));
  }
  return absl::OkStatus();
}

absl::StatusOr<SharePair> Share(const PrimeField& field,
                                std::span<const FieldElement> v, Rng& rng) {
  ShareVector leader(v.size());
  for (FieldElement& e : leader) e = field.Uniform(rng);
  return ShareWithLeader(field, v, std::move(leader));
}

absl::StatusOr<SharePair> ShareWithLeader(const PrimeField& field,
                                          std::span<const FieldElement> v,
                                          ShareVector leader) {
  if (v.empty()) {
    return absl::InvalidArgumentError("cannot share an empty vector");
  }
  if (leader.size() != v.size()) {
    return absl::InvalidArgumentError("leader share length mismatch");
  }
  ShareVector helper(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i].value >= field.modulus() || leader[i].value >= field.modulus()) {
      return absl::InvalidArgumentError("element not reduced modulo p");
    }
    helper[i] = field.Sub(v[i], leader[i]);
  }
  return SharePair{std::move(leader), std::move(helper)};
}

absl::StatusOr<ShareVector> Reconstruct(const PrimeField& field,
                                        std::span<const FieldElement> leader,
                                        std::span<const FieldElement> helper) {
  return field.Add(leader, helper);
}

}  // namespace sa2
