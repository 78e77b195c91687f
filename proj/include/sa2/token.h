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

// Simulated anonymous rate-limited tokens. The issuer sees device ids and
// refuses a second token for the same (device, task); the token itself carries
// only a random nonce, the task and an authenticity tag. Servers deduplicate
// on the nonce.

#ifndef SA2_TOKEN_H_
#define SA2_TOKEN_H_

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "absl/container/flat_hash_set.h"
#include "absl/status/statusor.h"
#include "sa2/field.h"

namespace sa2 {

// 128-bit nonce.
struct Nonce {
  uint64_t hi = 0;
  uint64_t lo = 0;

  friend auto operator<=>(const Nonce&, const Nonce&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const Nonce& n) {
    return H::combine(std::move(h), n.hi, n.lo);
  }
};

struct Token {
  Nonce nonce;
  std::string task_id;
  uint64_t tag = 0;
};

using NonceSet = absl::flat_hash_set<Nonce>;

// Keyed tag binding a nonce to a task. Stands in for the issuer signature.
uint64_t TokenTag(uint64_t key, const Nonce& nonce, std::string_view task_id);

class TokenIssuer {
 public:
  TokenIssuer(uint64_t key, uint64_t seed) : key_(key), rng_(seed) {}

  // Fails with ResourceExhausted (RATE_LIMITED) on a second request for the
  // same (device, task).
  absl::StatusOr<Token> Issue(uint64_t device_id, std::string_view task_id);

  // Key the aggregation servers use to check tags.
  uint64_t verification_key() const { return key_; }
  size_t issued_count() const { return issued_.size(); }

 private:
  uint64_t key_;
  Rng rng_;
  std::set<std::pair<uint64_t, std::string>, std::less<>> issued_;
};

enum class TokenVerdict { kAccepted, kInvalidToken, kDuplicate };

std::string_view TokenVerdictName(TokenVerdict v);

// Accepts iff the tag verifies for `task_id` and the nonce is unseen. An
// accepted nonce is inserted into `seen`.
TokenVerdict VerifyToken(const Token& token, std::string_view task_id,
                         uint64_t key, NonceSet& seen);

}  // namespace sa2

#endif  // SA2_TOKEN_H_
