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

#include "sa2/token.h"

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "sa2/hashing.h"

namespace sa2 {

uint64_t TokenTag(uint64_t key, const Nonce& nonce, std::string_view task_id) {
  Fnv1a task_hash;
  task_hash.Update(task_id);
  return Mix64(Mix64(key ^ nonce.hi) ^ Mix64(nonce.lo) ^ task_hash.digest());
}

absl::StatusOr<Token> TokenIssuer::Issue(uint64_t device_id,
                                         std::string_view task_id) {
  auto [it, inserted] = issued_.emplace(device_id, std::string(task_id));
  if (!inserted) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "RATE_LIMITED: device already holds a token for task ",
        std::string(task_id)));
  }
  Token token;
  token.nonce = {rng_(), rng_()};
  token.task_id = std::string(task_id);
  token.tag = TokenTag(key_, token.nonce, task_id);
  return token;
}

std::string_view TokenVerdictName(TokenVerdict v) {
  switch (v) {
    case TokenVerdict::kAccepted:
      return "ACCEPTED";
    case TokenVerdict::kInvalidToken:
      return "INVALID_TOKEN";
    case TokenVerdict::kDuplicate:
      return "REJECTED_DUPLICATE";
  }
  return "UNKNOWN";
}

TokenVerdict VerifyToken(const Token& token, std::string_view task_id,
                         uint64_t key, NonceSet& seen) {
  if (token.task_id != task_id ||
      token.tag != TokenTag(key, token.nonce, task_id)) {
    return TokenVerdict::kInvalidToken;
  }
  if (!seen.insert(token.nonce).second) return TokenVerdict::kDuplicate;
  return TokenVerdict::kAccepted;
}

}  // namespace sa2
