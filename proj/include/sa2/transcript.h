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

// Line-delimited event log of a simulated round. Each line is
//
//   <time> TAB <party> TAB <event> TAB <digest> [TAB <key=value ...>]
//
// where <digest> is the 16-hex-digit FNV-1a digest of the event payload.
// Lines starting with '#' are comments. See docs/transcript.md.

#ifndef SA2_TRANSCRIPT_H_
#define SA2_TRANSCRIPT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace sa2 {

struct TranscriptEvent {
  int64_t time = 0;
  std::string party;
  std::string kind;
  uint64_t digest = 0;
  // Space-separated key=value pairs, possibly empty.
  std::string detail;

  // Value of `key` in `detail`, or empty.
  std::string_view Field(std::string_view key) const;
};

class TranscriptLog {
 public:
  explicit TranscriptLog(bool enabled = true) : enabled_(enabled) {}

  void Record(int64_t time, std::string_view party, std::string_view kind,
              uint64_t digest, std::string detail = {});

  const std::vector<TranscriptEvent>& events() const { return events_; }
  bool enabled() const { return enabled_; }

  std::string Serialize() const;
  static absl::StatusOr<TranscriptLog> Parse(std::string_view text);

 private:
  bool enabled_;
  std::vector<TranscriptEvent> events_;
};

std::string HexDigest(uint64_t digest);

}  // namespace sa2

#endif  // SA2_TRANSCRIPT_H_
