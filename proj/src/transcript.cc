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

#include "sa2/transcript.h"

#include <charconv>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"

namespace sa2 {

std::string_view TranscriptEvent::Field(std::string_view key) const {
  for (absl::string_view kv : absl::StrSplit(detail, ' ', absl::SkipEmpty())) {
    const size_t eq = kv.find('=');
    if (eq != absl::string_view::npos &&
        std::string_view(kv.data(), eq) == key) {
      return std::string_view(kv.data() + eq + 1, kv.size() - eq - 1);
    }
  }
  return {};
}

void TranscriptLog::Record(int64_t time, std::string_view party,
                           std::string_view kind, uint64_t digest,
                           std::string detail) {
  if (!enabled_) return;
  events_.push_back({time, std::string(party), std::string(kind), digest,
                     std::move(detail)});
}

std::string HexDigest(uint64_t digest) {
  return absl::StrFormat("%016x", digest);
}

std::string TranscriptLog::Serialize() const {
  std::string out = "# time\tparty\tevent\tdigest\tdetail\n";
  for (const TranscriptEvent& e : events_) {
    absl::StrAppend(&out, e.time, "\t", e.party, "\t", e.kind, "\t",
                    HexDigest(e.digest));
    if (!e.detail.empty()) absl::StrAppend(&out, "\t", e.detail);
    out.push_back('\n');
  }
  return out;
}

absl::StatusOr<TranscriptLog> TranscriptLog::Parse(std::string_view text) {
  TranscriptLog log;
  int line_no = 0;
  for (absl::string_view line :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::vector<absl::string_view> cols = absl::StrSplit(line, '\t');
    if (cols.size() < 4 || cols.size() > 5) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected 4 or 5 columns"));
    }
    TranscriptEvent e;
    auto [p1, ec1] =
        std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), e.time);
    auto [p2, ec2] = std::from_chars(
        cols[3].data(), cols[3].data() + cols[3].size(), e.digest, 16);
    if (ec1 != std::errc() || ec2 != std::errc() || cols[3].size() != 16) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": malformed time or digest"));
    }
    e.party = std::string(cols[1]);
    e.kind = std::string(cols[2]);
    if (cols.size() == 5) e.detail = std::string(cols[4]);
    log.events_.push_back(std::move(e));
  }
  return log;
}

}  // namespace sa2
