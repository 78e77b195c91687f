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

// The samplable anonymous aggregation functionality and a deterministic
// simulation of its two-server deployment: on-device sampling, an anonymizer,
// rate-limited tokens, leader/helper share aggregation with a batch threshold
// and a collection window, validity checks and rate validation.
//
// Encryption is modeled as routing: each share is only ever handed to its
// addressee. Zero-knowledge validity proofs are replaced by a trusted oracle
// that reconstructs a contribution privately and tells both servers a single
// bit.

#ifndef SA2_PROTOCOL_H_
#define SA2_PROTOCOL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "sa2/field.h"
#include "sa2/randomizers.h"
#include "sa2/token.h"
#include "sa2/transcript.h"

namespace sa2 {

// Published description of one collection.
struct Recipe {
  std::string task_id = "task";
  RandomizerSpec spec;
  ValidityPredicate predicate;
  int64_t batch_threshold = 1;
  double sampling_rate = 1.0;
  // Collection window in logical minutes; reports arriving after
  // open_time + window are excluded.
  int64_t window = 60;
  // Clients spread their arrival uniformly over [open_time, open_time +
  // arrival_spread].
  int64_t arrival_spread = 60;
  FieldParams field;
  int signed_range = kDefaultSignedRange;
  std::string leader_key = "leader-key";
  std::string helper_key = "helper-key";
  double dummy_rate = 0.0;
  // Largest number of contributions one collection may sum; validated against
  // the field so sums never wrap.
  int64_t max_contributions = 1'000'000;
  // Sliding-window width of the rate guard; 0 selects DefaultRateWindow.
  int64_t rate_window = 0;
  bool rate_guard = true;
};

// Recipe with the spec's default validity predicate.
Recipe MakeRecipe(std::string task_id, const RandomizerSpec& spec,
                  int64_t batch_threshold, double sampling_rate);

absl::Status ValidateRecipe(const Recipe& recipe);
absl::StatusOr<FixedPointCodec> RecipeCodec(const Recipe& recipe);
std::string SerializeRecipe(const Recipe& recipe);

// q' = 1 / (eps * q * population), capped at 1.
double DefaultDummyRate(double eps, double q, int64_t population);

// ---------------------------------------------------------------------------
// Ideal functionalities. Messages are field-encoded randomizer outputs; the
// decoder is linear, so summing in the field and decoding once equals the sum
// of decodings.

// Sum of all messages if there are at least `batch_threshold`, else nullopt.
absl::StatusOr<std::optional<ShareVector>> IdealAggregate(
    const PrimeField& field, std::span<const ShareVector> messages,
    int64_t batch_threshold);

// IdealAggregate over a Poisson(q) subsample. The selected indices are not
// returned.
absl::StatusOr<std::optional<ShareVector>> IdealSa2(
    const PrimeField& field, std::span<const ShareVector> messages,
    int64_t batch_threshold, double q, Rng& rng);

struct TimedMessage {
  ShareVector message;
  int64_t time = 0;
};

// Time-windowed aggregator: the sum if k >= B and the last arrival lies in
// [open_time, open_time + window], nullopt otherwise.
absl::StatusOr<std::optional<ShareVector>> IdealWindowedAggregate(
    const PrimeField& field, std::span<const TimedMessage> messages,
    int64_t batch_threshold, int64_t open_time, int64_t window);

// ---------------------------------------------------------------------------
// Client and anonymizer.

struct Report {
  ShareVector leader_share;
  ShareVector helper_share;
  Token token;
  int64_t arrival_time = 0;
};

// What a device hands to the anonymization service.
struct Envelope {
  uint64_t device_id = 0;
  Report report;
};

struct ClientOutcome {
  std::optional<Report> report;
  // Simulation ground truth; never routed to any party.
  bool selected = false;
  bool dummy = false;
  ShareVector encoded_message;
};

// Device-local participation decision. With probability q the device
// randomizes its datum, encodes and shares it. Otherwise, with probability
// dummy_rate, it sends shares of the zero vector. Otherwise it stays silent.
absl::StatusOr<ClientOutcome> ClientStep(const Recipe& recipe,
                                         const FixedPointCodec& codec,
                                         std::span<const double> datum,
                                         const Token& token,
                                         int64_t open_time, Rng& rng);

// Drops device identities and applies a uniform permutation within each
// delivery window of `delivery_window` minutes. Payloads are untouched.
std::vector<Report> AnonymizerForward(std::vector<Envelope> in,
                                      int64_t delivery_window, Rng& rng);

// ---------------------------------------------------------------------------
// Servers.

enum class ServerRole { kLeader, kHelper };
std::string_view ServerRoleName(ServerRole role);

// Trusted stand-in for validity proofs. Reconstructs privately and returns
// only the verdict. The all-zero vector (a dummy report) is always valid.
class ValidityOracle {
 public:
  ValidityOracle(const Recipe& recipe, const FixedPointCodec& codec)
      : recipe_(recipe), codec_(codec) {}

  bool Check(std::span<const FieldElement> leader_share,
             std::span<const FieldElement> helper_share) const;

 private:
  const Recipe& recipe_;
  const FixedPointCodec& codec_;
};

enum class IngestResult {
  kAccepted,
  kRejectedDuplicate,
  kInvalidToken,
  kRejectedInvalid,
  kRejectedWindow,
};
std::string_view IngestResultName(IngestResult r);

// One share as a server sees it.
struct ShareObservation {
  int64_t arrival_time = 0;
  Nonce nonce;
  ShareVector share;
  bool valid = false;

  // Every field of this record. Nothing here derives from device identity,
  // the plaintext or the selection.
  static constexpr std::array<std::string_view, 4> kFieldNames = {
      "arrival_time", "nonce", "share", "valid"};
};

// Everything one server observes during a round.
struct ServerView {
  ServerRole role = ServerRole::kLeader;
  std::vector<ShareObservation> observations;
  int64_t received = 0;
  int64_t accepted = 0;
  std::optional<ShareVector> peer_share_sum;
  std::optional<std::vector<double>> output;

  static constexpr std::array<std::string_view, 6> kFieldNames = {
      "role", "observations", "received", "accepted", "peer_share_sum",
      "output"};
};

struct AggregatorState {
  ShareVector running_share_sum;
  int64_t count = 0;
  NonceSet seen_tokens;
  int64_t open_time = 0;
  std::vector<Nonce> accepted_nonces;
  std::vector<int64_t> accepted_times;
  int64_t duplicates = 0;
  int64_t invalid_tokens = 0;
  int64_t rejected_invalid = 0;
  int64_t window_violations = 0;
};

class AggregationServer {
 public:
  AggregationServer(ServerRole role, const Recipe& recipe,
                    const PrimeField& field, uint64_t token_key,
                    int64_t open_time, TranscriptLog* log);

  // Window and token checks at this server. kAccepted means the report may
  // proceed to validity checking; the nonce is now spent here.
  IngestResult Admit(const Report& report);

  // Adds this server's share if the oracle accepted the contribution.
  IngestResult Ingest(const Report& report, bool oracle_verdict);

  // The running share sum, only once count >= B.
  std::optional<ShareVector> ReleaseShareSum() const;

  // Order-independent digest of the accepted nonce multiset.
  uint64_t AcceptedDigest() const;

  ServerRole role() const { return role_; }
  const AggregatorState& state() const { return state_; }
  const ServerView& view() const { return view_; }
  ServerView& mutable_view() { return view_; }

 private:
  std::span<const FieldElement> ShareFor(const Report& report) const;

  ServerRole role_;
  const Recipe& recipe_;
  const PrimeField& field_;
  uint64_t token_key_;
  TranscriptLog* log_;
  AggregatorState state_;
  ServerView view_;
};

enum class RateVerdict { kAccept, kRejectRate };

// Window width giving about 32 expected arrivals per window.
int64_t DefaultRateWindow(double expected_rate);

// Rejects iff some window [t, t + width) holds more than
// 2 * expected_rate * width arrivals.
absl::StatusOr<RateVerdict> RateGuard(std::span<const int64_t> arrival_times,
                                      double expected_rate, int64_t width);

struct RevealOptions {
  int64_t close_time = 0;
  // Arrivals per minute expected from the recipe; <= 0 disables the guard.
  double expected_rate = 0.0;
};

struct RevealResult {
  std::optional<std::vector<double>> output;
  std::optional<ShareVector> output_field;
  int64_t k = 0;
  bool rate_rejected = false;
};

// Consistency check (ABORT_INCONSISTENT as Aborted), rate guard, threshold,
// then decode(reconstruct(leader sum, helper sum)).
absl::StatusOr<RevealResult> Reveal(AggregationServer& leader,
                                    AggregationServer& helper,
                                    const Recipe& recipe,
                                    const FixedPointCodec& codec,
                                    const RevealOptions& options,
                                    TranscriptLog* log);

// ---------------------------------------------------------------------------
// End-to-end round.

enum class CorruptServer { kNone, kLeader, kHelper };

struct AdversaryConfig {
  CorruptServer corrupt_server = CorruptServer::kNone;
  // Adversary-controlled devices. Each holds one legitimate token and always
  // submits.
  int64_t clients = 0;
  // Messages the adversarial devices submit, one per device; when empty each
  // submits a worst-case valid message.
  std::vector<std::vector<double>> injected;
  // Honest reports re-sent verbatim (same token).
  int64_t replays = 0;
};

struct RoundOptions {
  uint64_t seed = 0;
  int64_t open_time = 0;
  int64_t delivery_window = 1;
  bool record_events = true;
  // Indices (in anonymizer output order) of reports the helper never
  // receives; simulates loss between the servers.
  std::vector<size_t> helper_drops;
};

// Ground truth kept by the simulator for tests; no party sees it.
struct GroundTruth {
  std::vector<uint64_t> selected_devices;
  std::vector<ShareVector> honest_messages;
  std::vector<ShareVector> adversary_messages;
  int64_t dummies = 0;
  int64_t issued_tokens = 0;
};

struct Transcript {
  std::optional<std::vector<double>> output;
  std::optional<ShareVector> output_field;
  int64_t k = 0;
  int64_t rejected = 0;
  int64_t duplicates = 0;
  int64_t invalid_tokens = 0;
  int64_t window_violations = 0;
  bool rate_rejected = false;
  ServerView leader_view;
  ServerView helper_view;
  GroundTruth truth;
  TranscriptLog log;

  // The view of the corrupted server, or nullptr for kNone.
  const ServerView* AdversaryView(CorruptServer corrupt) const;
  // "output_hash <hex|bottom> k <k> rejected <r> duplicates <d>
  //  window_violations <w>".
  std::string Summary() const;
};

// Worst-case valid message for the recipe's predicate.
absl::StatusOr<std::vector<double>> WorstCaseValidMessage(
    const Recipe& recipe, const FixedPointCodec& codec);

absl::StatusOr<Transcript> RunRound(
    const Recipe& recipe, std::span<const std::vector<double>> population,
    const AdversaryConfig& adversary, const RoundOptions& options);

}  // namespace sa2

#endif  // SA2_PROTOCOL_H_
