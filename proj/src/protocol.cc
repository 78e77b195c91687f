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

#include "sa2/protocol.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "sa2/hashing.h"

namespace sa2 {
namespace {

// Stream identifiers for DeriveSeed.
constexpr uint64_t kClientStream = 1;
constexpr uint64_t kTokenStream = 2;
constexpr uint64_t kAnonymizerStream = 3;
constexpr uint64_t kAdversaryStream = 4;

bool AllZero(std::span<const FieldElement> v) {
  return std::all_of(v.begin(), v.end(),
                     [](FieldElement e) { return e.value == 0; });
}

uint64_t ShareDigest(std::span<const FieldElement> v) {
  return Fnv1a().Update(v).digest();
}

std::string NonceHex(const Nonce& n) {
  return absl::StrFormat("%016x%016x", n.hi, n.lo);
}

int64_t FloorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Recipe MakeRecipe(std::string task_id, const RandomizerSpec& spec,
                  int64_t batch_threshold, double sampling_rate) {
  Recipe r;
  r.task_id = std::move(task_id);
  r.spec = spec;
  r.predicate = DefaultPredicate(spec);
  r.batch_threshold = batch_threshold;
  r.sampling_rate = sampling_rate;
  return r;
}

absl::Status ValidateRecipe(const Recipe& recipe) {
  if (absl::Status s = ValidateSpec(recipe.spec); !s.ok()) return s;
  if (recipe.task_id.empty()) {
    return absl::InvalidArgumentError("task_id must be non-empty");
  }
  if (recipe.batch_threshold < 1) {
    return absl::InvalidArgumentError("batch_threshold must be >= 1");
  }
  if (!(recipe.sampling_rate >= 0 && recipe.sampling_rate <= 1)) {
    return absl::InvalidArgumentError("sampling_rate must lie in [0, 1]");
  }
  if (!(recipe.dummy_rate >= 0 && recipe.dummy_rate <= 1)) {
    return absl::InvalidArgumentError("dummy_rate must lie in [0, 1]");
  }
  if (recipe.window <= 0) {
    return absl::InvalidArgumentError("window must be > 0");
  }
  if (recipe.arrival_spread < 0 || recipe.rate_window < 0) {
    return absl::InvalidArgumentError(
        "arrival_spread and rate_window must be >= 0");
  }
  if (recipe.max_contributions < recipe.batch_threshold) {
    return absl::InvalidArgumentError(
        "max_contributions must be >= batch_threshold");
  }
  absl::StatusOr<FixedPointCodec> codec = RecipeCodec(recipe);
  if (!codec.ok()) return codec.status();
  return codec->CheckNoOverflow(static_cast<uint64_t>(recipe.max_contributions));
}

absl::StatusOr<FixedPointCodec> RecipeCodec(const Recipe& recipe) {
  return FixedPointCodec::Create(recipe.field, recipe.signed_range);
}

std::string SerializeRecipe(const Recipe& r) {
  return absl::StrFormat(
      "task=%s randomizer=%s K=%d eps0=%.6g d=%d sigma=%.6g batch=%d "
      "clip=%.6g B=%d q=%.6g window=%d spread=%d p=%d f=%d s=%d "
      "leader=%s helper=%s dummy_rate=%.6g",
      r.task_id, std::string(RandomizerKindName(r.spec.kind)), r.spec.alphabet_size,
      r.spec.eps0, r.spec.dimension, r.spec.sigma, r.spec.batch,
      r.spec.clip_norm, r.batch_threshold, r.sampling_rate, r.window,
      r.arrival_spread, r.field.modulus, r.field.fraction_bits, r.signed_range,
      r.leader_key, r.helper_key, r.dummy_rate);
}

double DefaultDummyRate(double eps, double q, int64_t population) {
  const double denom = eps * q * static_cast<double>(population);
  if (!(denom > 0)) return 1.0;
  return std::min(1.0, 1.0 / denom);
}

absl::StatusOr<std::optional<ShareVector>> IdealAggregate(
    const PrimeField& field, std::span<const ShareVector> messages,
    int64_t batch_threshold) {
  if (batch_threshold < 1) {
    return absl::InvalidArgumentError("batch_threshold must be >= 1");
  }
  if (static_cast<int64_t>(messages.size()) < batch_threshold) {
    return std::optional<ShareVector>();
  }
  ShareVector sum(messages.front().size());
  for (const ShareVector& m : messages) {
    if (absl::Status s = field.AddInPlace(sum, m); !s.ok()) return s;
  }
  return std::optional<ShareVector>(std::move(sum));
}

absl::StatusOr<std::optional<ShareVector>> IdealSa2(
    const PrimeField& field, std::span<const ShareVector> messages,
    int64_t batch_threshold, double q, Rng& rng) {
  if (!(q >= 0 && q <= 1)) {
    return absl::InvalidArgumentError("q must lie in [0, 1]");
  }
  std::bernoulli_distribution keep(q);
  std::vector<ShareVector> selected;
  for (const ShareVector& m : messages) {
    if (keep(rng)) selected.push_back(m);
  }
  return IdealAggregate(field, selected, batch_threshold);
}

absl::StatusOr<std::optional<ShareVector>> IdealWindowedAggregate(
    const PrimeField& field, std::span<const TimedMessage> messages,
    int64_t batch_threshold, int64_t open_time, int64_t window) {
  if (window <= 0) return absl::InvalidArgumentError("window must be > 0");
  std::vector<ShareVector> plain;
  int64_t last = open_time;
  for (const TimedMessage& m : messages) {
    if (m.time < open_time) {
      return absl::InvalidArgumentError("message precedes the open time");
    }
    last = std::max(last, m.time);
    plain.push_back(m.message);
  }
  if (last > open_time + window) return std::optional<ShareVector>();
  return IdealAggregate(field, plain, batch_threshold);
}

absl::StatusOr<ClientOutcome> ClientStep(const Recipe& recipe,
                                         const FixedPointCodec& codec,
                                         std::span<const double> datum,
                                         const Token& token,
                                         int64_t open_time, Rng& rng) {
  ClientOutcome out;
  std::bernoulli_distribution sample(recipe.sampling_rate);
  out.selected = sample(rng);
  if (!out.selected) {
    std::bernoulli_distribution dummy(recipe.dummy_rate);
    out.dummy = dummy(rng);
    if (!out.dummy) return out;
  }
  if (out.selected) {
    absl::StatusOr<std::vector<double>> msg =
        Randomize(recipe.spec, datum, rng);
    if (!msg.ok()) return msg.status();
    absl::StatusOr<ShareVector> enc = EncodeMessage(recipe.spec, codec, *msg);
    if (!enc.ok()) return enc.status();
    out.encoded_message = *std::move(enc);
  } else {
    out.encoded_message.assign(recipe.spec.OutputLength(), FieldElement{0});
  }
  absl::StatusOr<SharePair> shares =
      Share(codec.field(), out.encoded_message, rng);
  if (!shares.ok()) return shares.status();
  std::uniform_int_distribution<int64_t> jitter(0, recipe.arrival_spread);
  Report r;
  r.leader_share = std::move(shares->leader);
  r.helper_share = std::move(shares->helper);
  r.token = token;
  r.arrival_time = open_time + jitter(rng);
  out.report = std::move(r);
  return out;
}

std::vector<Report> AnonymizerForward(std::vector<Envelope> in,
                                      int64_t delivery_window, Rng& rng) {
  const int64_t w = std::max<int64_t>(1, delivery_window);
  std::vector<std::pair<int64_t, Report>> buckets;
  buckets.reserve(in.size());
  for (Envelope& e : in) {
    buckets.emplace_back(FloorDiv(e.report.arrival_time, w),
                         std::move(e.report));
  }
  std::stable_sort(buckets.begin(), buckets.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (size_t lo = 0; lo < buckets.size();) {
    size_t hi = lo;
    while (hi < buckets.size() && buckets[hi].first == buckets[lo].first) ++hi;
    std::shuffle(buckets.begin() + lo, buckets.begin() + hi, rng);
    lo = hi;
  }
  std::vector<Report> out;
  out.reserve(buckets.size());
  for (auto& [bucket, report] : buckets) out.push_back(std::move(report));
  return out;
}

std::string_view ServerRoleName(ServerRole role) {
  return role == ServerRole::kLeader ? "leader" : "helper";
}

bool ValidityOracle::Check(std::span<const FieldElement> leader_share,
                           std::span<const FieldElement> helper_share) const {
  absl::StatusOr<ShareVector> plain =
      Reconstruct(codec_.field(), leader_share, helper_share);
  if (!plain.ok()) return false;
  if (static_cast<int>(plain->size()) != recipe_.spec.OutputLength()) {
    return false;
  }
  if (AllZero(*plain)) return true;
  return CheckValidity(Decode(recipe_.spec, codec_, *plain),
                       recipe_.predicate);
}

std::string_view IngestResultName(IngestResult r) {
  switch (r) {
    case IngestResult::kAccepted:
      return "ACCEPTED";
    case IngestResult::kRejectedDuplicate:
      return "REJECTED_DUPLICATE";
    case IngestResult::kInvalidToken:
      return "INVALID_TOKEN";
    case IngestResult::kRejectedInvalid:
      return "REJECTED_INVALID";
    case IngestResult::kRejectedWindow:
      return "REJECTED_WINDOW";
  }
  return "UNKNOWN";
}

AggregationServer::AggregationServer(ServerRole role, const Recipe& recipe,
                                     const PrimeField& field,
                                     uint64_t token_key, int64_t open_time,
                                     TranscriptLog* log)
    : role_(role),
      recipe_(recipe),
      field_(field),
      token_key_(token_key),
      log_(log) {
  state_.running_share_sum.assign(recipe.spec.OutputLength(), FieldElement{0});
  state_.open_time = open_time;
  view_.role = role;
}

std::span<const FieldElement> AggregationServer::ShareFor(
    const Report& report) const {
  return role_ == ServerRole::kLeader ? report.leader_share
                                      : report.helper_share;
}

IngestResult AggregationServer::Admit(const Report& report) {
  ++view_.received;
  std::span<const FieldElement> share = ShareFor(report);
  view_.observations.push_back(
      {report.arrival_time, report.token.nonce,
       ShareVector(share.begin(), share.end()), false});
  IngestResult result = IngestResult::kAccepted;
  if (report.arrival_time < state_.open_time ||
      report.arrival_time > state_.open_time + recipe_.window) {
    ++state_.window_violations;
    result = IngestResult::kRejectedWindow;
  } else {
    switch (VerifyToken(report.token, recipe_.task_id, token_key_,
                        state_.seen_tokens)) {
      case TokenVerdict::kAccepted:
        break;
      case TokenVerdict::kInvalidToken:
        ++state_.invalid_tokens;
        result = IngestResult::kInvalidToken;
        break;
      case TokenVerdict::kDuplicate:
        ++state_.duplicates;
        result = IngestResult::kRejectedDuplicate;
        break;
    }
  }
  if (result != IngestResult::kAccepted && log_ != nullptr) {
    log_->Record(report.arrival_time, ServerRoleName(role_), "reject",
                 ShareDigest(share),
                 absl::StrCat("reason=", std::string(IngestResultName(result)),
                              " nonce=", NonceHex(report.token.nonce)));
  }
  return result;
}

IngestResult AggregationServer::Ingest(const Report& report,
                                       bool oracle_verdict) {
  std::span<const FieldElement> share = ShareFor(report);
  if (!oracle_verdict ||
      share.size() != state_.running_share_sum.size()) {
    ++state_.rejected_invalid;
    if (log_ != nullptr) {
      log_->Record(report.arrival_time, ServerRoleName(role_), "reject",
                   ShareDigest(share),
                   absl::StrCat("reason=REJECTED_INVALID nonce=",
                                NonceHex(report.token.nonce)));
    }
    return IngestResult::kRejectedInvalid;
  }
  for (size_t i = 0; i < share.size(); ++i) {
    state_.running_share_sum[i] = field_.Add(state_.running_share_sum[i],
                                             share[i]);
  }
  ++state_.count;
  state_.accepted_nonces.push_back(report.token.nonce);
  state_.accepted_times.push_back(report.arrival_time);
  view_.observations.back().valid = true;
  view_.accepted = state_.count;
  if (log_ != nullptr) {
    log_->Record(report.arrival_time, ServerRoleName(role_), "accept",
                 ShareDigest(share),
                 absl::StrCat("nonce=", NonceHex(report.token.nonce),
                              " k=", state_.count));
  }
  return IngestResult::kAccepted;
}

std::optional<ShareVector> AggregationServer::ReleaseShareSum() const {
  if (state_.count < recipe_.batch_threshold) return std::nullopt;
  return state_.running_share_sum;
}

uint64_t AggregationServer::AcceptedDigest() const {
  uint64_t acc = Mix64(static_cast<uint64_t>(state_.count));
  for (const Nonce& n : state_.accepted_nonces) acc += Mix64(n.hi ^ Mix64(n.lo));
  return acc;
}

int64_t DefaultRateWindow(double expected_rate) {
  if (!(expected_rate > 0)) return 1;
  return std::max<int64_t>(1,
                           static_cast<int64_t>(std::ceil(32.0 / expected_rate)));
}

absl::StatusOr<RateVerdict> RateGuard(std::span<const int64_t> arrival_times,
                                      double expected_rate, int64_t width) {
  if (!(expected_rate > 0)) {
    return absl::InvalidArgumentError("expected_rate must be > 0");
  }
  if (width < 1) return absl::InvalidArgumentError("width must be >= 1");
  std::vector<int64_t> t(arrival_times.begin(), arrival_times.end());
  std::sort(t.begin(), t.end());
  const double limit = 2.0 * expected_rate * static_cast<double>(width);
  // A maximal window can always be slid to start at an arrival.
  size_t hi = 0;
  for (size_t lo = 0; lo < t.size(); ++lo) {
    while (hi < t.size() && t[hi] < t[lo] + width) ++hi;
    if (static_cast<double>(hi - lo) > limit) return RateVerdict::kRejectRate;
  }
  return RateVerdict::kAccept;
}

absl::StatusOr<RevealResult> Reveal(AggregationServer& leader,
                                    AggregationServer& helper,
                                    const Recipe& recipe,
                                    const FixedPointCodec& codec,
                                    const RevealOptions& options,
                                    TranscriptLog* log) {
  RevealResult result;
  const AggregatorState& ls = leader.state();
  const AggregatorState& hs = helper.state();
  const uint64_t ld = leader.AcceptedDigest();
  const uint64_t hd = helper.AcceptedDigest();
  if (log != nullptr) {
    log->Record(options.close_time, "leader", "digest", ld,
                absl::StrCat("k=", ls.count));
    log->Record(options.close_time, "helper", "digest", hd,
                absl::StrCat("k=", hs.count));
  }
  if (ls.count != hs.count || ld != hd) {
    if (log != nullptr) {
      log->Record(options.close_time, "leader", "abort", ld ^ hd,
                  absl::StrCat("reason=ABORT_INCONSISTENT leader_k=", ls.count,
                               " helper_k=", hs.count));
    }
    return absl::AbortedError(absl::StrCat(
        "ABORT_INCONSISTENT: leader accepted ", ls.count,
        " reports, helper accepted ", hs.count, " (digests ",
        HexDigest(ld), " vs ", HexDigest(hd), ")"));
  }
  result.k = ls.count;
  const std::string kb =
      absl::StrCat("k=", result.k, " B=", recipe.batch_threshold);
  auto bottom = [&](std::string_view reason) {
    if (log != nullptr) {
      log->Record(options.close_time, "leader", "bottom", 0,
                  absl::StrCat("reason=", std::string(reason), " ", kb));
    }
    return result;
  };
  if (recipe.rate_guard && options.expected_rate > 0) {
    const int64_t width = recipe.rate_window > 0
                              ? recipe.rate_window
                              : DefaultRateWindow(options.expected_rate);
    absl::StatusOr<RateVerdict> v =
        RateGuard(ls.accepted_times, options.expected_rate, width);
    if (!v.ok()) return v.status();
    if (*v == RateVerdict::kRejectRate) {
      result.rate_rejected = true;
      return bottom("REJECT_RATE");
    }
  }
  if (result.k < recipe.batch_threshold) return bottom("BELOW_THRESHOLD");
  const int64_t last = ls.accepted_times.empty()
                           ? ls.open_time
                           : *std::max_element(ls.accepted_times.begin(),
                                               ls.accepted_times.end());
  if (last > ls.open_time + recipe.window) return bottom("WINDOW");

  std::optional<ShareVector> lsum = leader.ReleaseShareSum();
  std::optional<ShareVector> hsum = helper.ReleaseShareSum();
  if (!lsum || !hsum) return bottom("BELOW_THRESHOLD");
  leader.mutable_view().peer_share_sum = *hsum;
  helper.mutable_view().peer_share_sum = *lsum;
  absl::StatusOr<ShareVector> sum = Reconstruct(codec.field(), *lsum, *hsum);
  if (!sum.ok()) return sum.status();
  result.output = Decode(recipe.spec, codec, *sum);
  leader.mutable_view().output = result.output;
  helper.mutable_view().output = result.output;
  if (log != nullptr) {
    log->Record(options.close_time, "leader", "reveal", ShareDigest(*sum), kb);
  }
  result.output_field = *std::move(sum);
  return result;
}

const ServerView* Transcript::AdversaryView(CorruptServer corrupt) const {
  switch (corrupt) {
    case CorruptServer::kLeader:
      return &leader_view;
    case CorruptServer::kHelper:
      return &helper_view;
    case CorruptServer::kNone:
      return nullptr;
  }
  return nullptr;
}

std::string Transcript::Summary() const {
  std::string hash = "bottom";
  if (output_field) hash = HexDigest(ShareDigest(*output_field));
  return absl::StrCat("output_hash ", hash, " k ", k, " rejected ", rejected,
                      " duplicates ", duplicates, " window_violations ",
                      window_violations);
}

absl::StatusOr<std::vector<double>> WorstCaseValidMessage(
    const Recipe& recipe, const FixedPointCodec& codec) {
  const int len = recipe.spec.OutputLength();
  const ValidityPredicate& pred = recipe.predicate;
  std::vector<double> m(len, 0.0);
  switch (pred.kind) {
    case PredicateKind::kOneHot:
      m[0] = 1.0;
      return m;
    case PredicateKind::kHammingWeightLe: {
      const int w = std::clamp(static_cast<int>(std::floor(pred.bound)), 0, len);
      std::fill(m.begin(), m.begin() + w, 1.0);
      return m;
    }
    case PredicateKind::kL2NormLe: {
      const double limit = std::ldexp(1.0, codec.signed_range());
      double coord = pred.bound / std::sqrt(static_cast<double>(len));
      coord = std::min(coord, limit * (1 - 1e-9));
      for (int iter = 0; iter < 64; ++iter) {
        std::fill(m.begin(), m.end(), coord);
        absl::StatusOr<ShareVector> enc = codec.Encode(m);
        if (!enc.ok()) return enc.status();
        if (CheckValidity(codec.Decode(*enc), pred)) return m;
        coord -= 1.0 / codec.scale();
      }
      return absl::InternalError("could not find a valid boundary message");
    }
  }
  return absl::InvalidArgumentError("unknown predicate");
}

absl::StatusOr<Transcript> RunRound(
    const Recipe& recipe, std::span<const std::vector<double>> population,
    const AdversaryConfig& adversary, const RoundOptions& options) {
  if (population.empty()) {
    return absl::InvalidArgumentError("population must be non-empty");
  }
  if (absl::Status s = ValidateRecipe(recipe); !s.ok()) return s;
  if (adversary.clients < 0 || adversary.replays < 0) {
    return absl::InvalidArgumentError("adversary counts must be >= 0");
  }
  absl::StatusOr<FixedPointCodec> codec_or = RecipeCodec(recipe);
  if (!codec_or.ok()) return codec_or.status();
  const FixedPointCodec& codec = *codec_or;
  const PrimeField& field = codec.field();

  Transcript t;
  t.log = TranscriptLog(options.record_events);
  TranscriptLog* log = options.record_events ? &t.log : nullptr;
  const int64_t open = options.open_time;

  TokenIssuer issuer(Mix64(options.seed ^ 0x746f6b656e6b6579ULL),
                     DeriveSeed(options.seed, {kTokenStream}));
  std::vector<Envelope> envelopes;
  for (size_t i = 0; i < population.size(); ++i) {
    absl::StatusOr<Token> token = issuer.Issue(i, recipe.task_id);
    if (!token.ok()) return token.status();
    Rng rng(DeriveSeed(options.seed, {kClientStream, i}));
    absl::StatusOr<ClientOutcome> out =
        ClientStep(recipe, codec, population[i], *token, open, rng);
    if (!out.ok()) return out.status();
    if (out->selected) {
      t.truth.selected_devices.push_back(i);
      t.truth.honest_messages.push_back(out->encoded_message);
    }
    if (out->dummy) ++t.truth.dummies;
    if (out->report) envelopes.push_back({i, *std::move(out->report)});
  }
  const size_t honest_reports = envelopes.size();

  if (adversary.clients > 0) {
    Rng rng(DeriveSeed(options.seed, {kAdversaryStream}));
    std::uniform_int_distribution<int64_t> jitter(0, recipe.arrival_spread);
    std::optional<std::vector<double>> worst;
    for (int64_t j = 0; j < adversary.clients; ++j) {
      const uint64_t device = population.size() + j;
      absl::StatusOr<Token> token = issuer.Issue(device, recipe.task_id);
      if (!token.ok()) return token.status();
      std::vector<double> msg;
      if (static_cast<size_t>(j) < adversary.injected.size()) {
        msg = adversary.injected[j];
      } else {
        if (!worst) {
          absl::StatusOr<std::vector<double>> w =
              WorstCaseValidMessage(recipe, codec);
          if (!w.ok()) return w.status();
          worst = *std::move(w);
        }
        msg = *worst;
      }
      absl::StatusOr<ShareVector> enc =
          EncodeMessage(recipe.spec, codec, msg);
      if (!enc.ok()) return enc.status();
      absl::StatusOr<SharePair> shares = Share(field, *enc, rng);
      if (!shares.ok()) return shares.status();
      t.truth.adversary_messages.push_back(*std::move(enc));
      Report r;
      r.leader_share = std::move(shares->leader);
      r.helper_share = std::move(shares->helper);
      r.token = *std::move(token);
      r.arrival_time = open + jitter(rng);
      envelopes.push_back({device, std::move(r)});
    }
  }
  const int64_t replays =
      std::min<int64_t>(adversary.replays, static_cast<int64_t>(honest_reports));
  for (int64_t j = 0; j < replays; ++j) {
    envelopes.push_back(envelopes[j]);
  }
  t.truth.issued_tokens = static_cast<int64_t>(issuer.issued_count());

  Rng anon_rng(DeriveSeed(options.seed, {kAnonymizerStream}));
  const size_t submitted = envelopes.size();
  std::vector<Report> reports =
      AnonymizerForward(std::move(envelopes), options.delivery_window, anon_rng);
  if (log != nullptr) {
    log->Record(open, "anonymizer", "forward", Mix64(submitted),
                absl::StrCat("n=", reports.size()));
  }

  AggregationServer leader(ServerRole::kLeader, recipe, field,
                           issuer.verification_key(), open, log);
  AggregationServer helper(ServerRole::kHelper, recipe, field,
                           issuer.verification_key(), open, log);
  ValidityOracle oracle(recipe, codec);
  std::vector<bool> dropped(reports.size(), false);
  for (size_t idx : options.helper_drops) {
    if (idx < dropped.size()) dropped[idx] = true;
  }
  for (size_t i = 0; i < reports.size(); ++i) {
    const Report& r = reports[i];
    const bool leader_ok = leader.Admit(r) == IngestResult::kAccepted;
    const bool helper_ok =
        !dropped[i] && helper.Admit(r) == IngestResult::kAccepted;
    if (!leader_ok && !helper_ok) continue;
    const bool verdict = oracle.Check(r.leader_share, r.helper_share);
    if (leader_ok) leader.Ingest(r, verdict);
    if (helper_ok) helper.Ingest(r, verdict);
  }

  const double participation =
      recipe.sampling_rate + (1 - recipe.sampling_rate) * recipe.dummy_rate;
  RevealOptions ro;
  ro.close_time = open + recipe.window;
  ro.expected_rate = static_cast<double>(population.size()) * participation /
                     static_cast<double>(recipe.arrival_spread + 1);
  absl::StatusOr<RevealResult> rev =
      Reveal(leader, helper, recipe, codec, ro, log);
  if (!rev.ok()) return rev.status();

  const AggregatorState& ls = leader.state();
  t.output = std::move(rev->output);
  t.output_field = std::move(rev->output_field);
  t.k = rev->k;
  t.rate_rejected = rev->rate_rejected;
  t.rejected = ls.rejected_invalid + ls.invalid_tokens;
  t.duplicates = ls.duplicates;
  t.invalid_tokens = ls.invalid_tokens;
  t.window_violations = ls.window_violations;
  t.leader_view = leader.view();
  t.helper_view = helper.view();
  return t;
}

}  // namespace sa2
