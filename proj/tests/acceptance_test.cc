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

// Acceptance suite. Each TEST is one numbered criterion; main() prints a
// single "criterion N: PASS|FAIL" line per criterion after it runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gtest/gtest.h"
#include "sa2/accountant.h"
#include "sa2/experiments.h"
#include "sa2/hashing.h"
#include "sa2/protocol.h"
#include "tests/test_util.h"

namespace sa2 {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void Note(const std::string& key, const std::string& value) {
  ::testing::Test::RecordProperty(key, value);
  std::printf("  %s = %s\n", key.c_str(), value.c_str());
}

void Note(const std::string& key, double value) {
  Note(key, absl::StrFormat("%.6g", value));
}

ShareVector FieldSum(const PrimeField& f, const std::vector<ShareVector>& vs,
                     size_t len) {
  ShareVector sum(len);
  for (const ShareVector& v : vs) EXPECT_OK(f.AddInPlace(sum, v));
  return sum;
}

TEST(Acceptance, Criterion01_GaussianCalibration) {
  const auto start = Clock::now();
  const double classic7 = *GaussianEpsClassic({7.0}, 1e-8);
  const double analytic51 = *GaussianEpsAnalytic({5.1}, 1e-8);
  const double analytic45 = *GaussianEpsAnalytic({4.5}, 1e-8);
  Note("eps_classic(7)", classic7);
  Note("eps_analytic(5.1)", analytic51);
  Note("eps_analytic(4.5)", analytic45);
  EXPECT_LE(classic7, 1.0);
  EXPECT_LE(analytic51, 1.0)
      << "delta(eps=1, sigma=5.1) = " << GaussianDeltaAnalytic({5.1}, 1.0)
      << " exceeds 1e-8; the smallest sigma meeting (1, 1e-8) is "
      << *GaussianSigmaAnalytic({1.0, 1e-8});
  EXPECT_GT(analytic45, 1.0);
  EXPECT_LT(Seconds(start), 1.0);
}

TEST(Acceptance, Criterion02_SubsampledSingleStep) {
  const auto start = Clock::now();
  ASSERT_OK_AND_ASSIGN(SubsampledGaussianBound b,
                       SubsampledGaussianEps({5.1}, {0.02, 1}, 1e-8));
  Note("eps", b.eps);
  EXPECT_GE(b.eps, 0.030);
  EXPECT_LE(b.eps, 0.040);
  EXPECT_LT(Seconds(start), 1.0);
}

TEST(Acceptance, Criterion03_Composition) {
  const auto start = Clock::now();
  ASSERT_OK_AND_ASSIGN(SubsampledGaussianBound amplified,
                       SubsampledGaussianEps({5.1}, {0.02, 2500}, 1e-8));
  ASSERT_OK_AND_ASSIGN(SubsampledGaussianBound full,
                       SubsampledGaussianEps({5.1}, {1.0, 2500}, 1e-8));
  const std::vector<double> orders = IntegerOrders();
  ASSERT_OK_AND_ASSIGN(RdpCurve step, GaussianRdp({5.1}, orders));
  ASSERT_OK_AND_ASSIGN(RdpCurve fifty, RdpRepeat(step, 50));
  ASSERT_OK_AND_ASSIGN(RdpConversion qt, RdpToApproxDp(fifty, 1e-8));
  Note("eps_T2500", amplified.eps);
  Note("eps_T2500_unamplified", full.eps);
  Note("eps_qT_50_steps", qt.dp.eps);
  EXPECT_GE(amplified.eps, 0.6);
  EXPECT_LE(amplified.eps, 1.3);
  EXPECT_GT(full.eps, 100.0);
  EXPECT_GE(qt.dp.eps, 7.0);
  EXPECT_LE(qt.dp.eps, 10.0);
  EXPECT_LT(Seconds(start), 5.0);
}

TEST(Acceptance, Criterion04_ShuffleAndSampling) {
  const auto start = Clock::now();
  ASSERT_OK_AND_ASSIGN(double shuffle, ShuffleEpsAnalytic(4.0, 10000, 1e-10));
  ASSERT_OK_AND_ASSIGN(ApproxDp amp, AmplifyBySampling({0.61, 1e-10}, 0.02));
  Note("shuffle_eps", shuffle);
  Note("amplified_eps", amp.eps);
  EXPECT_NEAR(shuffle, 1.109, 0.005);
  EXPECT_LT(amp.eps, 0.02);
  EXPECT_LT(Seconds(start), 1.0);
}

TEST(Acceptance, Criterion05_DonationTime) {
  const auto start = Clock::now();
  ASSERT_OK_AND_ASSIGN(ApproxDp d, DonationTimeAmplify({1.0, 1e-6}, 100));
  Note("eps", d.eps);
  Note("delta", absl::StrFormat("%.17g", d.delta));
  EXPECT_NEAR(d.eps, 0.910, 0.001);
  EXPECT_DOUBLE_EQ(d.delta, 1.01e-4);
  EXPECT_LT(Seconds(start), 1.0);
}

TEST(Acceptance, Criterion06_ProtocolEquivalence) {
  const auto start = Clock::now();
  constexpr int kN = 10000;
  std::vector<std::vector<double>> pop;
  for (int i = 0; i < kN; ++i) pop.push_back({static_cast<double>(i % 100)});
  const Recipe recipe =
      MakeRecipe("acceptance-6", {RandomizerKind::kRappor, 100, 4.0}, 500, 0.1);
  const PrimeField field = *PrimeField::Create(recipe.field.modulus);
  int matched = 0;
  int reveals_below_threshold = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    RoundOptions opt;
    opt.seed = seed;
    ASSERT_OK_AND_ASSIGN(Transcript t, RunRound(recipe, pop, {}, opt));
    ASSERT_OK_AND_ASSIGN(std::optional<ShareVector> ideal,
                         IdealAggregate(field, t.truth.honest_messages,
                                        recipe.batch_threshold));
    if (ideal.has_value() == t.output_field.has_value() &&
        (!ideal || *ideal == *t.output_field)) {
      ++matched;
    }
    for (const TranscriptEvent& e : t.log.events()) {
      if (e.kind == "reveal" && std::stoll(std::string(e.Field("k"))) < 500) {
        ++reveals_below_threshold;
      }
    }
    if (t.k < recipe.batch_threshold && t.output.has_value()) ++reveals_below_threshold;
  }
  // Threshold enforcement on rounds that fall short of B.
  Recipe high = recipe;
  high.batch_threshold = 1100;
  int short_rounds = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RoundOptions opt;
    opt.seed = seed;
    ASSERT_OK_AND_ASSIGN(Transcript t, RunRound(high, pop, {}, opt));
    if (t.k >= high.batch_threshold) continue;
    ++short_rounds;
    for (const TranscriptEvent& e : t.log.events()) {
      if (e.kind == "reveal") ++reveals_below_threshold;
    }
    if (t.output || t.leader_view.peer_share_sum || t.helper_view.peer_share_sum) {
      ++reveals_below_threshold;
    }
  }
  Note("bit_exact_matches", absl::StrCat(matched, "/100"));
  Note("short_rounds_checked", absl::StrCat(short_rounds));
  Note("reveals_with_k_below_B", absl::StrCat(reveals_below_threshold));
  EXPECT_EQ(matched, 100);
  EXPECT_GT(short_rounds, 0);
  EXPECT_EQ(reveals_below_threshold, 0);
  EXPECT_LT(Seconds(start), 30.0);
}

TEST(Acceptance, Criterion07_Robustness) {
  const auto start = Clock::now();
  RandomizerSpec spec;
  spec.kind = RandomizerKind::kGaussianVector;
  spec.dimension = 16;
  spec.sigma = 0.0;
  spec.batch = 1000;
  Recipe recipe = MakeRecipe("acceptance-7", spec, 1000, 1.0);
  recipe.predicate = {PredicateKind::kL2NormLe, 1.0};
  const FixedPointCodec codec = *RecipeCodec(recipe);
  AdversaryConfig adv;
  adv.clients = 10;
  double worst = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(DeriveSeed(seed, {7}));
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> pop(1000, std::vector<double>(16));
    for (auto& x : pop) {
      double n = 0;
      for (double& v : x) {
        v = g(rng);
        n += v * v;
      }
      for (double& v : x) v *= 0.9 / std::sqrt(n);
    }
    RoundOptions opt;
    opt.seed = seed;
    opt.record_events = false;
    ASSERT_OK_AND_ASSIGN(Transcript t, RunRound(recipe, pop, adv, opt));
    ASSERT_TRUE(t.output.has_value()) << seed;
    ASSERT_EQ(t.k, 1010);
    const std::vector<double> honest =
        codec.Decode(FieldSum(codec.field(), t.truth.honest_messages, 16));
    double d = 0;
    for (int j = 0; j < 16; ++j) d += std::pow((*t.output)[j] - honest[j], 2);
    worst = std::max(worst, std::sqrt(d));
  }
  Note("max_deviation", worst);
  EXPECT_LE(worst, 10.0);
  EXPECT_LT(Seconds(start), 60.0);
}

TEST(Acceptance, Criterion08_DedupAndRateGuard) {
  const auto start = Clock::now();
  constexpr int kN = 10000;
  std::vector<std::vector<double>> pop;
  for (int i = 0; i < kN; ++i) pop.push_back({static_cast<double>(i % 10)});
  const Recipe recipe =
      MakeRecipe("acceptance-8", {RandomizerKind::kRappor, 10, 2.0}, 100, 0.1);

  // Replays rejected at both servers, counted exactly.
  constexpr int64_t kReplays = 37;
  AdversaryConfig replay;
  replay.replays = kReplays;
  RoundOptions opt;
  opt.seed = 8;
  ASSERT_OK_AND_ASSIGN(Transcript base, RunRound(recipe, pop, {}, opt));
  ASSERT_OK_AND_ASSIGN(Transcript t, RunRound(recipe, pop, replay, opt));
  int64_t leader_dups = 0, helper_dups = 0;
  for (const TranscriptEvent& e : t.log.events()) {
    if (e.kind != "reject" || e.Field("reason") != "REJECTED_DUPLICATE") continue;
    (e.party == "leader" ? leader_dups : helper_dups)++;
  }
  Note("replays_injected", absl::StrCat(kReplays));
  Note("leader_duplicates", absl::StrCat(leader_dups));
  Note("helper_duplicates", absl::StrCat(helper_dups));
  EXPECT_EQ(t.duplicates, kReplays);
  EXPECT_EQ(leader_dups, kReplays);
  EXPECT_EQ(helper_dups, kReplays);
  EXPECT_EQ(t.k, base.k);
  EXPECT_EQ(t.output_field, base.output_field);

  // 5x burst: adversarial devices quadruple the expected volume.
  AdversaryConfig flood;
  flood.clients = 4 * static_cast<int64_t>(kN * recipe.sampling_rate);
  ASSERT_OK_AND_ASSIGN(Transcript burst, RunRound(recipe, pop, flood, opt));
  Note("burst_rate_rejected", burst.rate_rejected ? "true" : "false");
  EXPECT_TRUE(burst.rate_rejected);
  EXPECT_EQ(burst.log.events().back().Field("reason"), "REJECT_RATE");

  // Poisson arrivals at the expected rate.
  const double rate = kN * recipe.sampling_rate / (recipe.arrival_spread + 1.0);
  const int64_t width = DefaultRateWindow(rate);
  Rng rng(88);
  std::poisson_distribution<int> per_minute(rate);
  constexpr int kTrials = 10000;
  int false_rejects = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<int64_t> times;
    for (int64_t m = 0; m <= recipe.arrival_spread; ++m) {
      times.insert(times.end(), per_minute(rng), m);
    }
    false_rejects += *RateGuard(times, rate, width) == RateVerdict::kRejectRate;
  }
  const double fr = static_cast<double>(false_rejects) / kTrials;
  Note("expected_rate_per_minute", rate);
  Note("rate_window", absl::StrCat(width));
  Note("false_reject_rate", fr);
  EXPECT_LT(fr, 0.05);
  EXPECT_LT(Seconds(start), 30.0);
}

TEST(Acceptance, Criterion09_ExperimentOrderings) {
  const auto start = Clock::now();
  const SweepGrid grid = DefaultHistogramGrid();
  ASSERT_OK_AND_ASSIGN(std::vector<ExperimentRow> rows, Sweep(grid, {}));
  ASSERT_EQ(rows.size() % 3, 0u);
  int order_violations = 0;
  // Some grid point at K = 1e5, T = 1000 must show the gap.
  double max_ratio_k1e5_t1000 = 0;
  double min_ratio_k1e5_t1000 = INFINITY;
  double ratio_small = NAN;
  for (size_t i = 0; i < rows.size(); i += 3) {
    const ExperimentRow& np = rows[i];
    const ExperimentRow& agg = rows[i + 1];
    const ExperimentRow& sa = rows[i + 2];
    ASSERT_EQ(np.method, Method::kNonpriv);
    ASSERT_EQ(agg.method, Method::kAgg);
    ASSERT_EQ(sa.method, Method::kSampagg);
    if (!(np.result.analytic_mse <= sa.result.analytic_mse &&
          sa.result.analytic_mse <= agg.result.analytic_mse)) {
      ++order_violations;
      ADD_FAILURE() << "ordering at K=" << np.alphabet_size << " M=" << np.sample_target
                    << " T=" << np.tasks;
    }
    if (np.alphabet_size == 100000 && np.tasks == 1000) {
      const double ratio = agg.result.analytic_mse / sa.result.analytic_mse;
      max_ratio_k1e5_t1000 = std::max(max_ratio_k1e5_t1000, ratio);
      min_ratio_k1e5_t1000 = std::min(min_ratio_k1e5_t1000, ratio);
    }
    if (np.alphabet_size == 1000 && np.tasks == 1 && np.sample_target == 100000) {
      ratio_small = sa.result.analytic_mse / np.result.analytic_mse;
    }
  }
  Note("grid_points", absl::StrCat(rows.size() / 3));
  Note("ordering_violations", absl::StrCat(order_violations));
  Note("max_agg_over_sampagg_K1e5_T1000", max_ratio_k1e5_t1000);
  Note("min_agg_over_sampagg_K1e5_T1000", min_ratio_k1e5_t1000);
  Note("sampagg_over_nonpriv_K1e3_T1_M1e5", ratio_small);
  EXPECT_EQ(order_violations, 0);
  EXPECT_GE(max_ratio_k1e5_t1000, 10.0);
  EXPECT_LE(ratio_small, 1.1);

  HistogramTask needles;
  needles.alphabet_size = 1000;
  needles.population = 1000000;
  needles.sample_target = 10000;
  needles.truth = TruthKind::kNeedles;
  needles.gamma = 0.01;
  ASSERT_OK_AND_ASSIGN(MethodResult unif,
                       NeedlesMse(needles, Method::kNonprivUnif, 1000, 91));
  ASSERT_OK_AND_ASSIGN(MethodResult imp,
                       NeedlesMse(needles, Method::kNonprivImpsamp, 1000, 92));
  const double gap = unif.mc_mse - imp.mc_mse;
  const double se = std::hypot(unif.mc_stderr, imp.mc_stderr);
  Note("needles_unif_mc", unif.mc_mse);
  Note("needles_impsamp_mc", imp.mc_mse);
  Note("needles_gap_in_stderr", gap / se);
  EXPECT_GE(gap, 3 * se);
  EXPECT_LT(Seconds(start), 300.0);
}

TEST(Acceptance, Criterion10_MonteCarloVsAnalytic) {
  const auto start = Clock::now();
  int configs = 0;
  int outside = 0;
  double worst_z = 0;
  auto check = [&](const std::string& label, const MethodResult& r) {
    ++configs;
    const double z = std::fabs(r.mc_mse - r.analytic_mse) / r.mc_stderr;
    worst_z = std::max(worst_z, z);
    if (z > 3) {
      ++outside;
      ADD_FAILURE() << label << ": mc " << r.mc_mse << " analytic "
                    << r.analytic_mse << " stderr " << r.mc_stderr;
    }
  };
  SweepGrid hist = DefaultHistogramGrid();
  hist.alphabet_sizes = {100, 1000};
  hist.sample_targets = {1000, 10000};
  hist.tasks = {1, 100};
  ASSERT_OK_AND_ASSIGN(auto hrows, Sweep(hist, {1000, 10, 1}));
  for (const ExperimentRow& r : hrows) {
    check(absl::StrCat(std::string(MethodName(r.method)), " K=", r.alphabet_size,
                       " M=", r.sample_target, " T=", r.tasks),
          r.result);
  }
  SweepGrid nd = DefaultNeedlesGrid();
  nd.alphabet_sizes = {100, 1000};
  nd.sample_targets = {1000, 10000};
  nd.tasks = {1};
  nd.gammas = {0.1, 0.01};
  ASSERT_OK_AND_ASSIGN(auto nrows, Sweep(nd, {1000, 11, 1}));
  for (const ExperimentRow& r : nrows) {
    check(absl::StrCat("needles ", std::string(MethodName(r.method)), " K=",
                       r.alphabet_size, " M=", r.sample_target, " gamma=", r.gamma),
          r.result);
  }
  // End-to-end protocol path against its Poisson-sampling analytic value.
  HistogramTask task;
  task.alphabet_size = 10;
  task.population = 10000;
  task.sample_target = 1000;
  const double sigma = 4.0;
  const double q = 0.1;
  MethodResult proto;
  proto.analytic_mse = (1 - q) / 1000.0 + 10 * sigma * sigma / 1e6;
  double sum = 0, sum_sq = 0;
  constexpr int kTrials = 1000;
  for (int t = 0; t < kTrials; ++t) {
    ASSERT_OK_AND_ASSIGN(double e, ProtocolHistogramSquaredError(task, sigma, 5000 + t));
    sum += e;
    sum_sq += e * e;
  }
  proto.mc_mse = sum / kTrials;
  proto.mc_stderr =
      std::sqrt((sum_sq / kTrials - proto.mc_mse * proto.mc_mse) / (kTrials - 1));
  check("protocol path K=10 M=1000", proto);
  Note("configurations", absl::StrCat(configs));
  Note("outside_3_stderr", absl::StrCat(outside));
  Note("max_abs_z", worst_z);
  Note("seconds", Seconds(start));
  EXPECT_EQ(outside, 0);
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const std::string name = info.name();
    // "CriterionNN_Description".
    const int number = std::stoi(name.substr(9, 2));
    std::printf("criterion %d: %s (%s)\n", number,
                info.result()->Passed() ? "PASS" : "FAIL",
                name.substr(12).c_str());
    std::fflush(stdout);
  }
};

}  // namespace
}  // namespace sa2

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(
      new sa2::CriterionPrinter);
  return RUN_ALL_TESTS();
}
