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

// Histogram-estimation experiments: expected squared error of non-private,
// aggregated and sampled-and-aggregated estimators on uniform, Zipf and
// sparse ("needles") ground truths, analytically and by Monte Carlo.

#ifndef SA2_EXPERIMENTS_H_
#define SA2_EXPERIMENTS_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "sa2/accountant.h"
#include "sa2/field.h"

namespace sa2 {

enum class Method { kNonpriv, kNonprivUnif, kNonprivImpsamp, kAgg, kSampagg };

std::string_view MethodName(Method m);
// Case-insensitive.
absl::StatusOr<Method> ParseMethod(std::string_view name);
bool IsPrivate(Method m);

enum class TruthKind { kUniform, kZipf, kNeedles };

struct HistogramTask {
  int64_t alphabet_size = 1000;
  int64_t population = 1'000'000;
  int64_t sample_target = 10'000;
  int64_t tasks = 1;
  ApproxDp budget = {1.0, 1e-6};
  TruthKind truth = TruthKind::kUniform;
  double zipf_s = 1.1;
  // Needles only: fraction of users holding a non-default value, and the
  // shape of the non-default values.
  double gamma = 0.01;
  TruthKind inner = TruthKind::kUniform;
};

absl::Status ValidateTask(const HistogramTask& task);

// Largest-remainder rounding of n * p to integers summing to n.
std::vector<int64_t> PopulationCounts(std::span<const double> p, int64_t n);

// Ground-truth frequencies. For needles the default symbol is the last
// coordinate and frequencies are n_i / N for integer population counts.
absl::StatusOr<std::vector<double>> TruthDistribution(const HistogramTask& task);

// sum_i p_i (1 - p_i) / M.
double NonprivMse(std::span<const double> p, int64_t m);

// nonpriv + K sigma^2 / M^2.
double PrivateHistAnalyticMse(std::span<const double> p, int64_t m,
                              double sigma);

// Analytic-Gaussian sigma for ceil(T M / N) compositions.
absl::StatusOr<double> AggSigma(const HistogramTask& task);

// CalibrateSigma at q = M / N over T steps.
absl::StatusOr<double> SampaggSigma(const HistogramTask& task);

// min(M / (2 gamma N), 1).
double NeedlesHighRate(const HistogramTask& task);
// M / (2N).
double NeedlesLowRate(const HistogramTask& task);

struct MethodResult {
  Method method = Method::kNonpriv;
  double sigma = 0.0;
  double analytic_mse = 0.0;
  double mc_mse = 0.0;
  double mc_stderr = 0.0;
  int64_t trials = 0;
};

// `sigma` < 0 selects the calibrated sigma for the method.
absl::StatusOr<MethodResult> PrivateHistMse(const HistogramTask& task,
                                            Method method, int64_t trials,
                                            uint64_t seed, double sigma = -1);

absl::StatusOr<MethodResult> NeedlesMse(const HistogramTask& task,
                                        Method method, int64_t trials,
                                        uint64_t seed, double sigma = -1);

// One draw of a needles estimator. p_hat is on the unconditional scale
// (estimates of p_i); pi_hat = p_hat / gamma estimates the distribution
// conditional on a non-default value. Only the K - 1 non-default coordinates
// are returned.
struct NeedlesEstimate {
  std::vector<double> p_hat;
  std::vector<double> pi_hat;
};

absl::StatusOr<NeedlesEstimate> SampleNeedlesEstimate(
    const HistogramTask& task, Method method, double sigma, Rng& rng);

// Multinomial(m, p) counts.
std::vector<int64_t> SampleMultinomial(std::span<const double> p, int64_t m,
                                       Rng& rng);

// Squared error of one end-to-end protocol round estimating a uniform/Zipf
// histogram: Poisson(M/N) sampling on device, one-hot Gaussian-vector
// randomizer with per-client noise sigma / sqrt(M), shares, both servers,
// reveal, then division by M.
absl::StatusOr<double> ProtocolHistogramSquaredError(const HistogramTask& task,
                                                     double sigma,
                                                     uint64_t seed);

enum class ExperimentKind { kHistogram, kNeedles };

struct SweepGrid {
  ExperimentKind kind = ExperimentKind::kHistogram;
  std::vector<int64_t> alphabet_sizes;
  std::vector<int64_t> sample_targets;
  std::vector<int64_t> tasks;
  // Needles only.
  std::vector<double> gammas;
  int64_t population = 1'000'000;
  ApproxDp budget = {1.0, 1e-6};
  std::vector<Method> methods;
  TruthKind truth = TruthKind::kUniform;
  TruthKind inner = TruthKind::kUniform;
  double zipf_s = 1.1;
};

SweepGrid DefaultHistogramGrid();
SweepGrid DefaultNeedlesGrid();

struct SweepOptions {
  int64_t trials = 0;
  uint64_t seed = 0;
  int jobs = 1;
};

struct ExperimentRow {
  Method method = Method::kNonpriv;
  int64_t alphabet_size = 0;
  int64_t population = 0;
  int64_t sample_target = 0;
  int64_t tasks = 0;
  double gamma = 0.0;
  double eps_total = 0.0;
  double delta_total = 0.0;
  MethodResult result;
  uint64_t seed = 0;
};

// One row per (K, T, gamma, M, method) in that nesting order. Deterministic
// for a given seed regardless of `jobs`.
absl::StatusOr<std::vector<ExperimentRow>> Sweep(const SweepGrid& grid,
                                                 const SweepOptions& options);

inline constexpr std::string_view kCsvHeader =
    "method,K,N,M,T,gamma,eps_total,delta_total,sigma,analytic_mse,mc_mse,"
    "mc_stderr,trials,seed";

// Header line plus one line per row, '\n'-terminated. Reals use %.<precision>g;
// MC fields are "nan" when trials == 0.
std::string FormatCsv(std::span<const ExperimentRow> rows, int precision = 6);

}  // namespace sa2

#endif  // SA2_EXPERIMENTS_H_
