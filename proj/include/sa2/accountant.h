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

// Privacy accounting: divergences, Gaussian calibration, Renyi-DP
// composition and conversion, amplification by sampling, the analytic
// shuffling bound and randomized donation-time amplification.
//
// Neighboring datasets differ by the addition or removal of one user, and
// every Gaussian mechanism here has L2 sensitivity 1, so `sigma` is the
// noise multiplier.

#ifndef SA2_ACCOUNTANT_H_
#define SA2_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace sa2 {

struct ApproxDp {
  double eps = 0.0;
  double delta = 0.0;
};

// Renyi-DP cost rho(alpha) sampled on a sorted grid of orders alpha > 1.
struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> rho;
};

struct RdpConversion {
  ApproxDp dp;
  // Grid order attaining the minimum.
  double order = 0.0;
};

struct SamplingConfig {
  double rate = 1.0;
  int64_t steps = 1;
};

struct GaussianConfig {
  double sigma = 1.0;
};

// Integer orders lo..hi inclusive. The default grid used by the accountant.
std::vector<double> IntegerOrders(int lo = 2, int hi = 256);

// Fractional orders in (1, 2) followed by the integer grid. Only valid for
// closed-form curves (Gaussian, pure DP).
std::vector<double> ExtendedOrders();

// sum_x max(0, P(x) - e^eps Q(x)) for distributions on the same finite
// support.
absl::StatusOr<double> HockeyStick(std::span<const double> p,
                                   std::span<const double> q, double eps);

// sqrt(2 ln(1.25/delta)) / sigma.
absl::StatusOr<double> GaussianEpsClassic(GaussianConfig g, double delta);

// Exact delta of the Gaussian mechanism at a given eps:
//   Phi(1/(2 sigma) - eps sigma) - e^eps Phi(-1/(2 sigma) - eps sigma).
double GaussianDeltaAnalytic(GaussianConfig g, double eps);

// Smallest eps with GaussianDeltaAnalytic(g, eps) <= delta, by bisection to
// absolute tolerance 1e-6. The returned value is the upper end of the final
// bracket.
absl::StatusOr<double> GaussianEpsAnalytic(GaussianConfig g, double delta);

// Smallest sigma (relative tolerance 1e-9) whose analytic Gaussian guarantee
// meets `target`.
absl::StatusOr<double> GaussianSigmaAnalytic(ApproxDp target);

// rho(alpha) = alpha / (2 sigma^2).
absl::StatusOr<RdpCurve> GaussianRdp(GaussianConfig g,
                                     std::span<const double> orders);

// RDP of the Poisson-subsampled Gaussian mechanism at integer orders:
//   rho(alpha) = 1/(alpha-1) ln sum_{j=0}^{alpha} C(alpha,j) (1-q)^{alpha-j}
//                q^j exp(j(j-1)/(2 sigma^2)).
// Evaluated as log1p of the j >= 2 excess terms, all in log space.
absl::StatusOr<RdpCurve> SubsampledGaussianRdp(GaussianConfig g, double q,
                                               std::span<const double> orders);

// rho(alpha) = eps^2 alpha / 2.
absl::StatusOr<RdpCurve> PureToRdp(double eps, std::span<const double> orders);

// Pointwise sum; all curves must share one grid.
absl::StatusOr<RdpCurve> RdpCompose(std::span<const RdpCurve> curves);

// `times`-fold self composition.
absl::StatusOr<RdpCurve> RdpRepeat(const RdpCurve& curve, int64_t times);

// eps = min_alpha rho(alpha) + (ln(1/delta) + (alpha-1) ln(1-1/alpha)
//                               - ln(alpha)) / (alpha-1),
// clamped at zero.
absl::StatusOr<RdpConversion> RdpToApproxDp(const RdpCurve& curve,
                                            double delta);

// eps' = eps sqrt(2T ln(1/delta')) + T eps (e^eps - 1), delta = T delta +
// delta'.
absl::StatusOr<ApproxDp> AdvancedComposition(ApproxDp step, int64_t steps,
                                             double delta_prime);

// Poisson sampling at rate gamma: (ln(1 + gamma(e^eps - 1)), gamma delta).
absl::StatusOr<ApproxDp> AmplifyBySampling(ApproxDp mech, double gamma);

// Analytic privacy of B shuffled eps0-local reports:
//   ln(1 + (e^eps0 - 1)(4 sqrt(2 ln(4/delta)) / sqrt((e^eps0 + 1) B) + 4/B)).
absl::StatusOr<double> ShuffleEpsAnalytic(double eps0, int64_t batch,
                                          double delta);

// Per-round (eps, delta) under donation-time randomization over m rounds:
//   a = ln(1 + (e^eps - 1)/m),
//   eps' = a sqrt(2 m ln(1/delta)) + m a^2 / 2,  delta' = (m + 1) delta.
absl::StatusOr<ApproxDp> DonationTimeAmplify(ApproxDp step, int64_t m);

// True iff B < qk - sqrt(qk ln(1/delta)), in which case a Poisson(q) sample
// of k items has at least B elements with probability >= 1 - delta.
absl::StatusOr<bool> PoissonBatchFeasible(double q, int64_t k, int64_t batch,
                                          double delta);

// Which route produced the tightest bound in SubsampledGaussianEps.
enum class AccountingRoute {
  kRdp,
  kAnalyticAmplified,
  kAnalyticComposed,
};

struct SubsampledGaussianBound {
  double eps = 0.0;
  AccountingRoute route = AccountingRoute::kRdp;
  // Minimizing order when route == kRdp.
  double order = 0.0;
};

// eps at `delta` for `sampling.steps` adaptive steps of the Gaussian
// mechanism on a Poisson(sampling.rate) subsample. The bound is the minimum
// over the routes that apply:
//  - RDP composition on the integer grid and conversion (always);
//  - for a single step, the analytic Gaussian at `delta` followed by
//    amplification by sampling (whose delta q*delta <= delta);
//  - at rate 1, exact Gaussian composition (T steps at sigma are one step at
//    sigma/sqrt(T)) through the analytic Gaussian.
absl::StatusOr<SubsampledGaussianBound> SubsampledGaussianEps(
    GaussianConfig g, SamplingConfig sampling, double delta);

// Minimal sigma (relative tolerance 1e-3) such that SubsampledGaussianEps at
// target.delta is at most target.eps. Fails if the search passes 1e6.
absl::StatusOr<double> CalibrateSigma(ApproxDp target, SamplingConfig sampling);

}  // namespace sa2

#endif  // SA2_ACCOUNTANT_H_
