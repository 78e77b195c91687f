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

#include "sa2/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace sa2 {
namespace {

constexpr double kEpsAccuracy = 1e-6;
constexpr int kMaxBisectionSteps = 200;
constexpr double kCalibrationAccuracy = 1e-3;
constexpr double kMaxSigma = 1e6;

double StandardGaussianCdf(double x) {
  return std::erfc(-x / std::sqrt(2.0)) / 2.0;
}

absl::Status CheckDelta(double delta, bool allow_one = false) {
  const bool ok = allow_one ? (delta > 0 && delta <= 1)
                            : (delta > 0 && delta < 1);
  if (!ok) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must lie in (0, 1", allow_one ? "]" : ")",
                     ", got ", delta));
  }
  return absl::OkStatus();
}

absl::Status CheckSigma(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be positive and finite, got ", sigma));
  }
  return absl::OkStatus();
}

absl::Status CheckOrders(std::span<const double> orders) {
  if (orders.empty()) return absl::InvalidArgumentError("empty order grid");
  for (size_t i = 0; i < orders.size(); ++i) {
    if (!(orders[i] > 1) || !std::isfinite(orders[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("orders must be finite and > 1, got ", orders[i]));
    }
    if (i > 0 && !(orders[i] > orders[i - 1])) {
      return absl::InvalidArgumentError("orders must be strictly increasing");
    }
  }
  return absl::OkStatus();
}

// ln(e^x - 1) for x > 0.
double LogExpm1(double x) {
  return x > 30 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
}

// ln(1 + e^x).
double Log1pExp(double x) {
  return x > 30 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double LogBinomial(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

// ln sum_i e^{v_i} with Neumaier-compensated accumulation.
double LogSumExp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = std::exp(x - m);
    const double s = sum + t;
    comp += std::fabs(sum) >= std::fabs(t) ? (sum - s) + t : (t - s) + sum;
    sum = s;
  }
  return m + std::log(sum + comp);
}

absl::StatusOr<double> SubsampledGaussianRdpAt(double sigma, double q,
                                               double alpha) {
  if (alpha != std::floor(alpha) || alpha < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "subsampled Gaussian RDP needs integer orders >= 2, got ", alpha));
  }
  if (q == 0) return 0.0;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_two_var = 1.0 / (2 * sigma * sigma);
  std::vector<double> log_terms;
  log_terms.reserve(static_cast<size_t>(alpha));
  for (double j = 2; j <= alpha; ++j) {
    if (q == 1 && j < alpha) continue;
    double t = LogBinomial(alpha, j) + j * log_q +
               LogExpm1(j * (j - 1) * inv_two_var);
    if (j < alpha) t += (alpha - j) * log_1mq;
    log_terms.push_back(t);
  }
  const double log_excess = LogSumExp(log_terms);
  if (!std::isfinite(log_excess)) {
    return absl::OutOfRangeError(absl::StrCat(
        "subsampled Gaussian RDP overflows at alpha=", alpha,
        ", sigma=", sigma));
  }
  const double rho = Log1pExp(log_excess) / (alpha - 1);
  if (!std::isfinite(rho)) {
    return absl::OutOfRangeError(absl::StrCat(
        "subsampled Gaussian RDP overflows at alpha=", alpha));
  }
  return rho;
}

}  // namespace

std::vector<double> IntegerOrders(int lo, int hi) {
  std::vector<double> orders;
  for (int a = lo; a <= hi; ++a) orders.push_back(a);
  return orders;
}

std::vector<double> ExtendedOrders() {
  std::vector<double> orders;
  for (int i = 1; i < 20; ++i) orders.push_back(1.0 + i * 0.05);
  for (int a = 2; a <= 256; ++a) orders.push_back(a);
  return orders;
}

absl::StatusOr<double> HockeyStick(std::span<const double> p,
                                   std::span<const double> q, double eps) {
  if (p.size() != q.size() || p.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "support mismatch: ", p.size(), " vs ", q.size(), " outcomes"));
  }
  double sum_p = 0.0;
  double sum_q = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0) {
      return absl::InvalidArgumentError("negative probability mass");
    }
    sum_p += p[i];
    sum_q += q[i];
  }
  if (std::fabs(sum_p - 1) > 1e-12 || std::fabs(sum_q - 1) > 1e-12) {
    return absl::InvalidArgumentError("distributions must sum to 1");
  }
  const double scale = std::exp(eps);
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    total += std::max(0.0, p[i] - scale * q[i]);
  }
  return total;
}

absl::StatusOr<double> GaussianEpsClassic(GaussianConfig g, double delta) {
  if (absl::Status s = CheckDelta(delta); !s.ok()) return s;
  if (absl::Status s = CheckSigma(g.sigma); !s.ok()) return s;
  return std::sqrt(2 * std::log(1.25 / delta)) / g.sigma;
}

double GaussianDeltaAnalytic(GaussianConfig g, double eps) {
  const double a = 1 / (2 * g.sigma);
  const double b = eps * g.sigma;
  const double upper = StandardGaussianCdf(a - b);
  // e^eps Phi(-a-b), kept finite when e^eps alone would overflow.
  const double tail = StandardGaussianCdf(-a - b);
  const double lower = tail > 0 ? std::exp(eps + std::log(tail)) : 0.0;
  return std::max(0.0, upper - lower);
}

absl::StatusOr<double> GaussianEpsAnalytic(GaussianConfig g, double delta) {
  if (absl::Status s = CheckDelta(delta); !s.ok()) return s;
  if (absl::Status s = CheckSigma(g.sigma); !s.ok()) return s;
  if (GaussianDeltaAnalytic(g, 0) <= delta) return 0.0;
  double lo = 0;
  double hi = 1;
  int steps = 0;
  while (GaussianDeltaAnalytic(g, hi) > delta) {
    lo = hi;
    hi *= 2;
    if (++steps > kMaxBisectionSteps) {
      return absl::InternalError("no eps upper bound found");
    }
  }
  while (hi - lo > kEpsAccuracy) {
    if (++steps > kMaxBisectionSteps) {
      return absl::InternalError(absl::StrCat(
          "analytic Gaussian bisection did not converge in ",
          kMaxBisectionSteps, " steps"));
    }
    const double mid = (lo + hi) / 2;
    if (GaussianDeltaAnalytic(g, mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

absl::StatusOr<double> GaussianSigmaAnalytic(ApproxDp target) {
  if (absl::Status s = CheckDelta(target.delta); !s.ok()) return s;
  if (!(target.eps > 0)) {
    return absl::InvalidArgumentError("target eps must be positive");
  }
  double lo = 1e-3;
  double hi = 1;
  while (GaussianDeltaAnalytic({hi}, target.eps) > target.delta) {
    lo = hi;
    hi *= 2;
    if (hi > kMaxSigma) {
      return absl::OutOfRangeError("sigma search exceeded 1e6");
    }
  }
  while (hi - lo > 1e-9 * lo) {
    const double mid = (lo + hi) / 2;
    if (GaussianDeltaAnalytic({mid}, target.eps) > target.delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

absl::StatusOr<RdpCurve> GaussianRdp(GaussianConfig g,
                                     std::span<const double> orders) {
  if (absl::Status s = CheckSigma(g.sigma); !s.ok()) return s;
  if (absl::Status s = CheckOrders(orders); !s.ok()) return s;
  RdpCurve curve{{orders.begin(), orders.end()}, {}};
  curve.rho.reserve(orders.size());
  for (double a : orders) curve.rho.push_back(a / (2 * g.sigma * g.sigma));
  return curve;
}

absl::StatusOr<RdpCurve> SubsampledGaussianRdp(GaussianConfig g, double q,
                                               std::span<const double> orders) {
  if (absl::Status s = CheckSigma(g.sigma); !s.ok()) return s;
  if (absl::Status s = CheckOrders(orders); !s.ok()) return s;
  if (!(q >= 0 && q <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling rate must lie in [0, 1], got ", q));
  }
  RdpCurve curve{{orders.begin(), orders.end()}, {}};
  curve.rho.reserve(orders.size());
  for (double a : orders) {
    absl::StatusOr<double> rho = SubsampledGaussianRdpAt(g.sigma, q, a);
    if (!rho.ok()) return rho.status();
    curve.rho.push_back(*rho);
  }
  return curve;
}

absl::StatusOr<RdpCurve> PureToRdp(double eps, std::span<const double> orders) {
  if (!(eps >= 0) || !std::isfinite(eps)) {
    return absl::InvalidArgumentError("eps must be finite and >= 0");
  }
  if (absl::Status s = CheckOrders(orders); !s.ok()) return s;
  RdpCurve curve{{orders.begin(), orders.end()}, {}};
  for (double a : orders) curve.rho.push_back(0.5 * eps * eps * a);
  return curve;
}

absl::StatusOr<RdpCurve> RdpCompose(std::span<const RdpCurve> curves) {
  if (curves.empty()) {
    return absl::InvalidArgumentError("nothing to compose");
  }
  RdpCurve total = curves.front();
  for (size_t i = 1; i < curves.size(); ++i) {
    if (curves[i].orders != total.orders) {
      return absl::InvalidArgumentError(
          absl::StrCat("order grid of curve ", i, " differs"));
    }
    for (size_t k = 0; k < total.rho.size(); ++k) {
      total.rho[k] += curves[i].rho[k];
    }
  }
  return total;
}

absl::StatusOr<RdpCurve> RdpRepeat(const RdpCurve& curve, int64_t times) {
  if (times < 1) return absl::InvalidArgumentError("times must be >= 1");
  RdpCurve total = curve;
  for (double& r : total.rho) r *= static_cast<double>(times);
  return total;
}

absl::StatusOr<RdpConversion> RdpToApproxDp(const RdpCurve& curve,
                                            double delta) {
  if (absl::Status s = CheckDelta(delta, /*allow_one=*/true); !s.ok()) {
    return s;
  }
  if (curve.orders.empty() || curve.orders.size() != curve.rho.size()) {
    return absl::InvalidArgumentError("malformed RDP curve");
  }
  const double log_inv_delta = -std::log(delta);
  RdpConversion best{{std::numeric_limits<double>::infinity(), delta}, 0};
  for (size_t i = 0; i < curve.orders.size(); ++i) {
    const double a = curve.orders[i];
    const double eps =
        curve.rho[i] +
        (log_inv_delta + (a - 1) * std::log1p(-1 / a) - std::log(a)) / (a - 1);
    if (eps < best.dp.eps) {
      best.dp.eps = eps;
      best.order = a;
    }
  }
  best.dp.eps = std::max(0.0, best.dp.eps);
  return best;
}

absl::StatusOr<ApproxDp> AdvancedComposition(ApproxDp step, int64_t steps,
                                             double delta_prime) {
  if (steps < 1) return absl::InvalidArgumentError("steps must be >= 1");
  if (!(delta_prime > 0)) {
    return absl::InvalidArgumentError("delta_prime must be positive");
  }
  const double t = static_cast<double>(steps);
  const double eps = step.eps * std::sqrt(2 * t * std::log(1 / delta_prime)) +
                     t * step.eps * std::expm1(step.eps);
  return ApproxDp{eps, t * step.delta + delta_prime};
}

absl::StatusOr<ApproxDp> AmplifyBySampling(ApproxDp mech, double gamma) {
  if (!(gamma >= 0 && gamma <= 1)) {
    return absl::InvalidArgumentError(
        absl::StrCat("gamma must lie in [0, 1], got ", gamma));
  }
  return ApproxDp{std::log1p(gamma * std::expm1(mech.eps)),
                  gamma * mech.delta};
}

absl::StatusOr<double> ShuffleEpsAnalytic(double eps0, int64_t batch,
                                          double delta) {
  if (absl::Status s = CheckDelta(delta); !s.ok()) return s;
  if (batch < 1) return absl::InvalidArgumentError("batch must be >= 1");
  if (!(eps0 >= 0)) return absl::InvalidArgumentError("eps0 must be >= 0");
  const double b = static_cast<double>(batch);
  const double spread =
      4 * std::sqrt(2 * std::log(4 / delta)) / std::sqrt((std::exp(eps0) + 1) * b) +
      4 / b;
  return std::log1p(std::expm1(eps0) * spread);
}

absl::StatusOr<ApproxDp> DonationTimeAmplify(ApproxDp step, int64_t m) {
  if (m < 1) return absl::InvalidArgumentError("m must be >= 1");
  if (absl::Status s = CheckDelta(step.delta); !s.ok()) return s;
  const double md = static_cast<double>(m);
  const double a = std::log1p(std::expm1(step.eps) / md);
  const double eps =
      a * std::sqrt(2 * std::log(1 / step.delta) * md) + 0.5 * md * a * a;
  return ApproxDp{eps, (md + 1) * step.delta};
}

absl::StatusOr<bool> PoissonBatchFeasible(double q, int64_t k, int64_t batch,
                                          double delta) {
  if (!(q >= 0 && q <= 1)) {
    return absl::InvalidArgumentError("q must lie in [0, 1]");
  }
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (absl::Status s = CheckDelta(delta, /*allow_one=*/true); !s.ok()) {
    return s;
  }
  const double mean = q * static_cast<double>(k);
  return static_cast<double>(batch) <
         mean - std::sqrt(mean * std::log(1 / delta));
}

absl::StatusOr<SubsampledGaussianBound> SubsampledGaussianEps(
    GaussianConfig g, SamplingConfig sampling, double delta) {
  if (absl::Status s = CheckSigma(g.sigma); !s.ok()) return s;
  if (absl::Status s = CheckDelta(delta); !s.ok()) return s;
  if (sampling.steps < 1) {
    return absl::InvalidArgumentError("steps must be >= 1");
  }
  const std::vector<double> orders = IntegerOrders();
  absl::StatusOr<RdpCurve> step = SubsampledGaussianRdp(g, sampling.rate, orders);
  if (!step.ok()) return step.status();
  absl::StatusOr<RdpCurve> total = RdpRepeat(*step, sampling.steps);
  if (!total.ok()) return total.status();
  absl::StatusOr<RdpConversion> conv = RdpToApproxDp(*total, delta);
  if (!conv.ok()) return conv.status();
  SubsampledGaussianBound best{conv->dp.eps, AccountingRoute::kRdp,
                               conv->order};

  if (sampling.steps == 1) {
    absl::StatusOr<double> base = GaussianEpsAnalytic(g, delta);
    if (!base.ok()) return base.status();
    absl::StatusOr<ApproxDp> amplified =
        AmplifyBySampling({*base, delta}, sampling.rate);
    if (!amplified.ok()) return amplified.status();
    if (amplified->eps < best.eps) {
      best = {amplified->eps, AccountingRoute::kAnalyticAmplified, 0};
    }
  }
  if (sampling.rate == 1) {
    const double sigma_eff =
        g.sigma / std::sqrt(static_cast<double>(sampling.steps));
    absl::StatusOr<double> composed = GaussianEpsAnalytic({sigma_eff}, delta);
    if (!composed.ok()) return composed.status();
    if (*composed < best.eps) {
      best = {*composed, AccountingRoute::kAnalyticComposed, 0};
    }
  }
  return best;
}

absl::StatusOr<double> CalibrateSigma(ApproxDp target,
                                      SamplingConfig sampling) {
  if (!(target.eps > 0)) {
    return absl::InvalidArgumentError("target eps must be positive");
  }
  if (absl::Status s = CheckDelta(target.delta); !s.ok()) return s;
  if (!(sampling.rate >= 0 && sampling.rate <= 1)) {
    return absl::InvalidArgumentError("sampling rate must lie in [0, 1]");
  }
  auto meets = [&](double sigma) -> absl::StatusOr<bool> {
    absl::StatusOr<SubsampledGaussianBound> b =
        SubsampledGaussianEps({sigma}, sampling, target.delta);
    if (!b.ok()) {
      // Overflow at tiny sigma means the budget is certainly not met.
      if (absl::IsOutOfRange(b.status())) return false;
      return b.status();
    }
    return b->eps <= target.eps;
  };

  double hi = 1;
  for (;;) {
    absl::StatusOr<bool> ok = meets(hi);
    if (!ok.ok()) return ok.status();
    if (*ok) break;
    hi *= 2;
    if (hi > kMaxSigma) {
      return absl::OutOfRangeError(
          absl::StrCat("no sigma <= 1e6 meets eps=", target.eps,
                       " at delta=", target.delta));
    }
  }
  double lo = hi / 2;
  for (;;) {
    absl::StatusOr<bool> ok = meets(lo);
    if (!ok.ok()) return ok.status();
    if (!*ok) break;
    hi = lo;
    lo /= 2;
    if (lo < 1e-6) return hi;
  }
  while (hi - lo > kCalibrationAccuracy * lo) {
    const double mid = (lo + hi) / 2;
    absl::StatusOr<bool> ok = meets(mid);
    if (!ok.ok()) return ok.status();
    if (*ok) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace sa2
