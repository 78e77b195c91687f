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

#include "sa2/experiments.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <tuple>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "sa2/hashing.h"
#include "sa2/protocol.h"

namespace sa2 {
namespace {

constexpr Method kAllMethods[] = {Method::kNonpriv, Method::kNonprivUnif,
                                  Method::kNonprivImpsamp, Method::kAgg,
                                  Method::kSampagg};

// Welford accumulator for Monte Carlo means.
class RunningStats {
 public:
  void Add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  double mean() const { return mean_; }
  double stderr_of_mean() const {
    if (n_ < 2) return 0.0;
    return std::sqrt(m2_ / static_cast<double>(n_ - 1) /
                     static_cast<double>(n_));
  }

 private:
  int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

template <typename Trial>
void RunMonteCarlo(int64_t trials, uint64_t seed, MethodResult& r,
                   Trial&& trial) {
  r.trials = trials;
  if (trials <= 0) return;
  Rng rng(seed);
  RunningStats stats;
  for (int64_t t = 0; t < trials; ++t) stats.Add(trial(rng));
  r.mc_mse = stats.mean();
  r.mc_stderr = stats.stderr_of_mean();
}

std::vector<double> ZipfWeights(int64_t n, double s) {
  std::vector<double> w(n);
  double total = 0;
  for (int64_t i = 0; i < n; ++i) {
    w[i] = std::pow(static_cast<double>(i + 1), -s);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> Shape(TruthKind kind, int64_t n, double s) {
  if (kind == TruthKind::kZipf) return ZipfWeights(n, s);
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kNonpriv:
      return "NONPRIV";
    case Method::kNonprivUnif:
      return "NONPRIV_UNIF";
    case Method::kNonprivImpsamp:
      return "NONPRIV_IMPSAMP";
    case Method::kAgg:
      return "AGG";
    case Method::kSampagg:
      return "SAMPAGG";
  }
  return "UNKNOWN";
}

absl::StatusOr<Method> ParseMethod(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(c));
  for (Method m : kAllMethods) {
    if (upper == MethodName(m)) return m;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown method '", std::string(name), "'"));
}

bool IsPrivate(Method m) { return m == Method::kAgg || m == Method::kSampagg; }

absl::Status ValidateTask(const HistogramTask& task) {
  if (task.alphabet_size < 2) {
    return absl::InvalidArgumentError("K must be >= 2");
  }
  if (task.population < 1 || task.sample_target < 1 ||
      task.sample_target > task.population) {
    return absl::InvalidArgumentError("need 1 <= M <= N");
  }
  if (task.tasks < 1) return absl::InvalidArgumentError("T must be >= 1");
  if (!(task.budget.eps > 0) || !(task.budget.delta > 0 && task.budget.delta < 1)) {
    return absl::InvalidArgumentError("budget needs eps > 0, delta in (0, 1)");
  }
  if (task.truth == TruthKind::kZipf || task.inner == TruthKind::kZipf) {
    if (!(task.zipf_s > 0)) return absl::InvalidArgumentError("zipf_s must be > 0");
  }
  if (task.truth == TruthKind::kNeedles) {
    if (!(task.gamma > 0 && task.gamma <= 1)) {
      return absl::InvalidArgumentError("gamma must lie in (0, 1]");
    }
    if (task.inner == TruthKind::kNeedles) {
      return absl::InvalidArgumentError("needles inner shape must be uniform or zipf");
    }
  }
  return absl::OkStatus();
}

std::vector<int64_t> PopulationCounts(std::span<const double> p, int64_t n) {
  std::vector<int64_t> counts(p.size());
  std::vector<std::pair<double, size_t>> remainders;
  remainders.reserve(p.size());
  int64_t assigned = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double exact = p[i] * static_cast<double>(n);
    counts[i] = static_cast<int64_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t j = 0; assigned < n && j < remainders.size(); ++j, ++assigned) {
    ++counts[remainders[j].second];
  }
  return counts;
}

absl::StatusOr<std::vector<double>> TruthDistribution(const HistogramTask& task) {
  if (absl::Status s = ValidateTask(task); !s.ok()) return s;
  const int64_t k = task.alphabet_size;
  if (task.truth != TruthKind::kNeedles) return Shape(task.truth, k, task.zipf_s);
  std::vector<double> p = Shape(task.inner, k - 1, task.zipf_s);
  for (double& v : p) v *= task.gamma;
  p.push_back(1.0 - task.gamma);
  const std::vector<int64_t> counts = PopulationCounts(p, task.population);
  for (int64_t i = 0; i < k; ++i) {
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(task.population);
  }
  return p;
}

double NonprivMse(std::span<const double> p, int64_t m) {
  double total = 0;
  for (double v : p) total += v * (1 - v);
  return total / static_cast<double>(m);
}

double PrivateHistAnalyticMse(std::span<const double> p, int64_t m,
                              double sigma) {
  const double md = static_cast<double>(m);
  return NonprivMse(p, m) +
         static_cast<double>(p.size()) * sigma * sigma / (md * md);
}

absl::StatusOr<double> AggSigma(const HistogramTask& task) {
  if (absl::Status s = ValidateTask(task); !s.ok()) return s;
  absl::StatusOr<double> base = GaussianSigmaAnalytic(task.budget);
  if (!base.ok()) return base.status();
  // ceil(T M / N) without overflow.
  const int64_t compositions =
      (task.tasks * task.sample_target + task.population - 1) / task.population;
  return *base * std::sqrt(static_cast<double>(compositions));
}

absl::StatusOr<double> SampaggSigma(const HistogramTask& task) {
  if (absl::Status s = ValidateTask(task); !s.ok()) return s;
  const double q = static_cast<double>(task.sample_target) /
                   static_cast<double>(task.population);
  return CalibrateSigma(task.budget, {q, task.tasks});
}

double NeedlesHighRate(const HistogramTask& task) {
  return std::min(1.0, static_cast<double>(task.sample_target) /
                           (2 * task.gamma * static_cast<double>(task.population)));
}

double NeedlesLowRate(const HistogramTask& task) {
  return static_cast<double>(task.sample_target) /
         (2 * static_cast<double>(task.population));
}

std::vector<int64_t> SampleMultinomial(std::span<const double> p, int64_t m,
                                       Rng& rng) {
  std::vector<int64_t> counts(p.size(), 0);
  double mass = 1.0;
  int64_t left = m;
  for (size_t i = 0; i + 1 < p.size() && left > 0; ++i) {
    const double pr = mass > 0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<int64_t> bin(left, pr);
    counts[i] = bin(rng);
    left -= counts[i];
    mass -= p[i];
  }
  if (!p.empty()) counts.back() += left;
  return counts;
}

absl::StatusOr<MethodResult> PrivateHistMse(const HistogramTask& task,
                                            Method method, int64_t trials,
                                            uint64_t seed, double sigma) {
  if (task.truth == TruthKind::kNeedles) {
    return absl::InvalidArgumentError("use NeedlesMse for needles tasks");
  }
  if (method != Method::kNonpriv && !IsPrivate(method)) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(MethodName(method)), " is not a histogram method"));
  }
  absl::StatusOr<std::vector<double>> p = TruthDistribution(task);
  if (!p.ok()) return p.status();
  MethodResult r;
  r.method = method;
  if (sigma >= 0) {
    r.sigma = method == Method::kNonpriv ? 0.0 : sigma;
  } else if (method == Method::kAgg) {
    absl::StatusOr<double> s = AggSigma(task);
    if (!s.ok()) return s.status();
    r.sigma = *s;
  } else if (method == Method::kSampagg) {
    absl::StatusOr<double> s = SampaggSigma(task);
    if (!s.ok()) return s.status();
    r.sigma = *s;
  }
  const int64_t m = task.sample_target;
  r.analytic_mse = PrivateHistAnalyticMse(*p, m, r.sigma);
  const double md = static_cast<double>(m);
  RunMonteCarlo(trials, seed, r, [&](Rng& rng) {
    std::vector<int64_t> counts = SampleMultinomial(*p, m, rng);
    std::normal_distribution<double> noise(0.0, r.sigma);
    double err = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
      double c = static_cast<double>(counts[i]);
      if (r.sigma > 0) c += noise(rng);
      const double d = c / md - (*p)[i];
      err += d * d;
    }
    return err;
  });
  return r;
}

namespace {

absl::StatusOr<double> NeedlesSigma(const HistogramTask& task, Method method) {
  if (method == Method::kAgg) return AggSigma(task);
  if (method == Method::kSampagg) {
    return CalibrateSigma(task.budget, {NeedlesHighRate(task), task.tasks});
  }
  return 0.0;
}

bool UsesImportanceSampling(Method m) {
  return m == Method::kNonprivImpsamp || m == Method::kSampagg;
}

}  // namespace

absl::StatusOr<NeedlesEstimate> SampleNeedlesEstimate(
    const HistogramTask& task, Method method, double sigma, Rng& rng) {
  if (method == Method::kNonpriv) {
    return absl::InvalidArgumentError("needles methods: NONPRIV_UNIF, "
                                      "NONPRIV_IMPSAMP, AGG, SAMPAGG");
  }
  absl::StatusOr<std::vector<double>> p = TruthDistribution(task);
  if (!p.ok()) return p.status();
  if (task.truth != TruthKind::kNeedles) {
    return absl::InvalidArgumentError("task is not a needles task");
  }
  const size_t inner = p->size() - 1;
  NeedlesEstimate est;
  est.p_hat.resize(inner);
  std::normal_distribution<double> noise(0.0, sigma);
  if (UsesImportanceSampling(method)) {
    const double q_hi = NeedlesHighRate(task);
    const std::vector<int64_t> n = PopulationCounts(*p, task.population);
    const double scale = static_cast<double>(task.population) * q_hi;
    for (size_t i = 0; i < inner; ++i) {
      std::binomial_distribution<int64_t> bin(n[i], q_hi);
      double c = static_cast<double>(bin(rng));
      if (sigma > 0) c += noise(rng);
      est.p_hat[i] = c / scale;
    }
  } else {
    const std::vector<int64_t> counts =
        SampleMultinomial(*p, task.sample_target, rng);
    const double scale = static_cast<double>(task.sample_target);
    for (size_t i = 0; i < inner; ++i) {
      double c = static_cast<double>(counts[i]);
      if (sigma > 0) c += noise(rng);
      est.p_hat[i] = c / scale;
    }
  }
  est.pi_hat = est.p_hat;
  for (double& v : est.pi_hat) v /= task.gamma;
  return est;
}

absl::StatusOr<MethodResult> NeedlesMse(const HistogramTask& task,
                                        Method method, int64_t trials,
                                        uint64_t seed, double sigma) {
  if (task.truth != TruthKind::kNeedles) {
    return absl::InvalidArgumentError("task is not a needles task");
  }
  if (method == Method::kNonpriv) {
    return absl::InvalidArgumentError("needles methods: NONPRIV_UNIF, "
                                      "NONPRIV_IMPSAMP, AGG, SAMPAGG");
  }
  absl::StatusOr<std::vector<double>> p = TruthDistribution(task);
  if (!p.ok()) return p.status();
  MethodResult r;
  r.method = method;
  if (sigma >= 0) {
    r.sigma = IsPrivate(method) ? sigma : 0.0;
  } else {
    absl::StatusOr<double> s = NeedlesSigma(task, method);
    if (!s.ok()) return s.status();
    r.sigma = *s;
  }
  const size_t inner = p->size() - 1;
  const double k1 = static_cast<double>(inner);
  double sampling = 0;
  double scale = 0;
  if (UsesImportanceSampling(method)) {
    const double q_hi = NeedlesHighRate(task);
    scale = static_cast<double>(task.population) * q_hi;
    for (size_t i = 0; i < inner; ++i) sampling += (*p)[i] * (1 - q_hi);
    sampling /= scale;
  } else {
    scale = static_cast<double>(task.sample_target);
    for (size_t i = 0; i < inner; ++i) sampling += (*p)[i] * (1 - (*p)[i]);
    sampling /= scale;
  }
  r.analytic_mse = sampling + k1 * r.sigma * r.sigma / (scale * scale);
  absl::Status trial_status;
  RunMonteCarlo(trials, seed, r, [&](Rng& rng) {
    absl::StatusOr<NeedlesEstimate> est =
        SampleNeedlesEstimate(task, method, r.sigma, rng);
    if (!est.ok()) {
      trial_status = est.status();
      return 0.0;
    }
    double err = 0;
    for (size_t i = 0; i < inner; ++i) {
      const double d = est->p_hat[i] - (*p)[i];
      err += d * d;
    }
    return err;
  });
  if (!trial_status.ok()) return trial_status;
  return r;
}

absl::StatusOr<double> ProtocolHistogramSquaredError(const HistogramTask& task,
                                                     double sigma,
                                                     uint64_t seed) {
  if (task.truth == TruthKind::kNeedles) {
    return absl::InvalidArgumentError("protocol path supports uniform/zipf");
  }
  absl::StatusOr<std::vector<double>> p = TruthDistribution(task);
  if (!p.ok()) return p.status();
  const int64_t k = task.alphabet_size;
  const std::vector<int64_t> n = PopulationCounts(*p, task.population);
  std::vector<std::vector<double>> population;
  population.reserve(task.population);
  for (int64_t i = 0; i < k; ++i) {
    const std::vector<double> one_hot = OneHot(static_cast<int>(i),
                                               static_cast<int>(k));
    for (int64_t j = 0; j < n[i]; ++j) population.push_back(one_hot);
  }
  RandomizerSpec spec;
  spec.kind = RandomizerKind::kGaussianVector;
  spec.dimension = static_cast<int>(k);
  spec.sigma = sigma;
  spec.batch = task.sample_target;
  spec.clip_norm = 1.0;
  Recipe recipe = MakeRecipe("histogram", spec, 1,
                             static_cast<double>(task.sample_target) /
                                 static_cast<double>(task.population));
  recipe.rate_guard = false;
  recipe.max_contributions = std::max<int64_t>(task.population, 1);
  RoundOptions options;
  options.seed = seed;
  options.record_events = false;
  absl::StatusOr<Transcript> t = RunRound(recipe, population, {}, options);
  if (!t.ok()) return t.status();
  const double md = static_cast<double>(task.sample_target);
  double err = 0;
  for (int64_t i = 0; i < k; ++i) {
    const double est = t->output ? (*t->output)[i] / md : 0.0;
    const double d = est - (*p)[i];
    err += d * d;
  }
  return err;
}

SweepGrid DefaultHistogramGrid() {
  SweepGrid g;
  g.kind = ExperimentKind::kHistogram;
  g.alphabet_sizes = {1000, 10000, 100000};
  g.sample_targets = {1000, 3000, 10000, 30000, 100000};
  g.tasks = {1, 10, 100, 1000};
  g.gammas = {};
  g.methods = {Method::kNonpriv, Method::kAgg, Method::kSampagg};
  return g;
}

SweepGrid DefaultNeedlesGrid() {
  SweepGrid g = DefaultHistogramGrid();
  g.kind = ExperimentKind::kNeedles;
  g.truth = TruthKind::kNeedles;
  g.gammas = {0.1, 0.01, 0.001};
  g.methods = {Method::kNonprivUnif, Method::kNonprivImpsamp, Method::kAgg,
               Method::kSampagg};
  return g;
}

absl::StatusOr<std::vector<ExperimentRow>> Sweep(const SweepGrid& grid,
                                                 const SweepOptions& options) {
  const bool needles = grid.kind == ExperimentKind::kNeedles;
  if (grid.alphabet_sizes.empty() || grid.sample_targets.empty() ||
      grid.tasks.empty() || (needles && grid.gammas.empty())) {
    return absl::InvalidArgumentError("sweep grid has an empty axis");
  }
  for (Method m : grid.methods) {
    const bool applies = needles ? m != Method::kNonpriv
                                 : (m == Method::kNonpriv || IsPrivate(m));
    if (!applies) {
      return absl::InvalidArgumentError(absl::StrCat(
          std::string(MethodName(m)), " does not apply to this experiment"));
    }
  }
  const std::vector<double> gammas =
      needles ? grid.gammas : std::vector<double>{0.0};

  struct Job {
    HistogramTask task;
    ExperimentRow row;
  };
  std::vector<Job> jobs;
  // Calibration depends only on (method route, q, T, compositions); cache it.
  std::map<std::tuple<int, double, int64_t>, double> sigma_cache;
  for (int64_t k : grid.alphabet_sizes) {
    for (int64_t t : grid.tasks) {
      for (double gamma : gammas) {
        for (int64_t m : grid.sample_targets) {
          for (Method method : grid.methods) {
            HistogramTask task;
            task.alphabet_size = k;
            task.population = grid.population;
            task.sample_target = m;
            task.tasks = t;
            task.budget = grid.budget;
            task.truth = needles ? TruthKind::kNeedles : grid.truth;
            task.inner = grid.inner;
            task.zipf_s = grid.zipf_s;
            if (needles) task.gamma = gamma;
            if (absl::Status s = ValidateTask(task); !s.ok()) return s;
            double sigma = 0.0;
            if (IsPrivate(method)) {
              double q;
              if (method == Method::kAgg) {
                q = static_cast<double>((t * m + grid.population - 1) /
                                        grid.population);
              } else if (needles) {
                q = NeedlesHighRate(task);
              } else {
                q = static_cast<double>(m) /
                    static_cast<double>(grid.population);
              }
              auto key = std::make_tuple(static_cast<int>(method), q,
                                         method == Method::kAgg ? 0 : t);
              auto it = sigma_cache.find(key);
              if (it == sigma_cache.end()) {
                absl::StatusOr<double> s =
                    needles ? NeedlesSigma(task, method)
                            : (method == Method::kAgg ? AggSigma(task)
                                                      : SampaggSigma(task));
                if (!s.ok()) return s.status();
                it = sigma_cache.emplace(key, *s).first;
              }
              sigma = it->second;
            }
            Job job;
            job.task = task;
            job.row.method = method;
            job.row.alphabet_size = k;
            job.row.population = grid.population;
            job.row.sample_target = m;
            job.row.tasks = t;
            job.row.gamma = gamma;
            job.row.eps_total = grid.budget.eps;
            job.row.delta_total = grid.budget.delta;
            job.row.result.sigma = sigma;
            job.row.seed = DeriveSeed(
                options.seed,
                {static_cast<uint64_t>(grid.kind), static_cast<uint64_t>(method),
                 static_cast<uint64_t>(k), static_cast<uint64_t>(m),
                 static_cast<uint64_t>(t), std::bit_cast<uint64_t>(gamma)});
            jobs.push_back(std::move(job));
          }
        }
      }
    }
  }

  std::vector<absl::Status> statuses(jobs.size());
  auto run = [&](size_t i) {
    Job& job = jobs[i];
    const double sigma = job.row.result.sigma;
    absl::StatusOr<MethodResult> r =
        needles ? NeedlesMse(job.task, job.row.method, options.trials,
                             job.row.seed, sigma)
                : PrivateHistMse(job.task, job.row.method, options.trials,
                                 job.row.seed, sigma);
    if (!r.ok()) {
      statuses[i] = r.status();
      return;
    }
    job.row.result = *r;
  };
  const size_t workers = static_cast<size_t>(std::max(1, options.jobs));
  if (workers == 1 || jobs.size() < 2) {
    for (size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < std::min(workers, jobs.size()); ++w) {
      pool.emplace_back([&, w] {
        for (size_t i = w; i < jobs.size(); i += workers) run(i);
      });
    }
    for (std::thread& th : pool) th.join();
  }
  std::vector<ExperimentRow> rows;
  rows.reserve(jobs.size());
  for (size_t i = 0; i < jobs.size(); ++i) {
    if (!statuses[i].ok()) return statuses[i];
    rows.push_back(jobs[i].row);
  }
  return rows;
}

std::string FormatCsv(std::span<const ExperimentRow> rows, int precision) {
  std::string out(kCsvHeader);
  out += '\n';
  auto real = [precision](double v) {
    if (std::isnan(v)) return std::string("nan");
    return absl::StrFormat("%.*g", precision, v);
  };
  for (const ExperimentRow& r : rows) {
    const bool mc = r.result.trials > 0;
    absl::StrAppend(&out, std::string(MethodName(r.method)), ",", r.alphabet_size, ",",
                    r.population, ",", r.sample_target, ",", r.tasks, ",",
                    real(r.gamma), ",", real(r.eps_total), ",",
                    real(r.delta_total), ",", real(r.result.sigma), ",",
                    real(r.result.analytic_mse), ",",
                    mc ? real(r.result.mc_mse) : "nan", ",",
                    mc ? real(r.result.mc_stderr) : "nan", ",",
                    r.result.trials, ",", r.seed, "\n");
  }
  return out;
}

}  // namespace sa2
