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

// sa2: accountant queries, protocol simulation and experiment sweeps.
// See docs/cli.md.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "sa2/accountant.h"
#include "sa2/config.h"
#include "sa2/experiments.h"
#include "sa2/protocol.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBottom = 3;
constexpr int kExitInternal = 4;

int g_precision = 6;

std::string Real(double v) { return absl::StrFormat("%.*g", g_precision, v); }

int Fail(const absl::Status& s) {
  std::cerr << "sa2: " << s.message() << "\n";
  switch (s.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kFailedPrecondition:
      return kExitUsage;
    default:
      return kExitInternal;
  }
}

int PrintOr(const absl::StatusOr<double>& v) {
  if (!v.ok()) return Fail(v.status());
  std::cout << Real(*v) << "\n";
  return kExitOk;
}

int PrintOr(const absl::StatusOr<sa2::ApproxDp>& v) {
  if (!v.ok()) return Fail(v.status());
  std::cout << Real(v->eps) << " " << Real(v->delta) << "\n";
  return kExitOk;
}

struct ComposeStep {
  double sigma = 0;
  double q = 1;
  int64_t count = 1;
};

absl::StatusOr<ComposeStep> ParseStep(const std::string& text) {
  std::vector<std::string> parts = absl::StrSplit(text, ':');
  ComposeStep s;
  if (parts.size() != 3 || !absl::SimpleAtod(parts[0], &s.sigma) ||
      !absl::SimpleAtod(parts[1], &s.q) ||
      !absl::SimpleAtoi(parts[2], &s.count)) {
    return absl::InvalidArgumentError(
        "--step expects sigma:q:count, got '" + text + "'");
  }
  return s;
}

int RunCompose(const std::vector<std::string>& steps, double delta) {
  const std::vector<double> orders = sa2::IntegerOrders();
  std::vector<sa2::RdpCurve> curves;
  for (const std::string& text : steps) {
    absl::StatusOr<ComposeStep> step = ParseStep(text);
    if (!step.ok()) return Fail(step.status());
    absl::StatusOr<sa2::RdpCurve> c =
        sa2::SubsampledGaussianRdp({step->sigma}, step->q, orders);
    if (!c.ok()) return Fail(c.status());
    absl::StatusOr<sa2::RdpCurve> r = sa2::RdpRepeat(*c, step->count);
    if (!r.ok()) return Fail(r.status());
    curves.push_back(*std::move(r));
  }
  absl::StatusOr<sa2::RdpCurve> total = sa2::RdpCompose(curves);
  if (!total.ok()) return Fail(total.status());
  absl::StatusOr<sa2::RdpConversion> dp = sa2::RdpToApproxDp(*total, delta);
  if (!dp.ok()) return Fail(dp.status());
  std::cout << Real(dp->dp.eps) << "\n";
  return kExitOk;
}

struct SimFlags {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<int64_t> adversary_clients;
  std::optional<int64_t> replays;
  std::string corrupt;
  std::string transcript;
  bool view = false;
};

void PrintView(const sa2::ServerView& v) {
  std::cout << "# view " << sa2::ServerRoleName(v.role) << " fields";
  for (std::string_view f : sa2::ServerView::kFieldNames) std::cout << " " << f;
  std::cout << "\n# view " << sa2::ServerRoleName(v.role) << " observation";
  for (std::string_view f : sa2::ShareObservation::kFieldNames) {
    std::cout << " " << f;
  }
  std::cout << "\n# view " << sa2::ServerRoleName(v.role) << " received "
            << v.received << " accepted " << v.accepted << " peer_share_sum "
            << (v.peer_share_sum ? "present" : "none") << " output "
            << (v.output ? "present" : "none") << "\n";
}

int RunSim(const SimFlags& f) {
  absl::StatusOr<sa2::RunConfig> cfg = sa2::LoadRunConfig(f.config);
  if (!cfg.ok()) return Fail(cfg.status());
  if (f.seed) cfg->round.seed = *f.seed;
  if (f.adversary_clients) cfg->adversary.clients = *f.adversary_clients;
  if (f.replays) cfg->adversary.replays = *f.replays;
  if (f.corrupt == "leader") {
    cfg->adversary.corrupt_server = sa2::CorruptServer::kLeader;
  } else if (f.corrupt == "helper") {
    cfg->adversary.corrupt_server = sa2::CorruptServer::kHelper;
  }
  absl::StatusOr<sa2::Transcript> t = sa2::RunConfiguredRound(*cfg);
  if (!t.ok()) return Fail(t.status());

  const std::string log = t->log.Serialize();
  if (f.transcript.empty()) {
    std::cout << log;
  } else {
    std::ofstream out(f.transcript);
    out << log;
    if (!out) {
      return Fail(absl::InvalidArgumentError("cannot write " + f.transcript));
    }
  }
  if (f.view) {
    if (const sa2::ServerView* v =
            t->AdversaryView(cfg->adversary.corrupt_server)) {
      PrintView(*v);
    }
  }
  std::cout << t->Summary() << "\n";
  return t->output ? kExitOk : kExitBottom;
}

struct ExpFlags {
  std::string config;
  std::string out;
  std::optional<std::string> methods;
  std::optional<int64_t> trials;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  std::vector<int64_t> alphabet_sizes;
  std::vector<int64_t> sample_targets;
  std::vector<int64_t> tasks;
  std::vector<double> gammas;
  std::optional<int64_t> population;
  std::optional<double> eps;
  std::optional<double> delta;
};

int RunExp(sa2::ExperimentKind kind, const ExpFlags& f) {
  sa2::SweepGrid grid = kind == sa2::ExperimentKind::kNeedles
                            ? sa2::DefaultNeedlesGrid()
                            : sa2::DefaultHistogramGrid();
  sa2::SweepOptions options;
  std::string out = f.out;
  if (!f.config.empty()) {
    absl::StatusOr<sa2::RunConfig> cfg = sa2::LoadRunConfig(f.config);
    if (!cfg.ok()) return Fail(cfg.status());
    if (cfg->grid.kind != kind) {
      return Fail(absl::InvalidArgumentError(
          "config [experiment] kind does not match the subcommand"));
    }
    grid = cfg->grid;
    options = cfg->sweep;
    if (out.empty()) out = cfg->output;
  }
  if (out.empty()) return Fail(absl::InvalidArgumentError("--out is required"));
  if (f.methods) {
    grid.methods.clear();
    for (absl::string_view m :
         absl::StrSplit(*f.methods, ',', absl::SkipWhitespace())) {
      absl::StatusOr<sa2::Method> parsed =
          sa2::ParseMethod(std::string_view(m.data(), m.size()));
      if (!parsed.ok()) return Fail(parsed.status());
      grid.methods.push_back(*parsed);
    }
  }
  if (!f.alphabet_sizes.empty()) grid.alphabet_sizes = f.alphabet_sizes;
  if (!f.sample_targets.empty()) grid.sample_targets = f.sample_targets;
  if (!f.tasks.empty()) grid.tasks = f.tasks;
  if (!f.gammas.empty()) grid.gammas = f.gammas;
  if (f.population) grid.population = *f.population;
  if (f.eps) grid.budget.eps = *f.eps;
  if (f.delta) grid.budget.delta = *f.delta;
  if (f.trials) options.trials = *f.trials;
  if (f.seed) options.seed = *f.seed;
  if (f.jobs) options.jobs = *f.jobs;
  if (options.trials < 0 || options.jobs < 1) {
    return Fail(absl::InvalidArgumentError("need --trials >= 0, --jobs >= 1"));
  }
  absl::StatusOr<std::vector<sa2::ExperimentRow>> rows =
      sa2::Sweep(grid, options);
  if (!rows.ok()) return Fail(rows.status());
  std::ofstream file(out, std::ios::binary);
  file << sa2::FormatCsv(*rows, g_precision);
  if (!file) return Fail(absl::InvalidArgumentError("cannot write " + out));
  std::cout << rows->size() << " rows written to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Samplable anonymous aggregation lab"};
  app.require_subcommand(1);
  app.add_option("--precision", g_precision,
                 "Significant digits for real-valued output")
      ->check(CLI::Range(1, 17));
  int code = kExitOk;

  // acct
  CLI::App* acct = app.add_subcommand("acct", "Privacy accounting queries");
  acct->require_subcommand(1);
  double sigma = 0, delta = 0, eps = 0, q = 1, gamma = 0, eps0 = 0;
  int64_t steps = 1, n = 0, m = 0;
  std::vector<std::string> compose_steps;

  CLI::App* gaussian = acct->add_subcommand(
      "gaussian", "Classic Gaussian bound sqrt(2 ln(1.25/delta)) / sigma");
  gaussian->add_option("--sigma", sigma)->required();
  gaussian->add_option("--delta", delta)->required();
  gaussian->callback(
      [&] { code = PrintOr(sa2::GaussianEpsClassic({sigma}, delta)); });

  CLI::App* analytic =
      acct->add_subcommand("analytic", "Exact (analytic) Gaussian epsilon");
  analytic->add_option("--sigma", sigma)->required();
  analytic->add_option("--delta", delta)->required();
  analytic->callback(
      [&] { code = PrintOr(sa2::GaussianEpsAnalytic({sigma}, delta)); });

  CLI::App* subsampled = acct->add_subcommand(
      "subsampled", "Poisson-subsampled Gaussian over T steps");
  subsampled->add_option("--sigma", sigma)->required();
  subsampled->add_option("--q", q)->required();
  subsampled->add_option("--steps", steps)->default_val(1);
  subsampled->add_option("--delta", delta)->required();
  subsampled->callback([&] {
    absl::StatusOr<sa2::SubsampledGaussianBound> b =
        sa2::SubsampledGaussianEps({sigma}, {q, steps}, delta);
    code = PrintOr(b.ok() ? absl::StatusOr<double>(b->eps)
                          : absl::StatusOr<double>(b.status()));
  });

  CLI::App* calibrate = acct->add_subcommand(
      "calibrate", "Smallest sigma meeting (eps, delta) at rate q over T steps");
  calibrate->add_option("--eps", eps)->required();
  calibrate->add_option("--delta", delta)->required();
  calibrate->add_option("--q", q)->default_val(1.0);
  calibrate->add_option("--steps", steps)->default_val(1);
  calibrate->callback(
      [&] { code = PrintOr(sa2::CalibrateSigma({eps, delta}, {q, steps})); });

  CLI::App* amplify =
      acct->add_subcommand("amplify", "Amplification by Poisson sampling");
  amplify->add_option("--eps", eps)->required();
  amplify->add_option("--delta", delta)->required();
  amplify->add_option("--gamma", gamma)->required();
  amplify->callback(
      [&] { code = PrintOr(sa2::AmplifyBySampling({eps, delta}, gamma)); });

  CLI::App* shuffle =
      acct->add_subcommand("shuffle", "Analytic shuffling bound");
  shuffle->add_option("--eps0", eps0)->required();
  shuffle->add_option("--n", n, "Number of shuffled reports")->required();
  shuffle->add_option("--delta", delta)->required();
  shuffle->callback(
      [&] { code = PrintOr(sa2::ShuffleEpsAnalytic(eps0, n, delta)); });

  CLI::App* donation = acct->add_subcommand(
      "donation", "Randomized donation-time amplification over m rounds");
  donation->add_option("--eps", eps)->required();
  donation->add_option("--delta", delta)->required();
  donation->add_option("--m", m)->required();
  donation->callback(
      [&] { code = PrintOr(sa2::DonationTimeAmplify({eps, delta}, m)); });

  CLI::App* compose = acct->add_subcommand(
      "compose", "RDP composition of subsampled Gaussian steps");
  compose->add_option("--step", compose_steps, "sigma:q:count (repeatable)")
      ->required();
  compose->add_option("--delta", delta)->required();
  compose->callback([&] { code = RunCompose(compose_steps, delta); });

  // sim
  CLI::App* sim = app.add_subcommand("sim", "Protocol simulation");
  sim->require_subcommand(1);
  SimFlags sim_flags;
  CLI::App* run = sim->add_subcommand("run", "Run one aggregation round");
  run->add_option("--config", sim_flags.config)->required();
  run->add_option("--seed", sim_flags.seed);
  run->add_option("--adversary-clients", sim_flags.adversary_clients);
  run->add_option("--replays", sim_flags.replays);
  run->add_option("--corrupt", sim_flags.corrupt)
      ->check(CLI::IsMember({"leader", "helper"}));
  run->add_option("--transcript", sim_flags.transcript,
                  "Write the event log to this file instead of stdout");
  run->add_flag("--view", sim_flags.view, "Print the corrupted server's view");
  run->callback([&] { code = RunSim(sim_flags); });

  // exp
  CLI::App* exp = app.add_subcommand("exp", "Experiment sweeps");
  exp->require_subcommand(1);
  ExpFlags exp_flags;
  for (auto [name, kind] :
       {std::pair{"histogram", sa2::ExperimentKind::kHistogram},
        std::pair{"needles", sa2::ExperimentKind::kNeedles}}) {
    CLI::App* sub = exp->add_subcommand(name, std::string(name) + " sweep");
    sub->add_option("--out", exp_flags.out);
    sub->add_option("--config", exp_flags.config);
    sub->add_option("--methods", exp_flags.methods,
                    "Comma-separated method names");
    sub->add_option("--trials", exp_flags.trials);
    sub->add_option("--seed", exp_flags.seed);
    sub->add_option("--jobs", exp_flags.jobs);
    sub->add_option("--K", exp_flags.alphabet_sizes)->delimiter(',');
    sub->add_option("--M", exp_flags.sample_targets)->delimiter(',');
    sub->add_option("--T", exp_flags.tasks)->delimiter(',');
    sub->add_option("--N", exp_flags.population);
    sub->add_option("--eps", exp_flags.eps);
    sub->add_option("--delta", exp_flags.delta);
    if (kind == sa2::ExperimentKind::kNeedles) {
      sub->add_option("--gamma", exp_flags.gammas)->delimiter(',');
    }
    sub->callback([&, kind = kind] { code = RunExp(kind, exp_flags); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return code;
}
