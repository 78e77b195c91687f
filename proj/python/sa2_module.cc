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

// Python bindings for the accountant, the round simulator and the sweeps.
// Status errors become ValueError (bad input) or RuntimeError.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "pybind11/pybind11.h"
#include "pybind11/stl.h"
#include "sa2/accountant.h"
#include "sa2/config.h"
#include "sa2/experiments.h"
#include "sa2/protocol.h"

namespace py = pybind11;

namespace {

void Raise(const absl::Status& s) {
  const std::string msg(s.message().data(), s.message().size());
  switch (s.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
    case absl::StatusCode::kFailedPrecondition:
      throw py::value_error(msg);
    case absl::StatusCode::kNotFound:
      throw py::key_error(msg);
    default:
      throw std::runtime_error(msg);
  }
}

template <typename T>
T Unwrap(absl::StatusOr<T> v) {
  if (!v.ok()) Raise(v.status());
  return *std::move(v);
}

py::dict TranscriptDict(const sa2::Transcript& t) {
  py::dict d;
  d["output"] = t.output ? py::cast(*t.output) : py::none();
  d["k"] = t.k;
  d["rejected"] = t.rejected;
  d["duplicates"] = t.duplicates;
  d["window_violations"] = t.window_violations;
  d["rate_rejected"] = t.rate_rejected;
  d["summary"] = t.Summary();
  d["transcript"] = t.log.Serialize();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Samplable anonymous aggregation lab";

  m.def("gaussian_eps_classic", [](double sigma, double delta) {
    return Unwrap(sa2::GaussianEpsClassic({sigma}, delta));
  }, py::arg("sigma"), py::arg("delta"));
  m.def("gaussian_eps_analytic", [](double sigma, double delta) {
    return Unwrap(sa2::GaussianEpsAnalytic({sigma}, delta));
  }, py::arg("sigma"), py::arg("delta"));
  m.def("gaussian_sigma_analytic", [](double eps, double delta) {
    return Unwrap(sa2::GaussianSigmaAnalytic({eps, delta}));
  }, py::arg("eps"), py::arg("delta"));
  m.def("subsampled_gaussian_eps",
        [](double sigma, double q, int64_t steps, double delta) {
          return Unwrap(sa2::SubsampledGaussianEps({sigma}, {q, steps}, delta)).eps;
        },
        py::arg("sigma"), py::arg("q"), py::arg("steps"), py::arg("delta"));
  m.def("calibrate_sigma",
        [](double eps, double delta, double q, int64_t steps) {
          return Unwrap(sa2::CalibrateSigma({eps, delta}, {q, steps}));
        },
        py::arg("eps"), py::arg("delta"), py::arg("q"), py::arg("steps"));
  m.def("amplify_by_sampling", [](double eps, double delta, double gamma) {
    const sa2::ApproxDp r = Unwrap(sa2::AmplifyBySampling({eps, delta}, gamma));
    return py::make_tuple(r.eps, r.delta);
  }, py::arg("eps"), py::arg("delta"), py::arg("gamma"));
  m.def("shuffle_eps_analytic", [](double eps0, int64_t n, double delta) {
    return Unwrap(sa2::ShuffleEpsAnalytic(eps0, n, delta));
  }, py::arg("eps0"), py::arg("n"), py::arg("delta"));
  m.def("donation_time_amplify", [](double eps, double delta, int64_t rounds) {
    const sa2::ApproxDp r = Unwrap(sa2::DonationTimeAmplify({eps, delta}, rounds));
    return py::make_tuple(r.eps, r.delta);
  }, py::arg("eps"), py::arg("delta"), py::arg("m"));

  m.def("simulate",
        [](const std::string& config_text, std::optional<uint64_t> seed) {
          sa2::RunConfig cfg = Unwrap(sa2::ParseRunConfig(config_text));
          if (seed) cfg.round.seed = *seed;
          return TranscriptDict(Unwrap(sa2::RunConfiguredRound(std::move(cfg))));
        },
        py::arg("config_text"), py::arg("seed") = py::none(),
        "Runs one round from INI text and returns its outputs and summary.");

  m.def("sweep_csv",
        [](const std::string& config_text, int precision) {
          const sa2::RunConfig cfg = Unwrap(sa2::ParseRunConfig(config_text));
          const std::vector<sa2::ExperimentRow> rows =
              Unwrap(sa2::Sweep(cfg.grid, cfg.sweep));
          return sa2::FormatCsv(rows, precision);
        },
        py::arg("config_text"), py::arg("precision") = 6,
        "Runs the [experiment] sweep described by INI text; returns CSV.");

  m.attr("CSV_HEADER") = std::string(sa2::kCsvHeader);
}
