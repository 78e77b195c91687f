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

#include "sa2/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace sa2 {
namespace {

using Setter = std::function<absl::Status(const std::string&)>;
using Section = std::map<std::string, Setter, std::less<>>;

absl::Status BadValue(std::string_view key, std::string_view value) {
  return absl::InvalidArgumentError(
      absl::StrCat("bad value for '", std::string(key), "': '",
                   std::string(value), "'"));
}

Setter Int(int64_t* out, std::string key) {
  return [out, key](const std::string& v) {
    return absl::SimpleAtoi(v, out) ? absl::OkStatus() : BadValue(key, v);
  };
}

Setter IntAs(int* out, std::string key) {
  return [out, key](const std::string& v) {
    return absl::SimpleAtoi(v, out) ? absl::OkStatus() : BadValue(key, v);
  };
}

Setter Uint(uint64_t* out, std::string key) {
  return [out, key](const std::string& v) {
    return absl::SimpleAtoi(v, out) ? absl::OkStatus() : BadValue(key, v);
  };
}

Setter Real(double* out, std::string key) {
  return [out, key](const std::string& v) {
    return absl::SimpleAtod(v, out) && std::isfinite(*out) ? absl::OkStatus()
                                                          : BadValue(key, v);
  };
}

Setter Bool(bool* out, std::string key) {
  return [out, key](const std::string& v) {
    return absl::SimpleAtob(v, out) ? absl::OkStatus() : BadValue(key, v);
  };
}

Setter Str(std::string* out) {
  return [out](const std::string& v) {
    *out = v;
    return absl::OkStatus();
  };
}

template <typename T, typename Parse>
Setter List(std::vector<T>* out, std::string key, Parse parse) {
  return [out, key, parse](const std::string& v) {
    out->clear();
    for (absl::string_view part :
         absl::StrSplit(v, ',', absl::SkipWhitespace())) {
      T x;
      if (!parse(absl::StripAsciiWhitespace(part), &x)) return BadValue(key, v);
      out->push_back(x);
    }
    return absl::OkStatus();
  };
}

absl::StatusOr<TruthKind> ParseTruth(std::string_view v) {
  if (v == "uniform") return TruthKind::kUniform;
  if (v == "zipf") return TruthKind::kZipf;
  if (v == "needles") return TruthKind::kNeedles;
  return absl::InvalidArgumentError(absl::StrCat("unknown distribution '", std::string(v), "'"));
}

Setter Truth(TruthKind* out, std::string key) {
  return [out, key](const std::string& v) {
    absl::StatusOr<TruthKind> t = ParseTruth(v);
    if (!t.ok()) return BadValue(key, v);
    *out = *t;
    return absl::OkStatus();
  };
}

absl::Status ApplySection(const boost::property_tree::ptree& tree,
                          const std::string& name, const Section& setters) {
  for (const auto& [key, node] : tree) {
    if (!node.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("nested key '", key, "' in [", name, "]"));
    }
    auto it = setters.find(key);
    if (it == setters.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key '", key, "' in [", name, "]"));
    }
    const std::string value(
        absl::StripAsciiWhitespace(node.get_value<std::string>()));
    if (absl::Status s = it->second(value); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("[", name, "] ", s.message()));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<RunConfig> ParseRunConfig(std::string_view text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config parse error at line ", e.line(), ": ",
                     e.message()));
  }

  RunConfig c;
  Recipe& r = c.recipe;
  RandomizerSpec& spec = r.spec;
  std::string dummy = "0";
  std::string kind = std::string(RandomizerKindName(spec.kind));
  std::string corrupt = "none";

  std::map<std::string, Section, std::less<>> sections;
  sections["recipe"] = {
      {"task_id", Str(&r.task_id)},
      {"batch_threshold", Int(&r.batch_threshold, "batch_threshold")},
      {"sampling_rate", Real(&r.sampling_rate, "sampling_rate")},
      {"window", Int(&r.window, "window")},
      {"arrival_spread", Int(&r.arrival_spread, "arrival_spread")},
      {"dummy_rate", Str(&dummy)},
      {"round_eps", Real(&c.round_eps, "round_eps")},
      {"modulus", Uint(&r.field.modulus, "modulus")},
      {"fraction_bits", IntAs(&r.field.fraction_bits, "fraction_bits")},
      {"signed_range", IntAs(&r.signed_range, "signed_range")},
      {"leader_key", Str(&r.leader_key)},
      {"helper_key", Str(&r.helper_key)},
      {"max_contributions", Int(&r.max_contributions, "max_contributions")},
      {"rate_guard", Bool(&r.rate_guard, "rate_guard")},
      {"rate_window", Int(&r.rate_window, "rate_window")},
      {"predicate", Str(&c.predicate)},
      {"predicate_bound", Real(&c.predicate_bound, "predicate_bound")},
  };
  sections["randomizer"] = {
      {"kind", Str(&kind)},
      {"alphabet_size", IntAs(&spec.alphabet_size, "alphabet_size")},
      {"eps0", Real(&spec.eps0, "eps0")},
      {"dimension", IntAs(&spec.dimension, "dimension")},
      {"sigma", Real(&spec.sigma, "sigma")},
      {"batch", Int(&spec.batch, "batch")},
      {"clip_norm", Real(&spec.clip_norm, "clip_norm")},
  };
  sections["population"] = {
      {"size", Int(&c.population.size, "size")},
      {"distribution", Truth(&c.population.distribution, "distribution")},
      {"zipf_s", Real(&c.population.zipf_s, "zipf_s")},
      {"gamma", Real(&c.population.gamma, "gamma")},
      {"data_norm", Real(&c.population.data_norm, "data_norm")},
  };
  sections["round"] = {
      {"seed", Uint(&c.round.seed, "seed")},
      {"open_time", Int(&c.round.open_time, "open_time")},
      {"delivery_window", Int(&c.round.delivery_window, "delivery_window")},
      {"transcript", Bool(&c.round.record_events, "transcript")},
  };
  sections["adversary"] = {
      {"corrupt", Str(&corrupt)},
      {"clients", Int(&c.adversary.clients, "clients")},
      {"invalid_clients", Int(&c.invalid_clients, "invalid_clients")},
      {"replays", Int(&c.adversary.replays, "replays")},
  };

  // The experiment kind decides the default grid, so it is applied first.
  std::string exp_kind = "histogram";
  if (auto exp = tree.get_child_optional("experiment")) {
    if (auto k = exp->get_optional<std::string>("kind")) {
      exp_kind = std::string(absl::StripAsciiWhitespace(*k));
    }
  }
  if (exp_kind == "needles") {
    c.grid = DefaultNeedlesGrid();
  } else if (exp_kind != "histogram") {
    return absl::InvalidArgumentError(
        absl::StrCat("[experiment] unknown kind '", exp_kind, "'"));
  }
  SweepGrid& g = c.grid;
  std::vector<std::string> methods;
  auto parse_int = [](absl::string_view s, int64_t* x) {
    return absl::SimpleAtoi(s, x);
  };
  auto parse_real = [](absl::string_view s, double* x) {
    return absl::SimpleAtod(s, x);
  };
  auto parse_str = [](absl::string_view s, std::string* x) {
    *x = std::string(s);
    return !x->empty();
  };
  bool methods_set = false;
  sections["experiment"] = {
      {"kind", [](const std::string&) { return absl::OkStatus(); }},
      {"population", Int(&g.population, "population")},
      {"alphabet_sizes", List(&g.alphabet_sizes, "alphabet_sizes", parse_int)},
      {"sample_targets", List(&g.sample_targets, "sample_targets", parse_int)},
      {"tasks", List(&g.tasks, "tasks", parse_int)},
      {"gammas", List(&g.gammas, "gammas", parse_real)},
      {"eps", Real(&g.budget.eps, "eps")},
      {"delta", Real(&g.budget.delta, "delta")},
      {"methods",
       [&](const std::string& v) {
         methods_set = true;
         return List(&methods, "methods", parse_str)(v);
       }},
      {"truth", Truth(&g.truth, "truth")},
      {"inner", Truth(&g.inner, "inner")},
      {"zipf_s", Real(&g.zipf_s, "zipf_s")},
      {"trials", Int(&c.sweep.trials, "trials")},
      {"seed", Uint(&c.sweep.seed, "seed")},
      {"jobs", IntAs(&c.sweep.jobs, "jobs")},
      {"out", Str(&c.output)},
  };

  for (const auto& [name, node] : tree) {
    auto it = sections.find(name);
    if (it == sections.end()) {
      if (node.empty()) {
        return absl::InvalidArgumentError(
            absl::StrCat("key '", name, "' outside any section"));
      }
      return absl::InvalidArgumentError(
          absl::StrCat("unknown section [", name, "]"));
    }
    if (absl::Status s = ApplySection(node, name, it->second); !s.ok()) return s;
  }

  absl::StatusOr<RandomizerKind> k = ParseRandomizerKind(kind);
  if (!k.ok()) return k.status();
  spec.kind = *k;
  if (dummy == "auto") {
    c.dummy_rate_auto = true;
  } else if (!absl::SimpleAtod(dummy, &r.dummy_rate)) {
    return BadValue("dummy_rate", dummy);
  }
  if (corrupt == "none") {
    c.adversary.corrupt_server = CorruptServer::kNone;
  } else if (corrupt == "leader") {
    c.adversary.corrupt_server = CorruptServer::kLeader;
  } else if (corrupt == "helper") {
    c.adversary.corrupt_server = CorruptServer::kHelper;
  } else {
    return BadValue("corrupt", corrupt);
  }
  if (methods_set) {
    g.methods.clear();
    for (const std::string& m : methods) {
      absl::StatusOr<Method> parsed = ParseMethod(m);
      if (!parsed.ok()) return parsed.status();
      g.methods.push_back(*parsed);
    }
  }
  if (g.kind == ExperimentKind::kNeedles) g.truth = TruthKind::kNeedles;
  if (absl::Status s = FinalizeRunConfig(c); !s.ok()) return s;
  return c;
}

absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open config '", path, "'"));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseRunConfig(buf.str());
}

absl::Status FinalizeRunConfig(RunConfig& c) {
  Recipe& r = c.recipe;
  if (absl::Status s = ValidateSpec(r.spec); !s.ok()) return s;
  if (c.predicate == "default") {
    r.predicate = DefaultPredicate(r.spec);
  } else if (c.predicate == "one_hot") {
    r.predicate = {PredicateKind::kOneHot, 0};
  } else if (c.predicate == "hamming_weight_le") {
    r.predicate = {PredicateKind::kHammingWeightLe, c.predicate_bound};
  } else if (c.predicate == "l2_norm_le") {
    r.predicate = {PredicateKind::kL2NormLe, c.predicate_bound};
  } else {
    return BadValue("predicate", c.predicate);
  }
  if (c.population.size < 1) {
    return absl::InvalidArgumentError("[population] size must be >= 1");
  }
  if (c.dummy_rate_auto) {
    if (!(c.round_eps > 0)) {
      return absl::InvalidArgumentError("round_eps must be > 0");
    }
    r.dummy_rate =
        DefaultDummyRate(c.round_eps, r.sampling_rate, c.population.size);
  }
  if (c.invalid_clients < 0) {
    return absl::InvalidArgumentError("invalid_clients must be >= 0");
  }
  if (c.round.delivery_window < 1) {
    return absl::InvalidArgumentError("delivery_window must be >= 1");
  }
  if (c.sweep.trials < 0 || c.sweep.jobs < 1) {
    return absl::InvalidArgumentError("need trials >= 0 and jobs >= 1");
  }
  return ValidateRecipe(r);
}

absl::StatusOr<std::vector<std::vector<double>>> MakePopulation(
    const PopulationConfig& pop, const RandomizerSpec& spec, uint64_t seed) {
  if (pop.size < 1) return absl::InvalidArgumentError("population size < 1");
  Rng rng(seed);
  std::vector<std::vector<double>> data;
  data.reserve(pop.size);
  if (spec.kind == RandomizerKind::kGaussianVector) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    const int d = spec.dimension;
    for (int64_t i = 0; i < pop.size; ++i) {
      std::vector<double> x(d);
      double norm = 0;
      for (double& v : x) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      const double radius = pop.data_norm * std::pow(unit(rng), 1.0 / d);
      for (double& v : x) v *= norm > 0 ? radius / norm : 0.0;
      data.push_back(std::move(x));
    }
    return data;
  }
  HistogramTask task;
  task.alphabet_size = spec.alphabet_size;
  task.population = pop.size;
  task.sample_target = 1;
  task.truth = pop.distribution;
  task.zipf_s = pop.zipf_s;
  task.gamma = pop.gamma;
  absl::StatusOr<std::vector<double>> p = TruthDistribution(task);
  if (!p.ok()) return p.status();
  const std::vector<int64_t> counts = PopulationCounts(*p, pop.size);
  for (size_t i = 0; i < counts.size(); ++i) {
    for (int64_t j = 0; j < counts[i]; ++j) {
      data.push_back({static_cast<double>(i)});
    }
  }
  std::shuffle(data.begin(), data.end(), rng);
  return data;
}

std::vector<double> InvalidMessage(const Recipe& recipe) {
  const int len = recipe.spec.OutputLength();
  std::vector<double> m(len, 0.0);
  if (recipe.predicate.kind == PredicateKind::kL2NormLe) {
    const double limit = std::ldexp(1.0, recipe.signed_range) - 1;
    std::fill(m.begin(), m.end(),
              std::min(limit, 2 * recipe.predicate.bound /
                                  std::sqrt(static_cast<double>(len)) + 1));
  } else {
    std::fill(m.begin(), m.end(), 1.0);
    m[0] = 2.0;
  }
  return m;
}

absl::StatusOr<Transcript> RunConfiguredRound(RunConfig config) {
  if (config.adversary.clients < 0 || config.invalid_clients < 0) {
    return absl::InvalidArgumentError("adversary counts must be >= 0");
  }
  // Injected messages go to the first adversarial devices; the rest submit
  // worst-case valid messages.
  std::vector<std::vector<double>> injected(config.invalid_clients,
                                            InvalidMessage(config.recipe));
  injected.insert(injected.end(), config.adversary.injected.begin(),
                  config.adversary.injected.end());
  config.adversary.injected = std::move(injected);
  config.adversary.clients += config.invalid_clients;
  absl::StatusOr<std::vector<std::vector<double>>> pop = MakePopulation(
      config.population, config.recipe.spec, config.round.seed ^ 0x706f70ULL);
  if (!pop.ok()) return pop.status();
  return RunRound(config.recipe, *pop, config.adversary, config.round);
}

}  // namespace sa2
