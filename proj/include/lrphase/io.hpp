// Copyright 2026 The lrphase Authors
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

#pragma once

// JSON and CSV encodings of the library's value types.

#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lrphase/evaluation.hpp"
#include "lrphase/lossy_detection.hpp"
#include "lrphase/phase_inference.hpp"
#include "lrphase/sequence_optimizer.hpp"
#include "lrphase/state_prep.hpp"

namespace lrphase {

using json = nlohmann::json;

namespace detail {

inline json split_complex(const std::vector<cplx>& v, json& im) {
  json re = json::array();
  im = json::array();
  for (const auto& c : v) {
    re.push_back(c.real());
    im.push_back(c.imag());
  }
  return re;
}

inline std::vector<cplx> join_complex(const json& re, const json& im) {
  if (!re.is_array() || !im.is_array() || re.size() != im.size())
    throw std::invalid_argument("re/im arrays must have equal length");
  std::vector<cplx> out;
  out.reserve(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) out.emplace_back(re[i].get<double>(), im[i].get<double>());
  return out;
}

// Infinity travels as the string "inf".
inline json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

}  // namespace detail

inline json to_json(const TwoModeState& s) {
  json im;
  json re = detail::split_complex({s.amplitudes().begin(), s.amplitudes().end()}, im);
  return {{"n_photons", s.n_photons()}, {"re", re}, {"im", im}};
}

inline json to_json(const TriPortConfig& c) {
  return {{"r1", c.r1}, {"r2", c.r2}, {"r3", c.r3}, {"phi1", c.phi1}, {"phi2", c.phi2}};
}

inline json to_json(const OutcomeLikelihoodTable& t) {
  json entries = json::array();
  for (const auto& e : t.entries()) {
    json im;
    json re = detail::split_complex(e.coeffs, im);
    entries.push_back({{"L", e.outcome.lost}, {"k", e.outcome.detected}, {"re", re}, {"im", im}});
  }
  return {{"n_photons", t.n_photons()}, {"eta", t.eta()}, {"entries", entries}};
}

inline OutcomeLikelihoodTable likelihood_table_from_json(const json& j) {
  const int n = j.at("n_photons").get<int>();
  const double eta = j.at("eta").get<double>();
  std::vector<LikelihoodEntry> entries(outcome_count(n));
  std::vector<bool> seen(entries.size(), false);
  for (const auto& e : j.at("entries")) {
    const Outcome o{e.at("L").get<int>(), e.at("k").get<int>()};
    const std::size_t idx = OutcomeLikelihoodTable::index_of(n, o);
    auto coeffs = detail::join_complex(e.at("re"), e.at("im"));
    if (coeffs.size() != static_cast<std::size_t>(2 * (n - o.lost) + 1))
      throw std::invalid_argument("coefficient array has the wrong length for its outcome");
    entries[idx] = {o, std::move(coeffs)};
    seen[idx] = true;
  }
  for (bool s : seen)
    if (!s) throw std::invalid_argument("likelihood table JSON is missing outcomes");
  return OutcomeLikelihoodTable(n, eta, std::move(entries));
}

inline json to_json(const PhaseDistribution& d) {
  json im;
  json re = detail::split_complex(d.coeffs(), im);
  return {{"max_harmonic", d.max_harmonic()}, {"re", re}, {"im", im}};
}

inline PhaseDistribution phase_distribution_from_json(const json& j) {
  auto coeffs = detail::join_complex(j.at("re"), j.at("im"));
  if (coeffs.size() != static_cast<std::size_t>(2 * j.at("max_harmonic").get<int>() + 1))
    throw std::invalid_argument("max_harmonic does not match the coefficient count");
  return PhaseDistribution(std::move(coeffs));
}

inline json to_json(const EvaluationReport& r) {
  return {{"mu", r.mu},
          {"holevo_variance", detail::number_or_inf(r.holevo_variance)},
          {"branches_evaluated", r.branches_evaluated},
          {"method", to_string(r.method)},
          {"mc_std_error", r.mc_std_error ? json(*r.mc_std_error) : json(nullptr)},
          {"wall_time_ms", r.wall_time.count()}};
}

inline json to_json(const SequencePlan& p) {
  return {{"n1", p.n1}, {"n2", p.n2}, {"chi2", p.chi2}, {"n4", p.n4}, {"chi4", p.chi4}, {"eta", p.eta}};
}

inline json to_json(const OptimizationResult& r) {
  json table = json::array();
  for (const auto& row : r.pareto_table) table.push_back({{"plan", to_json(row.plan)}, {"report", to_json(row.report)}});
  return {{"total_photons", r.total_photons},
          {"eta", r.eta},
          {"best_plan", to_json(r.best_plan)},
          {"best_variance", detail::number_or_inf(r.best_variance)},
          {"pareto_table", table}};
}

/// Shortest decimal text that reads back to the same double; "inf" and "nan"
/// for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kParetoCsvHeader = "n1,n2,chi2,n4,chi4,eta,mu,holevo_variance,branches,method";

/// One row per evaluated plan; chi columns are left empty when the matching
/// count is zero.
inline std::string pareto_csv(const OptimizationResult& r) {
  std::ostringstream os;
  os << kParetoCsvHeader << "\n";
  for (const auto& row : r.pareto_table) {
    const auto& p = row.plan;
    os << p.n1 << "," << p.n2 << "," << (p.n2 > 0 ? format_number(p.chi2) : "") << "," << p.n4 << ","
       << (p.n4 > 0 ? format_number(p.chi4) : "") << "," << format_number(p.eta) << ","
       << format_number(row.report.mu) << "," << format_number(row.report.holevo_variance) << ","
       << row.report.branches_evaluated << "," << to_string(row.report.method) << "\n";
  }
  return os.str();
}

}  // namespace lrphase
