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

// Exhaustive search over grouped sequence plans at a fixed photon budget.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrphase/common.hpp"
#include "lrphase/evaluation.hpp"

namespace lrphase {

struct PlanEvaluation {
  SequencePlan plan;
  EvaluationReport report;
};

struct OptimizationResult {
  int total_photons = 0;
  double eta = 1.0;
  SequencePlan best_plan;
  double best_variance = std::numeric_limits<double>::infinity();
  std::vector<PlanEvaluation> pareto_table;
};

struct OptimizeOptions {
  double branch_guard = 1e8;
  unsigned threads = 1;
  std::int64_t mc_trials = 100000;
  std::uint64_t seed = 0;
};

/// Grid 0, step, 2*step, ... up to 2 (inclusive when 2 is a multiple of step).
inline std::vector<double> chi_grid(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw std::invalid_argument("chi grid step must lie in (0, 0.5]");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = std::round(i * step * 1e9) / 1e9;
    if (v > 2.0 + 1e-9) break;
    out.push_back(std::min(v, 2.0));
  }
  return out;
}

/// Every (N1, N2, N4) with N1 + 2 N2 + 4 N4 = N, crossed with the chi grid for
/// the state kinds that are present. Ordered by N4, then N2, chi2, chi4.
inline std::vector<SequencePlan> enumerate_plans(int total_photons, double chi_grid_step, double eta = 1.0) {
  if (total_photons < 1) throw std::invalid_argument("total_photons must be >= 1");
  const auto grid = chi_grid(chi_grid_step);
  std::vector<SequencePlan> plans;
  for (int n4 = 0; 4 * n4 <= total_photons; ++n4)
    for (int n2 = 0; 4 * n4 + 2 * n2 <= total_photons; ++n2) {
      const int n1 = total_photons - 4 * n4 - 2 * n2;
      const std::vector<double> none{0.0};
      for (double c2 : n2 > 0 ? grid : none)
        for (double c4 : n4 > 0 ? grid : none) plans.push_back({n1, n2, c2, n4, c4, eta});
    }
  return plans;
}

inline EvaluationReport evaluate_plan(const SequencePlan& plan, EvaluationMethod method,
                                      const OptimizeOptions& opts, std::uint64_t seed) {
  switch (method) {
    case EvaluationMethod::exact:
      return evaluate_exact(plan, {opts.branch_guard, 1});
    case EvaluationMethod::exact_with_speedup:
      return evaluate_exact_with_speedup(plan, {opts.branch_guard, 1});
    case EvaluationMethod::monte_carlo:
      return evaluate_monte_carlo(plan, opts.mc_trials, seed, 1);
  }
  throw std::invalid_argument("unknown evaluation method");
}

namespace detail {

// Strict ordering used to pick among equal variances: more single photons,
// then smaller chi2, then smaller chi4.
inline bool preferred_on_tie(const SequencePlan& a, const SequencePlan& b) {
  if (a.n1 != b.n1) return a.n1 > b.n1;
  if (a.chi2 != b.chi2) return a.chi2 < b.chi2;
  return a.chi4 < b.chi4;
}

}  // namespace detail

/// Evaluates every plan and returns the minimum-variance one. Plans are
/// evaluated in parallel and written back by index.
inline OptimizationResult optimize(int total_photons, double eta, double chi_grid_step, EvaluationMethod method,
                                   const OptimizeOptions& opts = {}) {
  LossChannel{eta}.validate();
  const auto plans = enumerate_plans(total_photons, chi_grid_step, eta);
  std::vector<EvaluationReport> reports(plans.size());
  parallel_for(plans.size(), opts.threads, [&](std::size_t i) {
    reports[i] = evaluate_plan(plans[i], method, opts, detail::splitmix64(opts.seed + i));
  });

  OptimizationResult result;
  result.total_photons = total_photons;
  result.eta = eta;
  result.pareto_table.reserve(plans.size());
  bool have = false;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    result.pareto_table.push_back({plans[i], reports[i]});
    const double v = reports[i].holevo_variance;
    const double tol = 1e-12 * std::max(1.0, std::abs(result.best_variance));
    const bool better = !have || v < result.best_variance - tol ||
                        (std::abs(v - result.best_variance) <= tol &&
                         detail::preferred_on_tie(plans[i], result.best_plan)) ||
                        (std::isinf(result.best_variance) && std::isinf(v) &&
                         detail::preferred_on_tie(plans[i], result.best_plan));
    if (better) {
      result.best_plan = plans[i];
      result.best_variance = v;
      have = true;
    }
  }
  return result;
}

/// Holevo variance of N independent single photons under the same feedback.
inline double sql_baseline(int total_photons, double eta, const EvaluationOptions& opts = {}) {
  if (total_photons < 1) throw std::invalid_argument("total_photons must be >= 1");
  return evaluate_exact_with_speedup(SequencePlan{total_photons, 0, 0.0, 0, 0.0, eta}, opts).holevo_variance;
}

}  // namespace lrphase
