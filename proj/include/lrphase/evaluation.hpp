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

// Performance measures: Fisher information of single states, and the average
// sharpness / Holevo variance of adaptive measurement sequences, either by
// exhaustive enumeration of the outcome tree or by seeded Monte Carlo.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "lrphase/common.hpp"
#include "lrphase/feedback.hpp"
#include "lrphase/lossy_detection.hpp"
#include "lrphase/phase_inference.hpp"
#include "lrphase/state_prep.hpp"

namespace lrphase {

// ---------------------------------------------------------------------------
// Fisher information

/// sum_u (dP_u/dphi)^2 / P_u. Removable 0/0 terms are skipped; a vanishing
/// probability with non-negligible slope raises FisherDivergence.
inline double fisher_information(const OutcomeLikelihoodTable& table, double phi, double theta) {
  double total = 0.0;
  for (const auto& e : table.entries()) {
    if (e.phase_free()) continue;
    const double p = evaluate_outcome(table, e.outcome, phi, theta);
    const double dp = evaluate_outcome_derivative(table, e.outcome, phi, theta);
    if (p < 1e-12) {
      if (std::abs(dp) < 1e-9) continue;
      std::ostringstream msg;
      msg << "Fisher information diverges at phi=" << phi << " (outcome L=" << e.outcome.lost
          << ", k=" << e.outcome.detected << ")";
      throw FisherDivergence(msg.str(), phi);
    }
    total += dp * dp / p;
  }
  return total;
}

inline double fisher_information(const TwoModeState& state, double eta, double phi, double theta) {
  return fisher_information(build_likelihood_table(state, eta), phi, theta);
}

namespace detail {

inline constexpr int kFisherPhiGrid = 256;

inline double fisher_or_skip(const OutcomeLikelihoodTable& table, double phi, double theta) {
  try {
    return fisher_information(table, phi, theta);
  } catch (const FisherDivergence&) {
    return -1.0;
  }
}

// Maximizes f over [lo, hi] starting from a grid optimum; keeps the grid
// point unless Brent finds something strictly better.
template <class F>
std::pair<double, double> refine_max(F&& f, double x0, double f0, double lo, double hi) {
  std::uintmax_t iters = 200;
  const auto res = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, lo, hi,
                                                         std::numeric_limits<double>::digits / 2, iters);
  if (-res.second > f0) return {res.first, -res.second};
  return {x0, f0};
}

}  // namespace detail

/// max over phi of F(phi, theta): 256-point grid plus local refinement.
inline double max_fisher_over_phi(const OutcomeLikelihoodTable& table, double theta) {
  const double h = kTwoPi / detail::kFisherPhiGrid;
  double best_phi = 0.0;
  double best = -1.0;
  for (int i = 0; i < detail::kFisherPhiGrid; ++i) {
    const double v = detail::fisher_or_skip(table, i * h, theta);
    if (v > best) {
      best = v;
      best_phi = i * h;
    }
  }
  if (best < 0.0) return 0.0;
  return detail::refine_max([&](double p) { return detail::fisher_or_skip(table, p, theta); },
                            best_phi, best, best_phi - h, best_phi + h)
      .second;
}

struct ChiFisherOptimum {
  double chi = 0.0;
  double fisher = 0.0;
};

struct ExactOptimalFisherOptimum {
  double chi1p = 0.0;
  double chi2p = 0.0;
  double fisher = 0.0;
};

inline TwoModeState loss_resistant_state(int n_photons, double chi) {
  if (n_photons == 1) return make_single_photon();
  if (n_photons % 2 != 0) throw std::invalid_argument("loss-resistant states need an even photon number");
  return make_loss_resistant({n_photons / 2, chi});
}

/// Best chi in [0, 2] for the loss-resistant family (step 0.02 grid, then
/// Brent), scoring each chi by its phi-maximized Fisher information.
inline ChiFisherOptimum max_fisher_over_chi(int n_photons, double eta, double theta) {
  if (n_photons != 2 && n_photons != 4) throw std::invalid_argument("n_photons must be 2 or 4");
  LossChannel{eta}.validate();
  const auto score = [&](double chi) {
    return max_fisher_over_phi(build_likelihood_table(loss_resistant_state(n_photons, chi), eta), theta);
  };
  constexpr double step = 0.02;
  ChiFisherOptimum best{0.0, -1.0};
  for (int i = 0; i <= 100; ++i) {
    const double chi = i * step;
    const double v = score(chi);
    if (v > best.fisher) best = {chi, v};
  }
  const auto [chi, f] = detail::refine_max(score, best.chi, best.fisher, std::max(0.0, best.chi - step),
                                           std::min(2.0, best.chi + step));
  return {chi, f};
}

namespace detail {

struct ExactOptimalObjective {
  double eta;
  double theta;
  double operator()(double c1, double c2) const {
    return max_fisher_over_phi(build_likelihood_table(make_exact_optimal4({c1, c2}), eta), theta);
  }
};

inline double gsl_exact_optimal_neg(const gsl_vector* x, void* params) {
  const auto* obj = static_cast<const ExactOptimalObjective*>(params);
  return -(*obj)(gsl_vector_get(x, 0), gsl_vector_get(x, 1));
}

}  // namespace detail

/// Two-parameter four-photon family: coarse grid over [-6, 6]^2 followed by a
/// Nelder-Mead refinement.
inline ExactOptimalFisherOptimum max_fisher_exact_optimal4(double eta, double theta) {
  LossChannel{eta}.validate();
  detail::ExactOptimalObjective obj{eta, theta};
  constexpr double lo = -6.0;
  constexpr double step = 0.25;
  constexpr int n = 49;
  ExactOptimalFisherOptimum best{0.0, 0.0, -1.0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double c1 = lo + i * step;
      const double c2 = lo + j * step;
      const double v = obj(c1, c2);
      if (v > best.fisher) best = {c1, c2, v};
    }

  gsl_multimin_function fn{&detail::gsl_exact_optimal_neg, 2, &obj};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* ss = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, best.chi1p);
  gsl_vector_set(x, 1, best.chi2p);
  gsl_vector_set_all(ss, 0.5 * step);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  for (int iter = 0; iter < 500; ++iter) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-8) == GSL_SUCCESS) break;
  }
  const double refined = -gsl_multimin_fminimizer_minimum(s);
  if (refined > best.fisher)
    best = {gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1), refined};
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(ss);
  gsl_vector_free(x);
  return best;
}

// ---------------------------------------------------------------------------
// Measurement sequences

/// N1 single photons, then N2 two-photon states with chi2, then N4
/// four-photon states with chi4, all through channel efficiency eta.
struct SequencePlan {
  int n1 = 0;
  int n2 = 0;
  double chi2 = 0.0;
  int n4 = 0;
  double chi4 = 0.0;
  double eta = 1.0;

  int total_photons() const { return n1 + 2 * n2 + 4 * n4; }

  void validate() const {
    if (n1 < 0 || n2 < 0 || n4 < 0) throw std::invalid_argument("state counts must be non-negative");
    if (!(chi2 >= 0.0 && chi2 <= 2.0)) throw std::invalid_argument("chi2 must lie in [0, 2]");
    if (!(chi4 >= 0.0 && chi4 <= 2.0)) throw std::invalid_argument("chi4 must lie in [0, 2]");
    LossChannel{eta}.validate();
  }

  std::string describe() const {
    std::ostringstream os;
    os << "(n1=" << n1 << ", n2=" << n2 << ", chi2=" << chi2 << ", n4=" << n4 << ", chi4=" << chi4
       << ", eta=" << eta << ")";
    return os.str();
  }
};

enum class EvaluationMethod { exact, exact_with_speedup, monte_carlo };

inline const char* to_string(EvaluationMethod m) {
  switch (m) {
    case EvaluationMethod::exact: return "exact";
    case EvaluationMethod::exact_with_speedup: return "exact_with_speedup";
    case EvaluationMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

struct EvaluationReport {
  double mu = 0.0;
  double holevo_variance = std::numeric_limits<double>::infinity();
  std::uint64_t branches_evaluated = 0;
  EvaluationMethod method = EvaluationMethod::exact;
  /// Standard error of mu (Monte Carlo only).
  std::optional<double> mc_std_error;
  std::chrono::duration<double, std::milli> wall_time{0};

  /// Delta-method standard error of the Holevo variance (Monte Carlo only).
  std::optional<double> variance_std_error() const {
    if (!mc_std_error || mu <= 0.0) return std::nullopt;
    return 2.0 * *mc_std_error / (mu * mu * mu);
  }
};

struct EvaluationOptions {
  double branch_guard = 1e8;
  unsigned threads = 1;
};

/// One detection in a sequence: which likelihood table it uses.
using Stage = std::shared_ptr<const OutcomeLikelihoodTable>;

/// Stages in grouped order (single photons, then two-, then four-photon).
inline std::vector<Stage> sequence_stages(const SequencePlan& plan) {
  plan.validate();
  std::vector<Stage> stages;
  if (plan.n1 > 0) {
    auto t = std::make_shared<const OutcomeLikelihoodTable>(build_likelihood_table(make_single_photon(), plan.eta));
    stages.insert(stages.end(), plan.n1, t);
  }
  if (plan.n2 > 0) {
    auto t = std::make_shared<const OutcomeLikelihoodTable>(
        build_likelihood_table(make_loss_resistant({1, plan.chi2}), plan.eta));
    stages.insert(stages.end(), plan.n2, t);
  }
  if (plan.n4 > 0) {
    auto t = std::make_shared<const OutcomeLikelihoodTable>(
        build_likelihood_table(make_loss_resistant({2, plan.chi4}), plan.eta));
    stages.insert(stages.end(), plan.n4, t);
  }
  return stages;
}

inline long double exact_leaf_count(const SequencePlan& plan) {
  return std::pow(3.0L, plan.n1) * std::pow(6.0L, plan.n2) * std::pow(15.0L, plan.n4);
}

inline long double speedup_leaf_count(const SequencePlan& plan) {
  return (std::pow(2.0L, plan.n1 + 1) - 1.0L) * std::pow(6.0L, plan.n2) * std::pow(15.0L, plan.n4);
}

namespace detail {

inline void check_guard(long double leaves, double guard, const SequencePlan& plan) {
  if (leaves > static_cast<long double>(guard)) {
    std::ostringstream msg;
    msg << "exact evaluation of plan " << plan.describe() << " needs " << static_cast<double>(leaves)
        << " leaves, above the guard of " << guard;
    throw BranchGuardExceeded(msg.str());
  }
}

// Which outcomes of a stage are enumerated.
enum class StageFilter { all, detected_only };

struct TreeStage {
  Stage table;
  StageFilter filter = StageFilter::all;
};

inline double descend(const std::vector<TreeStage>& stages, std::size_t idx,
                      const PhaseDistribution& posterior, double weight);

// Contribution of one outcome of stage `idx`, observed at controlled phase
// theta. The final stage contributes |a_{-1}| of the unnormalized posterior.
inline double branch(const std::vector<TreeStage>& stages, std::size_t idx, const PhaseDistribution& posterior,
                     double weight, double theta, const LikelihoodEntry& e) {
  if (idx + 1 == stages.size()) {
    if (e.phase_free()) return weight * std::abs(posterior.coeff(-1) * e.coeffs[0]);
    cplx acc = 0.0;
    const int m = e.max_harmonic();
    for (int d = -m; d <= m; ++d)
      acc += posterior.coeff(-1 - d) * e.coeffs[d + m] * std::polar(1.0, -d * theta);
    return weight * std::abs(acc);
  }
  if (e.phase_free()) {
    const double p = e.coeffs[0].real();
    return p > 0.0 ? descend(stages, idx + 1, posterior, weight * p) : 0.0;
  }
  PhaseDistribution joint = multiply_likelihood(posterior, e, theta);
  const double p = joint.coeff(0).real();
  if (!(p > 1e-300)) return 0.0;
  std::vector<cplx> c = joint.coeffs();
  for (auto& v : c) v /= p;
  c[c.size() / 2] = 1.0;
  return descend(stages, idx + 1, PhaseDistribution(std::move(c)), weight * p);
}

inline bool enumerated(const TreeStage& stage, const LikelihoodEntry& e) {
  return stage.filter == StageFilter::all || e.outcome.lost == 0;
}

// Sum over the subtree below `posterior` (normalized) reached with probability
// `weight`.
inline double descend(const std::vector<TreeStage>& stages, std::size_t idx, const PhaseDistribution& posterior,
                      double weight) {
  const auto& stage = stages[idx];
  const double theta = choose_theta(posterior, *stage.table);
  double total = 0.0;
  for (const auto& e : stage.table->entries())
    if (enumerated(stage, e)) total += branch(stages, idx, posterior, weight, theta, e);
  return total;
}

// Root children run in parallel; their sums are reduced in outcome order.
inline double tree_sum(const std::vector<TreeStage>& stages, unsigned threads) {
  if (stages.empty()) return 0.0;
  const PhaseDistribution prior = flat_prior();
  const auto& root = stages.front();
  const double theta = choose_theta(prior, *root.table);
  const auto& entries = root.table->entries();
  std::vector<double> parts(entries.size(), 0.0);
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    if (enumerated(root, entries[i])) parts[i] = branch(stages, 0, prior, 1.0, theta, entries[i]);
  });
  double total = 0.0;
  for (double v : parts) total += v;
  return total;
}

inline EvaluationReport finish(double mu, std::uint64_t leaves, EvaluationMethod method,
                               std::chrono::steady_clock::time_point start) {
  EvaluationReport r;
  r.mu = mu;
  r.holevo_variance = holevo_variance_from_sharpness(mu);
  r.branches_evaluated = leaves;
  r.method = method;
  r.wall_time = std::chrono::steady_clock::now() - start;
  return r;
}

}  // namespace detail

/// Average sharpness over every outcome sequence,
///   mu = (1/2pi) sum_u |int dphi exp(i phi) prod_k P(u_k | phi, theta_k)|,
/// with theta chosen by local feedback at every node. The phi integral is the
/// a_{-1} coefficient of the accumulated series.
inline EvaluationReport evaluate_exact(const std::vector<Stage>& stages, const EvaluationOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  long double leaves = 1.0L;
  for (const auto& s : stages) leaves *= static_cast<long double>(s->entries().size());
  if (leaves > static_cast<long double>(opts.branch_guard))
    throw BranchGuardExceeded("exact evaluation needs " + std::to_string(static_cast<double>(leaves)) +
                              " leaves, above the guard");
  std::vector<detail::TreeStage> tree;
  for (const auto& s : stages) tree.push_back({s, detail::StageFilter::all});
  return detail::finish(detail::tree_sum(tree, opts.threads), static_cast<std::uint64_t>(leaves), EvaluationMethod::exact,
                        start);
}

inline EvaluationReport evaluate_exact(const SequencePlan& plan, const EvaluationOptions& opts = {}) {
  detail::check_guard(exact_leaf_count(plan), opts.branch_guard, plan);
  auto report = evaluate_exact(sequence_stages(plan), EvaluationOptions{1e300, opts.threads});
  return report;
}

/// Sharpness of the sequence with `n` single photons that were all detected,
/// followed by the lossy multi-photon stages. The detected single-photon
/// likelihoods at efficiency eta are eta times the lossless ones, so the
/// enumerated weight is divided by eta^n.
inline double lossless_prefix_sharpness(const SequencePlan& plan, int n, unsigned threads = 1) {
  SequencePlan sub = plan;
  sub.n1 = n;
  const auto stages = sequence_stages(sub);
  std::vector<detail::TreeStage> tree;
  for (std::size_t i = 0; i < stages.size(); ++i)
    tree.push_back({stages[i], i < static_cast<std::size_t>(n) ? detail::StageFilter::detected_only
                                                              : detail::StageFilter::all});
  return detail::tree_sum(tree, threads) / std::pow(plan.eta, n);
}

/// Binomial reduction of the single-photon stage:
///   mu = sum_n C(N1, n) eta^n (1-eta)^(N1-n) mu~_n.
/// A lost single photon leaves the posterior and the next theta unchanged, so
/// only 2^(N1+1) - 1 single-photon branches are visited.
inline EvaluationReport evaluate_exact_with_speedup(const SequencePlan& plan, const EvaluationOptions& opts = {}) {
  const auto start = std::chrono::steady_clock::now();
  const long double leaves = speedup_leaf_count(plan);
  detail::check_guard(leaves, opts.branch_guard, plan);
  plan.validate();
  std::vector<double> terms(static_cast<std::size_t>(plan.n1) + 1, 0.0);
  parallel_for(terms.size(), opts.threads, [&](std::size_t i) {
    const int n = static_cast<int>(i);
    const double w = binomial(plan.n1, n) * std::pow(plan.eta, n) * std::pow(1.0 - plan.eta, plan.n1 - n);
    if (w == 0.0) return;
    terms[i] = w * lossless_prefix_sharpness(plan, n);
  });
  double mu = 0.0;
  for (double t : terms) mu += t;
  return detail::finish(mu, static_cast<std::uint64_t>(leaves), EvaluationMethod::exact_with_speedup, start);
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

struct MonteCarloTrace {
  EvaluationReport report;
  /// Wrapped estimation error phi_hat - phi in (-pi, pi], one per trial.
  std::vector<double> errors;
};

/// Simulates `trials` adaptive runs with phi drawn uniformly, estimates phi by
/// the argument of the posterior's a_{-1}, and reports |mean exp(i(phi_hat -
/// phi))| with a bootstrap standard error. Trial t uses its own generator
/// seeded from (rng_seed, t), so results do not depend on the thread count.
inline MonteCarloTrace simulate_monte_carlo(const std::vector<Stage>& stages, std::int64_t trials,
                                            std::uint64_t rng_seed, unsigned threads = 1) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  MonteCarloTrace out;
  out.errors.assign(static_cast<std::size_t>(trials), 0.0);

  constexpr std::size_t kChunk = 256;
  const std::size_t n_trials = static_cast<std::size_t>(trials);
  const std::size_t n_chunks = (n_trials + kChunk - 1) / kChunk;
  parallel_for(n_chunks, threads, [&](std::size_t chunk) {
    const std::size_t end = std::min(n_trials, (chunk + 1) * kChunk);
    for (std::size_t t = chunk * kChunk; t < end; ++t) {
      std::mt19937_64 rng(detail::splitmix64(rng_seed ^ detail::splitmix64(t)));
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      const double phi = kTwoPi * uni(rng);
      PhaseDistribution post = flat_prior();
      for (const auto& stage : stages) {
        const auto& table = *stage;
        const double theta = choose_theta(post, table);
        const double r = uni(rng);
        double total = 0.0;
        std::vector<double> cdf;
        cdf.reserve(table.entries().size());
        for (const auto& e : table.entries()) {
          total += evaluate_outcome(table, e.outcome, phi, theta);
          cdf.push_back(total);
        }
        std::size_t pick = 0;
        while (pick + 1 < cdf.size() && cdf[pick] <= r * total) ++pick;
        post = bayes_update(post, table.entries()[pick], theta);
      }
      const cplx first = post.coeff(-1);
      const double estimate = std::abs(first) > 0.0 ? std::arg(first) : 0.0;
      out.errors[t] = std::remainder(estimate - phi, kTwoPi);
    }
  });

  std::vector<cplx> unit(n_trials);
  for (std::size_t i = 0; i < n_trials; ++i) unit[i] = std::polar(1.0, out.errors[i]);
  cplx sum = 0.0;
  for (const auto& z : unit) sum += z;
  const double mu = std::abs(sum) / static_cast<double>(n_trials);

  // Bootstrap over trials.
  constexpr int kResamples = 200;
  std::mt19937_64 boot(detail::splitmix64(rng_seed ^ 0xB0075712A9ULL));
  std::uniform_int_distribution<std::size_t> pick(0, n_trials - 1);
  double s1 = 0.0;
  double s2 = 0.0;
  for (int b = 0; b < kResamples; ++b) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n_trials; ++i) acc += unit[pick(boot)];
    const double m = std::abs(acc) / static_cast<double>(n_trials);
    s1 += m;
    s2 += m * m;
  }
  const double mean = s1 / kResamples;
  const double var = std::max(0.0, (s2 - kResamples * mean * mean) / (kResamples - 1));

  out.report = detail::finish(mu, static_cast<std::uint64_t>(n_trials), EvaluationMethod::monte_carlo, start);
  out.report.mc_std_error = std::sqrt(var);
  return out;
}

inline EvaluationReport evaluate_monte_carlo(const SequencePlan& plan, std::int64_t trials,
                                             std::uint64_t rng_seed, unsigned threads = 1) {
  return simulate_monte_carlo(sequence_stages(plan), trials, rng_seed, threads).report;
}

}  // namespace lrphase
