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

// Bayesian phase posterior carried as a finite Fourier series,
//   P(phi) = (1/2pi) sum_{j=-J..J} a_j exp(i j phi),
// so that <exp(i phi)> is the coefficient a_{-1}.

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "lrphase/common.hpp"
#include "lrphase/lossy_detection.hpp"

namespace lrphase {

class PhaseDistribution {
 public:
  PhaseDistribution() : coeffs_{1.0} {}

  /// Takes coefficients a_{-J}..a_{J}; the length must be odd.
  explicit PhaseDistribution(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.size() % 2 == 0) throw std::invalid_argument("coefficient vector length must be odd");
  }

  int max_harmonic() const { return static_cast<int>(coeffs_.size() / 2); }
  const std::vector<cplx>& coeffs() const { return coeffs_; }

  cplx coeff(int j) const {
    const int m = max_harmonic();
    return (j < -m || j > m) ? cplx{} : coeffs_[static_cast<std::size_t>(j + m)];
  }

  /// Probability density at phi.
  double density(double phi) const {
    const int m = max_harmonic();
    double acc = coeffs_[m].real();
    for (int j = 1; j <= m; ++j) acc += 2.0 * (coeff(j) * std::polar(1.0, j * phi)).real();
    return acc / kTwoPi;
  }

  /// Density of the distribution rotated by delta, i.e. P(phi - delta).
  PhaseDistribution shifted(double delta) const {
    std::vector<cplx> out = coeffs_;
    const int m = max_harmonic();
    for (int j = -m; j <= m; ++j) out[j + m] *= std::polar(1.0, -j * delta);
    return PhaseDistribution(std::move(out));
  }

 private:
  std::vector<cplx> coeffs_;
};

struct MeasurementStep {
  std::shared_ptr<const OutcomeLikelihoodTable> table;
  double theta = 0.0;
  Outcome outcome;
};

/// Successive detections u_1..u_m with their controlled phases.
struct MeasurementRecord {
  std::vector<MeasurementStep> steps;
};

inline PhaseDistribution flat_prior() { return PhaseDistribution(); }

/// Coefficients l_j of the likelihood as a function of phi:
/// P(u | phi, theta) = sum_j l_j exp(i j phi) with l_j = c_j exp(-i j theta).
inline std::vector<cplx> likelihood_series(const LikelihoodEntry& entry, double theta) {
  const int m = entry.max_harmonic();
  std::vector<cplx> out(entry.coeffs.size());
  for (int j = -m; j <= m; ++j) out[j + m] = entry.coeffs[j + m] * std::polar(1.0, -j * theta);
  return out;
}

/// Product of the posterior density with the likelihood, without
/// renormalization. The zeroth coefficient of the result is the outcome
/// probability under the prior.
inline PhaseDistribution multiply_likelihood(const PhaseDistribution& prior,
                                             const LikelihoodEntry& entry, double theta) {
  const auto lik = likelihood_series(entry, theta);
  const int jp = prior.max_harmonic();
  const int jl = entry.max_harmonic();
  const int jn = jp + jl;
  std::vector<cplx> out(static_cast<std::size_t>(2 * jn + 1), 0.0);
  const auto& a = prior.coeffs();
  // Only j >= 0 is accumulated; negative harmonics follow by conjugation.
  for (int j = 0; j <= jn; ++j) {
    cplx acc = 0.0;
    for (int i = std::max(-jp, j - jl); i <= std::min(jp, j + jl); ++i)
      acc += a[i + jp] * lik[j - i + jl];
    out[j + jn] = acc;
  }
  out[jn] = out[jn].real();
  for (int j = 1; j <= jn; ++j) out[jn - j] = std::conj(out[jn + j]);
  return PhaseDistribution(std::move(out));
}

/// Posterior after observing `outcome` at controlled phase theta, normalized
/// so that a_0 = 1. Phase-independent likelihoods leave the prior untouched.
inline PhaseDistribution bayes_update(const PhaseDistribution& prior, const LikelihoodEntry& entry,
                                      double theta) {
  if (entry.phase_free()) {
    if (!(entry.coeffs[0].real() > 0.0))
      throw std::domain_error("degenerate Bayes update: outcome has zero probability");
    return prior;
  }
  PhaseDistribution joint = multiply_likelihood(prior, entry, theta);
  const double norm = joint.coeff(0).real();
  if (!(norm > 1e-300)) throw std::domain_error("degenerate Bayes update: outcome has zero probability");
  std::vector<cplx> out = joint.coeffs();
  for (auto& c : out) c /= norm;
  out[out.size() / 2] = 1.0;
  return PhaseDistribution(std::move(out));
}

inline PhaseDistribution bayes_update(const PhaseDistribution& prior,
                                      const OutcomeLikelihoodTable& table, const Outcome& outcome,
                                      double theta) {
  return bayes_update(prior, table.entry(outcome), theta);
}

/// Folds every step of a record into the flat prior.
inline PhaseDistribution infer(const MeasurementRecord& record) {
  PhaseDistribution post = flat_prior();
  for (const auto& step : record.steps) {
    if (!step.table) throw std::invalid_argument("measurement step without likelihood table");
    post = bayes_update(post, *step.table, step.outcome, step.theta);
  }
  return post;
}

/// |<exp(i phi)>| = |a_{-1}|.
inline double sharpness(const PhaseDistribution& dist) { return std::abs(dist.coeff(-1)); }

inline double holevo_variance_from_sharpness(double mu) {
  if (mu < 1e-15) return std::numeric_limits<double>::infinity();
  return 1.0 / (mu * mu) - 1.0;
}

inline double holevo_variance(const PhaseDistribution& dist) {
  return holevo_variance_from_sharpness(sharpness(dist));
}

}  // namespace lrphase
