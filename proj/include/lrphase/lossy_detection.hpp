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

// Outcome probabilities of the lossy two-arm interferometer followed by a
// 50/50 beam splitter and photon-number detection. Each probability is stored
// as a trigonometric polynomial in the phase difference phi - theta.

#include <cmath>
#include <compare>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrphase/common.hpp"
#include "lrphase/state_prep.hpp"

namespace lrphase {

struct LossChannel {
  double eta = 1.0;

  void validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  }
};

/// L photons lost in total, k photons counted at the designated output port.
struct Outcome {
  int lost = 0;
  int detected = 0;

  auto operator<=>(const Outcome&) const = default;
};

/// Fourier coefficients c_d, d = -(N-L)..(N-L), with
/// P_{L,k}(phi, theta) = sum_d c_d exp(i d (phi - theta)).
struct LikelihoodEntry {
  Outcome outcome;
  std::vector<cplx> coeffs;

  int max_harmonic() const { return static_cast<int>(coeffs.size() / 2); }
  cplx coeff(int d) const {
    const int m = max_harmonic();
    return (d < -m || d > m) ? cplx{} : coeffs[static_cast<std::size_t>(d + m)];
  }
  /// True when the probability does not depend on the phase.
  bool phase_free() const { return coeffs.size() == 1; }
};

class OutcomeLikelihoodTable {
 public:
  OutcomeLikelihoodTable(int n_photons, double eta, std::vector<LikelihoodEntry> entries)
      : n_photons_(n_photons), eta_(eta), entries_(std::move(entries)) {}

  int n_photons() const { return n_photons_; }
  double eta() const { return eta_; }
  const std::vector<LikelihoodEntry>& entries() const { return entries_; }

  /// Entries are stored L-major, k-minor.
  static std::size_t index_of(int n_photons, const Outcome& o) {
    if (o.lost < 0 || o.lost > n_photons || o.detected < 0 || o.detected > n_photons - o.lost)
      throw std::out_of_range("outcome (L=" + std::to_string(o.lost) + ", k=" +
                              std::to_string(o.detected) + ") not valid for N=" +
                              std::to_string(n_photons));
    std::size_t idx = 0;
    for (int l = 0; l < o.lost; ++l) idx += static_cast<std::size_t>(n_photons - l + 1);
    return idx + static_cast<std::size_t>(o.detected);
  }

  const LikelihoodEntry& entry(const Outcome& o) const {
    const auto& e = entries_.at(index_of(n_photons_, o));
    if (e.outcome != o) throw std::logic_error("likelihood table layout corrupted");
    return e;
  }

 private:
  int n_photons_;
  double eta_;
  std::vector<LikelihoodEntry> entries_;
};

inline std::size_t outcome_count(int n_photons) {
  return static_cast<std::size_t>(n_photons + 1) * static_cast<std::size_t>(n_photons + 2) / 2;
}

/// Amplitude weight for a surviving component |N-L-r, r> that lost m photons
/// from the second arm and L-m from the first.
inline double a_coefficient(int n, int lost, int r, int m, double eta) {
  if (lost < 0 || lost > n || m < 0 || m > lost || r < 0 || r > n - lost)
    throw std::out_of_range("a_coefficient index out of range");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  return std::sqrt(std::pow(eta, n - lost) * std::pow(1.0 - eta, lost) *
                   binomial(n - r - m, n - lost - r) * binomial(r + m, r));
}

namespace detail {

// Signed sum over r2 of the 50/50 splitter expansion, excluding the
// factorial normalization.
inline double splitter_sum(int m_surv, int k, int r) {
  double acc = 0.0;
  for (int r2 = std::max(0, k - m_surv + r); r2 <= std::min(r, k); ++r2)
    acc += ((r2 % 2) ? -1.0 : 1.0) * binomial(m_surv - r, k - r2) * binomial(r, r2);
  return acc;
}

}  // namespace detail

/// Evaluates the closed-form detection probabilities term by term, grouping
/// Psi_{r+m} Psi*_{s+m} under harmonic d = s - r.
inline OutcomeLikelihoodTable build_likelihood_table(const TwoModeState& state,
                                                     const LossChannel& channel) {
  channel.validate();
  const int n = state.n_photons();
  const double eta = channel.eta;
  std::vector<LikelihoodEntry> entries;
  entries.reserve(outcome_count(n));

  for (int lost = 0; lost <= n; ++lost) {
    const int surv = n - lost;
    const double half_pow = std::pow(0.5, surv);
    for (int k = 0; k <= surv; ++k) {
      LikelihoodEntry e{{lost, k}, std::vector<cplx>(static_cast<std::size_t>(2 * surv + 1), 0.0)};
      const double fk = factorial(surv - k) * factorial(k);
      for (int m = 0; m <= lost; ++m) {
        for (int r = 0; r <= surv; ++r) {
          const double ar = a_coefficient(n, lost, r, m, eta);
          const double br = detail::splitter_sum(surv, k, r);
          if (ar == 0.0 || br == 0.0) continue;
          const cplx pr = state.amplitude(r + m);
          for (int s = 0; s <= surv; ++s) {
            const double as = a_coefficient(n, lost, s, m, eta);
            const double bs = detail::splitter_sum(surv, k, s);
            if (as == 0.0 || bs == 0.0) continue;
            const cplx ps = std::conj(state.amplitude(s + m));
            const double norm = fk / std::sqrt(factorial(surv - r) * factorial(r) *
                                               factorial(surv - s) * factorial(s));
            e.coeffs[static_cast<std::size_t>(s - r + surv)] +=
                pr * ps * (ar * as * half_pow * norm * br * bs);
          }
        }
      }
      // Enforce exact Hermitian symmetry so evaluated probabilities are real.
      for (int d = 1; d <= surv; ++d) {
        const cplx avg = 0.5 * (e.coeffs[surv + d] + std::conj(e.coeffs[surv - d]));
        e.coeffs[surv + d] = avg;
        e.coeffs[surv - d] = std::conj(avg);
      }
      e.coeffs[surv] = e.coeffs[surv].real();
      entries.push_back(std::move(e));
    }
  }
  return OutcomeLikelihoodTable(n, eta, std::move(entries));
}

inline OutcomeLikelihoodTable build_likelihood_table(const TwoModeState& state, double eta) {
  return build_likelihood_table(state, LossChannel{eta});
}

namespace detail {

inline cplx series_at(const LikelihoodEntry& e, double delta) {
  const int m = e.max_harmonic();
  cplx acc = e.coeffs[m];
  for (int d = 1; d <= m; ++d) {
    const cplx w = std::polar(1.0, d * delta);
    acc += e.coeffs[m + d] * w + e.coeffs[m - d] * std::conj(w);
  }
  return acc;
}

}  // namespace detail

/// P_{L,k}(phi, theta), clamped at zero.
inline double evaluate_outcome(const OutcomeLikelihoodTable& table, const Outcome& outcome,
                               double phi, double theta) {
  const cplx v = detail::series_at(table.entry(outcome), phi - theta);
  if (std::abs(v.imag()) > 1e-10) throw std::logic_error("likelihood series is not real");
  return std::max(v.real(), 0.0);
}

/// dP_{L,k}/dphi from the series coefficients.
inline double evaluate_outcome_derivative(const OutcomeLikelihoodTable& table,
                                          const Outcome& outcome, double phi, double theta) {
  const auto& e = table.entry(outcome);
  const int m = e.max_harmonic();
  const double delta = phi - theta;
  cplx acc = 0.0;
  for (int d = 1; d <= m; ++d) {
    const cplx w = std::polar(1.0, d * delta);
    acc += cplx{0.0, static_cast<double>(d)} * (e.coeffs[m + d] * w - e.coeffs[m - d] * std::conj(w));
  }
  return acc.real();
}

/// Brute-force state-vector model: explicit loss modes, then the output
/// splitter b1+ -> (u+ + v+)/sqrt2, b2+ -> (u+ - v+)/sqrt2, with k counted in
/// v. Returns one probability per outcome.
inline std::map<Outcome, double> oracle_probabilities(const TwoModeState& state,
                                                      const LossChannel& channel, double phi,
                                                      double theta) {
  channel.validate();
  const int n = state.n_photons();
  if (n > 6) throw std::invalid_argument("oracle_probabilities supports at most 6 photons");
  const double eta = channel.eta;
  const double st = std::sqrt(eta);
  const double sl = std::sqrt(1.0 - eta);

  // Amplitudes over |n1, n2, l1, l2> after loss (l1, l2 are the loss modes).
  const int dim = n + 1;
  const auto idx = [dim](int a, int b, int c, int d) {
    return ((static_cast<std::size_t>(a) * dim + b) * dim + c) * dim + d;
  };
  std::vector<cplx> psi(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0);
  for (int k = 0; k <= n; ++k) {
    const cplx amp = state.amplitude(k) * std::polar(1.0, (n - k) * phi + k * theta);
    // b+ -> sqrt(eta) b+ + i sqrt(1-eta) c+ applied to each arm.
    for (int l1 = 0; l1 <= n - k; ++l1)
      for (int l2 = 0; l2 <= k; ++l2) {
        const cplx ipow = std::pow(cplx{0.0, 1.0}, l1 + l2);
        const double w = std::sqrt(binomial(n - k, l1) * binomial(k, l2)) *
                         std::pow(st, n - l1 - l2) * std::pow(sl, l1 + l2);
        psi[idx(n - k - l1, k - l2, l1, l2)] += amp * ipow * w;
      }
  }

  std::map<Outcome, double> probs;
  for (int lost = 0; lost <= n; ++lost)
    for (int k = 0; k <= n - lost; ++k) probs[{lost, k}] = 0.0;

  for (int l1 = 0; l1 <= n; ++l1)
    for (int l2 = 0; l1 + l2 <= n; ++l2) {
      const int surv = n - l1 - l2;
      // Splitter acting on the surviving two-mode component for this loss pattern.
      std::vector<cplx> out(static_cast<std::size_t>(surv) + 1, 0.0);
      for (int j = 0; j <= surv; ++j) {
        const cplx in = psi[idx(surv - j, j, l1, l2)];
        if (in == cplx{}) continue;
        // x^{surv-j} y^j / sqrt((surv-j)! j!) with x -> (u+v)/sqrt2, y -> (u-v)/sqrt2.
        std::vector<double> poly{1.0};  // index = power of v
        for (int t = 0; t < surv - j; ++t) {
          std::vector<double> nx(poly.size() + 1, 0.0);
          for (std::size_t q = 0; q < poly.size(); ++q) {
            nx[q] += poly[q];
            nx[q + 1] += poly[q];
          }
          poly = std::move(nx);
        }
        for (int t = 0; t < j; ++t) {
          std::vector<double> nx(poly.size() + 1, 0.0);
          for (std::size_t q = 0; q < poly.size(); ++q) {
            nx[q] += poly[q];
            nx[q + 1] -= poly[q];
          }
          poly = std::move(nx);
        }
        const double scale = std::pow(0.5, 0.5 * surv) / std::sqrt(factorial(surv - j) * factorial(j));
        for (int v = 0; v <= surv; ++v)
          out[v] += in * (poly[v] * scale * std::sqrt(factorial(surv - v) * factorial(v)));
      }
      for (int v = 0; v <= surv; ++v) probs[{l1 + l2, v}] += std::norm(out[v]);
    }
  return probs;
}

inline std::map<Outcome, double> oracle_probabilities(const TwoModeState& state, double eta,
                                                      double phi, double theta) {
  return oracle_probabilities(state, LossChannel{eta}, phi, theta);
}

}  // namespace lrphase
