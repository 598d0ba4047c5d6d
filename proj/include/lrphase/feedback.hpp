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

// Locally optimal controlled phase: the theta that maximizes the expected
// sharpness of the posterior after the next detection.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "lrphase/common.hpp"
#include "lrphase/lossy_detection.hpp"
#include "lrphase/phase_inference.hpp"

namespace lrphase {

struct FeedbackCandidateSet {
  double theta0 = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
};

/// Expected sharpness after the next detection as a function of theta,
///   mu(theta) = sum_u |sum_d a_{-1-d} c_{u,d} exp(-i d theta)|,
/// with the trig-polynomial weights precomputed once per prior.
class SharpnessObjective {
 public:
  SharpnessObjective(const PhaseDistribution& prior, const OutcomeLikelihoodTable& table) {
    const cplx a_m1 = prior.coeff(-1);
    for (const auto& e : table.entries()) {
      if (e.phase_free()) {
        constant_ += std::abs(a_m1 * e.coeffs[0]);
        continue;
      }
      const int m = e.max_harmonic();
      std::vector<cplx> g(e.coeffs.size());
      bool any = false;
      for (int d = -m; d <= m; ++d) {
        g[d + m] = prior.coeff(-1 - d) * e.coeffs[d + m];
        any = any || g[d + m] != cplx{};
      }
      if (!any) continue;
      max_harmonic_ = std::max(max_harmonic_, m);
      weights_.push_back(std::move(g));
    }
  }

  double operator()(double theta) const {
    std::vector<cplx> pw(static_cast<std::size_t>(2 * max_harmonic_ + 1));
    const cplx step = std::polar(1.0, -theta);
    pw[max_harmonic_] = 1.0;
    for (int d = 1; d <= max_harmonic_; ++d) {
      pw[max_harmonic_ + d] = pw[max_harmonic_ + d - 1] * step;
      pw[max_harmonic_ - d] = std::conj(pw[max_harmonic_ + d]);
    }
    double total = constant_;
    for (const auto& g : weights_) {
      const int m = static_cast<int>(g.size() / 2);
      cplx acc = 0.0;
      for (int d = -m; d <= m; ++d) acc += g[d + m] * pw[max_harmonic_ + d];
      total += std::abs(acc);
    }
    return total;
  }

 private:
  double constant_ = 0.0;
  int max_harmonic_ = 0;
  std::vector<std::vector<cplx>> weights_;
};

inline double expected_sharpness(const PhaseDistribution& prior, const OutcomeLikelihoodTable& table,
                                 double theta) {
  return SharpnessObjective(prior, table)(theta);
}

namespace detail {

inline constexpr int kThetaGrid = 64;
inline constexpr double kTieTolerance = 1e-12;

inline double maximize_numeric(const SharpnessObjective& f) {
  const double h = kTwoPi / kThetaGrid;
  std::array<double, kThetaGrid> grid{};
  for (int i = 0; i < kThetaGrid; ++i) grid[i] = f(i * h);
  const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
  if (*hi_it - *lo_it <= kTieTolerance) return 0.0;

  // Every grid-local maximum is refined, since nearly equal peaks are common.
  double best_theta = 0.0;
  double best = -1.0;
  const auto consider = [&](double theta, double v) {
    theta = wrap_angle(theta);
    if (v > best + kTieTolerance || (v >= best - kTieTolerance && theta < best_theta)) {
      best = v;
      best_theta = theta;
    }
  };
  for (int i = 0; i < kThetaGrid; ++i) {
    const double prev = grid[(i + kThetaGrid - 1) % kThetaGrid];
    const double next = grid[(i + 1) % kThetaGrid];
    if (grid[i] < prev || grid[i] < next) continue;
    consider(i * h, grid[i]);
    std::uintmax_t max_iter = 200;
    const auto res = boost::math::tools::brent_find_minima(
        [&](double t) { return -f(t); }, i * h - h, i * h + h, std::numeric_limits<double>::digits / 2, max_iter);
    if (-res.second > grid[i] + kTieTolerance) consider(res.first, -res.second);
  }
  return best_theta;
}

}  // namespace detail

/// Coarse 64-point grid, then Brent refinement within one cell of every grid
/// peak. A refined point replaces its grid point only when strictly better;
/// near-ties go to the smaller angle and a flat objective returns 0.
inline double optimal_theta_numeric(const PhaseDistribution& prior, const OutcomeLikelihoodTable& table) {
  return detail::maximize_numeric(SharpnessObjective(prior, table));
}

/// Three stationary-point candidates of the single-photon expected sharpness,
/// built from a = a_{-1}, b = a_{-2}/2, c = a_0/2. Returns nullopt when the
/// closed form degenerates (c1 = 0).
inline std::optional<FeedbackCandidateSet> single_photon_candidates(const PhaseDistribution& prior) {
  const cplx a = prior.coeff(-1);
  const cplx b = 0.5 * prior.coeff(-2);
  const cplx c = 0.5 * prior.coeff(0);
  const cplx c1 = std::pow(std::conj(a) * c, 2) - std::pow(a * std::conj(b), 2) +
                  4.0 * (std::norm(b) - std::norm(c)) * std::conj(b) * c;
  const cplx c2{0.0, -2.0 * (a * a * std::conj(b) * std::conj(c)).imag()};
  const double scale = std::max({std::norm(a), std::norm(b), std::norm(c)});
  if (std::abs(c1) <= 1e-14 * scale * scale) return std::nullopt;
  const cplx root = std::sqrt(c2 * c2 + std::norm(c1));
  FeedbackCandidateSet out;
  out.theta0 = wrap_angle(std::arg(b * std::conj(a) - std::conj(c) * a));
  out.theta_plus = wrap_angle(std::arg(std::sqrt((c2 + root) / c1)));
  out.theta_minus = wrap_angle(std::arg(std::sqrt((c2 - root) / c1)));
  return out;
}

/// Closed-form feedback for a single-photon detection. The table (usually the
/// lossy single-photon table) ranks the three candidates; a lost photon only
/// adds a theta-independent constant, so loss does not move the optimum.
inline double optimal_theta_single_photon(const PhaseDistribution& prior,
                                          const OutcomeLikelihoodTable& table) {
  if (std::abs(prior.coeff(-1)) < 1e-14 && std::abs(prior.coeff(-2)) < 1e-14) return 0.0;
  const SharpnessObjective f(prior, table);
  const auto cand = single_photon_candidates(prior);
  if (!cand) return detail::maximize_numeric(f);
  const std::array<double, 3> thetas{cand->theta0, cand->theta_plus, cand->theta_minus};
  double best_theta = thetas[0];
  double best = f(thetas[0]);
  for (std::size_t i = 1; i < thetas.size(); ++i) {
    const double v = f(thetas[i]);
    if (v > best + detail::kTieTolerance) {
      best = v;
      best_theta = thetas[i];
    }
  }
  return best_theta;
}

inline double optimal_theta_single_photon(const PhaseDistribution& prior) {
  static const OutcomeLikelihoodTable lossless = build_likelihood_table(make_single_photon(), 1.0);
  return optimal_theta_single_photon(prior, lossless);
}

/// Dispatches on the photon number of the next state.
inline double choose_theta(const PhaseDistribution& prior, const OutcomeLikelihoodTable& table) {
  return table.n_photons() == 1 ? optimal_theta_single_photon(prior, table)
                                : optimal_theta_numeric(prior, table);
}

}  // namespace lrphase
