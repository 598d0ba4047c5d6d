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

// Two-mode photonic states and the three-port preparation network that
// produces the loss-resistant family from a dual Fock input |n,n,0>.

#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "lrphase/common.hpp"

namespace lrphase {

/// Pure N-photon state sum_k psi_k |N-k, k>. Amplitudes are normalized on
/// construction.
class TwoModeState {
 public:
  explicit TwoModeState(std::vector<cplx> amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.empty()) throw std::invalid_argument("TwoModeState needs at least one amplitude");
    double norm2 = 0.0;
    for (const auto& a : amps_) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw std::invalid_argument("TwoModeState amplitude is not finite");
      norm2 += std::norm(a);
    }
    if (!(norm2 > 0.0)) throw std::invalid_argument("TwoModeState has zero norm");
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& a : amps_) a *= inv;
  }

  int n_photons() const { return static_cast<int>(amps_.size()) - 1; }
  std::span<const cplx> amplitudes() const { return amps_; }
  cplx amplitude(int k) const { return amps_.at(static_cast<std::size_t>(k)); }

  bool is_symmetric(double tol = 0.0) const {
    const int n = n_photons();
    for (int k = 0; k <= n; ++k)
      if (std::abs(amps_[k] - amps_[n - k]) > tol) return false;
    return true;
  }

 private:
  std::vector<cplx> amps_;
};

/// |<a|b>|; zero when photon numbers differ.
inline double fidelity(const TwoModeState& a, const TwoModeState& b) {
  if (a.n_photons() != b.n_photons()) return 0.0;
  cplx overlap = 0.0;
  for (int k = 0; k <= a.n_photons(); ++k) overlap += std::conj(a.amplitude(k)) * b.amplitude(k);
  return std::abs(overlap);
}

struct LossResistantSpec {
  int half_n = 1;
  double chi = 0.0;

  void validate() const {
    if (half_n < 1) throw std::invalid_argument("half_n must be >= 1");
    if (!(chi >= 0.0 && chi <= 2.0)) throw std::invalid_argument("chi must lie in [0, 2]");
  }
};

struct TriPortConfig {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;

  void validate() const {
    for (double r : {r1, r2, r3})
      if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("reflectivity outside [0, 1]");
    if (!std::isfinite(phi1) || !std::isfinite(phi2))
      throw std::invalid_argument("phase shift is not finite");
  }
};

struct ExactOptimalSpec {
  double chi1p = 0.0;
  double chi2p = 0.0;
};

namespace detail {

// Coefficients of a homogeneous bivariate polynomial, index = power of the
// second variable.
inline std::vector<cplx> poly_mul(const std::vector<cplx>& p, const std::vector<cplx>& q) {
  std::vector<cplx> out(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
  return out;
}

}  // namespace detail

/// Expansion of [(b1+)^2 + chi b1+ b2+ + (b2+)^2]^n |0,0> in the |N-k,k> basis.
inline TwoModeState make_loss_resistant(const LossResistantSpec& spec) {
  spec.validate();
  std::vector<cplx> poly{1.0};
  const std::vector<cplx> quad{1.0, spec.chi, 1.0};
  for (int i = 0; i < spec.half_n; ++i) poly = detail::poly_mul(poly, quad);

  const int n = 2 * spec.half_n;
  std::vector<cplx> amps(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n / 2; ++k) {
    const double v = poly[k].real() * std::sqrt(factorial(k) * factorial(n - k));
    amps[k] = v;
    amps[n - k] = v;
  }
  return TwoModeState(std::move(amps));
}

inline TriPortConfig synthesize_triport(const LossResistantSpec& spec) {
  if (!(spec.chi >= 0.0 && spec.chi <= 2.0)) throw std::invalid_argument("chi must lie in [0, 2]");
  const double chi = spec.chi;
  double s = 0.5 * (chi - 1.0) * std::sqrt(2.0 + chi);
  if (std::abs(s) > 1.0 + 1e-12) throw std::domain_error("arcsin argument outside [-1, 1]");
  s = std::clamp(s, -1.0, 1.0);
  TriPortConfig cfg;
  cfg.phi1 = std::asin(s);
  cfg.phi2 = std::acos(std::clamp(chi / 2.0, -1.0, 1.0));
  cfg.r1 = 1.0 / (1.0 + chi);
  cfg.r2 = 1.0 / (2.0 + chi);
  cfg.r3 = 1.0 / (1.0 + chi);
  return cfg;
}

/// Linear map a_i+ = sum_j U_ij b_j+ for the three-port network: beam splitter
/// R1 on modes (2,3), phase phi1 on mode 3, R2 on (1,2), R3 on (2,3), then
/// phase phi2 on output mode 2.
inline std::array<std::array<cplx, 3>, 3> triport_mode_map(const TriPortConfig& cfg) {
  using Mat = std::array<std::array<cplx, 3>, 3>;
  Mat u{};
  for (int i = 0; i < 3; ++i) u[i][i] = 1.0;

  const auto compose = [&](const Mat& e) {
    Mat out{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) out[i][j] += u[i][k] * e[k][j];
    u = out;
  };
  // p+ = i sqrt(R) p'+ + sqrt(T) q'+,  q+ = i sqrt(R) q'+ + sqrt(T) p'+
  const auto splitter = [](int p, int q, double r) {
    Mat e{};
    for (int i = 0; i < 3; ++i) e[i][i] = 1.0;
    const cplx refl{0.0, std::sqrt(r)};
    const double trans = std::sqrt(1.0 - r);
    e[p][p] = refl;
    e[p][q] = trans;
    e[q][q] = refl;
    e[q][p] = trans;
    return e;
  };
  const auto shifter = [](int p, double phase) {
    Mat e{};
    for (int i = 0; i < 3; ++i) e[i][i] = 1.0;
    e[p][p] = std::polar(1.0, phase);
    return e;
  };

  compose(splitter(1, 2, cfg.r1));
  compose(shifter(2, cfg.phi1));
  compose(splitter(0, 1, cfg.r2));
  compose(splitter(1, 2, cfg.r3));
  compose(shifter(1, cfg.phi2));
  return u;
}

/// Pushes |n,n,0> through the network, keeps the terms with vacuum in the
/// third output, and returns the normalized two-mode state.
inline TwoModeState forward_simulate_triport(const TriPortConfig& cfg, int half_n) {
  cfg.validate();
  if (half_n < 1) throw std::invalid_argument("half_n must be >= 1");
  const auto u = triport_mode_map(cfg);
  const int n = 2 * half_n;
  const int dim = n + 1;

  // Dense coefficients over b1^i b2^j b3^l.
  std::vector<cplx> poly(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  const auto at = [dim](int i, int j, int l) { return (static_cast<std::size_t>(i) * dim + j) * dim + l; };
  poly[at(0, 0, 0)] = 1.0;
  int degree = 0;
  const auto multiply_by_row = [&](const std::array<cplx, 3>& row) {
    std::vector<cplx> next(poly.size(), 0.0);
    for (int i = 0; i <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j) {
        const int l = degree - i - j;
        const cplx c = poly[at(i, j, l)];
        if (c == cplx{}) continue;
        next[at(i + 1, j, l)] += c * row[0];
        next[at(i, j + 1, l)] += c * row[1];
        next[at(i, j, l + 1)] += c * row[2];
      }
    poly = std::move(next);
    ++degree;
  };
  for (int i = 0; i < half_n; ++i) multiply_by_row(u[0]);
  for (int i = 0; i < half_n; ++i) multiply_by_row(u[1]);

  std::vector<cplx> amps(static_cast<std::size_t>(dim));
  const double prefactor = 1.0 / factorial(half_n);
  for (int k = 0; k <= n; ++k)
    amps[k] = prefactor * poly[at(n - k, k, 0)] * std::sqrt(factorial(n - k) * factorial(k));
  return TwoModeState(std::move(amps));
}

/// |0,4> + c1|1,3> + c2|2,2> + c1|3,1> + |4,0>, normalized.
inline TwoModeState make_exact_optimal4(const ExactOptimalSpec& spec) {
  if (!std::isfinite(spec.chi1p) || !std::isfinite(spec.chi2p))
    throw std::invalid_argument("exact-optimal parameters must be finite");
  return TwoModeState({1.0, spec.chi1p, spec.chi2p, spec.chi1p, 1.0});
}

inline TwoModeState make_single_photon() {
  const double h = std::sqrt(0.5);
  return TwoModeState({h, h});
}

}  // namespace lrphase
