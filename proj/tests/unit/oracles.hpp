#pragma once

// Reference computations that avoid the library's FFT path.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "lpe/grid.hpp"

namespace oracle {

using lpe::cplx;

/// Normalized coefficients by direct summation.
inline std::vector<cplx> dft(const std::vector<cplx>& w) {
  const std::size_t n = w.size();
  std::vector<cplx> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      s += w[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * j % n) / double(n));
    c[k] = s / double(n);
  }
  return c;
}

inline std::vector<cplx> idft(const std::vector<cplx>& c) {
  const std::size_t n = c.size();
  std::vector<cplx> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      s += c[k] * std::polar(1.0, 2.0 * std::numbers::pi * double(k * j % n) / double(n));
    w[j] = s;
  }
  return w;
}

inline std::vector<cplx> values(const lpe::GridFunction& g) { return {g.values().begin(), g.values().end()}; }

/// Dense N x N matrix of the Fourier multiplier m(D) acting on samples.
inline Eigen::MatrixXcd multiplier_matrix(std::span<const double> m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXcd F(n, n), Finv(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j) {
      double ang = 2.0 * std::numbers::pi * double((k * j) % n) / double(n);
      F(k, j) = std::polar(1.0, -ang) / double(n);
      Finv(j, k) = std::polar(1.0, ang);
    }
  Eigen::VectorXcd d(n);
  for (Eigen::Index k = 0; k < n; ++k) d[k] = m[static_cast<std::size_t>(k)];
  return Finv * d.asDiagonal() * F;
}

/// Random trigonometric polynomial with frequencies |xi| <= band.
inline lpe::GridFunction random_band_limited(std::size_t n, int band, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  lpe::Spectrum s(n, lpe::kTwoPi);
  for (int xi = -band; xi <= band; ++xi) {
    auto slot = static_cast<std::size_t>((xi + static_cast<int>(n)) % static_cast<int>(n));
    s[slot] = cplx(nd(rng), nd(rng));
  }
  return lpe::inverse(s);
}

inline double rel_err(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace oracle
