#pragma once

// Periodic 1-D grid functions and their discrete Fourier representation.
//
// Samples live at x_j = j * period / N. Spectra hold normalized coefficients
// c_k in FFT order, so that w(x_j) = sum_k c_k exp(i xi_k x_j) and
// ||w||^2_{L^2} = period * sum_k |c_k|^2.

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

namespace lpe {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n);

/// Signed angular frequency of FFT slot k. The Nyquist slot k = N/2 maps to -N/2.
double frequency(std::size_t k, std::size_t n_points, double period = kTwoPi);
std::vector<double> frequencies(std::size_t n_points, double period = kTwoPi);

class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::size_t n_points, double period = kTwoPi);
  explicit GridFunction(std::vector<cplx> values, double period = kTwoPi);

  template <class F>
  static GridFunction sample(std::size_t n_points, F&& f, double period = kTwoPi) {
    GridFunction g(n_points, period);
    for (std::size_t j = 0; j < n_points; ++j) g.values_[j] = cplx(f(g.x(j)));
    return g;
  }

  std::size_t size() const { return values_.size(); }
  double period() const { return period_; }
  double dx() const { return period_ / static_cast<double>(values_.size()); }
  double x(std::size_t j) const { return static_cast<double>(j) * dx(); }

  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  const cplx& operator[](std::size_t j) const { return values_[j]; }
  cplx& operator[](std::size_t j) { return values_[j]; }

  /// Grid quadrature of the squared modulus (exact for trigonometric polynomials below Nyquist).
  double norm2() const;
  double norm() const;
  double max_abs() const;

  bool same_grid(const GridFunction& other) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);
  /// this += s * other
  GridFunction& add_scaled(double s, const GridFunction& other);

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

 private:
  std::vector<cplx> values_;
  double period_ = kTwoPi;
};

/// L^2 inner product Re <a, b> with grid quadrature.
double inner_re(const GridFunction& a, const GridFunction& b);
/// Pointwise product.
GridFunction multiply(const GridFunction& a, const GridFunction& b);

class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(std::size_t n_points, double period);
  Spectrum(std::vector<cplx> coeffs, double period);

  std::size_t size() const { return coeffs_.size(); }
  double period() const { return period_; }
  double frequency(std::size_t k) const { return lpe::frequency(k, coeffs_.size(), period_); }

  std::span<const cplx> coeffs() const { return coeffs_; }
  std::span<cplx> coeffs() { return coeffs_; }
  const cplx& operator[](std::size_t k) const { return coeffs_[k]; }
  cplx& operator[](std::size_t k) { return coeffs_[k]; }

  /// period * sum |c_k|^2, equal to the L^2 norm squared of the synthesized function.
  double norm2() const;

  /// Returns m(D) applied to the coefficients, m given per FFT slot.
  Spectrum multiplied(std::span<const double> m) const;
  /// d/dx: multiplies by i*xi. The Nyquist slot is zeroed.
  Spectrum differentiated() const;

 private:
  std::vector<cplx> coeffs_;
  double period_ = kTwoPi;
};

Spectrum forward(const GridFunction& w);
GridFunction inverse(const Spectrum& s);

/// Spectral derivative d/dx (Nyquist mode dropped).
GridFunction derivative(const GridFunction& w);

/// Multiplier table for i*xi with the Nyquist slot set to zero, stored as the real factor xi.
std::vector<double> derivative_symbol(std::size_t n_points, double period = kTwoPi);

void require_same_grid(const GridFunction& a, const GridFunction& b, std::string_view what);

}  // namespace lpe
