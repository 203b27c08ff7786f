#include "lpe/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "lpe/errors.hpp"
#include "lpe/simd/kernels.hpp"

namespace lpe {
namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// The FFTW planner is not thread-safe; execution with new arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.fwd);
      fftw_destroy_plan(p.bwd);
    }
  }

  const PlanPair& get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<cplx> a(n), b(n);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const int ni = static_cast<int>(n);
    PlanPair p;
    p.fwd = fftw_plan_dft_1d(ni, pa, pb, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_1d(ni, pa, pb, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p.fwd == nullptr || p.bwd == nullptr) throw NumericalError("FFTW planning failed");
    return plans_.emplace(n, p).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void check_grid_size(std::size_t n) {
  if (n < 8 || !is_power_of_two(n))
    throw ConfigurationError("grid size must be a power of two >= 8, got " + std::to_string(n));
}

void check_period(double period) {
  if (!(period > 0.0) || !std::isfinite(period))
    throw ConfigurationError("period must be a positive finite number");
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double frequency(std::size_t k, std::size_t n_points, double period) {
  const auto n = static_cast<long long>(n_points);
  auto kk = static_cast<long long>(k);
  if (kk >= n / 2) kk -= n;
  return static_cast<double>(kk) * (kTwoPi / period);
}

std::vector<double> frequencies(std::size_t n_points, double period) {
  std::vector<double> xi(n_points);
  for (std::size_t k = 0; k < n_points; ++k) xi[k] = frequency(k, n_points, period);
  return xi;
}

GridFunction::GridFunction(std::size_t n_points, double period)
    : values_(n_points, cplx(0.0, 0.0)), period_(period) {
  check_grid_size(n_points);
  check_period(period);
}

GridFunction::GridFunction(std::vector<cplx> values, double period)
    : values_(std::move(values)), period_(period) {
  check_grid_size(values_.size());
  check_period(period);
}

double GridFunction::norm2() const { return dx() * simd::norm2(values_); }
double GridFunction::norm() const { return std::sqrt(norm2()); }

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridFunction::same_grid(const GridFunction& other) const {
  return values_.size() == other.values_.size() && period_ == other.period_;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) { return add_scaled(1.0, other); }
GridFunction& GridFunction::operator-=(const GridFunction& other) { return add_scaled(-1.0, other); }

GridFunction& GridFunction::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

GridFunction& GridFunction::add_scaled(double s, const GridFunction& other) {
  require_same_grid(*this, other, "add_scaled");
  simd::axpy(s, other.values_, values_);
  return *this;
}

double inner_re(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "inner_re");
  return a.dx() * simd::dot_re(a.values(), b.values());
}

GridFunction multiply(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b, "multiply");
  GridFunction out(a.size(), a.period());
  simd::mul(a.values(), b.values(), out.values());
  return out;
}

Spectrum::Spectrum(std::size_t n_points, double period)
    : coeffs_(n_points, cplx(0.0, 0.0)), period_(period) {
  check_grid_size(n_points);
  check_period(period);
}

Spectrum::Spectrum(std::vector<cplx> coeffs, double period) : coeffs_(std::move(coeffs)), period_(period) {
  check_grid_size(coeffs_.size());
  check_period(period);
}

double Spectrum::norm2() const { return period_ * simd::norm2(coeffs_); }

Spectrum Spectrum::multiplied(std::span<const double> m) const {
  if (m.size() != coeffs_.size()) throw DimensionError("multiplier length does not match spectrum");
  Spectrum out(coeffs_.size(), period_);
  simd::scale_real(coeffs_, m, out.coeffs_);
  return out;
}

Spectrum Spectrum::differentiated() const {
  const auto sym = derivative_symbol(coeffs_.size(), period_);
  Spectrum out(coeffs_.size(), period_);
  simd::scale_imag(coeffs_, sym, out.coeffs_);
  return out;
}

Spectrum forward(const GridFunction& w) {
  const std::size_t n = w.size();
  const auto& plans = plan_cache().get(n);
  Spectrum s(n, w.period());
  fftw_execute_dft(plans.fwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(w.values().data())),
                   reinterpret_cast<fftw_complex*>(s.coeffs().data()));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& c : s.coeffs()) c *= inv_n;
  return s;
}

GridFunction inverse(const Spectrum& s) {
  const std::size_t n = s.size();
  const auto& plans = plan_cache().get(n);
  GridFunction w(n, s.period());
  fftw_execute_dft(plans.bwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(s.coeffs().data())),
                   reinterpret_cast<fftw_complex*>(w.values().data()));
  return w;
}

GridFunction derivative(const GridFunction& w) { return inverse(forward(w).differentiated()); }

std::vector<double> derivative_symbol(std::size_t n_points, double period) {
  auto xi = frequencies(n_points, period);
  xi[n_points / 2] = 0.0;
  return xi;
}

void require_same_grid(const GridFunction& a, const GridFunction& b, std::string_view what) {
  if (!a.same_grid(b))
    throw DimensionError(std::string(what) + ": grid mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + " points)");
}

}  // namespace lpe
