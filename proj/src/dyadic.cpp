#include "lpe/dyadic.hpp"

#include <cmath>
#include <string>

#include "lpe/errors.hpp"
#include "lpe/hash.hpp"
#include "lpe/simd/kernels.hpp"

namespace lpe::dyadic {
namespace {

double transition(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - s));
  const double b = std::exp(-1.0 / s);
  return a / (a + b);
}

std::string hash_of(const GridFunction& w) {
  const auto v = w.values();
  std::string bytes(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(cplx));
  const double p = w.period();
  bytes.append(reinterpret_cast<const char*>(&p), sizeof p);
  return sha256_hex(bytes).substr(0, 16);
}

}  // namespace

double cutoff_profile(double r) { return transition(std::abs(r) - 1.0); }

double phi(int nu, double xi) {
  if (nu < 0) return 0.0;
  const double r = std::abs(xi);
  if (nu == 0) return cutoff_profile(r);
  return cutoff_profile(std::ldexp(r, -nu)) - cutoff_profile(std::ldexp(r, 1 - nu));
}

int natural_nu_max(std::size_t n_points, double period) {
  const double top = static_cast<double>(n_points) / 2.0 * (kTwoPi / period);
  // Guard the floor against log2 roundoff at exact powers of two.
  return static_cast<int>(std::floor(std::log2(top) + 1e-12)) - 1;
}

CutoffFamily::CutoffFamily(std::size_t n_points, double period) : n_points_(n_points), period_(period) {
  if (n_points < 8 || !is_power_of_two(n_points))
    throw ConfigurationError("cutoff family needs a power-of-two grid >= 8");
  if (!(period > 0.0)) throw ConfigurationError("period must be positive");
  const int nu_max = natural_nu_max(n_points, period);
  if (nu_max < 2)
    throw ConfigurationError("grid of " + std::to_string(n_points) + " points cannot host nu_max >= 2");

  const auto xi = frequencies(n_points, period);
  phi_.assign(static_cast<std::size_t>(nu_max) + 1, std::vector<double>(n_points));
  psi_.assign(static_cast<std::size_t>(nu_max) + 1, std::vector<double>(n_points));
  for (int nu = 0; nu <= nu_max; ++nu)
    for (std::size_t k = 0; k < n_points; ++k) phi_[nu][k] = dyadic::phi(nu, xi[k]);
  for (int mu = 0; mu <= nu_max; ++mu)
    for (std::size_t k = 0; k < n_points; ++k)
      psi_[mu][k] = dyadic::phi(mu - 1, xi[k]) + phi_[mu][k] + dyadic::phi(mu + 1, xi[k]);
}

CutoffFamily CutoffFamily::truncated(int nu_max) const {
  if (nu_max < 2 || nu_max > this->nu_max())
    throw ConfigurationError("nu_max override must lie in [2, " + std::to_string(this->nu_max()) + "]");
  CutoffFamily out = *this;
  out.phi_.resize(static_cast<std::size_t>(nu_max) + 1);
  out.psi_.resize(static_cast<std::size_t>(nu_max) + 1);
  return out;
}

std::vector<Spectrum> block_spectra(const Spectrum& s, const CutoffFamily& fam) {
  if (!fam.matches(s)) throw DimensionError("decompose: spectrum and cutoff family live on different grids");
  std::vector<Spectrum> out;
  out.reserve(static_cast<std::size_t>(fam.nu_max()) + 1);
  for (int nu = 0; nu <= fam.nu_max(); ++nu) out.push_back(s.multiplied(fam.phi(nu)));
  return out;
}

std::vector<double> block_norms2(const Spectrum& s, const CutoffFamily& fam) {
  if (!fam.matches(s)) throw DimensionError("block_norms2: grid mismatch");
  std::vector<double> out(static_cast<std::size_t>(fam.nu_max()) + 1);
  std::vector<cplx> scratch(s.size());
  for (int nu = 0; nu <= fam.nu_max(); ++nu) {
    simd::scale_real(s.coeffs(), fam.phi(nu), scratch);
    out[nu] = s.period() * simd::norm2(scratch);
  }
  return out;
}

DyadicBlocks decompose(const GridFunction& w, const CutoffFamily& fam) {
  if (!fam.matches(w)) throw DimensionError("decompose: function and cutoff family live on different grids");
  DyadicBlocks out;
  out.source_hash = hash_of(w);
  for (const auto& bs : block_spectra(forward(w), fam)) out.blocks.push_back(inverse(bs));
  return out;
}

GridFunction reconstruct(const DyadicBlocks& blocks) {
  if (blocks.blocks.empty()) throw DimensionError("reconstruct: no blocks");
  GridFunction sum(blocks.blocks.front().size(), blocks.blocks.front().period());
  for (const auto& b : blocks.blocks) sum += b;
  return sum;
}

double sobolev_norm(const Spectrum& s, double m, const CutoffFamily& fam) {
  const auto n2 = block_norms2(s, fam);
  double acc = 0.0;
  for (std::size_t nu = 0; nu < n2.size(); ++nu) acc += n2[nu] * std::exp2(2.0 * m * static_cast<double>(nu));
  return std::sqrt(acc);
}

double sobolev_norm(const GridFunction& w, double m, const CutoffFamily& fam) {
  if (!fam.matches(w)) throw DimensionError("sobolev_norm: grid mismatch");
  return sobolev_norm(forward(w), m, fam);
}

std::optional<double> bernstein_ratio(const DyadicBlocks& blocks, int nu) {
  const auto& b = blocks.blocks.at(static_cast<std::size_t>(nu));
  const double n = b.norm();
  if (!(n > 0.0)) return std::nullopt;
  return derivative(b).norm() / n;
}

}  // namespace lpe::dyadic
