#pragma once

// Littlewood-Paley blocks on the periodic grid.
//
// phi_0 is radial, equal to 1 on |xi| <= 1 and 0 on |xi| >= 2, with the smooth
// transition g(s) = f(1-s) / (f(s) + f(1-s)), f(s) = exp(-1/s). For nu >= 1,
// phi_nu(xi) = phi_0(2^-nu xi) - phi_0(2^(1-nu) xi). Blocks are obtained by
// applying these as exact Fourier multipliers, so supports are exact.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpe/grid.hpp"

namespace lpe::dyadic {

/// phi_0 as a function of r = |xi|.
double cutoff_profile(double r);
/// phi_nu(xi) for nu >= 0; phi_{-1} == 0.
double phi(int nu, double xi);

/// floor(log2(N/2 * 2pi/period)) - 1: the last block whose support ends at Nyquist.
int natural_nu_max(std::size_t n_points, double period = kTwoPi);

class CutoffFamily {
 public:
  /// Throws ConfigurationError unless the grid hosts nu_max >= 2.
  CutoffFamily(std::size_t n_points, double period = kTwoPi);

  std::size_t n_points() const { return n_points_; }
  double period() const { return period_; }
  int nu_max() const { return static_cast<int>(phi_.size()) - 1; }

  std::span<const double> phi(int nu) const { return phi_.at(static_cast<std::size_t>(nu)); }
  /// psi_mu = phi_{mu-1} + phi_mu + phi_{mu+1}; phi_{nu_max+1} is kept so psi == 1 on supp phi_nu_max.
  std::span<const double> psi(int mu) const { return psi_.at(static_cast<std::size_t>(mu)); }

  /// Same grid, blocks above `nu_max` dropped. Must not exceed the natural value.
  CutoffFamily truncated(int nu_max) const;

  bool matches(const GridFunction& w) const { return w.size() == n_points_ && w.period() == period_; }
  bool matches(const Spectrum& s) const { return s.size() == n_points_ && s.period() == period_; }

 private:
  std::size_t n_points_;
  double period_;
  std::vector<std::vector<double>> phi_;
  std::vector<std::vector<double>> psi_;
};

inline CutoffFamily build_cutoffs(std::size_t n_points, double period = kTwoPi) {
  return CutoffFamily(n_points, period);
}

struct DyadicBlocks {
  std::vector<GridFunction> blocks;
  std::string source_hash;
};

DyadicBlocks decompose(const GridFunction& w, const CutoffFamily& fam);
GridFunction reconstruct(const DyadicBlocks& blocks);

/// phi_nu(D) applied in frequency space, nu = 0..nu_max.
std::vector<Spectrum> block_spectra(const Spectrum& s, const CutoffFamily& fam);
/// ||w_nu||^2 for every block, by Parseval.
std::vector<double> block_norms2(const Spectrum& s, const CutoffFamily& fam);

/// (sum_nu ||w_nu||^2 2^(2 m nu))^(1/2).
double sobolev_norm(const GridFunction& w, double m, const CutoffFamily& fam);
double sobolev_norm(const Spectrum& s, double m, const CutoffFamily& fam);

/// ||d/dx w_nu|| / ||w_nu||. Empty when the block is zero.
std::optional<double> bernstein_ratio(const DyadicBlocks& blocks, int nu);
/// Bernstein bounds [2^(nu-1), 2^(nu+1)] for nu >= 1.
inline double bernstein_lower(int nu) { return std::ldexp(1.0, nu - 1); }
inline double bernstein_upper(int nu) { return std::ldexp(1.0, nu + 1); }

}  // namespace lpe::dyadic
