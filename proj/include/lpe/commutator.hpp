#pragma once

// Commutators [phi_nu(D), coef] psi_mu(D) on the periodic grid, their L^2
// operator norms, the (nu, mu) scans, the Schur-test kernel built from them and
// the near/far decay fit.
//
// In the normalized Fourier basis the operator has entries
//   T[r, c] = coef^[r - c] (phi_nu(r) - phi_nu(c)) psi_mu(c)
// (indices modulo N, matching the pseudospectral product), so its norm can be
// taken from an assembled matrix or from matrix-free FFT applications.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lpe/coefficients.hpp"
#include "lpe/dyadic.hpp"
#include "lpe/grid.hpp"

namespace lpe::commutator {

using dyadic::CutoffFamily;

enum class NormMethod {
  /// Assembled frequency-space matrix, full SVD.
  dense_svd,
  /// Same assembled matrix kept sparse, Lanczos on T^* T.
  sparse_lanczos,
  /// Matrix-free: T and T^* applied by FFT, Lanczos-accelerated power iteration
  /// on T^* T with randomized restarts.
  power_iteration,
  /// dense_svd while the assembled matrix is small, sparse_lanczos otherwise.
  automatic,
};

std::string_view method_name(NormMethod m);
NormMethod parse_method(std::string_view name);

/// Coefficient spectra entries below this fraction of the largest are treated as zero.
inline constexpr double kCoefficientFloor = 1e-15;

/// phi_nu(D)(coef psi_mu(D) w) - coef phi_nu(D) psi_mu(D) w.
GridFunction apply_commutator(const GridFunction& coef, int nu, int mu, const GridFunction& w,
                              const CutoffFamily& fam);
/// The L^2 adjoint: psi_mu(D)(conj(coef) phi_nu(D) y) - psi_mu(D) phi_nu(D)(conj(coef) y).
GridFunction apply_commutator_adjoint(const GridFunction& coef, int nu, int mu, const GridFunction& y,
                                      const CutoffFamily& fam);

/// Coefficient resynthesized from its spectrum with entries below kCoefficientFloor removed.
GridFunction clean_coefficient(const GridFunction& coef);

struct IterationOptions {
  /// Relative accuracy on the dominant singular value.
  double tolerance = 1e-8;
  int max_iterations = 20000;
  int restarts = 3;
  std::uint64_t seed = 0x5eed;
};

struct NormEstimate {
  double value = 0.0;
  /// Ritz residual ||A y - theta y|| / theta of the accepted estimate (0 for dense SVD).
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
  NormMethod method = NormMethod::dense_svd;
};

/// The assembled operator restricted to its nonzero rows and columns.
Eigen::SparseMatrix<cplx> assemble(const Spectrum& coef_hat, int nu, int mu, const CutoffFamily& fam);

NormEstimate estimate_norm(const GridFunction& coef, int nu, int mu, const CutoffFamily& fam, NormMethod method,
                           const IterationOptions& opts = {});

/// Operator norm; throws NumericalError if an iterative method stagnates.
double commutator_norm(const GridFunction& coef, int nu, int mu, const CutoffFamily& fam,
                       NormMethod method = NormMethod::automatic, const IterationOptions& opts = {});

/// Norms for all (nu, mu) in [0, nu_max]^2.
Eigen::MatrixXd norm_matrix(const GridFunction& coef, const CutoffFamily& fam, NormMethod method,
                            const IterationOptions& opts = {});

struct CommutatorScan {
  double t = 0.0;
  int nu_max = 0;
  Eigen::MatrixXd norms_beta;
  Eigen::MatrixXd norms_b;
  NormMethod method = NormMethod::automatic;
  double tolerance = 1e-8;
};

/// Scans beta(t, .) and b(t, .) of the coefficient set.
CommutatorScan scan(const CoefficientSet& cs, double t, const CutoffFamily& fam,
                    NormMethod method = NormMethod::automatic, const IterationOptions& opts = {});

struct SchurOptions {
  /// Multiplies every entry (alpha(t) for the principal term).
  double scale = 1.0;
  /// Include the 2^nu row factor.
  bool dyadic_row_factor = true;
  /// Optional per-column factor w_mu.
  std::vector<double> column_weight;
};

struct SchurKernel {
  Eigen::MatrixXd kernel;
  Eigen::MatrixXd near;  // |nu - mu| <= 2
  Eigen::MatrixXd far;   // |nu - mu| >= 3
  double s_row = 0.0;    // sup_nu sum_mu |k|
  double s_col = 0.0;    // sup_mu sum_nu |k|
  double near_row = 0.0, near_col = 0.0, far_row = 0.0, far_col = 0.0;

  double bound() const { return std::max(s_row, s_col); }
};

/// k[nu, mu] = exp(-(h_nu - h_mu)/2) 2^nu scale norms[nu, mu] w_mu.
SchurKernel schur_kernel(const Eigen::MatrixXd& norms, std::span<const double> h, const SchurOptions& opts = {});

struct FarSlope {
  int order = 0;
  double slope = 0.0;
  /// max over far entries of norm * 2^(order * max(nu, mu)).
  double C = 0.0;
  bool passes = false;
};

struct Lemma2Report {
  double C_near = 0.0;
  /// Fitted log2(norm) vs max(nu, mu) over far entries above the floor.
  double far_slope = 0.0;
  double far_intercept = 0.0;
  double fit_residual = 0.0;
  int fit_min = 0, fit_max = 0;
  std::size_t far_points = 0;
  std::size_t far_entries = 0;
  bool exact_zero_regime = false;
  bool partial = false;
  std::vector<FarSlope> slopes;
  double floor = 1e-14;
};

Lemma2Report verify_lemma2(const Eigen::MatrixXd& norms, double floor = 1e-14, std::vector<int> orders = {2, 4});

}  // namespace lpe::commutator
