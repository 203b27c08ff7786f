#pragma once

// Microlocalized energies E_nu(t) = ||d_t u_nu||^2 + <(a + eps_nu) d_x u_nu, d_x u_nu>,
// the weight h(nu, t), the total energy
//   Etot(t) = sum_nu exp(-h(nu, t) - 2 sigma t) E_nu(t),
// the constants feeding them, and the two numerical verifications built on top:
// the integrated energy inequality and the loss-of-derivatives estimate.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpe/coefficients.hpp"
#include "lpe/commutator.hpp"
#include "lpe/dyadic.hpp"
#include "lpe/solver.hpp"

namespace lpe::energy {

using dyadic::CutoffFamily;

/// 2^(-nu 2k / (2 + k)).
double epsilon_nu(int k, int nu);

/// The four integrals making up h(nu, t) / C_tilde:
///   int_0^t eps 2^nu / (alpha + eps)^(1/2),  int_0^t |alpha'| / (alpha + eps),
///   int_0^t (alpha + eps)^(gamma - 1/2),     t.
struct WeightTerms {
  double regularization = 0.0;
  double alpha_ratio = 0.0;
  double levi = 0.0;
  double constant = 0.0;
  double sum() const { return regularization + alpha_ratio + levi + constant; }
};

/// Integrals over [t0, t1]; adaptive Gauss-Kronrod with absolute tolerance `tol`.
WeightTerms weight_terms(int nu, double t0, double t1, const CoefficientSet& cs, double tol = 1e-10);
inline WeightTerms weight_terms(int nu, double t, const CoefficientSet& cs, double tol = 1e-10) {
  return weight_terms(nu, 0.0, t, cs, tol);
}

double weight_h(int nu, double t, const CoefficientSet& cs, double C_tilde, double tol = 1e-10);

/// h(nu, t_i) on an increasing time grid, accumulated interval by interval, each to `tol`.
std::vector<double> weight_h_series(int nu, std::span<const double> times, const CoefficientSet& cs, double C_tilde,
                                    double tol = 1e-10);

struct Constants {
  double lambda_eff = 0.0;  // min(lambda0, 1)
  double C1 = 0.0;
  double C2_alpha = 0.0;
  double C2_beta = 0.0;
  double C2 = 0.0;  // C2_alpha + C2_beta
  double C3 = 0.0;
  double C4 = 0.0;
  double C_tilde = 0.0;
  double C_A = 0.0;
  double C_B = 0.0;
  double C_schur = 0.0;
  double sigma = 0.0;

  // Inputs measured on the check grid.
  double sup_beta_t = 0.0;
  double sup_c = 0.0;
  double levi_ratio = 0.0;  // sup |b| / a^gamma over a > 0

  std::vector<double> sample_times;
  std::vector<double> S_A;
  std::vector<double> S_B;
};

/// Sup-norm constants only (C1..C4, C_tilde); Schur fields left at zero.
Constants pointwise_constants(const CoefficientSet& cs, const CheckGrid& grid);

/// Full calibration from commutator scans at the sample times.
Constants calibrate_constants(const CoefficientSet& cs, const CutoffFamily& fam,
                              std::span<const commutator::CommutatorScan> scans, const CheckGrid& grid);

/// Scans at T/4, T/2, 3T/4, T and calibrates.
Constants calibrate_constants(const CoefficientSet& cs, const CutoffFamily& fam,
                              commutator::NormMethod method = commutator::NormMethod::automatic);

/// Formula text for every constant, as stored next to the numbers.
std::vector<std::pair<std::string, std::string>> constant_formulas();

/// E_nu for every block of the state (u, ut) at time t.
std::vector<double> block_energies(const GridFunction& u, const GridFunction& ut, double t, const CoefficientSet& cs,
                                   const CutoffFamily& fam);

double micro_energy(const Trajectory& traj, std::size_t i, int nu, const CutoffFamily& fam, const CoefficientSet& cs);

double total_energy(std::span<const double> E, std::span<const double> h, double sigma, double t);

struct EnergyLedger {
  int nu_max = 0;
  std::vector<double> epsilon;
  std::vector<double> times;
  std::vector<std::vector<double>> E;  // [i][nu]
  std::vector<std::vector<double>> h;  // [i][nu]
  std::vector<double> Etot;
  /// sum_nu exp(-h - 2 sigma t) ||(L u)_nu||^2 and its running integral.
  std::vector<double> rhs;
  std::vector<double> rhs_integral;
  std::vector<double> violation;
  Constants constants;
  double m = 0.0;
  std::optional<double> delta_star;

  double weight(std::size_t i, int nu) const;
};

EnergyLedger build_ledger(const Trajectory& traj, const CutoffFamily& fam, const Constants& constants);

/// Discretization allowance for the integrated inequality at saved spacing dt.
double goal_budget(double dt);

struct GoalReport {
  /// max_{i >= 1} (Etot(t_i) - Etot(0) - int_0^t_i RHS) / Etot(0).
  double violation = 0.0;
  double budget = 0.0;
  std::size_t worst_index = 0;
  double normalization = 0.0;
  bool within_budget = true;
};

GoalReport verify_goal_inequality(const EnergyLedger& ledger, double budget);
inline GoalReport verify_goal_inequality(const EnergyLedger& ledger, const Trajectory& traj) {
  return verify_goal_inequality(ledger, goal_budget(traj.dt));
}

/// Per-time block norms of a run, enough to evaluate every Sobolev norm in the estimate.
struct RunNorms {
  /// Data frequency label; runs sharing a label form one group of the family.
  double frequency = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> u2, ut2, Lu2;  // [i][nu] block norms squared
};

RunNorms run_norms(const Trajectory& traj, const CutoffFamily& fam, double frequency = 0.0);

/// sup_t (|u|_{m+1-delta} + |u_t|_{m-delta}) and |u(0)|_{m+1} + |u_t(0)|_m + int |Lu|_m.
double estimate_lhs(const RunNorms& r, double m, double delta);
double estimate_rhs(const RunNorms& r, double m);

struct LossEstimate {
  double m = 0.0;
  std::vector<double> deltas;
  std::vector<std::vector<double>> ratios;  // [delta][run]
  std::vector<double> worst;                // max over runs
  std::vector<double> tail_growth;          // top-frequency group / max of the lower groups
  std::optional<double> delta_star;
  double C_m = 0.0;
  double growth_tolerance = 0.1;

  bool observed() const { return delta_star.has_value(); }
};

/// delta is admissible when the worst ratio among the highest-frequency runs exceeds
/// the worst ratio of all lower-frequency runs by at most the growth tolerance.
/// Unlabeled runs (frequency 0) are taken in order, one group each.
LossEstimate verify_energy_estimate(std::span<const RunNorms> runs, double m, std::span<const double> deltas,
                                    double growth_tolerance = 0.1);
LossEstimate verify_energy_estimate(std::span<const Trajectory> runs, std::span<const double> frequencies,
                                    const CutoffFamily& fam, double m, std::span<const double> deltas,
                                    double growth_tolerance = 0.1);

}  // namespace lpe::energy
