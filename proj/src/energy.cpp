#include "lpe/energy.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "lpe/errors.hpp"
#include "lpe/simd/kernels.hpp"

namespace lpe::energy {

namespace {

using boost::math::quadrature::gauss_kronrod;

// Absolute tolerance by bisection. A piece is also accepted once the error estimate
// reaches the roundoff level of the integrand, which does not shrink with the width.
template <class F>
double integrate_to(F&& f, double a, double b, double tol, int depth) {
  double err = 0.0, l1 = 0.0;
  double v = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err, &l1);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1 / (b - a);
  if (err <= tol || err <= floor) return v;
  if (depth >= 48) throw NumericalError("weight quadrature did not reach the requested tolerance");
  const double m = 0.5 * (a + b);
  return integrate_to(f, a, m, 0.5 * tol, depth + 1) + integrate_to(f, m, b, 0.5 * tol, depth + 1);
}

template <class F>
double integrate(F&& f, double t0, double t1, double tol) {
  if (t1 <= t0) return 0.0;
  return integrate_to(f, t0, t1, tol, 0);
}

double alpha_pos(const CoefficientSet& cs, double s) { return std::max(cs.alpha(s), 0.0); }

}  // namespace

double epsilon_nu(int k, int nu) {
  if (k < 1 || nu < 0) throw ConfigurationError("epsilon_nu needs k >= 1 and nu >= 0");
  return std::exp2(-static_cast<double>(nu) * 2.0 * k / (2.0 + k));
}

WeightTerms weight_terms(int nu, double t0, double t1, const CoefficientSet& cs, double tol) {
  const double eps = epsilon_nu(cs.k, nu);
  const double two_nu = std::ldexp(1.0, nu);
  const double g = cs.gamma;
  WeightTerms w;
  w.regularization = integrate([&](double s) { return eps * two_nu / std::sqrt(alpha_pos(cs, s) + eps); }, t0, t1, tol);
  w.alpha_ratio = integrate([&](double s) { return std::abs(cs.alpha_prime(s)) / (alpha_pos(cs, s) + eps); }, t0, t1, tol);
  w.levi = integrate([&](double s) { return std::pow(alpha_pos(cs, s) + eps, g - 0.5); }, t0, t1, tol);
  w.constant = t1 - t0;
  return w;
}

double weight_h(int nu, double t, const CoefficientSet& cs, double C_tilde, double tol) {
  return C_tilde * weight_terms(nu, t, cs, tol).sum();
}

std::vector<double> weight_h_series(int nu, std::span<const double> times, const CoefficientSet& cs, double C_tilde,
                                    double tol) {
  std::vector<double> out(times.size(), 0.0);
  if (times.empty()) return out;
  const double eps = epsilon_nu(cs.k, nu);
  const double two_nu = std::ldexp(1.0, nu);
  const double g = cs.gamma;
  auto integrand = [&](double s) {
    double ae = alpha_pos(cs, s) + eps;
    return eps * two_nu / std::sqrt(ae) + std::abs(cs.alpha_prime(s)) / ae + std::pow(ae, g - 0.5) + 1.0;
  };
  double acc = times[0] > 0.0 ? integrate(integrand, 0.0, times[0], tol) : 0.0;
  out[0] = C_tilde * acc;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1]) throw ConfigurationError("weight_h_series: times must be non-decreasing");
    // Each interval gets its share of the tolerance.
    const double share = tol * (times[i] - times[i - 1]) / std::max(times.back() - times.front(), 1e-300);
    acc += integrate(integrand, times[i - 1], times[i], share);
    out[i] = C_tilde * acc;
  }
  return out;
}

Constants pointwise_constants(const CoefficientSet& cs, const CheckGrid& grid) {
  Constants c;
  c.lambda_eff = std::min(cs.lambda0, 1.0);
  for (double t : grid.t)
    for (double x : grid.x) {
      c.sup_beta_t = std::max(c.sup_beta_t, std::abs(cs.beta_t(t, x)));
      c.sup_c = std::max(c.sup_c, std::abs(cs.c(t, x)));
      double a = cs.a(t, x);
      double b = std::abs(cs.b(t, x));
      if (a > 0.0) {
        double denom = cs.gamma == 0.0 ? 1.0 : std::pow(a, cs.gamma);
        c.levi_ratio = std::max(c.levi_ratio, b / denom);
      } else if (cs.gamma == 0.0) {
        c.levi_ratio = std::max(c.levi_ratio, b);
      }
    }
  const double lam = c.lambda_eff;
  c.C1 = 2.0 / lam;
  c.C2_alpha = cs.Lambda0 / lam;
  c.C2_beta = c.sup_beta_t / lam;
  c.C2 = c.C2_alpha + c.C2_beta;
  c.C3 = c.levi_ratio * std::pow(cs.Lambda0, cs.gamma) / lam;
  c.C4 = 2.0 * c.sup_c / lam;
  // C2_beta and C4 multiply the same "+1" term of the weight.
  c.C_tilde = std::max({c.C1, c.C2_alpha, c.C3, c.C2_beta + c.C4});
  c.C_A = 4.0 / std::sqrt(lam);
  c.C_B = 2.0 / std::sqrt(lam);
  return c;
}

Constants calibrate_constants(const CoefficientSet& cs, const CutoffFamily& fam,
                              std::span<const commutator::CommutatorScan> scans, const CheckGrid& grid) {
  Constants c = pointwise_constants(cs, grid);
  const int nm = fam.nu_max();
  double worst = 0.0;
  for (const auto& s : scans) {
    if (s.nu_max != nm) throw DimensionError("calibrate_constants: scan nu_max differs from the cutoff family");
    std::vector<double> h(static_cast<std::size_t>(nm + 1)), w(h.size());
    const double alpha = std::max(cs.alpha(s.t), 0.0);
    for (int nu = 0; nu <= nm; ++nu) {
      h[static_cast<std::size_t>(nu)] = weight_h(nu, s.t, cs, c.C_tilde);
      w[static_cast<std::size_t>(nu)] = 1.0 / std::sqrt(alpha + epsilon_nu(cs.k, nu));
    }
    commutator::SchurOptions a_opts{alpha, true, w};
    commutator::SchurOptions b_opts{1.0, false, w};
    double sa = commutator::schur_kernel(s.norms_beta, h, a_opts).bound();
    double sb = commutator::schur_kernel(s.norms_b, h, b_opts).bound();
    c.sample_times.push_back(s.t);
    c.S_A.push_back(sa);
    c.S_B.push_back(sb);
    worst = std::max(worst, c.C_A * sa + c.C_B * sb);
  }
  // +1 absorbs the source term 2 Re <(Lu)_nu, d_t u_nu> <= |(Lu)_nu|^2 + E_nu.
  c.C_schur = worst + 1.0;
  c.sigma = c.C_schur;
  return c;
}

Constants calibrate_constants(const CoefficientSet& cs, const CutoffFamily& fam, commutator::NormMethod method) {
  std::vector<commutator::CommutatorScan> scans;
  for (double f : {0.25, 0.5, 0.75, 1.0}) scans.push_back(commutator::scan(cs, f * cs.T, fam, method));
  return calibrate_constants(cs, fam, scans, make_check_grid(cs.T, fam.n_points(), 513, fam.period()));
}

std::vector<std::pair<std::string, std::string>> constant_formulas() {
  return {
      {"lambda_eff", "min(lambda0, 1)"},
      {"C1", "2 / lambda_eff"},
      {"C2_alpha", "Lambda0 / lambda_eff"},
      {"C2_beta", "sup |d_t beta| / lambda_eff"},
      {"C2", "C2_alpha + C2_beta"},
      {"C3", "sup_{a>0} |b| / a^gamma * Lambda0^gamma / lambda_eff"},
      {"C4", "2 sup |c| / lambda_eff"},
      {"C_tilde", "max(C1, C2_alpha, C3, C2_beta + C4)"},
      {"C_A", "4 / sqrt(lambda_eff)"},
      {"C_B", "2 / sqrt(lambda_eff)"},
      {"S_A(t)", "max row/col sum of exp(-(h_nu - h_mu)/2) 2^nu alpha(t) |[phi_nu, beta] psi_mu| (alpha + eps_mu)^(-1/2)"},
      {"S_B(t)", "max row/col sum of exp(-(h_nu - h_mu)/2) |[phi_nu, b] psi_mu| (alpha + eps_mu)^(-1/2)"},
      {"C_schur", "max over t in {T/4, T/2, 3T/4, T} of (C_A S_A + C_B S_B) + 1"},
      {"sigma", "C_schur"},
  };
}

std::vector<double> block_energies(const GridFunction& u, const GridFunction& ut, double t, const CoefficientSet& cs,
                                   const CutoffFamily& fam) {
  require_same_grid(u, ut, "block_energies");
  if (!fam.matches(u)) throw DimensionError("block_energies: cutoff family built for another grid");
  const std::size_t n = u.size();
  Spectrum u_hat = forward(u).differentiated();
  Spectrum v_hat = forward(ut);
  std::vector<double> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = cs.a(t, u.x(j));
  std::vector<double> out(static_cast<std::size_t>(fam.nu_max() + 1));
  std::vector<double> weight(n);
  for (int nu = 0; nu <= fam.nu_max(); ++nu) {
    const double eps = epsilon_nu(cs.k, nu);
    for (std::size_t j = 0; j < n; ++j) weight[j] = a[j] + eps;
    GridFunction dux = inverse(u_hat.multiplied(fam.phi(nu)));
    double kinetic = v_hat.multiplied(fam.phi(nu)).norm2();
    double potential = u.dx() * simd::dot_re(weight, dux.values(), dux.values());
    out[static_cast<std::size_t>(nu)] = kinetic + potential;
  }
  return out;
}

double micro_energy(const Trajectory& traj, std::size_t i, int nu, const CutoffFamily& fam, const CoefficientSet& cs) {
  if (i >= traj.size()) throw DimensionError("micro_energy: time index out of range");
  if (nu < 0 || nu > fam.nu_max()) throw ConfigurationError("micro_energy: block index outside [0, nu_max]");
  return block_energies(traj.u[i], traj.ut[i], traj.times[i], cs, fam)[static_cast<std::size_t>(nu)];
}

double total_energy(std::span<const double> E, std::span<const double> h, double sigma, double t) {
  if (E.size() != h.size()) throw DimensionError("total_energy: E and h lengths differ");
  double s = 0.0;
  for (std::size_t nu = 0; nu < E.size(); ++nu) s += std::exp(-h[nu] - 2.0 * sigma * t) * E[nu];
  return s;
}

double EnergyLedger::weight(std::size_t i, int nu) const {
  return std::exp(-h[i][static_cast<std::size_t>(nu)] - 2.0 * constants.sigma * times[i]);
}

EnergyLedger build_ledger(const Trajectory& traj, const CutoffFamily& fam, const Constants& constants) {
  if (!traj.coeffs) throw ConfigurationError("build_ledger: trajectory carries no coefficients");
  if (traj.size() < 3) throw DimensionError("build_ledger: need at least three saved states");
  const CoefficientSet& cs = *traj.coeffs;
  const int nm = fam.nu_max();
  const std::size_t nt = traj.size();
  EnergyLedger L;
  L.nu_max = nm;
  L.constants = constants;
  L.times = traj.times;
  for (int nu = 0; nu <= nm; ++nu) L.epsilon.push_back(epsilon_nu(cs.k, nu));

  L.h.assign(nt, std::vector<double>(static_cast<std::size_t>(nm + 1)));
  for (int nu = 0; nu <= nm; ++nu) {
    auto series = weight_h_series(nu, traj.times, cs, constants.C_tilde);
    for (std::size_t i = 0; i < nt; ++i) L.h[i][static_cast<std::size_t>(nu)] = series[i];
  }

  auto Lu = apply_L_along(traj);
  L.E.resize(nt);
  L.Etot.resize(nt);
  L.rhs.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    L.E[i] = block_energies(traj.u[i], traj.ut[i], traj.times[i], cs, fam);
    L.Etot[i] = total_energy(L.E[i], L.h[i], constants.sigma, traj.times[i]);
    auto f2 = dyadic::block_norms2(forward(Lu[i]), fam);
    double r = 0.0;
    for (int nu = 0; nu <= nm; ++nu) r += L.weight(i, nu) * f2[static_cast<std::size_t>(nu)];
    L.rhs[i] = r;
  }
  L.rhs_integral.assign(nt, 0.0);
  for (std::size_t i = 1; i < nt; ++i)
    L.rhs_integral[i] = L.rhs_integral[i - 1] + 0.5 * (L.times[i] - L.times[i - 1]) * (L.rhs[i] + L.rhs[i - 1]);

  double norm = L.Etot[0];
  if (!(norm > 0.0)) norm = std::max(L.rhs_integral.back(), 0.0);
  L.violation.assign(nt, 0.0);
  for (std::size_t i = 1; i < nt; ++i) {
    double excess = L.Etot[i] - L.Etot[0] - L.rhs_integral[i];
    L.violation[i] = norm > 0.0 ? excess / norm : excess;
  }
  for (double v : L.Etot)
    if (!std::isfinite(v)) throw NumericalError("non-finite total energy");
  return L;
}

double goal_budget(double dt) { return 1e4 * dt * dt; }

GoalReport verify_goal_inequality(const EnergyLedger& ledger, double budget) {
  GoalReport g;
  g.budget = budget;
  g.normalization = ledger.Etot.empty() ? 0.0 : ledger.Etot[0];
  g.violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ledger.violation.size(); ++i)
    if (ledger.violation[i] > g.violation) {
      g.violation = ledger.violation[i];
      g.worst_index = i;
    }
  if (ledger.violation.size() < 2) g.violation = 0.0;
  g.within_budget = g.violation <= budget;
  return g;
}

RunNorms run_norms(const Trajectory& traj, const CutoffFamily& fam, double frequency) {
  RunNorms r;
  r.frequency = frequency;
  r.times = traj.times;
  auto Lu = apply_L_along(traj);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    r.u2.push_back(dyadic::block_norms2(forward(traj.u[i]), fam));
    r.ut2.push_back(dyadic::block_norms2(forward(traj.ut[i]), fam));
    r.Lu2.push_back(dyadic::block_norms2(forward(Lu[i]), fam));
  }
  return r;
}

namespace {
double sob(const std::vector<double>& b2, double s) {
  double acc = 0.0;
  for (std::size_t nu = 0; nu < b2.size(); ++nu) acc += b2[nu] * std::exp2(2.0 * s * static_cast<double>(nu));
  return std::sqrt(acc);
}
}  // namespace

double estimate_lhs(const RunNorms& r, double m, double delta) {
  double sup = 0.0;
  for (std::size_t i = 0; i < r.times.size(); ++i)
    sup = std::max(sup, sob(r.u2[i], m + 1.0 - delta) + sob(r.ut2[i], m - delta));
  return sup;
}

double estimate_rhs(const RunNorms& r, double m) {
  if (r.times.empty()) return 0.0;
  double v = sob(r.u2[0], m + 1.0) + sob(r.ut2[0], m);
  for (std::size_t i = 1; i < r.times.size(); ++i)
    v += 0.5 * (r.times[i] - r.times[i - 1]) * (sob(r.Lu2[i], m) + sob(r.Lu2[i - 1], m));
  return v;
}

LossEstimate verify_energy_estimate(std::span<const RunNorms> runs, double m, std::span<const double> deltas,
                                    double growth_tolerance) {
  LossEstimate est;
  est.m = m;
  est.growth_tolerance = growth_tolerance;
  est.deltas.assign(deltas.begin(), deltas.end());
  std::sort(est.deltas.begin(), est.deltas.end());
  std::vector<double> rhs;
  for (const auto& r : runs) rhs.push_back(estimate_rhs(r, m));
  bool labeled = std::any_of(runs.begin(), runs.end(), [](const RunNorms& r) { return r.frequency != 0.0; });
  std::vector<double> labels;
  for (std::size_t j = 0; j < runs.size(); ++j) labels.push_back(labeled ? runs[j].frequency : static_cast<double>(j));
  std::vector<double> uniq = labels;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<std::size_t> group;
  for (double l : labels) group.push_back(static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), l) - uniq.begin()));
  const std::size_t top_group = uniq.empty() ? 0 : uniq.size() - 1;
  for (double d : est.deltas) {
    std::vector<double> row;
    for (std::size_t j = 0; j < runs.size(); ++j) {
      double lhs = estimate_lhs(runs[j], m, d);
      row.push_back(rhs[j] > 0.0 ? lhs / rhs[j] : 0.0);
    }
    double worst = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
    double top = 0.0, others = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      double& slot = group[j] == top_group ? top : others;
      slot = std::max(slot, row[j]);
    }
    double growth = 1.0;
    if (top_group > 0) growth = others > 0.0 ? top / others : (top > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    est.ratios.push_back(std::move(row));
    est.worst.push_back(worst);
    est.tail_growth.push_back(growth);
    if (!est.delta_star && std::isfinite(worst) && growth <= 1.0 + growth_tolerance) {
      est.delta_star = d;
      est.C_m = worst;
    }
  }
  return est;
}

LossEstimate verify_energy_estimate(std::span<const Trajectory> runs, std::span<const double> frequencies,
                                    const CutoffFamily& fam, double m, std::span<const double> deltas,
                                    double growth_tolerance) {
  if (!frequencies.empty() && frequencies.size() != runs.size())
    throw DimensionError("verify_energy_estimate: one frequency label per run");
  std::vector<RunNorms> norms;
  for (std::size_t j = 0; j < runs.size(); ++j)
    norms.push_back(run_norms(runs[j], fam, frequencies.empty() ? 0.0 : frequencies[j]));
  return verify_energy_estimate(norms, m, deltas, growth_tolerance);
}

}  // namespace lpe::energy
