#include "lpe/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lpe/errors.hpp"

namespace lpe {
namespace {

double falling_factorial(int k, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= static_cast<double>(k - i);
  return r;
}

double binomial(int n, int r) {
  double out = 1.0;
  for (int i = 1; i <= r; ++i) out = out * static_cast<double>(n - r + i) / static_cast<double>(i);
  return out;
}

double sinusoidal_beta_derivative(int order, double t, double x) {
  if (order == 0) return 1.0 + 0.5 * std::sin(x) * std::sin(t);
  return 0.5 * std::sin(x) * std::sin(t + 0.5 * std::numbers::pi * order);
}

// d^j/dt^j exp(-1/t) = p_j(1/t) exp(-1/t), p_0 = 1, p_{j+1}(s) = s^2 (p_j(s) - p_j'(s)).
double flat_derivative(int order, double t) {
  if (t <= 0.0) return 0.0;
  std::vector<double> p{1.0};
  for (int j = 0; j < order; ++j) {
    std::vector<double> next(p.size() + 2, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) next[i + 2] += p[i];
    for (std::size_t i = 1; i < p.size(); ++i) next[i + 1] -= static_cast<double>(i) * p[i];
    p = std::move(next);
  }
  const double s = 1.0 / t;
  double poly = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) poly = poly * s + p[i];
  return poly * std::exp(-s);
}

}  // namespace

std::vector<std::string> builtin_family_names() { return {"monomial", "interior_zero", "nondegenerate", "flat"}; }

CoefficientSet builtin_family(std::string_view name, int k, double gamma, double C0, double T) {
  if (k < 1) throw ConfigurationError("degeneration order k must be >= 1");
  if (!(gamma >= 0.0)) throw ConfigurationError("gamma must be >= 0");
  if (!(C0 > 0.0)) throw ConfigurationError("C0 must be positive");
  if (!(T > 0.0)) throw ConfigurationError("T must be positive");

  CoefficientSet cs;
  cs.family = std::string(name);
  cs.k = k;
  cs.gamma = gamma;
  cs.C0 = C0;
  cs.lambda0 = 0.5;
  cs.Lambda0 = 1.5;
  cs.T = T;

  if (name == "monomial" || name == "interior_zero") {
    const double shift = (name == "interior_zero") ? 0.5 * T : 0.0;
    if (name == "interior_zero" && k % 2 != 0) throw ConfigurationError("interior_zero requires even k");
    cs.alpha_derivative = [k, shift](int j, double t) {
      if (j > k) return 0.0;
      return falling_factorial(k, j) * std::pow(t - shift, k - j);
    };
  } else if (name == "nondegenerate") {
    cs.alpha_derivative = [](int j, double) { return j == 0 ? 1.0 : 0.0; };
  } else if (name == "flat") {
    cs.alpha_derivative = flat_derivative;
  } else {
    throw ConfigurationError("unknown coefficient family '" + std::string(name) + "'");
  }

  const auto ad = cs.alpha_derivative;
  cs.alpha = [ad](double t) { return ad(0, t); };
  cs.alpha_prime = [ad](double t) { return ad(1, t); };
  cs.beta_derivative = sinusoidal_beta_derivative;
  cs.beta = [](double t, double x) { return sinusoidal_beta_derivative(0, t, x); };
  cs.beta_t = [](double t, double x) { return sinusoidal_beta_derivative(1, t, x); };
  cs.b = [ad, gamma, C0](double t, double x) {
    const double a = ad(0, t) * sinusoidal_beta_derivative(0, t, x);
    return C0 * std::pow(std::max(a, 0.0), gamma);
  };
  cs.c = [](double, double x) { return std::cos(x); };
  return cs;
}

std::string_view condition_name(ConditionId id) {
  switch (id) {
    case ConditionId::weak_hyperbolicity: return "weak_hyperbolicity";
    case ConditionId::finite_degeneration: return "finite_degeneration";
    case ConditionId::levi: return "levi";
    case ConditionId::order: return "order";
    case ConditionId::ellipticity: return "ellipticity";
  }
  return "unknown";
}

CheckGrid make_check_grid(double T, std::size_t n_space, std::size_t n_time, double period) {
  if (n_time < 2) throw ConfigurationError("check grid needs at least two time samples");
  CheckGrid g;
  g.t.resize(n_time);
  for (std::size_t i = 0; i < n_time; ++i) g.t[i] = T * static_cast<double>(i) / static_cast<double>(n_time - 1);
  g.x.resize(n_space);
  for (std::size_t j = 0; j < n_space; ++j) g.x[j] = period * static_cast<double>(j) / static_cast<double>(n_space);
  return g;
}

ConditionReport check_weak_hyperbolicity(const CoefficientSet& cs, const CheckGrid& grid) {
  Witness w{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (double t : grid.t)
    for (double x : grid.x) {
      const double a = cs.a(t, x);
      if (a < w.value) w = {t, x, a};
    }
  ConditionReport r;
  r.condition_id = ConditionId::weak_hyperbolicity;
  r.verdict = w.value >= -1e-12;
  r.margin = w.value;
  r.witness = w;
  return r;
}

double degeneration_sum(const CoefficientSet& cs, double t, double x, double* error_bound) {
  if (cs.k > kMaxDerivativeOrder)
    throw ConfigurationError("degeneration order exceeds the supported differentiation order");
  double sum = 0.0;
  if (cs.has_analytic_derivatives()) {
    std::vector<double> da(static_cast<std::size_t>(cs.k) + 1), db(static_cast<std::size_t>(cs.k) + 1);
    for (int j = 0; j <= cs.k; ++j) {
      da[j] = cs.alpha_derivative(j, t);
      db[j] = cs.beta_derivative(j, t, x);
    }
    for (int j = 0; j <= cs.k; ++j) {
      double dj = 0.0;
      for (int i = 0; i <= j; ++i) dj += binomial(j, i) * da[i] * db[j - i];
      sum += std::abs(dj);
    }
    if (error_bound != nullptr) *error_bound = 0.0;
    return sum;
  }

  // Central differences of order j with O(h^2) error, Richardson-estimated.
  const auto central = [&](int j, double h) {
    double acc = 0.0;
    for (int i = 0; i <= j; ++i) {
      const double s = (0.5 * j - i) * h;
      acc += ((i % 2 == 0) ? 1.0 : -1.0) * binomial(j, i) * cs.a(t + s, x);
    }
    return acc / std::pow(h, j);
  };
  const double h = 0.1;
  double err = 0.0;
  for (int j = 0; j <= cs.k; ++j) {
    const double coarse = central(j, h);
    const double fine = central(j, 0.5 * h);
    sum += std::abs(fine);
    err += std::abs(fine - coarse) / 3.0;
  }
  if (error_bound != nullptr) *error_bound = err;
  return sum;
}

ConditionReport check_finite_degeneration(const CoefficientSet& cs, const CheckGrid& grid) {
  if (cs.k > kMaxDerivativeOrder)
    throw ConfigurationError("degeneration order exceeds the supported differentiation order");
  Witness w{0.0, 0.0, std::numeric_limits<double>::infinity()};
  double worst_err = 0.0;
  for (double t : grid.t)
    for (double x : grid.x) {
      double err = 0.0;
      const double s = degeneration_sum(cs, t, x, &err);
      worst_err = std::max(worst_err, err);
      if (s < w.value) w = {t, x, s};
    }
  const double threshold = std::max(1e-12, 10.0 * worst_err);
  ConditionReport r;
  r.condition_id = ConditionId::finite_degeneration;
  r.verdict = w.value >= threshold;
  r.margin = w.value - threshold;
  r.witness = w;
  if (!cs.has_analytic_derivatives())
    r.note = "finite differences, error bound " + std::to_string(worst_err);
  return r;
}

ConditionReport check_levi(const CoefficientSet& cs, const CheckGrid& grid) {
  Witness w{0.0, 0.0, -1.0};
  bool degenerate_points = false;
  for (double t : grid.t)
    for (double x : grid.x) {
      const double bb = std::abs(cs.b(t, x));
      double ratio;
      if (cs.gamma == 0.0) {
        ratio = bb;
      } else {
        const double a = cs.a(t, x);
        if (a <= 0.0) {
          // Read the bound at a = 0 as the limit along the grid: b must vanish there.
          degenerate_points = true;
          ratio = (bb <= 1e-15) ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
          ratio = bb / std::pow(a, cs.gamma);
        }
      }
      if (ratio > w.value) w = {t, x, ratio};
    }
  ConditionReport r;
  r.condition_id = ConditionId::levi;
  r.verdict = w.value <= cs.C0 * (1.0 + 1e-9);
  r.margin = cs.C0 - w.value;
  r.witness = w;
  if (degenerate_points) r.note = "a = 0 points present; required |b| = 0 there";
  return r;
}

ConditionReport check_order_condition(int k, double gamma) {
  if (k < 1) throw ConfigurationError("order condition needs k >= 1");
  if (!(gamma >= 0.0)) throw ConfigurationError("order condition needs gamma >= 0");
  const double lhs = gamma + 1.0 / static_cast<double>(k);
  ConditionReport r;
  r.condition_id = ConditionId::order;
  r.margin = lhs - 0.5;
  r.verdict = r.margin >= -1e-12;
  r.witness = Witness{0.0, 0.0, lhs};
  return r;
}

ConditionReport check_ellipticity(const CoefficientSet& cs, const CheckGrid& grid) {
  Witness lo{0.0, 0.0, std::numeric_limits<double>::infinity()};
  Witness hi{0.0, 0.0, -std::numeric_limits<double>::infinity()};
  for (double t : grid.t)
    for (double x : grid.x) {
      const double v = cs.beta(t, x);
      if (v < lo.value) lo = {t, x, v};
      if (v > hi.value) hi = {t, x, v};
    }
  ConditionReport r;
  r.condition_id = ConditionId::ellipticity;
  const double m_lo = lo.value - cs.lambda0;
  const double m_hi = cs.Lambda0 - hi.value;
  r.verdict = cs.lambda0 > 0.0 && m_lo >= -1e-12 && m_hi >= -1e-12;
  r.margin = std::min(m_lo, m_hi);
  r.witness = (m_lo <= m_hi) ? lo : hi;
  return r;
}

std::vector<ConditionReport> check_all(const CoefficientSet& cs, const CheckGrid& grid) {
  return {check_weak_hyperbolicity(cs, grid), check_finite_degeneration(cs, grid), check_levi(cs, grid),
          check_order_condition(cs.k, cs.gamma), check_ellipticity(cs, grid)};
}

}  // namespace lpe
