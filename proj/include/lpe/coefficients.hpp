#pragma once

// Coefficients of L = d_t^2 - d_x(a d_x) + b d_x + c with a(t,x) = alpha(t) beta(t,x),
// and checkers for the hypotheses on them: weak hyperbolicity, finite order of
// degeneration, the Levi bound |b| <= C0 a^gamma, the order condition
// gamma + 1/k >= 1/2, and two-sided ellipticity of beta.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lpe/grid.hpp"

namespace lpe {

struct CoefficientSet {
  using TimeFn = std::function<double(double)>;
  using SpaceTimeFn = std::function<double(double, double)>;
  /// (order, t) -> d_t^order alpha(t)
  using TimeDerivFn = std::function<double(int, double)>;
  /// (order, t, x) -> d_t^order beta(t, x)
  using SpaceTimeDerivFn = std::function<double(int, double, double)>;

  std::string family;
  int k = 1;
  double gamma = 0.0;
  double C0 = 1.0;
  double lambda0 = 0.5;
  double Lambda0 = 1.5;
  double T = 1.0;

  TimeFn alpha;
  TimeFn alpha_prime;
  SpaceTimeFn beta;
  SpaceTimeFn beta_t;
  SpaceTimeFn b;
  SpaceTimeFn c;

  /// Closed-form time derivatives. When absent the degeneration checker falls
  /// back to finite differences.
  TimeDerivFn alpha_derivative;
  SpaceTimeDerivFn beta_derivative;

  double a(double t, double x) const { return alpha(t) * beta(t, x); }
  bool has_analytic_derivatives() const { return alpha_derivative && beta_derivative; }
};

/// Highest time-derivative order the degeneration checker accepts.
inline constexpr int kMaxDerivativeOrder = 16;

/// Built-in families: "monomial" (alpha = t^k), "interior_zero" (alpha = (t - T/2)^k, k even),
/// "nondegenerate" (alpha = 1) and "flat" (alpha = exp(-1/t), a zero of infinite order).
/// All share beta = 1 + sin(x) sin(t)/2, b = C0 a^gamma, c = cos(x), lambda0 = 1/2, Lambda0 = 3/2.
CoefficientSet builtin_family(std::string_view name, int k, double gamma, double C0 = 1.0, double T = 1.0);

std::vector<std::string> builtin_family_names();

enum class ConditionId { weak_hyperbolicity, finite_degeneration, levi, order, ellipticity };

std::string_view condition_name(ConditionId id);

struct Witness {
  double t = 0.0;
  double x = 0.0;
  double value = 0.0;
};

struct ConditionReport {
  ConditionId condition_id = ConditionId::weak_hyperbolicity;
  bool verdict = false;
  /// Tightest or violating point. Always set when the verdict is false.
  std::optional<Witness> witness;
  double margin = 0.0;
  /// Free-form remark, e.g. when the a = 0 convention of the Levi check was exercised.
  std::string note;
};

/// Tensor grid of sample points for the scans.
struct CheckGrid {
  std::vector<double> t;
  std::vector<double> x;
};

/// n_t >= 512 uniform times on [0, T] and the N-point spatial grid of [0, period).
CheckGrid make_check_grid(double T, std::size_t n_space, std::size_t n_time = 513, double period = kTwoPi);

ConditionReport check_weak_hyperbolicity(const CoefficientSet& cs, const CheckGrid& grid);
ConditionReport check_finite_degeneration(const CoefficientSet& cs, const CheckGrid& grid);
ConditionReport check_levi(const CoefficientSet& cs, const CheckGrid& grid);
ConditionReport check_order_condition(int k, double gamma);
ConditionReport check_ellipticity(const CoefficientSet& cs, const CheckGrid& grid);

/// The five checks in the order above.
std::vector<ConditionReport> check_all(const CoefficientSet& cs, const CheckGrid& grid);

/// sum_{j=0}^{k} |d_t^j a(t,x)|, from closed forms or finite differences.
/// `error_bound` receives the estimated differencing error (0 for closed forms).
double degeneration_sum(const CoefficientSet& cs, double t, double x, double* error_bound = nullptr);

}  // namespace lpe
