#include <doctest.h>

#include <cmath>
#include <memory>

#include "lpe/errors.hpp"
#include "lpe/solver.hpp"

using namespace lpe;

TEST_CASE("apply_L agrees with a closed form") {
  auto cs = builtin_family("monomial", 2, 0.5, 1.0);
  const double t = 0.5;
  const std::size_t n = 64;
  auto u = GridFunction::sample(n, [](double x) { return std::sin(3 * x); });
  auto utt = GridFunction::sample(n, [](double x) { return std::cos(x); });
  auto Lu = apply_L(cs, u, utt, t);
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = u.x(j);
    const double al = t * t;
    const double be = 1 + 0.5 * std::sin(x) * std::sin(t);
    const double a = al * be, ax = al * 0.5 * std::cos(x) * std::sin(t);
    const double ux = 3 * std::cos(3 * x), uxx = -9 * std::sin(3 * x);
    const double b = std::sqrt(a);
    const double ref = std::cos(x) - (ax * ux + a * uxx) + b * ux + std::cos(x) * std::sin(3 * x);
    worst = std::max(worst, std::abs(Lu[j] - ref));
  }
  // b = sqrt(a) is smooth since a >= t^2/2 > 0 at t = 0.5
  CHECK(worst < 1e-10);
}

TEST_CASE("solver reproduces a manufactured solution") {
  auto cs = std::make_shared<const CoefficientSet>(builtin_family("monomial", 2, 0.0));
  auto field = mode_sum({Mode{1.0, 1.3, 0.2, 2.0, 0.1}, Mode{0.5, 2.0, 0.4, 5.0, 0.7}});
  const std::size_t n = 64;
  auto f = manufactured_rhs(cs, field, n);
  SolverOptions opts;
  opts.save_every = 5;
  const double dt = 1e-3;
  auto traj = solve_cauchy(cs, sample(field.u, 0.0, n), sample(field.ut, 0.0, n), f, 200, dt, opts);
  REQUIRE(traj.size() == 41);
  CHECK(traj.dt == doctest::Approx(5e-3));
  CHECK(traj.step_dt == doctest::Approx(1e-3));
  for (std::size_t i = 0; i < traj.size(); ++i) CHECK(traj.times[i] == doctest::Approx(i * 5e-3).epsilon(1e-12));
  auto err = traj.u.back() - sample(field.u, traj.times.back(), n);
  CHECK(err.max_abs() < 1e-9);
  auto L = apply_L_along(traj);
  auto fend = f(traj.times[20]);
  CHECK((L[20] - fend).max_abs() < 1e-3);
}

TEST_CASE("zero data stays zero") {
  auto cs = std::make_shared<const CoefficientSet>(builtin_family("monomial", 2, 0.0));
  GridFunction z(64);
  auto traj = solve_cauchy(cs, z, z, Source{}, 50, 1e-3);
  for (const auto& u : traj.u) CHECK(u.max_abs() == 0.0);
  for (const auto& v : traj.ut) CHECK(v.max_abs() == 0.0);
}

TEST_CASE("CFL violation is refused") {
  auto cs = std::make_shared<const CoefficientSet>(builtin_family("nondegenerate", 1, 0.0));
  auto u0 = GridFunction::sample(64, [](double x) { return std::cos(x); });
  const double lim = cfl_limit(*cs, 64);
  CHECK(lim > 0.0);
  CHECK_THROWS_AS(solve_cauchy(cs, u0, GridFunction(64), Source{}, 10, 2.0 * lim), NumericalError);
  CHECK_NOTHROW(solve_cauchy(cs, u0, GridFunction(64), Source{}, 10, 0.5 * lim));
}

TEST_CASE("hypothesis failures raise configuration errors unless forced") {
  auto cs = std::make_shared<const CoefficientSet>(builtin_family("monomial", 3, 0.0));
  auto u0 = GridFunction::sample(32, [](double x) { return std::cos(x); });
  CHECK_THROWS_AS(solve_cauchy(cs, u0, GridFunction(32), Source{}, 5, 1e-3), ConfigurationError);
  SolverOptions opts;
  opts.force = true;
  CHECK_NOTHROW(solve_cauchy(cs, u0, GridFunction(32), Source{}, 5, 1e-3, opts));
}

TEST_CASE("dealiased and plain products agree on resolved data") {
  auto cs = std::make_shared<const CoefficientSet>(builtin_family("monomial", 2, 0.0));
  auto u = GridFunction::sample(64, [](double x) { return std::cos(4 * x) + 0.3 * std::sin(7 * x); });
  SpatialOperator plain(cs, 64, kTwoPi, false), fine(cs, 64, kTwoPi, true);
  plain.set_time(0.7);
  fine.set_time(0.7);
  CHECK((plain.apply(u) - fine.apply(u)).max_abs() < 1e-11);
}

TEST_CASE("mismatched grids are rejected") {
  auto cs = std::make_shared<const CoefficientSet>(builtin_family("monomial", 2, 0.0));
  CHECK_THROWS(solve_cauchy(cs, GridFunction(32), GridFunction(64), Source{}, 5, 1e-3));
}
