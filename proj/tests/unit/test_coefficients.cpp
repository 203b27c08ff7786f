#include <doctest.h>

#include <cmath>

#include "lpe/coefficients.hpp"
#include "lpe/errors.hpp"

using namespace lpe;

namespace {
CheckGrid small_grid(double T = 1.0) { return make_check_grid(T, 64, 513); }
}  // namespace

TEST_CASE("builtin families satisfy their hypotheses") {
  auto g = small_grid();
  for (const auto& name : {"monomial", "nondegenerate", "interior_zero"}) {
    CAPTURE(name);
    auto cs = builtin_family(name, 2, 0.0);
    for (const auto& r : check_all(cs, g)) {
      CAPTURE(condition_name(r.condition_id));
      CHECK(r.verdict);
    }
  }
  CHECK_THROWS_AS(builtin_family("interior_zero", 3, 0.0), ConfigurationError);
  CHECK_THROWS_AS(builtin_family("nope", 2, 0.0), ConfigurationError);
  CHECK_THROWS_AS(builtin_family("monomial", 0, 0.0), ConfigurationError);
  CHECK(builtin_family_names().size() == 4);
}

TEST_CASE("Levi bound is sharp in C0") {
  auto g = small_grid();
  auto cs = builtin_family("monomial", 2, 0.25, 2.0);
  auto ok = check_levi(cs, g);
  CHECK(ok.verdict);
  CHECK(ok.margin == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  CHECK_FALSE(ok.note.empty());
  cs.C0 = 1.9;
  auto bad = check_levi(cs, g);
  CHECK_FALSE(bad.verdict);
  REQUIRE(bad.witness.has_value());
  CHECK(bad.witness->value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("Levi check at a = 0 requires b = 0") {
  auto g = small_grid();
  auto cs = builtin_family("monomial", 2, 0.25);
  cs.b = [](double, double) { return 1e-3; };
  auto r = check_levi(cs, g);
  CHECK_FALSE(r.verdict);
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->t == 0.0);
}

TEST_CASE("ellipticity") {
  auto g = small_grid();
  auto cs = builtin_family("nondegenerate", 1, 0.0);
  cs.beta = [](double, double) { return 1.0; };
  CHECK(check_ellipticity(cs, g).verdict);
  cs.beta = [](double, double x) { return std::sin(x); };
  auto r = check_ellipticity(cs, g);
  CHECK_FALSE(r.verdict);
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->value < cs.lambda0);
}

TEST_CASE("weak hyperbolicity fails for negative a") {
  auto g = small_grid();
  auto cs = builtin_family("nondegenerate", 1, 0.0);
  cs.alpha = [](double t) { return t - 0.5; };
  auto r = check_weak_hyperbolicity(cs, g);
  CHECK_FALSE(r.verdict);
  CHECK(r.witness->t < 0.5);
}

TEST_CASE("degeneration order too low") {
  auto g = small_grid();
  auto cs = builtin_family("monomial", 3, 0.0);
  CHECK(check_finite_degeneration(cs, g).verdict);
  cs.k = 2;
  auto r = check_finite_degeneration(cs, g);
  CHECK_FALSE(r.verdict);
  CHECK(r.witness->t == 0.0);
}

TEST_CASE("degeneration sum against finite differences") {
  auto cs = builtin_family("monomial", 2, 0.0);
  auto fd = cs;
  fd.alpha_derivative = nullptr;
  fd.beta_derivative = nullptr;
  for (double t : {0.2, 0.5, 0.9})
    for (double x : {0.0, 1.0, 4.0}) {
      double err = 0.0;
      double exact = degeneration_sum(cs, t, x);
      double approx = degeneration_sum(fd, t, x, &err);
      CHECK(std::abs(exact - approx) <= std::max(10.0 * err, 1e-6));
    }
  // t = 0: a = a_t = 0, a_tt = 2 beta
  CHECK(degeneration_sum(cs, 0.0, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("dense degeneration oracle") {
  auto cs = builtin_family("monomial", 2, 0.0);
  double lo = 1e300;
  for (int i = 0; i <= 2000; ++i) {
    double t = i / 2000.0;
    for (int j = 0; j < 64; ++j) lo = std::min(lo, degeneration_sum(cs, t, kTwoPi * j / 64.0));
  }
  CHECK(lo >= 1.0);
  auto r = check_finite_degeneration(cs, small_grid());
  CHECK(r.witness->value == doctest::Approx(lo).epsilon(1e-4));
}

TEST_CASE("order condition") {
  CHECK(check_order_condition(2, 0.0).verdict);
  CHECK(check_order_condition(4, 0.25).verdict);
  CHECK_FALSE(check_order_condition(4, 0.2).verdict);
  CHECK_FALSE(check_order_condition(3, 0.0).verdict);
  CHECK(check_order_condition(1, 0.0).margin == doctest::Approx(0.5));
  CHECK_THROWS_AS(check_order_condition(0, 0.0), ConfigurationError);
}

TEST_CASE("verdicts are monotone in their constants") {
  auto g = make_check_grid(1.0, 32, 513);
  auto cs = builtin_family("monomial", 2, 0.25, 1.0);
  bool prev = false;
  for (double C0 = 0.5; C0 <= 1.5; C0 += 0.05) {
    cs.C0 = C0;
    bool v = check_levi(cs, g).verdict;
    CHECK((!prev || v));
    prev = v;
  }
  CHECK(prev);
  prev = true;
  for (double lam = 0.3; lam <= 0.8; lam += 0.02) {
    cs.lambda0 = lam;
    bool v = check_ellipticity(cs, g).verdict;
    CHECK((prev || !v));
    prev = v;
  }
  CHECK_FALSE(prev);
  prev = false;
  for (double gamma = 0.0; gamma <= 0.5; gamma += 0.05) {
    bool v = check_order_condition(5, gamma).verdict;
    CHECK((!prev || v));
    prev = v;
  }
}

TEST_CASE("flat family fails finite degeneration") {
  auto g = small_grid();
  for (int k = 1; k <= 8; ++k) {
    auto cs = builtin_family("flat", k, 0.5);
    CHECK_FALSE(check_finite_degeneration(cs, g).verdict);
  }
}
