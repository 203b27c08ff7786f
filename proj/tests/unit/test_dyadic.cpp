#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "lpe/dyadic.hpp"
#include "lpe/errors.hpp"
#include "oracles.hpp"

using namespace lpe;
using namespace lpe::dyadic;

TEST_CASE("cutoff profile values") {
  CHECK(phi(0, 0.0) == 1.0);
  CHECK(phi(0, 1.0) == 1.0);
  CHECK(phi(0, 2.0) == 0.0);
  CHECK(phi(0, -2.5) == 0.0);
  CHECK(phi(1, 3.0) + phi(2, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi(-1, 0.3) == 0.0);
  for (double r = 0.0; r < 3.0; r += 0.01) CHECK(cutoff_profile(r) >= 0.0);
  // monotone non-increasing in r
  for (double r = 0.0; r < 3.0; r += 0.01) CHECK(cutoff_profile(r + 0.01) <= cutoff_profile(r) + 1e-15);
}

TEST_CASE("natural nu_max") {
  CHECK(natural_nu_max(128) == 5);
  CHECK(natural_nu_max(256) == 6);
  CHECK(natural_nu_max(512) == 7);
  CHECK(natural_nu_max(1024) == 8);
  CHECK_THROWS_AS(CutoffFamily(8), ConfigurationError);
  CutoffFamily fam(256);
  CHECK(fam.truncated(4).nu_max() == 4);
  CHECK_THROWS(fam.truncated(7));
}

TEST_CASE("partition of unity and support") {
  CutoffFamily fam(256);
  auto xi = frequencies(256);
  for (std::size_t k = 0; k < 256; ++k) {
    double s = 0.0;
    for (int nu = 0; nu <= fam.nu_max(); ++nu) {
      s += fam.phi(nu)[k];
      const double r = std::abs(xi[k]);
      if (nu >= 1 && (r < std::ldexp(1.0, nu - 1) || r > std::ldexp(1.0, nu + 1))) CHECK(fam.phi(nu)[k] == 0.0);
      if (fam.phi(nu)[k] != 0.0) CHECK(fam.psi(nu)[k] == doctest::Approx(1.0).epsilon(1e-15));
    }
    if (std::abs(xi[k]) <= std::ldexp(1.0, fam.nu_max())) CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("blocks match a direct DFT") {
  CutoffFamily fam(64);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::vector<cplx> w(64);
  for (auto& v : w) v = cplx(nd(rng), nd(rng));
  auto blocks = decompose(GridFunction(w), fam);
  auto c = oracle::dft(w);
  for (int nu = 0; nu <= fam.nu_max(); ++nu) {
    std::vector<cplx> cn(64);
    for (std::size_t k = 0; k < 64; ++k) cn[k] = fam.phi(nu)[k] * c[k];
    auto expected = oracle::idft(cn);
    CHECK(oracle::rel_err(oracle::values(blocks.blocks[nu]), expected) < 1e-13);
  }
}

TEST_CASE("worked examples") {
  CutoffFamily fam(128);
  auto one = GridFunction::sample(128, [](double) { return 1.0; });
  auto b1 = decompose(one, fam);
  CHECK(b1.blocks[0].max_abs() == doctest::Approx(1.0));
  for (int nu = 1; nu <= fam.nu_max(); ++nu) CHECK(b1.blocks[nu].max_abs() < 1e-15);

  GridFunction e3(128);
  for (std::size_t j = 0; j < 128; ++j) e3[j] = std::polar(1.0, 3.0 * e3.x(j));
  auto b3 = decompose(e3, fam);
  for (int nu = 0; nu <= fam.nu_max(); ++nu) {
    double expected = phi(nu, 3.0);
    GridFunction diff = b3.blocks[nu] - expected * e3;
    CHECK(diff.max_abs() < 1e-14);
  }
  CHECK(phi(1, 3.0) > 0.0);
  CHECK(phi(2, 3.0) > 0.0);
}

TEST_CASE("reconstruction, orthogonality of distant blocks, Plancherel") {
  CutoffFamily fam(256);
  std::mt19937_64 rng(5);
  auto w = oracle::random_band_limited(256, 60, rng);
  auto blocks = decompose(w, fam);
  CHECK((reconstruct(blocks) - w).norm() < 1e-13 * w.norm());
  for (int nu = 0; nu <= fam.nu_max(); ++nu)
    for (int mu = nu + 2; mu <= fam.nu_max(); ++mu)
      CHECK(std::abs(inner_re(blocks.blocks[nu], blocks.blocks[mu])) < 1e-12 * w.norm2());
  auto s = forward(w);
  CHECK(s.norm2() == doctest::Approx(w.norm2()).epsilon(1e-13));
  auto n2 = block_norms2(s, fam);
  for (int nu = 0; nu <= fam.nu_max(); ++nu) CHECK(n2[nu] == doctest::Approx(blocks.blocks[nu].norm2()).epsilon(1e-12));
}

TEST_CASE("Bernstein ratios") {
  CutoffFamily fam(256);
  std::mt19937_64 rng(8);
  auto w = oracle::random_band_limited(256, 100, rng);
  auto blocks = decompose(w, fam);
  for (int nu = 1; nu <= fam.nu_max(); ++nu) {
    auto r = bernstein_ratio(blocks, nu);
    REQUIRE(r.has_value());
    CHECK(*r >= bernstein_lower(nu) - 1e-12);
    CHECK(*r <= bernstein_upper(nu) + 1e-12);
  }
  GridFunction zero(256);
  CHECK_FALSE(bernstein_ratio(decompose(zero, fam), 3).has_value());
}

TEST_CASE("Sobolev norm equivalence") {
  const std::size_t n = 128;
  CutoffFamily fam(n);
  auto xi = frequencies(n);
  const double top = std::ldexp(1.0, fam.nu_max());
  std::mt19937_64 rng(3);
  auto w = oracle::random_band_limited(n, static_cast<int>(top), rng);

  SUBCASE("m = 0 band") {
    double ratio = sobolev_norm(w, 0.0, fam) / w.norm();
    CHECK(ratio <= 1.0 + 1e-12);
    CHECK(ratio >= 1.0 / std::sqrt(3.0) - 1e-12);
  }
  SUBCASE("m = 2 band from the multiplier norms") {
    // K^2 bounds sup over xi of the two ratios between sum_nu phi^2 4^(2 nu) and (1 + xi^2)^2.
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(xi[k]) > top) continue;
      double s = 0.0;
      for (int nu = 0; nu <= fam.nu_max(); ++nu) s += std::pow(fam.phi(nu)[k], 2) * std::pow(4.0, 2.0 * nu);
      double ref = std::pow(1.0 + xi[k] * xi[k], 2);
      lo = std::min(lo, s / ref);
      hi = std::max(hi, s / ref);
    }
    auto sw = forward(w);
    double h2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) h2 += std::norm(sw[k]) * std::pow(1.0 + xi[k] * xi[k], 2);
    h2 *= kTwoPi;
    double ratio2 = std::pow(sobolev_norm(w, 2.0, fam), 2) / h2;
    CHECK(ratio2 >= lo * (1 - 1e-12));
    CHECK(ratio2 <= hi * (1 + 1e-12));
    double K = std::sqrt(std::max(hi, 1.0 / lo));
    MESSAGE("m = 2 equivalence constant K = " << K);
    CHECK(K < 20.0);
  }
}

TEST_CASE("multiplier matrix oracle for one block") {
  CutoffFamily fam(32);
  auto M = oracle::multiplier_matrix(fam.phi(2));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(32);
  std::vector<cplx> w(32);
  for (int i = 0; i < 32; ++i) w[i] = v[i] = cplx(nd(rng), nd(rng));
  Eigen::VectorXcd expected = M * v;
  auto b = decompose(GridFunction(w), fam).blocks[2];
  for (int i = 0; i < 32; ++i) CHECK(std::abs(b[i] - expected[i]) < 1e-13);
}
