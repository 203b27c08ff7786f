// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "lpe/coefficients.hpp"
#include "lpe/commutator.hpp"
#include "lpe/config.hpp"
#include "lpe/dyadic.hpp"
#include "lpe/energy.hpp"
#include "lpe/pipeline.hpp"
#include "lpe/solver.hpp"

using namespace lpe;
namespace cm = lpe::commutator;
namespace dy = lpe::dyadic;
namespace en = lpe::energy;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridFunction random_band_limited(std::size_t n, int band, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Spectrum s(n, kTwoPi);
  for (int xi = -band; xi <= band; ++xi) {
    auto slot = static_cast<std::size_t>((xi + static_cast<int>(n)) % static_cast<int>(n));
    s[slot] = cplx(nd(rng), nd(rng));
  }
  return inverse(s);
}

cplx inner(const GridFunction& a, const GridFunction& b) {
  cplx s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::conj(b[j]);
  return s * a.dx();
}

std::vector<std::vector<GridFunction>> corpus() {
  std::vector<std::vector<GridFunction>> out;
  std::mt19937_64 rng(20240917);
  for (std::size_t n : {128u, 256u, 1024u}) {
    const int band = 1 << dy::natural_nu_max(n);
    std::vector<GridFunction> set;
    for (int i = 0; i < 100; ++i) set.push_back(random_band_limited(n, band, rng));
    out.push_back(std::move(set));
  }
  return out;
}

void criterion1(const std::vector<std::vector<GridFunction>>& sets) {
  auto t0 = std::chrono::steady_clock::now();
  double recon = 0.0, pou = 0.0, ortho = 0.0;
  for (const auto& set : sets) {
    dy::CutoffFamily fam(set.front().size());
    const double top = std::ldexp(1.0, fam.nu_max());
    for (std::size_t k = 0; k < fam.n_points(); ++k) {
      double xi = frequency(k, fam.n_points());
      if (std::abs(xi) > top) continue;
      double s = 0.0;
      for (int nu = 0; nu <= fam.nu_max(); ++nu) s += fam.phi(nu)[k];
      pou = std::max(pou, std::abs(s - 1.0));
    }
    for (const auto& w : set) {
      auto b = dy::decompose(w, fam);
      recon = std::max(recon, (dy::reconstruct(b) - w).norm() / w.norm());
      const double w2 = w.norm2();
      for (int nu = 0; nu <= fam.nu_max(); ++nu)
        for (int mu = nu + 2; mu <= fam.nu_max(); ++mu)
          ortho = std::max(ortho, std::abs(inner(b.blocks[nu], b.blocks[mu])) / w2);
    }
  }
  double secs = seconds_since(t0);
  report(1, recon < 1e-12 && pou < 1e-13 && ortho < 1e-13 && secs < 10.0,
         fmt("300 functions (N=128,256,1024): reconstruction %.2e (<1e-12), partition of unity %.2e (<1e-13), "
             "|<w_nu,w_mu>|/|w|^2 for |nu-mu|>=2 %.2e (<1e-13), %.2f s (<10 s)",
             recon, pou, ortho, secs));
}

void criterion2(const std::vector<std::vector<GridFunction>>& sets) {
  std::size_t checked = 0, violations = 0;
  for (const auto& set : sets) {
    dy::CutoffFamily fam(set.front().size());
    for (const auto& w : set) {
      auto b = dy::decompose(w, fam);
      for (int nu = 1; nu <= fam.nu_max(); ++nu) {
        auto r = dy::bernstein_ratio(b, nu);
        if (!r) continue;
        ++checked;
        if (*r < dy::bernstein_lower(nu) || *r > dy::bernstein_upper(nu)) ++violations;
      }
    }
  }
  // Pure modes: |xi0| = 2^nu sits entirely in block nu; xi0 = 3 splits over blocks 1 and 2.
  double pure = 0.0;
  dy::CutoffFamily fam(256);
  for (int nu = 1; nu <= fam.nu_max(); ++nu)
    for (double sign : {1.0, -1.0}) {
      double xi0 = sign * std::ldexp(1.0, nu);
      auto w = GridFunction::sample(256, [xi0](double x) { return std::exp(cplx(0.0, xi0 * x)); });
      auto r = dy::bernstein_ratio(dy::decompose(w, fam), nu);
      pure = std::max(pure, r ? std::abs(*r - std::abs(xi0)) / std::abs(xi0) : 1.0);
    }
  auto w3 = GridFunction::sample(256, [](double x) { return std::exp(cplx(0.0, 3.0 * x)); });
  auto r3 = dy::bernstein_ratio(dy::decompose(w3, fam), 1);
  pure = std::max(pure, r3 ? std::abs(*r3 - 3.0) / 3.0 : 1.0);
  report(2, violations == 0 && checked > 0 && pure < 1e-12,
         fmt("%zu nonzero blocks, %zu outside [2^(nu-1), 2^(nu+1)]; pure-mode ratio error %.2e (<1e-12)", checked,
             violations, pure));
}

double near_sup(const GridFunction& beta, const dy::CutoffFamily& fam) {
  double sup = 0.0;
  for (int nu = 0; nu <= fam.nu_max(); ++nu)
    for (int mu = std::max(0, nu - 2); mu <= std::min(fam.nu_max(), nu + 2); ++mu)
      sup = std::max(sup, std::ldexp(cm::commutator_norm(beta, nu, mu, fam, cm::NormMethod::dense_svd), nu));
  return sup;
}

GridFunction trig_beta(std::size_t n) {
  return GridFunction::sample(n, [](double x) { return 1.0 + 0.5 * std::sin(x); });
}

GridFunction analytic_beta(std::size_t n) {
  return GridFunction::sample(n, [](double x) { return 1.0 / (1.0 - 0.5 * std::cos(x)); });
}

void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  double c256 = near_sup(trig_beta(256), dy::CutoffFamily(256));
  double c512 = near_sup(trig_beta(512), dy::CutoffFamily(512));
  dy::CutoffFamily f1024(1024);
  double c1024_6 = near_sup(trig_beta(1024), f1024.truncated(6));
  double c1024_8 = near_sup(trig_beta(1024), f1024);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::min(a, b); };
  double v_n = rel(c256, c512), v_nu = rel(c1024_6, c1024_8);
  double secs = seconds_since(t0);
  report(3, v_n < 0.1 && v_nu < 0.1 && secs < 120.0,
         fmt("C_near(N=256)=%.6f C_near(N=512)=%.6f (variation %.2f%%); N=1024 nu_max 6 -> 8: %.6f -> %.6f "
             "(variation %.2f%%); dense SVD, %.1f s",
             c256, c512, 100 * v_n, c1024_6, c1024_8, 100 * v_nu, secs));
}

void criterion4() {
  const std::size_t n = 256;
  dy::CutoffFamily fam(n);
  auto a = analytic_beta(n);
  auto dense = cm::norm_matrix(a, fam, cm::NormMethod::dense_svd);
  auto rep = cm::verify_lemma2(dense, 1e-14, {4});
  auto trig = cm::verify_lemma2(cm::norm_matrix(trig_beta(n), fam, cm::NormMethod::dense_svd), 1e-14, {4});

  // Matrix-free route on every entry large enough to be resolved against roundoff.
  double worst = 0.0;
  std::size_t compared = 0;
  for (const auto& coef : {a, trig_beta(n)}) {
    auto d = cm::norm_matrix(coef, fam, cm::NormMethod::dense_svd);
    for (int nu = 0; nu <= fam.nu_max(); ++nu)
      for (int mu = 0; mu <= fam.nu_max(); ++mu) {
        if (d(nu, mu) < 1e-9) continue;
        double p = cm::commutator_norm(coef, nu, mu, fam, cm::NormMethod::power_iteration);
        worst = std::max(worst, std::abs(p - d(nu, mu)) / d(nu, mu));
        ++compared;
      }
  }
  bool slope_ok = !rep.partial && !rep.exact_zero_regime && rep.far_slope <= -4.0;
  report(4, slope_ok && trig.slopes[0].passes && worst < 1e-6,
         fmt("beta=1/(1-cos(x)/2), N=256: far slope %.2f over %zu entries above 1e-14 (max(nu,mu) in [%d,%d], <= -4); "
             "beta=1+sin(x)/2: %s; dense vs power iteration max rel. diff %.2e over %zu entries (<1e-6)",
             rep.far_slope, rep.far_points, rep.fit_min, rep.fit_max,
             trig.exact_zero_regime ? "exact-zero far regime" : fmt("slope %.2f", trig.far_slope).c_str(), worst,
             compared));
}

void criterion5() {
  auto cs = builtin_family("monomial", 2, 0.0);
  auto constants = en::pointwise_constants(cs, make_check_grid(cs.T, 128));
  const double Ct = constants.C_tilde;
  std::vector<double> h(13);
  for (int nu = 0; nu <= 12; ++nu) h[nu] = en::weight_h(nu, cs.T, cs, Ct);
  double rmin = 1e300, rmax = 0.0;
  for (int nu = 1; nu <= 12; ++nu) {
    rmin = std::min(rmin, h[nu] / nu);
    rmax = std::max(rmax, h[nu] / nu);
  }
  double dmin = 1e300, dmax = 0.0;
  for (int nu = 6; nu < 12; ++nu) {
    double d = std::abs(h[nu + 1] - h[nu]);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  double mid = en::weight_terms(10, 1.0, cs).alpha_ratio;
  double mid_err = std::abs(mid - std::log(1025.0));
  double drift = (dmax - dmin) / dmin;
  report(5, rmax / rmin < 3.0 && drift < 0.1 && mid_err < 1e-8,
         fmt("monomial k=2, C_tilde=%.3g: h(nu,T)/nu in [%.4f, %.4f] (ratio %.3f < 3); increments nu=6..12 in "
             "[%.4f, %.4f] (spread %.2f%% < 10%%); nu=10 middle term %.12f vs ln(1025) (error %.1e < 1e-8)",
             Ct, rmin, rmax, rmax / rmin, dmin, dmax, 100 * drift, mid, mid_err));
}

struct GoalRun {
  double violation;
  double budget;
  double seconds;
};

GoalRun goal_run(ExperimentConfig cfg, double dt) {
  auto t0 = std::chrono::steady_clock::now();
  cfg.dt = dt;
  cfg.save_every = 1;
  cfg.validate();
  auto traj = pipeline::run_solver(cfg, false);
  auto fam = cfg.cutoffs();
  auto constants = en::calibrate_constants(*cfg.coefficients(), fam);
  auto ledger = en::build_ledger(traj, fam, constants);
  auto g = en::verify_goal_inequality(ledger, traj);
  return {g.violation, g.budget, seconds_since(t0)};
}

void criterion6(const std::string& config_dir) {
  for (const char* name : {"nondegenerate", "k2-gamma0", "k4-gamma0.3"}) {
    auto cfg = load_config(config_dir + "/" + name + ".cfg");
    bool shape = cfg.N == 128 && cfg.dt == 1e-4 && cfg.T == 1.0 && cfg.data == "manufactured";
    auto coarse = goal_run(cfg, 1e-4);
    auto fine = goal_run(cfg, 5e-5);
    double pc = std::max(coarse.violation, 0.0), pf = std::max(fine.violation, 0.0);
    // Halving check on the positive part; vacuous once the inequality holds strictly.
    bool halving = pc == 0.0 ? pf == 0.0 : pf * 4.0 <= pc;
    bool ok = shape && coarse.budget <= 1e-4 && coarse.violation <= coarse.budget && halving &&
              coarse.seconds + fine.seconds < 300.0;
    report(6, ok,
           fmt("%s: violation %.3e at dt=1e-4 (budget %.1e), %.3e at dt=5e-5; positive part %.2e -> %.2e (%s); "
               "%.1f s",
               name, coarse.violation, coarse.budget, fine.violation, pc, pf,
               pc == 0.0 ? "inequality strict, halving vacuous" : (halving ? ">= 4x decrease" : "< 4x decrease"),
               coarse.seconds + fine.seconds));
  }
}

void criterion7(const std::string& config_dir) {
  auto k2 = load_config(config_dir + "/k2-gamma0.cfg");
  std::vector<double> cms, dstars;
  bool all_found = true;
  std::string detail;
  for (std::size_t n : {128u, 256u, 512u}) {
    auto cfg = k2;
    cfg.N = n;
    cfg.estimate_dt = 1e-3;
    cfg.validate();
    auto fam = pipeline::estimate_family(cfg, false);
    auto est = en::verify_energy_estimate(fam.runs, fam.frequencies, cfg.cutoffs(), 0.0, cfg.delta_grid);
    all_found = all_found && est.observed();
    if (est.observed()) {
      cms.push_back(est.C_m);
      dstars.push_back(*est.delta_star);
      detail += fmt("N=%zu delta*=%.1f C_m=%.4f; ", n, *est.delta_star, est.C_m);
    } else {
      detail += fmt("N=%zu not observed; ", n);
    }
  }
  double spread = 0.0;
  if (all_found) {
    double lo = *std::min_element(cms.begin(), cms.end()), hi = *std::max_element(cms.begin(), cms.end());
    spread = hi / lo;
  }
  auto nd = load_config(config_dir + "/nondegenerate.cfg");
  nd.estimate_dt = 1e-3;
  auto fam = pipeline::estimate_family(nd, false);
  auto est = en::verify_energy_estimate(fam.runs, fam.frequencies, nd.cutoffs(), 0.0, nd.delta_grid);
  double grid_min = *std::min_element(nd.delta_grid.begin(), nd.delta_grid.end());
  bool nd_ok = est.observed() && *est.delta_star == grid_min;
  report(7, all_found && spread <= 2.0 && nd_ok,
         fmt("k2-gamma0, m=0: %sC_m spread %.3f (<= 2); nondegenerate delta*=%s (grid minimum %.1f)", detail.c_str(),
             spread, est.observed() ? fmt("%.1f", *est.delta_star).c_str() : "none", grid_min));
}

void criterion8() {
  struct Row { int k; double gamma; bool expected; };
  const Row rows[] = {{2, 0.0, true}, {4, 0.3, true}, {4, 0.1, false}, {1000000, 0.5, true}};
  int matches = 0;
  for (const auto& r : rows)
    if (check_order_condition(r.k, r.gamma).verdict == r.expected) ++matches;
  int flat_fail = 0;
  for (int k = 1; k <= 8; ++k) {
    auto cs = builtin_family("flat", k, 0.0);
    if (!check_finite_degeneration(cs, make_check_grid(cs.T, 64)).verdict) ++flat_fail;
  }
  report(8, matches == 4 && flat_fail == 8,
         fmt("order-condition truth table %d/4 rows reproduced; alpha=exp(-1/t) fails the degeneration check for "
             "%d/8 values of k",
             matches, flat_fail));
}

double solver_error(double dt) {
  auto cs = std::make_shared<const CoefficientSet>(builtin_family("monomial", 2, 0.0));
  auto field = mode_sum({Mode{1.0, 1.0, 0.0, 1.0, 0.0}});  // cos t cos x
  const std::size_t n = 128;
  auto f = manufactured_rhs(cs, field, n);
  auto steps = static_cast<std::size_t>(std::llround(1.0 / dt));
  SolverOptions opts;
  opts.save_every = steps;
  auto traj = solve_cauchy(cs, sample(field.u, 0.0, n), sample(field.ut, 0.0, n), f, steps, dt, opts);
  auto exact = sample(field.u, traj.times.back(), n);
  return (traj.u.back() - exact).max_abs();
}

void criterion9() {
  double e_fine = solver_error(1e-4);
  double e1 = solver_error(0.01), e2 = solver_error(0.005), e3 = solver_error(0.0025);
  double r1 = e1 / e2, r2 = e2 / e3;
  report(9, e_fine < 1e-6 && r1 >= 12 && r1 <= 20 && r2 >= 12 && r2 <= 20,
         fmt("monomial k=2, u=cos(t)cos(x), N=128: max error %.2e at dt=1e-4 (<1e-6); errors %.3e, %.3e, %.3e at "
             "dt=0.01, 0.005, 0.0025, ratios %.2f, %.2f (in [12, 20])",
             e_fine, e1, e2, e3, r1, r2));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config_dir = argc > 1 ? argv[1] : "configs";
  auto sets = corpus();
  criterion1(sets);
  criterion2(sets);
  criterion3();
  criterion4();
  criterion5();
  criterion6(config_dir);
  criterion7(config_dir);
  criterion8();
  criterion9();
  std::printf("%d criterion check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
