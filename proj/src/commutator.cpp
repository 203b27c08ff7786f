#include "lpe/commutator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

#include "lpe/errors.hpp"

namespace lpe::commutator {

namespace {

constexpr std::size_t kDenseLimit = 1200 * 1200;

void check_indices(const CutoffFamily& fam, int nu, int mu) {
  if (nu < 0 || mu < 0 || nu > fam.nu_max() || mu > fam.nu_max())
    throw ConfigurationError("commutator block index outside [0, nu_max]");
}

Spectrum cleaned_spectrum(const GridFunction& coef) {
  Spectrum s = forward(coef);
  double peak = 0.0;
  for (const auto& c : s.coeffs()) peak = std::max(peak, std::abs(c));
  for (auto& c : s.coeffs())
    if (std::abs(c) < kCoefficientFloor * peak) c = 0.0;
  return s;
}

using Apply = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

// Largest eigenvalue of the symmetric tridiagonal (d, e) by Sturm bisection.
double top_eigenvalue(const std::vector<double>& d, const std::vector<double>& e) {
  const std::size_t k = d.size();
  double lo = d[0], hi = d[0];
  for (std::size_t i = 0; i < k; ++i) {
    double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < k ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  auto count_above = [&](double x) {
    // number of eigenvalues > x
    std::size_t n = 0;
    double q = d[0] - x;
    if (q > 0) ++n;
    for (std::size_t i = 1; i < k; ++i) {
      if (q == 0.0) q = 1e-300;
      q = d[i] - x - e[i - 1] * e[i - 1] / q;
      if (q > 0) ++n;
    }
    return n;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(std::abs(hi), 1e-300); ++it) {
    double mid = 0.5 * (lo + hi);
    if (count_above(mid) >= 1) lo = mid; else hi = mid;
  }
  return hi;
}

// Normalized eigenvector of the tridiagonal for eigenvalue theta, by inverse iteration.
double last_component(const std::vector<double>& d, const std::vector<double>& e, double theta) {
  const std::size_t k = d.size();
  if (k == 1) return 1.0;
  double shift = theta * (1.0 + 1e-13) + 1e-300;
  std::vector<double> x(k, 1.0 / std::sqrt(static_cast<double>(k))), c(k), r(k);
  for (int pass = 0; pass < 3; ++pass) {
    // Thomas algorithm on (T - shift I) y = x
    double denom = d[0] - shift;
    if (denom == 0.0) denom = 1e-300;
    c[0] = (k > 1 ? e[0] : 0.0) / denom;
    r[0] = x[0] / denom;
    for (std::size_t i = 1; i < k; ++i) {
      denom = d[i] - shift - e[i - 1] * c[i - 1];
      if (denom == 0.0) denom = 1e-300;
      c[i] = (i + 1 < k ? e[i] : 0.0) / denom;
      r[i] = (x[i] - e[i - 1] * r[i - 1]) / denom;
    }
    x[k - 1] = r[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) x[i] = r[i] - c[i] * x[i + 1];
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) return 1.0;
    for (double& v : x) v /= nrm;
  }
  return x[k - 1];
}

NormEstimate lanczos_single(const Apply& op, Eigen::Index dim, std::uint64_t seed, const IterationOptions& opts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd q(dim), q_prev = Eigen::VectorXcd::Zero(dim), w(dim);
  for (Eigen::Index i = 0; i < dim; ++i) q[i] = cplx(nd(rng), nd(rng));
  q.normalize();

  std::vector<double> d, e;
  double beta_prev = 0.0;
  double theta = 0.0, residual = 0.0;
  NormEstimate est;
  est.converged = false;
  int until_check = 8;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    op(q, w);
    if (it > 1) w -= beta_prev * q_prev;
    double alpha = q.dot(w).real();  // dot conjugates the first argument
    w -= alpha * q;
    double beta = w.norm();
    d.push_back(alpha);
    est.iterations = it;

    bool invariant = false;
    if (it == 1 && alpha <= 0.0 && beta == 0.0) {
      est.value = 0.0;
      est.residual = 0.0;
      est.converged = true;
      return est;
    }
    if (--until_check <= 0 || beta <= 1e-14 * std::abs(alpha) || it == opts.max_iterations || it == dim) {
      theta = top_eigenvalue(d, e);
      double s = last_component(d, e, theta);
      residual = theta > 0.0 ? beta * std::abs(s) / theta : 0.0;
      invariant = beta <= 1e-14 * std::max(theta, std::abs(alpha)) || it == dim;
      if (residual <= 2.0 * opts.tolerance || invariant || theta == 0.0) {
        est.converged = true;
        break;
      }
      until_check = std::max(8, it / 16);
    }
    e.push_back(beta);
    q_prev = q;
    q = w / beta;
    beta_prev = beta;
  }
  est.value = std::sqrt(std::max(theta, 0.0));
  est.residual = residual;
  return est;
}

NormEstimate lanczos(const Apply& op, Eigen::Index dim, const IterationOptions& opts, NormMethod method) {
  NormEstimate best;
  best.method = method;
  best.value = -1.0;
  int total = 0;
  bool all_converged = true;
  std::mt19937_64 seeder(opts.seed);
  for (int s = 0; s < std::max(1, opts.restarts); ++s) {
    NormEstimate est = lanczos_single(op, dim, seeder(), opts);
    total += est.iterations;
    all_converged = all_converged && est.converged;
    if (est.value > best.value) {
      best.value = est.value;
      best.residual = est.residual;
    }
  }
  best.iterations = total;
  best.converged = all_converged;
  return best;
}

struct Prepared {
  GridFunction coef;
  GridFunction coef_conj;
  Spectrum coef_hat;
};

Prepared prepare(const GridFunction& coef) {
  Prepared p;
  p.coef_hat = cleaned_spectrum(coef);
  p.coef = inverse(p.coef_hat);
  p.coef_conj = p.coef;
  for (auto& v : p.coef_conj.values()) v = std::conj(v);
  return p;
}

GridFunction apply_T(const GridFunction& coef, int nu, int mu, const GridFunction& w, const CutoffFamily& fam) {
  Spectrum w_hat = forward(w).multiplied(fam.psi(mu));
  GridFunction first = inverse(forward(multiply(coef, inverse(w_hat))).multiplied(fam.phi(nu)));
  GridFunction second = multiply(coef, inverse(w_hat.multiplied(fam.phi(nu))));
  return first -= second;
}

GridFunction apply_T_adjoint(const GridFunction& coef_conj, int nu, int mu, const GridFunction& y,
                             const CutoffFamily& fam) {
  GridFunction phi_y = inverse(forward(y).multiplied(fam.phi(nu)));
  GridFunction first = inverse(forward(multiply(coef_conj, phi_y)).multiplied(fam.psi(mu)));
  GridFunction second = inverse(forward(multiply(coef_conj, y)).multiplied(fam.phi(nu)).multiplied(fam.psi(mu)));
  return first -= second;
}

NormEstimate estimate_prepared(const Prepared& p, int nu, int mu, const CutoffFamily& fam, NormMethod method,
                               const IterationOptions& opts) {
  if (method == NormMethod::power_iteration) {
    const std::size_t n = fam.n_points();
    const double period = fam.period();
    Apply op = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
      GridFunction w(std::vector<cplx>(in.data(), in.data() + in.size()), period);
      GridFunction y = apply_T_adjoint(p.coef_conj, nu, mu, apply_T(p.coef, nu, mu, w, fam), fam);
      out = Eigen::Map<const Eigen::VectorXcd>(y.values().data(), static_cast<Eigen::Index>(n));
    };
    return lanczos(op, static_cast<Eigen::Index>(n), opts, method);
  }

  Eigen::SparseMatrix<cplx> m = assemble(p.coef_hat, nu, mu, fam);
  NormEstimate est;
  if (m.nonZeros() == 0) {
    est.method = method == NormMethod::automatic ? NormMethod::dense_svd : method;
    return est;
  }
  const auto size = static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols());
  NormMethod chosen = method;
  if (method == NormMethod::automatic) chosen = size <= kDenseLimit ? NormMethod::dense_svd : NormMethod::sparse_lanczos;

  if (chosen == NormMethod::dense_svd) {
    Eigen::MatrixXcd dense(m);
    if (std::min(dense.rows(), dense.cols()) <= 32) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense);
      est.value = svd.singularValues()(0);
    } else {
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(dense);
      est.value = svd.singularValues()(0);
    }
    est.method = NormMethod::dense_svd;
    return est;
  }

  Eigen::SparseMatrix<cplx> mh = m.adjoint();
  Eigen::VectorXcd tmp(m.rows());
  Apply op = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    tmp.noalias() = m * in;
    out.noalias() = mh * tmp;
  };
  IterationOptions tight = opts;
  tight.tolerance = std::min(opts.tolerance, 1e-10);
  return lanczos(op, m.cols(), tight, NormMethod::sparse_lanczos);
}

}  // namespace

std::string_view method_name(NormMethod m) {
  switch (m) {
    case NormMethod::dense_svd: return "dense-SVD";
    case NormMethod::sparse_lanczos: return "sparse-lanczos";
    case NormMethod::power_iteration: return "power-iteration";
    case NormMethod::automatic: return "auto";
  }
  return "?";
}

NormMethod parse_method(std::string_view name) {
  for (auto m : {NormMethod::dense_svd, NormMethod::sparse_lanczos, NormMethod::power_iteration, NormMethod::automatic})
    if (name == method_name(m)) return m;
  throw ConfigurationError("unknown norm method '" + std::string(name) + "'");
}

GridFunction apply_commutator(const GridFunction& coef, int nu, int mu, const GridFunction& w,
                              const CutoffFamily& fam) {
  check_indices(fam, nu, mu);
  require_same_grid(coef, w, "apply_commutator");
  if (!fam.matches(w)) throw DimensionError("apply_commutator: cutoff family built for another grid");
  return apply_T(coef, nu, mu, w, fam);
}

GridFunction apply_commutator_adjoint(const GridFunction& coef, int nu, int mu, const GridFunction& y,
                                      const CutoffFamily& fam) {
  check_indices(fam, nu, mu);
  require_same_grid(coef, y, "apply_commutator_adjoint");
  if (!fam.matches(y)) throw DimensionError("apply_commutator_adjoint: cutoff family built for another grid");
  GridFunction cc = coef;
  for (auto& v : cc.values()) v = std::conj(v);
  return apply_T_adjoint(cc, nu, mu, y, fam);
}

GridFunction clean_coefficient(const GridFunction& coef) { return inverse(cleaned_spectrum(coef)); }

Eigen::SparseMatrix<cplx> assemble(const Spectrum& coef_hat, int nu, int mu, const CutoffFamily& fam) {
  check_indices(fam, nu, mu);
  if (!fam.matches(coef_hat)) throw DimensionError("assemble: cutoff family built for another grid");
  const std::size_t n = fam.n_points();
  auto phi = fam.phi(nu);
  auto psi = fam.psi(mu);

  std::vector<std::size_t> offsets;
  for (std::size_t k = 0; k < n; ++k)
    if (coef_hat[k] != cplx(0.0)) offsets.push_back(k);

  struct Entry { std::size_t r, c; cplx v; };
  std::vector<Entry> entries;
  for (std::size_t c = 0; c < n; ++c) {
    if (psi[c] == 0.0) continue;
    for (std::size_t k : offsets) {
      std::size_t r = (c + k) % n;
      double diff = phi[r] - phi[c];
      if (diff == 0.0) continue;
      entries.push_back({r, c, coef_hat[k] * (diff * psi[c])});
    }
  }
  std::vector<long> row_map(n, -1), col_map(n, -1);
  long rows = 0, cols = 0;
  std::vector<char> row_used(n, 0), col_used(n, 0);
  for (const auto& en : entries) {
    row_used[en.r] = 1;
    col_used[en.c] = 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (row_used[i]) row_map[i] = rows++;
    if (col_used[i]) col_map[i] = cols++;
  }
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(entries.size());
  for (const auto& en : entries) trip.emplace_back(row_map[en.r], col_map[en.c], en.v);
  Eigen::SparseMatrix<cplx> m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

NormEstimate estimate_norm(const GridFunction& coef, int nu, int mu, const CutoffFamily& fam, NormMethod method,
                           const IterationOptions& opts) {
  check_indices(fam, nu, mu);
  if (!fam.matches(coef)) throw DimensionError("estimate_norm: cutoff family built for another grid");
  return estimate_prepared(prepare(coef), nu, mu, fam, method, opts);
}

double commutator_norm(const GridFunction& coef, int nu, int mu, const CutoffFamily& fam, NormMethod method,
                       const IterationOptions& opts) {
  NormEstimate est = estimate_norm(coef, nu, mu, fam, method, opts);
  if (!est.converged)
    throw NumericalError("commutator norm (" + std::to_string(nu) + "," + std::to_string(mu) +
                         ") stagnated after " + std::to_string(est.iterations) +
                         " iterations, residual " + std::to_string(est.residual));
  return est.value;
}

Eigen::MatrixXd norm_matrix(const GridFunction& coef, const CutoffFamily& fam, NormMethod method,
                            const IterationOptions& opts) {
  if (!fam.matches(coef)) throw DimensionError("norm_matrix: cutoff family built for another grid");
  Prepared p = prepare(coef);
  const int nm = fam.nu_max();
  Eigen::MatrixXd out(nm + 1, nm + 1);
  for (int nu = 0; nu <= nm; ++nu)
    for (int mu = 0; mu <= nm; ++mu) {
      NormEstimate est = estimate_prepared(p, nu, mu, fam, method, opts);
      if (!est.converged)
        throw NumericalError("commutator norm (" + std::to_string(nu) + "," + std::to_string(mu) +
                             ") stagnated, residual " + std::to_string(est.residual));
      out(nu, mu) = est.value;
    }
  return out;
}

CommutatorScan scan(const CoefficientSet& cs, double t, const CutoffFamily& fam, NormMethod method,
                    const IterationOptions& opts) {
  const std::size_t n = fam.n_points();
  const double period = fam.period();
  auto beta = GridFunction::sample(n, [&](double x) { return cs.beta(t, x); }, period);
  auto b = GridFunction::sample(n, [&](double x) { return cs.b(t, x); }, period);
  CommutatorScan s;
  s.t = t;
  s.nu_max = fam.nu_max();
  s.method = method;
  s.tolerance = opts.tolerance;
  s.norms_beta = norm_matrix(beta, fam, method, opts);
  s.norms_b = norm_matrix(b, fam, method, opts);
  return s;
}

SchurKernel schur_kernel(const Eigen::MatrixXd& norms, std::span<const double> h, const SchurOptions& opts) {
  const Eigen::Index n = norms.rows();
  if (norms.cols() != n) throw DimensionError("schur_kernel: norm matrix must be square");
  if (static_cast<Eigen::Index>(h.size()) != n) throw DimensionError("schur_kernel: weight length != nu_max + 1");
  if (!opts.column_weight.empty() && static_cast<Eigen::Index>(opts.column_weight.size()) != n)
    throw DimensionError("schur_kernel: column weight length != nu_max + 1");
  SchurKernel k;
  k.kernel = Eigen::MatrixXd::Zero(n, n);
  k.near = k.kernel;
  k.far = k.kernel;
  for (Eigen::Index nu = 0; nu < n; ++nu)
    for (Eigen::Index mu = 0; mu < n; ++mu) {
      double v = std::exp(-0.5 * (h[nu] - h[mu])) * opts.scale * norms(nu, mu);
      if (opts.dyadic_row_factor) v *= std::ldexp(1.0, static_cast<int>(nu));
      if (!opts.column_weight.empty()) v *= opts.column_weight[static_cast<std::size_t>(mu)];
      v = std::abs(v);
      k.kernel(nu, mu) = v;
      (std::abs(nu - mu) <= 2 ? k.near : k.far)(nu, mu) = v;
    }
  k.s_row = k.kernel.rowwise().sum().maxCoeff();
  k.s_col = k.kernel.colwise().sum().maxCoeff();
  k.near_row = k.near.rowwise().sum().maxCoeff();
  k.near_col = k.near.colwise().sum().maxCoeff();
  k.far_row = k.far.rowwise().sum().maxCoeff();
  k.far_col = k.far.colwise().sum().maxCoeff();
  return k;
}

Lemma2Report verify_lemma2(const Eigen::MatrixXd& norms, double floor, std::vector<int> orders) {
  Lemma2Report rep;
  rep.floor = floor;
  const Eigen::Index n = norms.rows();
  std::vector<double> xs, ys;
  int xmin = 1 << 30, xmax = -1;
  for (Eigen::Index nu = 0; nu < n; ++nu)
    for (Eigen::Index mu = 0; mu < n; ++mu) {
      double v = norms(nu, mu);
      if (std::abs(nu - mu) <= 2) {
        rep.C_near = std::max(rep.C_near, std::ldexp(v, static_cast<int>(nu)));
        continue;
      }
      ++rep.far_entries;
      if (v <= floor) continue;
      int x = static_cast<int>(std::max(nu, mu));
      xs.push_back(x);
      ys.push_back(std::log2(v));
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  rep.far_points = xs.size();
  rep.exact_zero_regime = rep.far_entries > 0 && rep.far_points == 0;
  rep.partial = rep.far_entries == 0 || (!rep.exact_zero_regime && xmax == xmin);
  if (!xs.empty()) {
    rep.fit_min = xmin;
    rep.fit_max = xmax;
  }
  if (!rep.partial && !rep.exact_zero_regime) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    rep.far_slope = sxy / sxx;
    rep.far_intercept = my - rep.far_slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double r = ys[i] - (rep.far_intercept + rep.far_slope * xs[i]);
      ss += r * r;
    }
    rep.fit_residual = std::sqrt(ss / static_cast<double>(xs.size()));
  }
  for (int order : orders) {
    FarSlope fs;
    fs.order = order;
    fs.slope = rep.far_slope;
    for (Eigen::Index nu = 0; nu < n; ++nu)
      for (Eigen::Index mu = 0; mu < n; ++mu)
        if (std::abs(nu - mu) >= 3 && norms(nu, mu) > floor)
          fs.C = std::max(fs.C, std::ldexp(norms(nu, mu), order * static_cast<int>(std::max(nu, mu))));
    fs.passes = rep.exact_zero_regime || (!rep.partial && rep.far_slope <= -order);
    rep.slopes.push_back(fs);
  }
  return rep;
}

}  // namespace lpe::commutator
