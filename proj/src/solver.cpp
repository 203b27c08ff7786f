#include "lpe/solver.hpp"

#include <cmath>
#include <string>

#include "lpe/errors.hpp"
#include "lpe/simd/kernels.hpp"

namespace lpe {
namespace {

// Zero-pads an N-point spectrum to 2N slots (Nyquist dropped).
std::vector<cplx> pad_spectrum(std::span<const cplx> s) {
  const std::size_t n = s.size();
  std::vector<cplx> out(2 * n, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < n / 2; ++k) out[k] = s[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) out[k + n] = s[k];
  return out;
}

std::vector<cplx> truncate_spectrum(std::span<const cplx> s) {
  const std::size_t n = s.size() / 2;
  std::vector<cplx> out(n, cplx(0.0, 0.0));
  for (std::size_t k = 0; k < n / 2; ++k) out[k] = s[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) out[k] = s[k + n];
  return out;
}

// coef (sampled on the 2N grid) times the field with spectrum s, returned on the N grid.
GridFunction dealiased_product(std::span<const cplx> coef_fine, const Spectrum& s) {
  const double period = s.period();
  GridFunction fine = inverse(Spectrum(pad_spectrum(s.coeffs()), period));
  simd::mul(coef_fine, fine.values(), fine.values());
  return inverse(Spectrum(truncate_spectrum(forward(fine).coeffs()), period));
}

void sample_into(std::vector<cplx>& out, std::size_t n, double period, double t,
                 const CoefficientSet::SpaceTimeFn& fn) {
  out.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = period * static_cast<double>(j) / static_cast<double>(n);
    out[j] = cplx(fn(t, x), 0.0);
  }
}

}  // namespace

SpatialOperator::SpatialOperator(std::shared_ptr<const CoefficientSet> cs, std::size_t n_points, double period,
                                 bool dealias)
    : cs_(std::move(cs)), n_(n_points), period_(period), dealias_(dealias), dsym_(derivative_symbol(n_points, period)) {
  if (!cs_) throw ConfigurationError("SpatialOperator needs a coefficient set");
}

void SpatialOperator::set_time(double t) {
  if (t == t_) return;
  t_ = t;
  const auto a_fn = [cs = cs_.get()](double tt, double x) { return cs->a(tt, x); };
  sample_into(a_, n_, period_, t, a_fn);
  sample_into(b_, n_, period_, t, cs_->b);
  sample_into(c_, n_, period_, t, cs_->c);
  if (dealias_) {
    sample_into(a_fine_, 2 * n_, period_, t, a_fn);
    sample_into(b_fine_, 2 * n_, period_, t, cs_->b);
    sample_into(c_fine_, 2 * n_, period_, t, cs_->c);
  }
}

GridFunction SpatialOperator::apply(const GridFunction& u) const {
  if (u.size() != n_ || u.period() != period_) throw DimensionError("SpatialOperator: grid mismatch");
  const Spectrum u_hat = forward(u);
  Spectrum ux_hat(n_, period_);
  simd::scale_imag(u_hat.coeffs(), dsym_, ux_hat.coeffs());
  const GridFunction ux = inverse(ux_hat);

  GridFunction flux(n_, period_);
  GridFunction bux(n_, period_);
  GridFunction cu(n_, period_);
  if (dealias_) {
    flux = dealiased_product(a_fine_, ux_hat);
    bux = dealiased_product(b_fine_, ux_hat);
    cu = dealiased_product(c_fine_, u_hat);
  } else {
    simd::mul(a_, ux.values(), flux.values());
    simd::mul(b_, ux.values(), bux.values());
    simd::mul(c_, u.values(), cu.values());
  }

  Spectrum flux_hat = forward(flux);
  simd::scale_imag(flux_hat.coeffs(), dsym_, flux_hat.coeffs());
  GridFunction out = inverse(flux_hat);
  out -= bux;
  out -= cu;
  return out;
}

GridFunction apply_L(const CoefficientSet& cs, const GridFunction& u, const GridFunction& ut2, double t) {
  require_same_grid(u, ut2, "apply_L");
  // Non-owning handle: the operator does not outlive this call.
  SpatialOperator op(std::shared_ptr<const CoefficientSet>(&cs, [](const CoefficientSet*) {}), u.size(), u.period());
  op.set_time(t);
  GridFunction out = ut2;
  out -= op.apply(u);
  return out;
}

SpaceTimeField mode_sum(std::vector<Mode> modes) {
  SpaceTimeField f;
  f.u = [modes](double t, double x) {
    double s = 0.0;
    for (const auto& m : modes) s += m.amplitude * std::cos(m.omega * t + m.theta) * std::cos(m.wavenumber * x + m.phase);
    return cplx(s, 0.0);
  };
  f.ut = [modes](double t, double x) {
    double s = 0.0;
    for (const auto& m : modes)
      s -= m.amplitude * m.omega * std::sin(m.omega * t + m.theta) * std::cos(m.wavenumber * x + m.phase);
    return cplx(s, 0.0);
  };
  f.utt = [modes](double t, double x) {
    double s = 0.0;
    for (const auto& m : modes)
      s -= m.amplitude * m.omega * m.omega * std::cos(m.omega * t + m.theta) * std::cos(m.wavenumber * x + m.phase);
    return cplx(s, 0.0);
  };
  return f;
}

GridFunction sample(const std::function<cplx(double, double)>& fn, double t, std::size_t n_points, double period) {
  GridFunction g(n_points, period);
  for (std::size_t j = 0; j < n_points; ++j) g[j] = fn(t, g.x(j));
  return g;
}

Source manufactured_rhs(std::shared_ptr<const CoefficientSet> cs, SpaceTimeField u_exact, std::size_t n_points,
                        double period) {
  auto op = std::make_shared<SpatialOperator>(cs, n_points, period);
  return [op, u_exact = std::move(u_exact), n_points, period](double t) {
    op->set_time(t);
    GridFunction out = sample(u_exact.utt, t, n_points, period);
    out -= op->apply(sample(u_exact.u, t, n_points, period));
    return out;
  };
}

double cfl_limit(const CoefficientSet& cs, std::size_t n_points, double period, double cfl) {
  const auto grid = make_check_grid(cs.T, n_points, 513, period);
  double sup_a = 0.0;
  for (double t : grid.t)
    for (double x : grid.x) sup_a = std::max(sup_a, cs.a(t, x));
  const double dx = period / static_cast<double>(n_points);
  return cfl * dx / std::sqrt(sup_a + 1.0);
}

Trajectory solve_cauchy(std::shared_ptr<const CoefficientSet> cs, const GridFunction& u0, const GridFunction& u1,
                        const Source& f, std::size_t steps, double dt, const SolverOptions& opts) {
  if (!cs) throw ConfigurationError("solve_cauchy needs a coefficient set");
  require_same_grid(u0, u1, "solve_cauchy");
  if (!(dt > 0.0)) throw ConfigurationError("time step must be positive");
  if (opts.save_every == 0) throw ConfigurationError("save_every must be >= 1");
  if (static_cast<double>(steps) * dt > cs->T * (1.0 + 1e-9))
    throw ConfigurationError("steps * dt exceeds the final time T");

  const std::size_t n = u0.size();
  const double period = u0.period();
  const double limit = cfl_limit(*cs, n, period, opts.cfl);
  if (dt > limit)
    throw NumericalError("CFL violation: dt = " + std::to_string(dt) + " exceeds " + std::to_string(limit));

  if (!opts.force) {
    for (const auto& r : check_all(*cs, make_check_grid(cs->T, n, 513, period)))
      if (!r.verdict)
        throw ConfigurationError("coefficient hypothesis '" + std::string(condition_name(r.condition_id)) +
                                 "' fails; pass force to override");
  }

  SpatialOperator op(cs, n, period, opts.dealias);
  const auto force_at = [&](double t, const GridFunction& u) {
    op.set_time(t);
    GridFunction acc = op.apply(u);
    if (f) acc += f(t);
    return acc;
  };

  Trajectory traj;
  traj.step_dt = dt;
  traj.save_every = opts.save_every;
  traj.dt = dt * static_cast<double>(opts.save_every);
  traj.coeffs = cs;
  traj.times.push_back(0.0);
  traj.u.push_back(u0);
  traj.ut.push_back(u1);

  GridFunction u = u0;
  GridFunction v = u1;
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    const double th = t + 0.5 * dt;
    const double t1 = static_cast<double>(step + 1) * dt;

    const GridFunction k1v = force_at(t, u);
    const GridFunction& k1u = v;

    GridFunction u2 = u;
    u2.add_scaled(0.5 * dt, k1u);
    GridFunction k2u = v;
    k2u.add_scaled(0.5 * dt, k1v);
    const GridFunction k2v = force_at(th, u2);

    GridFunction u3 = u;
    u3.add_scaled(0.5 * dt, k2u);
    GridFunction k3u = v;
    k3u.add_scaled(0.5 * dt, k2v);
    const GridFunction k3v = force_at(th, u3);

    GridFunction u4 = u;
    u4.add_scaled(dt, k3u);
    GridFunction k4u = v;
    k4u.add_scaled(dt, k3v);
    const GridFunction k4v = force_at(t1, u4);

    u.add_scaled(dt / 6.0, k1u).add_scaled(dt / 3.0, k2u).add_scaled(dt / 3.0, k3u).add_scaled(dt / 6.0, k4u);
    v.add_scaled(dt / 6.0, k1v).add_scaled(dt / 3.0, k2v).add_scaled(dt / 3.0, k3v).add_scaled(dt / 6.0, k4v);

    if (!std::isfinite(u.norm2() + v.norm2()))
      throw NumericalError("non-finite state at t = " + std::to_string(t1));

    if ((step + 1) % opts.save_every == 0) {
      traj.times.push_back(t1);
      traj.u.push_back(u);
      traj.ut.push_back(v);
    }
  }
  return traj;
}

std::vector<GridFunction> second_time_derivative(const Trajectory& traj) {
  const std::size_t m = traj.size();
  if (m < 3) throw ConfigurationError("second_time_derivative needs at least three saved states");
  const double h = traj.dt;
  std::vector<GridFunction> out;
  out.reserve(m);
  const auto combo = [&](std::initializer_list<std::pair<std::size_t, double>> terms) {
    GridFunction g(traj.ut[0].size(), traj.ut[0].period());
    for (auto [i, w] : terms) g.add_scaled(w / (2.0 * h), traj.ut[i]);
    return g;
  };
  out.push_back(combo({{0, -3.0}, {1, 4.0}, {2, -1.0}}));
  for (std::size_t i = 1; i + 1 < m; ++i) out.push_back(combo({{i + 1, 1.0}, {i - 1, -1.0}}));
  out.push_back(combo({{m - 1, 3.0}, {m - 2, -4.0}, {m - 3, 1.0}}));
  return out;
}

std::vector<GridFunction> apply_L_along(const Trajectory& traj) {
  if (!traj.coeffs) throw ConfigurationError("trajectory carries no coefficient set");
  const auto utt = second_time_derivative(traj);
  SpatialOperator op(traj.coeffs, traj.u[0].size(), traj.u[0].period());
  std::vector<GridFunction> out;
  out.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    op.set_time(traj.times[i]);
    GridFunction lu = utt[i];
    lu -= op.apply(traj.u[i]);
    out.push_back(std::move(lu));
  }
  return out;
}

}  // namespace lpe
