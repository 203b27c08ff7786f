#pragma once

// Fourier pseudospectral solver for L u = f on the torus, classical RK4 on the
// first-order system (u, v = d_t u). The divergence term is evaluated as
// FFT -> i xi -> inverse -> multiply by a -> FFT -> i xi -> inverse.

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "lpe/coefficients.hpp"
#include "lpe/grid.hpp"

namespace lpe {

/// Right-hand side sampler t -> f(t, .). An empty function means f == 0.
using Source = std::function<GridFunction(double)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<GridFunction> u;
  std::vector<GridFunction> ut;
  /// Spacing of saved states.
  double dt = 0.0;
  /// Integrator step; dt = step_dt * save_every.
  double step_dt = 0.0;
  std::size_t save_every = 1;
  std::shared_ptr<const CoefficientSet> coeffs;

  std::size_t size() const { return times.size(); }
};

/// Evaluates P(t) u = d_x(a d_x u) - b d_x u - c u with coefficients frozen at t.
class SpatialOperator {
 public:
  SpatialOperator(std::shared_ptr<const CoefficientSet> cs, std::size_t n_points, double period = kTwoPi,
                  bool dealias = false);

  void set_time(double t);
  double time() const { return t_; }
  GridFunction apply(const GridFunction& u) const;

  std::span<const cplx> a_samples() const { return a_; }

 private:
  std::shared_ptr<const CoefficientSet> cs_;
  std::size_t n_;
  double period_;
  bool dealias_;
  double t_ = -1.0;
  std::vector<double> dsym_;
  std::vector<cplx> a_, b_, c_;
  // 2N-point samples for the dealiased products.
  std::vector<cplx> a_fine_, b_fine_, c_fine_;
};

/// L u(t, .) = ut2 - d_x(a d_x u) + b d_x u + c u for a supplied d_t^2 u.
GridFunction apply_L(const CoefficientSet& cs, const GridFunction& u, const GridFunction& ut2, double t);

/// Closed-form space-time function with analytic first and second time derivatives.
struct SpaceTimeField {
  std::function<cplx(double, double)> u;
  std::function<cplx(double, double)> ut;
  std::function<cplx(double, double)> utt;
};

/// One separable term A cos(omega t + theta) cos(xi x + phase).
struct Mode {
  double amplitude = 1.0;
  double omega = 1.0;
  double theta = 0.0;
  double wavenumber = 1.0;
  double phase = 0.0;
};

SpaceTimeField mode_sum(std::vector<Mode> modes);

GridFunction sample(const std::function<cplx(double, double)>& fn, double t, std::size_t n_points,
                    double period = kTwoPi);

/// f := L u_exact, so that u_exact solves L u = f.
Source manufactured_rhs(std::shared_ptr<const CoefficientSet> cs, SpaceTimeField u_exact, std::size_t n_points,
                        double period = kTwoPi);

struct SolverOptions {
  double cfl = 0.5;
  std::size_t save_every = 1;
  bool dealias = false;
  /// Skip the coefficient hypothesis checks.
  bool force = false;
};

/// Largest admissible step: cfl * dx / sqrt(sup_{[0,T] x grid} a + 1).
double cfl_limit(const CoefficientSet& cs, std::size_t n_points, double period = kTwoPi, double cfl = 0.5);

/// Advances `steps` RK4 steps of size dt from (u0, u1). Throws NumericalError on a CFL
/// violation or a non-finite state, ConfigurationError when a hypothesis check fails.
Trajectory solve_cauchy(std::shared_ptr<const CoefficientSet> cs, const GridFunction& u0, const GridFunction& u1,
                        const Source& f, std::size_t steps, double dt, const SolverOptions& opts = {});

/// d_t^2 u at every saved time from central differences of d_t u (one-sided second order at the ends).
std::vector<GridFunction> second_time_derivative(const Trajectory& traj);

/// L u at every saved time, using second_time_derivative.
std::vector<GridFunction> apply_L_along(const Trajectory& traj);

}  // namespace lpe
