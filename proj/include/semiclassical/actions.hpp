#pragma once

#include <cstddef>
#include <vector>

#include "semiclassical/grid.hpp"
#include "semiclassical/lagrangian.hpp"
#include "semiclassical/minplus.hpp"

namespace semiclassical {

// Time-sampled path x(s) with its velocity.
struct Trajectory {
  std::vector<double> times;
  std::vector<Point> positions;
  std::vector<Point> velocities;

  std::size_t size() const { return times.size(); }
  void validate() const;
};

// Minimal action over paths from x0 at time 0 to x at time t.
//
// Free/Linear:  m|x-x0|²/(2t) + K·(x+x0) t/2 - |K|² t³/(24m)
// Harmonic:     mω/(2 sin ωt) [(|x|²+|x0|²) cos ωt - 2 x·x0]
//
// Throws InvalidHorizon for t <= 0, Singularity at harmonic focal times (ωt ∈ πZ) and
// InvalidArgument for tabulated potentials.
ExtendedReal el_action_closed(const LagrangianSpec& spec, const Point& x, double t,
                              const Point& x0);

// Parabolic minimizer in a linear potential, sampled at n uniformly spaced instants.
Trajectory optimal_trajectory_linear(double mass, const Point& force, const Point& x, double t,
                                     const Point& x0, std::size_t n);

struct NumericAction {
  ExtendedReal action;
  Trajectory path;  // element end points and midpoints, 2 * n_steps + 1 samples
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

struct NumericActionOptions {
  double gradient_tolerance = 1e-10;
  std::size_t max_iterations = 20000;
};

// Direct minimization of the action over continuous piecewise-quadratic paths with n_steps
// elements and fixed end points. Kinetic energy is integrated exactly and the potential with
// 3-point Gauss-Legendre per element, so linear-potential minimizers are reproduced exactly.
// Preconditioned Polak-Ribière conjugate gradient from the straight line; throws
// ConvergenceError if the gradient norm stays above tolerance.
NumericAction el_action_numeric(const LagrangianSpec& spec, const Point& x, double t,
                                const Point& x0, std::size_t n_steps,
                                const NumericActionOptions& options = {});

// Action of a discerned particle: S(x, t) = m ξ'(t)·x + g(t) along the Newtonian trajectory
// ξ from (x0, v0), with dg/dt = -½m|ξ'|² - V(ξ) - m ξ''·ξ.
class DeterministicAction {
 public:
  const Trajectory& xi() const { return xi_; }
  const std::vector<double>& g_values() const { return g_; }
  const LagrangianSpec& spec() const { return spec_; }

  // Action at sample k.
  double action(const Point& x, std::size_t k) const;
  // Action at an arbitrary t in [0, t_end] (one RK4 sub-step from the preceding sample).
  double action_at(const Point& x, double t) const;

  struct State {
    Point position, velocity;
    double g = 0.0;
  };
  State state_at(double t) const;

  // Max relative energy drift |E(t) - E(0)| / max(|E(0)|, m|v0|², ...) over the samples.
  double energy_drift() const { return energy_drift_; }

 private:
  friend DeterministicAction deterministic_action(const LagrangianSpec&, const Point&,
                                                  const Point&, double, double);
  explicit DeterministicAction(LagrangianSpec spec) : spec_(std::move(spec)) {}

  LagrangianSpec spec_;
  Trajectory xi_;
  std::vector<double> g_;
  double energy_drift_ = 0.0;
};

// ξ by classical RK4 with step dt (shrunk so that t_end is a whole number of steps);
// g by cumulative Simpson quadrature with ξ'' taken from the force. Throws Stability when the
// relative energy drift exceeds 1e-6.
DeterministicAction deterministic_action(const LagrangianSpec& spec, const Point& x0,
                                         const Point& v0, double t_end, double dt);

}  // namespace semiclassical
