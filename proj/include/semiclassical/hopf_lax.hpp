#pragma once

#include <cstddef>
#include <vector>

#include "semiclassical/actions.hpp"
#include "semiclassical/lagrangian.hpp"
#include "semiclassical/minplus.hpp"
#include "semiclassical/trajectory_bundle.hpp"

namespace semiclassical {

struct HopfLaxOptions {
  // Brent refinement around the best node (see ConvolutionOptions).
  bool refine = true;
  // Elements per path for the numeric kernel used with tabulated potentials.
  std::size_t numeric_steps = 16;
  // Output grid; defaults to the grid of S0.
  std::optional<Grid> output_grid;
};

struct HopfLaxField {
  ScalarField action;
  // Nodes whose minimizing initial point lies strictly inside the S0 window.
  std::vector<bool> interior;
  std::vector<Point> argmin;
};

// Minplus path integral S(x, t) = inf_{x0} { S0(x0) + S_cl(x, t; x0) }.
HopfLaxField hamilton_jacobi_field_detailed(const LagrangianSpec& spec, const ScalarField& s0,
                                            double t, const HopfLaxOptions& options = {});
ScalarField hamilton_jacobi_field(const LagrangianSpec& spec, const ScalarField& s0, double t,
                                  const HopfLaxOptions& options = {});

// Kernel (x, x0) -> S_cl(x, t; x0) for the given Lagrangian.
Kernel action_kernel(const LagrangianSpec& spec, double t, std::size_t numeric_steps = 16);

struct VectorField {
  Grid grid;
  std::vector<Point> values;
  std::vector<bool> valid;
};

// v = ∇S / m: centered differences inside, second-order one-sided at the boundary; nodes that
// touch +inf are marked invalid.
VectorField velocity_field(const ScalarField& s, double mass);

struct HJSolution {
  LagrangianSpec lagrangian;
  ScalarField initial;
  std::vector<double> times;          // increasing, starting at 0
  std::vector<ScalarField> slices;    // S(·, times[k]); slices[0] == initial
};

HJSolution solve_hamilton_jacobi(const LagrangianSpec& spec, const ScalarField& s0,
                                 const std::vector<double>& times,
                                 const HopfLaxOptions& options = {});

struct ResidualField {
  double time = 0.0;
  ScalarField residual;     // +inf where masked
  std::vector<bool> mask;   // true where the residual is reported
  double max_abs = 0.0;     // over the mask
};

// R = ∂S/∂t + |∇S|²/(2m) + V. A probe equal to an interior slice time uses the centered
// difference of its neighbours; a probe strictly between two slices uses their difference and
// their average for the spatial terms. Masks the boundary ring, nodes next to +inf and kinks
// (one-sided gradient jump above 10x the median jump).
std::vector<ResidualField> hj_residual(const HJSolution& solution,
                                       const std::vector<double>& probe_times);

struct ParticleEnsemble {
  std::vector<Point> positions;
  std::vector<double> weights;

  void validate() const;
  static ParticleEnsemble uniform(std::vector<Point> positions);
};

enum class DensityEstimator {
  Histogram,  // nearest-node bins
  Linear,     // mass split linearly (bilinearly) between the surrounding nodes
};

struct AdvectionOptions {
  std::size_t slices = 10;  // HJ solves / output instants after t = 0
  DensityEstimator estimator = DensityEstimator::Histogram;
  HopfLaxOptions hopf_lax;
  // Grid for density estimates; defaults to the grid of S0.
  std::optional<Grid> density_grid;
};

struct AdvectionResult {
  TrajectoryBundle bundle;
  std::vector<ScalarField> density;   // per output instant
  std::vector<double> escaped_mass;   // per output instant
  HJSolution solution;
};

// Characteristics dX/dt = ∇S(X, t)/m with RK4 (step dt), bilinear interpolation in space and
// linear in time between HJ slices. Weights never change; particles leaving the grid are
// flagged and their mass moves to escaped_mass.
AdvectionResult advect_ensemble(const LagrangianSpec& spec, const ScalarField& s0,
                                const ParticleEnsemble& ensemble, double t_end, double dt,
                                const AdvectionOptions& options = {});

// Density estimate of weighted particles on a grid (mass per unit volume).
ScalarField estimate_density(const Grid& grid, const std::vector<Point>& positions,
                             const std::vector<double>& weights, const std::vector<bool>& include,
                             DensityEstimator estimator);

}  // namespace semiclassical
