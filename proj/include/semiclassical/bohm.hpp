#pragma once

#include <cstdint>
#include <vector>

#include "semiclassical/quantum.hpp"
#include "semiclassical/trajectory_bundle.hpp"

namespace semiclassical {

struct BohmConfig {
  std::size_t n_particles = 100;
  std::uint64_t seed = 1;
  double dt = 1e-2;
  // Density below mask_threshold * max ρ of the current slice censors the particle.
  double mask_threshold = 1e-6;

  void validate() const;
};

// n i.i.d. draws from |ψ|² with ψ² treated as piecewise linear between nodes (exact inverse
// CDF per cell). 2D draws the row-axis marginal first, then the conditional along the other
// axis. Deterministic for a given seed.
std::vector<Point> sample_quantum_equilibrium(const WaveFunction& psi0, std::size_t n,
                                              std::uint64_t seed);

// Cumulative distribution of |ψ|² along one axis (marginal in 2D) under the same piecewise
// linear model, evaluated at arbitrary points.
class DensityCdf {
 public:
  DensityCdf(const WaveFunction& psi, std::size_t axis);
  double operator()(double x) const;
  double inverse(double u) const;

 private:
  Axis axis_;
  std::vector<double> density_;  // marginal density at nodes
  std::vector<double> cumulative_;
};

// dX/dt = (ħ/m) Im(∇ψ/ψ) at X, by RK4 with step dt. ∇ψ is the spectral derivative on each
// slice; velocities are interpolated (bi)linearly in space and linearly in time. Particles that
// leave the grid are flagged Escaped; ones entering the low-density mask are flagged Masked.
// Output samples coincide with the slice times.
TrajectoryBundle integrate_bohm(const std::vector<double>& times,
                                const std::vector<WaveFunction>& slices,
                                const std::vector<Point>& initial, double dt,
                                double mask_threshold = 1e-6);

// Kolmogorov-Smirnov distance between the valid particles and |ψ(·, t)|² at every slice
// (maximum over the per-axis marginals in 2D). Throws StatisticalPower below 100 particles.
std::vector<double> equivariance_check(const TrajectoryBundle& bundle,
                                       const std::vector<WaveFunction>& slices);

// Reduced double slit: transverse 1D wave function, longitudinal motion at constant speed so
// that time maps to distance from the slits. Lengths in units of the slit width by default.
struct DoubleSlitGeometry {
  double mass = 1.0;
  double hbar = 1.0;              // reference ħ, multiplied by hbar_scale
  double slit_sigma = 1.0;        // standard deviation of |ψ|² for each slit
  double slit_separation = 6.0;   // centre-to-centre distance
  double screen_time = 60.0;      // flight time from the slits to the screen
  double forward_speed = 1.0;     // maps flight time to distance
  std::size_t slices = 200;
  std::size_t steps_per_slice = 10;  // Bohm RK4 steps between slices
  std::size_t screen_bins = 201;
  double mask_threshold = 1e-6;

  void validate() const;
};

struct FringeAnalysis {
  std::vector<double> bin_centers;
  std::vector<double> probability;      // ∫|ψ|² per bin at the screen
  std::vector<double> particle_counts;  // Bohm arrivals per bin
  std::vector<double> maxima;           // positions of resolved fringes
  std::vector<double> visibility;       // per resolved fringe
  double fringe_spacing = 0.0;          // mean spacing of resolved maxima
};

// Local maxima of `probability` above 5% of the peak whose visibility against the larger
// adjacent minimum exceeds min_visibility.
FringeAnalysis analyze_fringes(std::vector<double> centers, std::vector<double> probability,
                               double min_visibility = 0.5);

struct DoubleSlitResult {
  Evolution evolution;
  TrajectoryBundle bundle;
  FringeAnalysis screen;
  std::vector<Point> initial;
  double hbar = 1.0;
};

WaveFunction double_slit_initial_state(const DoubleSlitGeometry& geometry, const Grid& grid,
                                       double hbar);
// Transverse grid wide enough for the spread at the screen and fine enough for its phase.
Grid double_slit_grid(const DoubleSlitGeometry& geometry, double hbar);

DoubleSlitResult double_slit_scenario(const DoubleSlitGeometry& geometry, double hbar_scale,
                                      std::size_t n_particles, std::uint64_t seed);

}  // namespace semiclassical
