#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semiclassical/bohm.hpp"
#include "semiclassical/quantum.hpp"

namespace semiclassical {

// One ħ value of a sweep. Metrics that a particular check does not measure stay empty.
struct SweepPoint {
  double hbar_factor = 1.0;
  double hbar = 1.0;
  std::optional<double> action_sup_err;  // sup |S^ħ - S_HL| on the mask, modulo a constant
  std::optional<double> density_dist;    // max over slices of W1(ρ^ħ, ρ_classical)
  std::optional<double> traj_rms;        // RMS |X_bohm - X_classical| over particles and slices
  double mask_coverage = 1.0;            // smallest ρ^ħ mass inside the comparison mask
  std::size_t grid_nodes = 0;
  double dx = 0.0;
  double dt = 0.0;
  std::size_t censored = 0;  // Bohm particles that left the valid region
};

struct SweepReport {
  std::string scenario;
  std::vector<SweepPoint> points;

  // Values of one metric along the sweep (all points must carry it).
  std::vector<double> column(std::optional<double> SweepPoint::*metric) const;
  // Every consecutive pair satisfies next <= previous.
  static bool nonincreasing(const std::vector<double>& values);
};

// ħ multipliers must be positive and strictly decreasing.
void validate_factors(const std::vector<double>& factors);

// Indiscerned preparation in a linear potential: Gaussian ρ0 of width sigma0 around x0 and
// S0 = m v0 x, both independent of ħ.
struct IndiscernedScenario {
  double mass = 1.0;
  double force = 1.0;
  double sigma0 = 0.25;
  double x0 = 0.0;
  double v0 = 0.5;
  double t_end = 0.5;
  double hbar_ref = 1.0;
  std::size_t slices = 20;
  std::size_t bohm_substeps = 20;  // Bohm RK4 steps per slice
  std::size_t hopf_lax_nodes = 257;
  std::size_t max_nodes = std::size_t{1} << 18;
  double mask_threshold = 1e-6;
  void validate() const;
};

// All three metrics for every factor in one pass (the quantum evolution is shared).
SweepReport indiscerned_sweep(const IndiscernedScenario& scenario,
                              const std::vector<double>& factors, std::size_t n_particles,
                              std::uint64_t seed);

// S^ħ against the Minplus path integral and ρ^ħ against characteristics-advected ρ.
SweepReport action_limit_check(const IndiscernedScenario& scenario,
                               const std::vector<double>& factors);

// Bohmian paths against classical characteristics from the same initial points.
SweepReport trajectory_limit_check(const IndiscernedScenario& scenario,
                                   const std::vector<double>& factors, std::size_t n_particles,
                                   std::uint64_t seed);
SweepReport trajectory_limit_check(const DoubleSlitGeometry& geometry,
                                   const std::vector<double>& factors, std::size_t n_particles,
                                   std::uint64_t seed);

struct CoherentSweepPoint {
  double hbar_factor = 1.0;
  double hbar = 1.0;
  double sigma_expected = 0.0;  // sqrt(ħ / 2mω)
  double sigma_analytic = 0.0;  // measured on the gridded analytic density
  double sigma_evolved = 0.0;   // measured on the split-step state
  // max |S^ħ - S_det + (d/2)ħωt| on the mask, analytic state and evolved state
  // (the latter modulo 2πħ).
  double offset_err_analytic = 0.0;
  double offset_err_evolved = 0.0;
  double l2_error = 0.0;  // split-step vs analytic at the final time
  std::size_t grid_nodes = 0;
  double dx = 0.0;
  double dt = 0.0;
};

struct CoherentSweepReport {
  std::vector<CoherentSweepPoint> points;
  double t = 0.0;
  // Least-squares slope of log σ against log ħ.
  double slope_analytic = 0.0;
  double slope_evolved = 0.0;
};

// 1D coherent state evolved by split-step to time t (default: a quarter period) with grid and
// step scaled to each ħ. params.hbar is the reference value.
CoherentSweepReport coherent_limit_check(const CoherentStateParams& params,
                                         const std::vector<double>& factors,
                                         std::optional<double> t = std::nullopt,
                                         std::size_t max_nodes = std::size_t{1} << 18);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// 1-Wasserstein distance between two nonnegative nodal mass densities on the same 1D grid,
// each normalized to unit mass.
double wasserstein1(const Grid& grid, const std::vector<double>& a, const std::vector<double>& b);

}  // namespace semiclassical
