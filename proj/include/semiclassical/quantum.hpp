#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "semiclassical/fft.hpp"
#include "semiclassical/grid.hpp"
#include "semiclassical/lagrangian.hpp"
#include "semiclassical/minplus.hpp"

namespace semiclassical {

// Complex field on a periodic grid together with the ħ and mass it evolves with.
class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(Grid grid, std::vector<Complex> amplitudes, double hbar, double mass);

  // ψ = √ρ exp(i S / ħ), normalized.
  static WaveFunction from_polar(const Grid& grid, const std::function<double(const Point&)>& rho,
                                 const std::function<double(const Point&)>& action, double hbar,
                                 double mass);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return psi_.size(); }
  double hbar() const { return hbar_; }
  double mass() const { return mass_; }
  const std::vector<Complex>& amplitudes() const { return psi_; }
  std::vector<Complex>& amplitudes() { return psi_; }
  Complex operator[](std::size_t i) const { return psi_[i]; }

  // sqrt(Σ |ψ|² dV); on a periodic grid this is the trapezoid rule.
  double norm() const;
  WaveFunction& normalize();
  std::vector<double> density() const;

 private:
  Grid grid_;
  std::vector<Complex> psi_;
  double hbar_ = 1.0;
  double mass_ = 1.0;
};

// Normalized Gaussian packet: |ψ|² has standard deviation sigma per axis, phase m v·x / ħ.
WaveFunction gaussian_packet(const Grid& grid, const Point& center, double sigma,
                             const Point& velocity, double hbar, double mass);

// sqrt(Σ |a - b|² dV).
double l2_distance(const WaveFunction& a, const WaveFunction& b);

struct Moments {
  Point mean;
  Point variance;  // per axis
};
Moments position_moments(const WaveFunction& psi);

struct SplitStepOptions {
  // Width of the monitored edge band, as a fraction of each axis.
  double edge_fraction = 0.05;
  double warn_edge_mass = 1e-8;
  double max_edge_mass = 1e-4;
  // Steps between edge-mass checks.
  std::size_t check_interval = 64;
};

struct EvolutionLog {
  double max_edge_mass = 0.0;
  double norm_drift = 0.0;
  std::vector<std::string> warnings;
};

// Strang splitting exp(-iV dt/2ħ) exp(-iT dt/ħ) exp(-iV dt/2ħ) with the kinetic factor applied
// in Fourier space. Requires dt·max|V|/ħ < 0.5 (Resolution error otherwise). Edge-band mass above
// warn_edge_mass is logged; above max_edge_mass it throws BoundaryBreach.
WaveFunction split_step_evolve(const WaveFunction& psi, const LagrangianSpec& potential, double dt,
                               std::size_t n_steps, const SplitStepOptions& options = {},
                               EvolutionLog* log = nullptr);

struct Evolution {
  std::vector<double> times;
  std::vector<WaveFunction> slices;
  EvolutionLog log;
};

// Slices at t = k * steps_per_slice * dt for k = 0..n_slices.
Evolution evolve_slices(const WaveFunction& psi0, const LagrangianSpec& potential, double dt,
                        std::size_t steps_per_slice, std::size_t n_slices,
                        const SplitStepOptions& options = {});

// Ψ(x, t) = F Σ exp(i S_cl(x, t; x0)/ħ) Ψ0(x0) dV over the grid. F carries the Van Vleck phase
// e^{-iπd/4} (plus the Maslov phase past harmonic focal points); its modulus is fixed by
// normalizing the result. Throws Resolution if the integrand phase advances by more than π/4
// between neighbouring significant nodes.
WaveFunction feynman_propagate(const WaveFunction& psi0, const LagrangianSpec& spec, double t);

struct MadelungPair {
  ScalarField rho;
  ScalarField action;      // +inf outside the mask
  std::vector<bool> mask;  // rho > mask_threshold * max rho
  double hbar = 1.0;

  // √ρ exp(iS/ħ) on the mask, 0 elsewhere.
  std::vector<Complex> recompose() const;
};

// ρ = |ψ|², S = ħ · unwrapped phase. 1D unwraps outward from the density maximum; 2D flood-fills
// from it over masked 4-neighbours (further components start from their own maximum).
MadelungPair madelung_decompose(const WaveFunction& psi, double mask_threshold = 1e-6);

// Q = -(ħ²/2m) Δ√ρ / √ρ on masked interior nodes whose stencil is masked; +inf elsewhere.
ScalarField quantum_potential(const MadelungPair& pair, double hbar, double mass);

struct CoherentStateParams {
  double mass = 1.0;
  double omega = 1.0;
  double hbar = 1.0;
  Point x0{};
  Point v0{};
  std::size_t dim = 1;

  // σ_ħ = sqrt(ħ / (2 m ω)).
  double sigma() const;
  void validate() const;
};

struct CoherentState {
  WaveFunction psi;
  MadelungPair analytic;  // exact ρ and S on every node
  Point center;           // ξ(t)
  Point center_velocity;  // ξ'(t)
  double g = 0.0;         // deterministic-action offset g(t)
};

// Harmonic-oscillator coherent state at time t:
//   ρ = (2πσ²)^{-d/2} exp(-|x - ξ(t)|² / 2σ²),  S = m ξ'(t)·x + g(t) - (d/2) ħ ω t,
// with ξ and g from the deterministic action of the classical oscillator.
CoherentState coherent_state(const CoherentStateParams& params, double t, const Grid& grid);

}  // namespace semiclassical
