#include "semiclassical/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "semiclassical/errors.hpp"
#include "semiclassical/hopf_lax.hpp"

namespace semiclassical {

std::vector<double> SweepReport::column(std::optional<double> SweepPoint::*metric) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    require((p.*metric).has_value(), ErrorKind::InvalidArgument,
            "sweep point does not carry the requested metric");
    out.push_back(*(p.*metric));
  }
  return out;
}

bool SweepReport::nonincreasing(const std::vector<double>& values) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] <= values[i - 1])) return false;
  return true;
}

void validate_factors(const std::vector<double>& factors) {
  require(!factors.empty(), ErrorKind::InvalidArgument, "empty hbar sweep");
  for (std::size_t i = 0; i < factors.size(); ++i) {
    require(factors[i] > 0.0 && std::isfinite(factors[i]), ErrorKind::InvalidArgument,
            "hbar factors must be positive");
    if (i > 0)
      require(factors[i] < factors[i - 1], ErrorKind::InvalidArgument,
              "hbar factors must be strictly decreasing");
  }
}

void IndiscernedScenario::validate() const {
  require(mass > 0 && sigma0 > 0 && t_end > 0 && hbar_ref > 0, ErrorKind::InvalidArgument,
          "indiscerned scenario: mass, sigma0, t_end and hbar_ref must be positive");
  require(slices >= 1 && bohm_substeps >= 1 && hopf_lax_nodes >= 8, ErrorKind::InvalidArgument,
          "indiscerned scenario: slices, bohm_substeps >= 1 and hopf_lax_nodes >= 8");
  require(mask_threshold > 0 && mask_threshold < 1, ErrorKind::InvalidArgument,
          "mask_threshold must lie in (0, 1)");
}

double wasserstein1(const Grid& grid, const std::vector<double>& a, const std::vector<double>& b) {
  require(grid.dim() == 1, ErrorKind::Shape, "wasserstein1 needs a 1D grid");
  require(a.size() == grid.size() && b.size() == grid.size(), ErrorKind::Shape,
          "density length differs from the grid");
  double ta = 0.0, tb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ta += a[i];
    tb += b[i];
  }
  require(ta > 0.0 && tb > 0.0, ErrorKind::InvalidArgument, "densities carry no mass");
  double fa = 0.0, fb = 0.0, w = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    fa += a[i] / ta;
    fb += b[i] / tb;
    w += std::abs(fa - fb);
  }
  return w * grid.axis(0).spacing;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::Shape,
          "slope needs two or more matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, ErrorKind::InvalidArgument, "log-log slope needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

// Periodic grid over [lo, hi] fine enough for wavenumbers up to k_max.
Grid resolving_grid(double lo, double hi, double k_max, double hbar, std::size_t max_nodes) {
  const double dx = std::numbers::pi / (1.25 * k_max);
  const auto needed = static_cast<std::size_t>(std::ceil((hi - lo) / dx));
  const std::size_t n = fft_size_at_least(needed);
  if (n > max_nodes) {
    std::ostringstream msg;
    msg << "hbar = " << hbar << " needs " << n << " grid nodes (spacing " << dx
        << ") to resolve wavenumbers up to " << k_max << "; the limit is " << max_nodes;
    fail(ErrorKind::Resolution, msg.str());
  }
  return Grid(Axis::periodic(lo, hi, n));
}

// Largest |V| over the nodes of a 1D grid.
double max_abs_potential(const LagrangianSpec& spec, const Grid& g) {
  double v = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) v = std::max(v, std::abs(spec.potential(g.point(i))));
  return v;
}

std::size_t steps_for(double span, double hbar, double max_v) {
  if (max_v <= 0.0) return 1;
  return static_cast<std::size_t>(std::ceil(span * max_v / (0.45 * hbar)));
}

SweepPoint indiscerned_point(const IndiscernedScenario& sc, double factor, std::size_t n_particles,
                             std::uint64_t seed, bool fields, bool paths) {
  SweepPoint out;
  out.hbar_factor = factor;
  out.hbar = sc.hbar_ref * factor;
  const double hbar = out.hbar, m = sc.mass, K = sc.force;
  const auto spec = LagrangianSpec::linear(m, Point{K, 0.0});
  auto shift = [&](double t) { return sc.v0 * t + 0.5 * K * t * t / m; };

  double c_lo = sc.x0, c_hi = sc.x0, max_shift = 0.0;
  for (int s = 0; s <= 64; ++s) {
    const double d = shift(sc.t_end * s / 64.0);
    c_lo = std::min(c_lo, sc.x0 + d);
    c_hi = std::max(c_hi, sc.x0 + d);
    max_shift = std::max(max_shift, std::abs(d));
  }
  const double tau = hbar * sc.t_end / (2.0 * m * sc.sigma0 * sc.sigma0);
  const double sigma_end = sc.sigma0 * std::sqrt(1.0 + tau * tau);
  const double v_max = std::max(std::abs(sc.v0), std::abs(sc.v0 + K * sc.t_end / m));
  const Grid grid = resolving_grid(c_lo - 7.0 * sigma_end, c_hi + 7.0 * sigma_end,
                                   m * v_max / hbar + 6.0 / sc.sigma0, hbar, sc.max_nodes);
  const double span = sc.t_end / static_cast<double>(sc.slices);
  const std::size_t steps = steps_for(span, hbar, max_abs_potential(spec, grid));
  const double dt = span / static_cast<double>(steps);
  out.grid_nodes = grid.size();
  out.dx = grid.axis(0).spacing;
  out.dt = dt;

  const double s2 = sc.sigma0 * sc.sigma0;
  auto rho0 = [&](const Point& p) {
    return std::exp(-(p.x - sc.x0) * (p.x - sc.x0) / (2 * s2)) /
           std::sqrt(2 * std::numbers::pi * s2);
  };
  const auto psi0 = WaveFunction::from_polar(
      grid, rho0, [&](const Point& p) { return m * sc.v0 * p.x; }, hbar, m);
  const Evolution evo = evolve_slices(psi0, spec, dt, steps, sc.slices);

  if (fields) {
    // Classical side on its own window, padded so every minimizer is interior.
    const double pad = max_shift + 0.1 * grid.axis(0).length();
    const Grid hl_grid(Axis::spanning(grid.axis(0).origin - pad, grid.axis(0).upper() + pad,
                                      sc.hopf_lax_nodes));
    const auto s0 = ScalarField::sample(hl_grid, [&](const Point& p) { return m * sc.v0 * p.x; });
    ParticleEnsemble ens;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double w = rho0(grid.point(i));
      if (w <= 0.0) continue;
      ens.positions.push_back(grid.point(i));
      ens.weights.push_back(w);
    }
    const double total = std::accumulate(ens.weights.begin(), ens.weights.end(), 0.0);
    for (auto& w : ens.weights) w /= total;
    AdvectionOptions adv;
    adv.slices = sc.slices;
    adv.estimator = DensityEstimator::Linear;
    adv.density_grid = grid;
    const auto classical = advect_ensemble(spec, s0, ens, sc.t_end, span / 4.0, adv);

    double action_err = 0.0, dist = 0.0, coverage = 1.0;
    for (std::size_t k = 1; k < evo.slices.size(); ++k) {
      const auto pair = madelung_decompose(evo.slices[k], sc.mask_threshold);
      const auto& hl = classical.solution.slices[k];
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, in = 0.0, all = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = pair.rho[i].value();
        all += r;
        if (!pair.mask[i]) continue;
        const ExtendedReal s = hl.at(grid.point(i));
        if (s.is_infinite()) continue;
        in += r;
        const double d = pair.action[i].value() - s.value();
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
      require(hi >= lo, ErrorKind::DegenerateState, "empty action comparison mask");
      action_err = std::max(action_err, 0.5 * (hi - lo));
      coverage = std::min(coverage, in / all);
      dist = std::max(dist, wasserstein1(grid, evo.slices[k].density(),
                                         classical.density[k].to_doubles()));
    }
    out.action_sup_err = action_err;
    out.density_dist = dist;
    out.mask_coverage = coverage;
  }

  if (paths) {
    const auto x0 = sample_quantum_equilibrium(evo.slices.front(), n_particles, seed);
    const auto bundle = integrate_bohm(evo.times, evo.slices, x0,
                                       span / static_cast<double>(sc.bohm_substeps),
                                       sc.mask_threshold);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < bundle.particles(); ++p) {
      if (bundle.flags[p] != ParticleFlag::Valid) ++out.censored;
      for (std::size_t k = 0; k < bundle.times.size() && bundle.valid_at(p, k); ++k) {
        const double d = bundle.positions[p][k].x - (x0[p].x + shift(bundle.times[k]));
        acc += d * d;
        ++count;
      }
    }
    require(count > 0, ErrorKind::StatisticalPower, "no valid Bohm samples");
    out.traj_rms = std::sqrt(acc / static_cast<double>(count));
  }
  return out;
}

SweepReport indiscerned(const IndiscernedScenario& sc, const std::vector<double>& factors,
                        std::size_t n, std::uint64_t seed, bool fields, bool paths,
                        std::string name) {
  sc.validate();
  validate_factors(factors);
  SweepReport r;
  r.scenario = std::move(name);
  for (double f : factors) r.points.push_back(indiscerned_point(sc, f, n, seed, fields, paths));
  return r;
}

}  // namespace

SweepReport indiscerned_sweep(const IndiscernedScenario& scenario,
                              const std::vector<double>& factors, std::size_t n_particles,
                              std::uint64_t seed) {
  return indiscerned(scenario, factors, n_particles, seed, true, true, "indiscerned-linear");
}

SweepReport action_limit_check(const IndiscernedScenario& scenario,
                               const std::vector<double>& factors) {
  return indiscerned(scenario, factors, 0, 0, true, false, "indiscerned-linear");
}

SweepReport trajectory_limit_check(const IndiscernedScenario& scenario,
                                   const std::vector<double>& factors, std::size_t n_particles,
                                   std::uint64_t seed) {
  return indiscerned(scenario, factors, n_particles, seed, false, true, "indiscerned-linear");
}

SweepReport trajectory_limit_check(const DoubleSlitGeometry& geometry,
                                   const std::vector<double>& factors, std::size_t n_particles,
                                   std::uint64_t seed) {
  geometry.validate();
  validate_factors(factors);
  SweepReport r;
  r.scenario = "double-slit";
  for (double f : factors) {
    const auto run = double_slit_scenario(geometry, f, n_particles, seed);
    SweepPoint pt;
    pt.hbar_factor = f;
    pt.hbar = run.hbar;
    pt.grid_nodes = run.evolution.slices.front().size();
    pt.dx = run.evolution.slices.front().grid().axis(0).spacing;
    pt.dt = geometry.screen_time / static_cast<double>(geometry.slices);
    // S0 = 0: classical characteristics stay at their starting points.
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < run.bundle.particles(); ++p) {
      if (run.bundle.flags[p] != ParticleFlag::Valid) ++pt.censored;
      for (std::size_t k = 0; k < run.bundle.times.size() && run.bundle.valid_at(p, k); ++k) {
        const double d = run.bundle.positions[p][k].x - run.initial[p].x;
        acc += d * d;
        ++count;
      }
    }
    require(count > 0, ErrorKind::StatisticalPower, "no valid Bohm samples");
    pt.traj_rms = std::sqrt(acc / static_cast<double>(count));
    r.points.push_back(pt);
  }
  return r;
}

CoherentSweepReport coherent_limit_check(const CoherentStateParams& params,
                                         const std::vector<double>& factors,
                                         std::optional<double> t, std::size_t max_nodes) {
  params.validate();
  validate_factors(factors);
  require(params.dim == 1, ErrorKind::InvalidArgument, "the coherent sweep runs in 1D");
  const double T = t.value_or(0.5 * std::numbers::pi / params.omega);
  require(T > 0.0, ErrorKind::InvalidHorizon, "sweep time must be positive");
  const auto spec = LagrangianSpec::harmonic(params.mass, params.omega);
  const double amp = std::hypot(params.x0.x, params.v0.x / params.omega);

  CoherentSweepReport out;
  out.t = T;
  std::vector<double> hb, sa, se;
  for (double f : factors) {
    CoherentStateParams p = params;
    p.hbar = params.hbar * f;
    const double sigma = p.sigma();
    // keep the orbit clear of the 5% edge band monitored by the split-step solver
    const double half = (amp + 10.0 * sigma) / 0.88;
    const Grid grid = resolving_grid(-half, half,
                                     p.mass * p.omega * amp / p.hbar + 6.0 / sigma, p.hbar,
                                     max_nodes);
    const std::size_t steps = steps_for(T, p.hbar, max_abs_potential(spec, grid));
    const double dt = T / static_cast<double>(steps);

    const auto start = coherent_state(p, 0.0, grid);
    const auto end = coherent_state(p, T, grid);
    const auto evolved = split_step_evolve(start.psi, spec, dt, steps);

    CoherentSweepPoint pt;
    pt.hbar_factor = f;
    pt.hbar = p.hbar;
    pt.sigma_expected = sigma;
    pt.sigma_analytic = std::sqrt(position_moments(end.psi).variance.x);
    pt.sigma_evolved = std::sqrt(position_moments(evolved).variance.x);
    pt.l2_error = l2_distance(evolved, end.psi);
    pt.grid_nodes = grid.size();
    pt.dx = grid.axis(0).spacing;
    pt.dt = dt;

    const double zero_point = -0.5 * p.hbar * p.omega * T;
    auto s_det = [&](double x) { return p.mass * end.center_velocity.x * x + end.g; };
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!end.analytic.mask[i]) continue;
      const double x = grid.point(i).x;
      pt.offset_err_analytic = std::max(
          pt.offset_err_analytic, std::abs(end.analytic.action[i].value() - s_det(x) - zero_point));
    }
    const auto pair = madelung_decompose(evolved);
    const auto rho = pair.rho.to_doubles();
    const auto seed = static_cast<std::size_t>(std::max_element(rho.begin(), rho.end()) - rho.begin());
    const double period = 2.0 * std::numbers::pi * p.hbar;
    const double wraps = std::round(
        (pair.action[seed].value() - s_det(grid.point(seed).x) - zero_point) / period);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!pair.mask[i]) continue;
      const double d = pair.action[i].value() - s_det(grid.point(i).x) - zero_point - wraps * period;
      pt.offset_err_evolved = std::max(pt.offset_err_evolved, std::abs(d));
    }
    hb.push_back(p.hbar);
    sa.push_back(pt.sigma_analytic);
    se.push_back(pt.sigma_evolved);
    out.points.push_back(pt);
  }
  if (out.points.size() >= 2) {
    out.slope_analytic = loglog_slope(hb, sa);
    out.slope_evolved = loglog_slope(hb, se);
  }
  return out;
}

}  // namespace semiclassical
