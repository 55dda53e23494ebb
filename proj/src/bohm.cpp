#include "semiclassical/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "semiclassical/errors.hpp"
#include "semiclassical/parallel.hpp"

namespace semiclassical {

void BohmConfig::validate() const {
  require(n_particles >= 1, ErrorKind::InvalidArgument, "need at least one particle");
  require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Marginal of |ψ|² along `axis`: trapezoid over the other axis.
std::vector<double> marginal(const WaveFunction& psi, std::size_t axis) {
  const Grid& g = psi.grid();
  const auto rho = psi.density();
  if (g.dim() == 1) return rho;
  const std::size_t other = 1 - axis;
  const std::size_t n = g.axis(axis).count, m = g.axis(other).count;
  const double h = g.axis(other).spacing;
  std::vector<double> out(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const double w = (b == 0 || b + 1 == m) ? 0.5 : 1.0;
      out[a] += w * h * rho[axis == 0 ? g.index(a, b) : g.index(b, a)];
    }
  }
  return out;
}

// Piecewise-linear density on a uniform axis.
struct LinearCdf {
  Axis axis;
  std::vector<double> d;
  std::vector<double> cum;  // unnormalized, cum[0] = 0

  LinearCdf(Axis a, std::vector<double> density) : axis(a), d(std::move(density)) {
    cum.assign(d.size(), 0.0);
    for (std::size_t i = 1; i < d.size(); ++i)
      cum[i] = cum[i - 1] + 0.5 * (d[i - 1] + d[i]) * axis.spacing;
  }

  double total() const { return cum.back(); }

  double at(double x) const {
    const double u = (x - axis.origin) / axis.spacing;
    if (u <= 0.0) return 0.0;
    if (u >= static_cast<double>(d.size() - 1)) return 1.0;
    const auto i = static_cast<std::size_t>(u);
    const double s = (u - static_cast<double>(i)) * axis.spacing;
    const double slope = (d[i + 1] - d[i]) / axis.spacing;
    return (cum[i] + d[i] * s + 0.5 * slope * s * s) / total();
  }

  double inverse(double u) const {
    const double target = u * total();
    auto it = std::upper_bound(cum.begin(), cum.end(), target);
    std::size_t i = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
    i = std::min(i, d.size() - 2);
    const double r = target - cum[i];
    const double slope = (d[i + 1] - d[i]) / axis.spacing;
    const double disc = std::max(0.0, d[i] * d[i] + 2.0 * slope * r);
    const double denom = d[i] + std::sqrt(disc);
    double s = denom > 0.0 ? 2.0 * r / denom : 0.0;
    s = std::clamp(s, 0.0, axis.spacing);
    return axis.coord(i) + s;
  }
};

}  // namespace

DensityCdf::DensityCdf(const WaveFunction& psi, std::size_t axis)
    : axis_(psi.grid().axis(axis)), density_(marginal(psi, axis)) {
  LinearCdf c(axis_, density_);
  cumulative_ = c.cum;
  require(c.total() > 1e-300, ErrorKind::Sampling, "density has no mass");
}

double DensityCdf::operator()(double x) const {
  LinearCdf c{axis_, density_};
  return c.at(x);
}

double DensityCdf::inverse(double u) const {
  LinearCdf c{axis_, density_};
  return c.inverse(u);
}

std::vector<Point> sample_quantum_equilibrium(const WaveFunction& psi0, std::size_t n,
                                              std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidArgument, "need at least one sample");
  const Grid& g = psi0.grid();
  const auto rho = psi0.density();
  const double rmax = *std::max_element(rho.begin(), rho.end());
  require(rmax * g.cell_volume() * static_cast<double>(g.size()) > 1e-12, ErrorKind::Sampling,
          "|psi0|^2 carries no mass above threshold");
  std::mt19937_64 rng(seed);
  std::vector<Point> out(n);
  const LinearCdf first(g.axis(0), marginal(psi0, 0));
  require(first.total() > 1e-12, ErrorKind::Sampling, "|psi0|^2 carries no mass");
  for (auto& p : out) {
    p.x = first.inverse(uniform01(rng));
    if (g.dim() == 2) {
      const Axis& ax = g.axis(0);
      double u = (p.x - ax.origin) / ax.spacing;
      auto i0 = std::min(static_cast<std::size_t>(u), ax.count - 2);
      const double f = u - static_cast<double>(i0);
      std::vector<double> cond(g.axis(1).count);
      for (std::size_t j = 0; j < cond.size(); ++j)
        cond[j] = (1 - f) * rho[g.index(i0, j)] + f * rho[g.index(i0 + 1, j)];
      const LinearCdf second(g.axis(1), std::move(cond));
      p.y = second.inverse(uniform01(rng));
    }
  }
  return out;
}

namespace {

struct GuidanceSlice {
  std::vector<double> vx, vy, rho;
  double rmax = 0.0;
};

GuidanceSlice guidance(const WaveFunction& psi, const FftPlan& plan) {
  const Grid& g = psi.grid();
  const double c = psi.hbar() / psi.mass();
  GuidanceSlice s;
  s.rho = psi.density();
  s.rmax = *std::max_element(s.rho.begin(), s.rho.end());
  s.vx.assign(g.size(), 0.0);
  s.vy.assign(g.size(), 0.0);
  for (std::size_t axis = 0; axis < g.dim(); ++axis) {
    const auto d = spectral_derivative(plan, psi.amplitudes(), axis);
    auto& v = axis == 0 ? s.vx : s.vy;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = s.rho[i];
      v[i] = r > 1e-300 ? c * std::imag(std::conj(psi[i]) * d[i]) / r : 0.0;
    }
  }
  return s;
}

}  // namespace

TrajectoryBundle integrate_bohm(const std::vector<double>& times,
                                const std::vector<WaveFunction>& slices,
                                const std::vector<Point>& initial, double dt,
                                double mask_threshold) {
  require(times.size() == slices.size() && times.size() >= 2, ErrorKind::TemporalResolution,
          "need at least two wave function slices");
  require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
  for (std::size_t k = 1; k < times.size(); ++k) {
    require(times[k] > times[k - 1], ErrorKind::InvalidArgument, "slice times must increase");
    require_same_grid(slices[k].grid(), slices[0].grid(), "integrate_bohm");
  }
  const Grid& g = slices[0].grid();
  const FftPlan plan(g);
  std::vector<GuidanceSlice> field;
  field.reserve(slices.size());
  for (const auto& s : slices) field.push_back(guidance(s, plan));

  const std::size_t np = initial.size(), nt = times.size();
  TrajectoryBundle bundle;
  bundle.times = times;
  bundle.positions.assign(np, std::vector<Point>(nt));
  bundle.flags.assign(np, ParticleFlag::Valid);
  bundle.valid_until.assign(np, nt);

  parallel_for(np, [&](std::size_t p) {
    // velocity and low-density test at (x, t) inside slice interval k
    auto sample = [&](const Point& x, std::size_t k, double w, Point& v) -> ParticleFlag {
      const auto st = locate(g, x);
      if (!st) return ParticleFlag::Escaped;
      const auto& a = field[k];
      const auto& b = field[k + 1];
      const double rho = (1 - w) * interpolate(g, a.rho, *st) + w * interpolate(g, b.rho, *st);
      const double floor = mask_threshold * ((1 - w) * a.rmax + w * b.rmax);
      if (!(rho > floor)) return ParticleFlag::Masked;
      v.x = (1 - w) * interpolate(g, a.vx, *st) + w * interpolate(g, b.vx, *st);
      v.y = g.dim() == 2 ? (1 - w) * interpolate(g, a.vy, *st) + w * interpolate(g, b.vy, *st) : 0.0;
      if (!std::isfinite(v.x) || !std::isfinite(v.y)) return ParticleFlag::Masked;
      return ParticleFlag::Valid;
    };

    Point x = initial[p];
    bundle.positions[p][0] = x;
    auto stop = [&](std::size_t k, ParticleFlag f) {
      bundle.flags[p] = f;
      bundle.valid_until[p] = k + 1;
      for (std::size_t r = k + 1; r < nt; ++r) bundle.positions[p][r] = bundle.positions[p][k];
    };
    if (!g.contains(x)) {
      bundle.flags[p] = ParticleFlag::Escaped;
      bundle.valid_until[p] = 0;
      for (auto& q : bundle.positions[p]) q = x;
      return;
    }
    for (std::size_t k = 0; k + 1 < nt; ++k) {
      const double span = times[k + 1] - times[k];
      const auto sub = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
      const double h = span / static_cast<double>(sub);
      for (std::size_t s = 0; s < sub; ++s) {
        const double w0 = static_cast<double>(s) / static_cast<double>(sub);
        const double wm = (static_cast<double>(s) + 0.5) / static_cast<double>(sub);
        const double w1 = static_cast<double>(s + 1) / static_cast<double>(sub);
        Point k1, k2, k3, k4;
        ParticleFlag f = sample(x, k, w0, k1);
        if (f == ParticleFlag::Valid) f = sample(x + 0.5 * h * k1, k, wm, k2);
        if (f == ParticleFlag::Valid) f = sample(x + 0.5 * h * k2, k, wm, k3);
        if (f == ParticleFlag::Valid) f = sample(x + h * k3, k, w1, k4);
        if (f != ParticleFlag::Valid) {
          stop(k, f);
          return;
        }
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (!g.contains(x)) {
        stop(k, ParticleFlag::Escaped);
        return;
      }
      bundle.positions[p][k + 1] = x;
    }
  });
  return bundle;
}

std::vector<double> equivariance_check(const TrajectoryBundle& bundle,
                                       const std::vector<WaveFunction>& slices) {
  require(bundle.times.size() == slices.size(), ErrorKind::Shape,
          "bundle and wave function slices differ in length");
  std::vector<double> out(slices.size(), 0.0);
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const Grid& g = slices[k].grid();
    for (std::size_t axis = 0; axis < g.dim(); ++axis) {
      std::vector<double> xs;
      for (std::size_t p = 0; p < bundle.particles(); ++p)
        if (bundle.valid_at(p, k))
          xs.push_back(axis == 0 ? bundle.positions[p][k].x : bundle.positions[p][k].y);
      require(xs.size() >= 100, ErrorKind::StatisticalPower,
              "only " + std::to_string(xs.size()) + " valid particles at slice " +
                  std::to_string(k) + " (need 100)");
      std::sort(xs.begin(), xs.end());
      const LinearCdf cdf(g.axis(axis), marginal(slices[k], axis));
      const double n = static_cast<double>(xs.size());
      double d = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf.at(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
      }
      out[k] = std::max(out[k], d);
    }
  }
  return out;
}

void DoubleSlitGeometry::validate() const {
  require(mass > 0 && hbar > 0 && slit_sigma > 0 && slit_separation > 0 && screen_time > 0 &&
              forward_speed > 0,
          ErrorKind::InvalidArgument, "double-slit geometry values must be positive");
  require(slices >= 2 && steps_per_slice >= 1 && screen_bins >= 8, ErrorKind::InvalidArgument,
          "double-slit numerics: slices >= 2, steps_per_slice >= 1, screen_bins >= 8");
}

FringeAnalysis analyze_fringes(std::vector<double> centers, std::vector<double> probability,
                               double min_visibility) {
  FringeAnalysis out;
  out.bin_centers = std::move(centers);
  out.probability = std::move(probability);
  const auto& pr = out.probability;
  const std::size_t n = pr.size();
  if (n < 3) return out;
  const double peak = *std::max_element(pr.begin(), pr.end());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(pr[i] >= pr[i - 1] && pr[i] > pr[i + 1]) || pr[i] < 0.05 * peak) continue;
    std::size_t l = i;
    while (l > 0 && pr[l - 1] <= pr[l]) --l;
    std::size_t r = i;
    while (r + 1 < n && pr[r + 1] <= pr[r]) ++r;
    const double floor = std::max(pr[l], pr[r]);
    const double vis = (pr[i] - floor) / (pr[i] + floor);
    if (vis > min_visibility) {
      out.maxima.push_back(out.bin_centers[i]);
      out.visibility.push_back(vis);
    }
  }
  if (out.maxima.size() >= 2)
    out.fringe_spacing = (out.maxima.back() - out.maxima.front()) /
                         static_cast<double>(out.maxima.size() - 1);
  return out;
}

namespace {

double spread_at_screen(const DoubleSlitGeometry& geo, double hbar) {
  const double tau = hbar * geo.screen_time / (2.0 * geo.mass * geo.slit_sigma * geo.slit_sigma);
  return geo.slit_sigma * std::sqrt(1.0 + tau * tau);
}

}  // namespace

Grid double_slit_grid(const DoubleSlitGeometry& geo, double hbar) {
  const double half = 1.25 * (0.5 * geo.slit_separation + 8.0 * spread_at_screen(geo, hbar));
  const double dx = geo.slit_sigma / 4.0;
  const std::size_t n = fft_size_at_least(static_cast<std::size_t>(std::ceil(2.0 * half / dx)));
  return Grid(Axis::periodic(-half, half, n));
}

WaveFunction double_slit_initial_state(const DoubleSlitGeometry& geo, const Grid& grid,
                                       double hbar) {
  std::vector<Complex> psi(grid.size());
  const double s2 = geo.slit_sigma * geo.slit_sigma;
  const double c = 0.5 * geo.slit_separation;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double x = grid.point(i).x;
    psi[i] = std::exp(-(x - c) * (x - c) / (4 * s2)) + std::exp(-(x + c) * (x + c) / (4 * s2));
  }
  WaveFunction out(grid, std::move(psi), hbar, geo.mass);
  out.normalize();
  return out;
}

DoubleSlitResult double_slit_scenario(const DoubleSlitGeometry& geo, double hbar_scale,
                                      std::size_t n_particles, std::uint64_t seed) {
  geo.validate();
  require(hbar_scale > 0.0, ErrorKind::InvalidArgument, "hbar scale must be positive");
  const double hbar = geo.hbar * hbar_scale;
  const Grid grid = double_slit_grid(geo, hbar);
  const WaveFunction psi0 = double_slit_initial_state(geo, grid, hbar);

  DoubleSlitResult out;
  out.hbar = hbar;
  const double dt_slice = geo.screen_time / static_cast<double>(geo.slices);
  // free transverse motion: one Strang step per slice is exact
  out.evolution = evolve_slices(psi0, LagrangianSpec::free(geo.mass), dt_slice, 1, geo.slices);
  if (out.evolution.log.max_edge_mass > 1e-8)
    fail(ErrorKind::DomainSize, "double-slit state reached the transverse grid edge");
  out.initial = sample_quantum_equilibrium(psi0, n_particles, seed);
  out.bundle = integrate_bohm(out.evolution.times, out.evolution.slices, out.initial,
                              dt_slice / static_cast<double>(geo.steps_per_slice),
                              geo.mask_threshold);

  // screen: bins over the central region of the final slice
  const WaveFunction& screen = out.evolution.slices.back();
  const double half = 0.5 * geo.slit_separation + 4.0 * spread_at_screen(geo, hbar);
  const std::size_t nb = geo.screen_bins;
  const double w = 2.0 * half / static_cast<double>(nb);
  const DensityCdf cdf(screen, 0);
  std::vector<double> centers(nb), prob(nb), counts(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const double lo = -half + w * static_cast<double>(b);
    centers[b] = lo + 0.5 * w;
    prob[b] = cdf(lo + w) - cdf(lo);
  }
  const std::size_t last = out.bundle.times.size() - 1;
  for (std::size_t p = 0; p < out.bundle.particles(); ++p) {
    if (!out.bundle.valid_at(p, last)) continue;
    const double x = out.bundle.positions[p][last].x;
    const auto b = static_cast<long>(std::floor((x + half) / w));
    if (b >= 0 && b < static_cast<long>(nb)) counts[static_cast<std::size_t>(b)] += 1.0;
  }
  out.screen = analyze_fringes(std::move(centers), std::move(prob));
  out.screen.particle_counts = std::move(counts);
  return out;
}

}  // namespace semiclassical
