#include "semiclassical/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "semiclassical/actions.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/parallel.hpp"

namespace semiclassical {

using std::numbers::pi;

WaveFunction::WaveFunction(Grid grid, std::vector<Complex> amplitudes, double hbar, double mass)
    : grid_(std::move(grid)), psi_(std::move(amplitudes)), hbar_(hbar), mass_(mass) {
  require(psi_.size() == grid_.size(), ErrorKind::Shape, "wave function size differs from grid");
  require(hbar > 0.0 && std::isfinite(hbar), ErrorKind::InvalidArgument, "hbar must be positive");
  require(mass > 0.0 && std::isfinite(mass), ErrorKind::InvalidArgument, "mass must be positive");
}

WaveFunction WaveFunction::from_polar(const Grid& grid,
                                      const std::function<double(const Point&)>& rho,
                                      const std::function<double(const Point&)>& action,
                                      double hbar, double mass) {
  std::vector<Complex> psi(grid.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const Point x = grid.point(i);
    psi[i] = std::polar(std::sqrt(std::max(0.0, rho(x))), action(x) / hbar);
  }
  WaveFunction out(grid, std::move(psi), hbar, mass);
  out.normalize();
  return out;
}

double WaveFunction::norm() const {
  double s = 0.0;
  for (const auto& c : psi_) s += std::norm(c);
  return std::sqrt(s * grid_.cell_volume());
}

WaveFunction& WaveFunction::normalize() {
  const double n = norm();
  require(n > 0.0, ErrorKind::DegenerateState, "cannot normalize a zero wave function");
  for (auto& c : psi_) c /= n;
  return *this;
}

std::vector<double> WaveFunction::density() const {
  std::vector<double> rho(psi_.size());
  std::transform(psi_.begin(), psi_.end(), rho.begin(), [](Complex c) { return std::norm(c); });
  return rho;
}

WaveFunction gaussian_packet(const Grid& grid, const Point& center, double sigma,
                             const Point& velocity, double hbar, double mass) {
  require(sigma > 0.0, ErrorKind::InvalidArgument, "packet width must be positive");
  const double d = static_cast<double>(grid.dim());
  const double norm = std::pow(2.0 * pi * sigma * sigma, -d / 2.0);
  return WaveFunction::from_polar(
      grid, [&](const Point& x) { return norm * std::exp(-norm2(x - center) / (2 * sigma * sigma)); },
      [&](const Point& x) { return mass * dot(velocity, x); }, hbar, mass);
}

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a.grid(), b.grid(), "l2_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * a.grid().cell_volume());
}

Moments position_moments(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  double total = 0.0;
  Point mean{};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r = std::norm(psi[i]);
    total += r;
    mean += r * g.point(i);
  }
  mean = mean / total;
  Point var{};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r = std::norm(psi[i]);
    const Point d = g.point(i) - mean;
    var += r * Point{d.x * d.x, d.y * d.y};
  }
  return {mean, var / total};
}

namespace {

// Fixed-step Strang propagator for one grid, potential and dt.
class StrangPropagator {
 public:
  StrangPropagator(const Grid& grid, const LagrangianSpec& potential, double hbar, double mass,
                   double dt, const SplitStepOptions& options)
      : grid_(grid), plan_(grid), options_(options) {
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
    require(std::abs(potential.mass() - mass) <= 1e-12 * mass, ErrorKind::InvalidArgument,
            "potential and wave function masses differ");
    const std::size_t n = grid.size();
    half_v_.resize(n);
    full_v_.resize(n);
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = potential.potential(grid.point(i));
      vmax = std::max(vmax, std::abs(v));
      half_v_[i] = std::polar(1.0, -v * dt / (2.0 * hbar));
      full_v_[i] = std::polar(1.0, -v * dt / hbar);
    }
    require(dt * vmax / hbar < 0.5, ErrorKind::Resolution,
            "dt*max|V|/hbar = " + std::to_string(dt * vmax / hbar) + " must stay below 0.5");
    kinetic_.resize(n);
    const auto kx = wavenumbers(grid.axis(0));
    const auto ky = grid.dim() == 2 ? wavenumbers(grid.axis(1)) : std::vector<double>{0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double k2 = kx[grid.row(i)] * kx[grid.row(i)] +
                        (grid.dim() == 2 ? ky[grid.col(i)] * ky[grid.col(i)] : 0.0);
      kinetic_[i] = std::polar(1.0, -hbar * k2 * dt / (2.0 * mass));
    }
    band_[0] = std::max<std::size_t>(1, static_cast<std::size_t>(options.edge_fraction *
                                                                 static_cast<double>(grid.axis(0).count)));
    band_[1] = grid.dim() == 2 ? std::max<std::size_t>(
                                     1, static_cast<std::size_t>(options.edge_fraction *
                                                                 static_cast<double>(grid.axis(1).count)))
                               : 0;
  }

  void advance(std::vector<Complex>& psi, std::size_t steps, EvolutionLog& log) const {
    if (steps == 0) return;
    multiply(psi, half_v_);
    for (std::size_t s = 0; s < steps; ++s) {
      plan_.forward(psi);
      multiply(psi, kinetic_);
      plan_.backward(psi);
      multiply(psi, s + 1 < steps ? full_v_ : half_v_);
      if ((s + 1) % options_.check_interval == 0 || s + 1 == steps) check_edges(psi, log);
    }
  }

 private:
  static void multiply(std::vector<Complex>& a, const std::vector<Complex>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  }

  void check_edges(const std::vector<Complex>& psi, EvolutionLog& log) const {
    double edge = 0.0, total = 0.0;
    const std::size_t n0 = grid_.axis(0).count;
    const std::size_t n1 = grid_.dim() == 2 ? grid_.axis(1).count : 1;
    for (std::size_t f = 0; f < psi.size(); ++f) {
      const double r = std::norm(psi[f]);
      total += r;
      const auto i = grid_.row(f), j = grid_.col(f);
      const bool in_band = i < band_[0] || i >= n0 - band_[0] ||
                           (grid_.dim() == 2 && (j < band_[1] || j >= n1 - band_[1]));
      if (in_band) edge += r;
    }
    const double frac = edge / total;
    log.max_edge_mass = std::max(log.max_edge_mass, frac);
    require(frac <= options_.max_edge_mass, ErrorKind::BoundaryBreach,
            "probability " + std::to_string(frac) + " reached the grid edge band");
    if (frac > options_.warn_edge_mass && log.warnings.empty())
      log.warnings.push_back("edge-band probability " + std::to_string(frac) + " exceeds " +
                             std::to_string(options_.warn_edge_mass));
  }

  Grid grid_;
  FftPlan plan_;
  SplitStepOptions options_;
  std::vector<Complex> half_v_, full_v_, kinetic_;
  std::size_t band_[2]{};
};

}  // namespace

WaveFunction split_step_evolve(const WaveFunction& psi, const LagrangianSpec& potential, double dt,
                               std::size_t n_steps, const SplitStepOptions& options,
                               EvolutionLog* log) {
  if (n_steps == 0) return psi;
  const StrangPropagator prop(psi.grid(), potential, psi.hbar(), psi.mass(), dt, options);
  EvolutionLog local;
  EvolutionLog& out_log = log ? *log : local;
  WaveFunction out = psi;
  const double n0 = psi.norm();
  prop.advance(out.amplitudes(), n_steps, out_log);
  out_log.norm_drift = std::max(out_log.norm_drift, std::abs(out.norm() - n0));
  return out;
}

Evolution evolve_slices(const WaveFunction& psi0, const LagrangianSpec& potential, double dt,
                        std::size_t steps_per_slice, std::size_t n_slices,
                        const SplitStepOptions& options) {
  require(steps_per_slice >= 1, ErrorKind::InvalidArgument, "need at least one step per slice");
  const StrangPropagator prop(psi0.grid(), potential, psi0.hbar(), psi0.mass(), dt, options);
  Evolution ev;
  ev.times.push_back(0.0);
  ev.slices.push_back(psi0);
  WaveFunction cur = psi0;
  const double n0 = psi0.norm();
  for (std::size_t k = 1; k <= n_slices; ++k) {
    prop.advance(cur.amplitudes(), steps_per_slice, ev.log);
    ev.times.push_back(dt * static_cast<double>(k * steps_per_slice));
    ev.slices.push_back(cur);
  }
  ev.log.norm_drift = std::abs(cur.norm() - n0);
  return ev;
}

WaveFunction feynman_propagate(const WaveFunction& psi0, const LagrangianSpec& spec, double t) {
  require(t > 0.0, ErrorKind::InvalidHorizon, "propagation time must be positive");
  require(spec.has_closed_form(), ErrorKind::InvalidArgument,
          "Feynman propagation needs a closed-form action");
  const Grid& g = psi0.grid();
  const double hbar = psi0.hbar();
  const double d = static_cast<double>(g.dim());
  const auto n = g.size();

  // Van Vleck phase; the modulus is fixed by normalization afterwards.
  double maslov = 0.0;
  if (spec.kind() == PotentialKind::Harmonic && spec.omega() > 0.0) {
    const double wt = spec.omega() * t;
    require(std::abs(std::sin(wt)) > 1e-12, ErrorKind::Singularity,
            "propagator is singular at harmonic focal times");
    maslov = std::floor(wt / pi);
  }
  const Complex prefactor = std::polar(1.0, -d * pi / 4.0 - d * pi * maslov / 2.0);

  double amp_max = 0.0;
  for (const auto& c : psi0.amplitudes()) amp_max = std::max(amp_max, std::abs(c));
  std::vector<char> significant(n);
  for (std::size_t k = 0; k < n; ++k) significant[k] = std::abs(psi0[k]) > 1e-4 * amp_max;
  std::vector<Point> nodes(n);
  for (std::size_t k = 0; k < n; ++k) nodes[k] = g.point(k);

  std::vector<Complex> out(n);
  std::vector<double> worst(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const Point x = g.point(i);
    std::vector<double> phase(n);
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      phase[k] = el_action_closed(spec, x, t, nodes[k]).value() / hbar;
      acc += std::polar(1.0, phase[k]) * psi0[k];
    }
    double w = 0.0;
    auto check = [&](std::size_t a, std::size_t b) {
      if (!significant[a] || !significant[b]) return;
      const double dpsi = std::arg(psi0[b] / psi0[a]);
      w = std::max(w, std::abs(phase[b] - phase[a] + dpsi));
    };
    for (std::size_t k = 0; k < n; ++k) {
      if (g.row(k) + 1 < g.axis(0).count) check(k, g.index(g.row(k) + 1, g.col(k)));
      if (g.dim() == 2 && g.col(k) + 1 < g.axis(1).count) check(k, k + 1);
    }
    worst[i] = w;
    out[i] = prefactor * acc * g.cell_volume();
  });
  const double max_step = *std::max_element(worst.begin(), worst.end());
  require(max_step <= pi / 4.0, ErrorKind::Resolution,
          "integrand phase advances " + std::to_string(max_step) +
              " rad per cell (limit pi/4); refine the grid");
  WaveFunction result(g, std::move(out), hbar, psi0.mass());
  result.normalize();
  return result;
}

std::vector<Complex> MadelungPair::recompose() const {
  std::vector<Complex> out(rho.size(), Complex{0.0, 0.0});
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask[i]) out[i] = std::polar(std::sqrt(rho[i].value()), action[i].value() / hbar);
  return out;
}

namespace {

double wrap(double a) { return std::remainder(a, 2.0 * pi); }

}  // namespace

MadelungPair madelung_decompose(const WaveFunction& psi, double mask_threshold) {
  const Grid& g = psi.grid();
  const auto n = g.size();
  const auto rho = psi.density();
  const double rmax = *std::max_element(rho.begin(), rho.end());
  std::vector<bool> mask(n);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = rho[i] > mask_threshold * rmax && rmax > 0.0;
    any = any || mask[i];
  }
  require(any, ErrorKind::DegenerateState, "density mask is empty");

  std::vector<double> phase(n, 0.0);
  std::vector<bool> done(n, false);
  auto raw = [&](std::size_t i) { return std::arg(psi[i]); };

  if (g.dim() == 1) {
    const auto seed = static_cast<std::size_t>(std::max_element(rho.begin(), rho.end()) - rho.begin());
    phase[seed] = raw(seed);
    done[seed] = true;
    for (int dir : {+1, -1}) {
      std::size_t prev = seed;
      for (long i = static_cast<long>(seed) + dir; i >= 0 && i < static_cast<long>(n); i += dir) {
        const auto u = static_cast<std::size_t>(i);
        if (!mask[u]) continue;
        phase[u] = phase[prev] + wrap(raw(u) - raw(prev));
        done[u] = true;
        prev = u;
      }
    }
  } else {
    // flood fill over masked 4-neighbours, seeded at the densest unvisited node
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rho[a] > rho[b]; });
    std::deque<std::size_t> queue;
    for (const auto seed : order) {
      if (!mask[seed] || done[seed]) continue;
      phase[seed] = raw(seed);
      done[seed] = true;
      queue.push_back(seed);
      while (!queue.empty()) {
        const auto c = queue.front();
        queue.pop_front();
        const auto i = g.row(c), j = g.col(c);
        const std::size_t ni = g.axis(0).count, nj = g.axis(1).count;
        std::size_t nb[4];
        int count = 0;
        if (i > 0) nb[count++] = g.index(i - 1, j);
        if (i + 1 < ni) nb[count++] = g.index(i + 1, j);
        if (j > 0) nb[count++] = g.index(i, j - 1);
        if (j + 1 < nj) nb[count++] = g.index(i, j + 1);
        for (int q = 0; q < count; ++q) {
          const auto u = nb[q];
          if (!mask[u] || done[u]) continue;
          phase[u] = phase[c] + wrap(raw(u) - raw(c));
          done[u] = true;
          queue.push_back(u);
        }
      }
    }
  }

  MadelungPair out{ScalarField::from_doubles(g, rho), ScalarField(g, ExtendedReal::infinity()),
                   std::move(mask), psi.hbar()};
  for (std::size_t i = 0; i < n; ++i)
    if (out.mask[i]) out.action[i] = psi.hbar() * phase[i];
  return out;
}

ScalarField quantum_potential(const MadelungPair& pair, double hbar, double mass) {
  require(hbar > 0.0 && mass > 0.0, ErrorKind::InvalidArgument, "hbar and mass must be positive");
  const Grid& g = pair.rho.grid();
  ScalarField q(g, ExtendedReal::infinity());
  std::vector<double> amp(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) amp[i] = std::sqrt(std::max(0.0, pair.rho[i].value()));
  for (std::size_t f = 0; f < g.size(); ++f) {
    if (!pair.mask[f]) continue;
    const auto i = g.row(f), j = g.col(f);
    double lap = 0.0;
    bool ok = true;
    for (std::size_t axis = 0; axis < g.dim() && ok; ++axis) {
      const std::size_t c = axis == 0 ? i : j;
      if (c == 0 || c + 1 == g.axis(axis).count) {
        ok = false;
        break;
      }
      const auto lo = axis == 0 ? g.index(i - 1, j) : g.index(i, j - 1);
      const auto hi = axis == 0 ? g.index(i + 1, j) : g.index(i, j + 1);
      if (!pair.mask[lo] || !pair.mask[hi]) {
        ok = false;
        break;
      }
      const double h = g.axis(axis).spacing;
      lap += (amp[hi] - 2.0 * amp[f] + amp[lo]) / (h * h);
    }
    if (ok) q[f] = -(hbar * hbar / (2.0 * mass)) * lap / amp[f];
  }
  return q;
}

double CoherentStateParams::sigma() const { return std::sqrt(hbar / (2.0 * mass * omega)); }

void CoherentStateParams::validate() const {
  require(mass > 0.0 && omega > 0.0 && hbar > 0.0, ErrorKind::InvalidArgument,
          "coherent state needs positive mass, omega and hbar");
  require(dim == 1 || dim == 2, ErrorKind::InvalidArgument, "coherent state dimension is 1 or 2");
}

CoherentState coherent_state(const CoherentStateParams& params, double t, const Grid& grid) {
  params.validate();
  require(grid.dim() == params.dim, ErrorKind::Shape, "grid dimension differs from the state's");
  require(t >= 0.0, ErrorKind::InvalidHorizon, "time must be non-negative");

  Point xi = params.x0, vxi = params.v0;
  double g = 0.0;
  if (t > 0.0) {
    const auto spec = LagrangianSpec::harmonic(params.mass, params.omega);
    const double dt = std::min(1e-3 / params.omega, t);
    const auto det = deterministic_action(spec, params.x0, params.v0, t, dt);
    const std::size_t last = det.xi().size() - 1;
    xi = det.xi().positions[last];
    vxi = det.xi().velocities[last];
    g = det.g_values()[last];
  }
  const double sigma = params.sigma();
  const double d = static_cast<double>(params.dim);
  const double norm = std::pow(2.0 * pi * sigma * sigma, -d / 2.0);
  const double zero_point = 0.5 * d * params.hbar * params.omega * t;

  const auto n = grid.size();
  std::vector<double> rho(n), action(n);
  std::vector<Complex> psi(n);
  double rmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = grid.point(i);
    rho[i] = norm * std::exp(-norm2(x - xi) / (2.0 * sigma * sigma));
    action[i] = params.mass * dot(vxi, x) + g - zero_point;
    psi[i] = std::polar(std::sqrt(rho[i]), action[i] / params.hbar);
    rmax = std::max(rmax, rho[i]);
  }
  MadelungPair pair{ScalarField::from_doubles(grid, rho), ScalarField::from_doubles(grid, action),
                    std::vector<bool>(n), params.hbar};
  for (std::size_t i = 0; i < n; ++i) pair.mask[i] = rho[i] > 1e-6 * rmax;
  return {WaveFunction(grid, std::move(psi), params.hbar, params.mass), std::move(pair), xi, vxi, g};
}

}  // namespace semiclassical
