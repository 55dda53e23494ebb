#include "semiclassical/hopf_lax.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semiclassical/errors.hpp"
#include "semiclassical/parallel.hpp"

namespace semiclassical {

std::string_view to_string(ParticleFlag flag) {
  switch (flag) {
    case ParticleFlag::Valid: return "valid";
    case ParticleFlag::Escaped: return "escaped";
    case ParticleFlag::Masked: return "masked";
  }
  return "unknown";
}

Kernel action_kernel(const LagrangianSpec& spec, double t, std::size_t numeric_steps) {
  require(t > 0.0, ErrorKind::InvalidHorizon, "Hopf-Lax horizon must be positive");
  if (spec.has_closed_form()) {
    return [spec, t](const Point& x, const Point& x0) { return el_action_closed(spec, x, t, x0); };
  }
  return [spec, t, numeric_steps](const Point& x, const Point& x0) {
    return el_action_numeric(spec, x, t, x0, numeric_steps).action;
  };
}

HopfLaxField hamilton_jacobi_field_detailed(const LagrangianSpec& spec, const ScalarField& s0,
                                            double t, const HopfLaxOptions& options) {
  const Kernel kernel = action_kernel(spec, t, options.numeric_steps);
  // surface focal-time singularities before the parallel scan
  (void)kernel(s0.grid().point(0), s0.grid().point(0));
  ConvolutionOptions conv;
  conv.refine = options.refine;
  conv.output_grid = options.output_grid;
  auto r = inf_convolution_detailed(s0, kernel, conv);
  HopfLaxField out{std::move(r.value), std::vector<bool>(r.boundary_argmin.size()),
                   std::move(r.argmin)};
  for (std::size_t i = 0; i < out.interior.size(); ++i)
    out.interior[i] = out.action[i].is_finite() && !r.boundary_argmin[i];
  return out;
}

ScalarField hamilton_jacobi_field(const LagrangianSpec& spec, const ScalarField& s0, double t,
                                  const HopfLaxOptions& options) {
  return hamilton_jacobi_field_detailed(spec, s0, t, options).action;
}

namespace {

// Derivative of S along `axis` at a node; nullopt if a needed value is +inf.
std::optional<double> axis_derivative(const Grid& g, const ScalarField& s, std::size_t flat,
                                      std::size_t axis) {
  const std::size_t n = g.axis(axis).count;
  const double h = g.axis(axis).spacing;
  const std::size_t i = axis == 0 ? g.row(flat) : g.col(flat);
  auto at = [&](std::size_t k) {
    return axis == 0 ? s[g.index(k, g.col(flat))] : s[g.index(g.row(flat), k)];
  };
  auto finite = [](std::initializer_list<ExtendedReal> vs) {
    return std::all_of(vs.begin(), vs.end(), [](ExtendedReal v) { return v.is_finite(); });
  };
  if (i > 0 && i + 1 < n) {
    const auto a = at(i - 1), b = at(i + 1);
    if (!finite({a, b, at(i)})) return std::nullopt;
    return (b.value() - a.value()) / (2 * h);
  }
  if (n < 3) {
    const auto a = at(0), b = at(1);
    if (!finite({a, b})) return std::nullopt;
    return (b.value() - a.value()) / h;
  }
  if (i == 0) {
    const auto a = at(0), b = at(1), c = at(2);
    if (!finite({a, b, c})) return std::nullopt;
    return (-3 * a.value() + 4 * b.value() - c.value()) / (2 * h);
  }
  const auto a = at(i), b = at(i - 1), c = at(i - 2);
  if (!finite({a, b, c})) return std::nullopt;
  return (3 * a.value() - 4 * b.value() + c.value()) / (2 * h);
}

}  // namespace

VectorField velocity_field(const ScalarField& s, double mass) {
  require(mass > 0.0, ErrorKind::InvalidArgument, "mass must be positive");
  const Grid& g = s.grid();
  VectorField out{g, std::vector<Point>(g.size()), std::vector<bool>(g.size(), false)};
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto dx = axis_derivative(g, s, n, 0);
    if (!dx) continue;
    Point v{*dx / mass, 0.0};
    if (g.dim() == 2) {
      const auto dy = axis_derivative(g, s, n, 1);
      if (!dy) continue;
      v.y = *dy / mass;
    }
    out.values[n] = v;
    out.valid[n] = true;
  }
  return out;
}

HJSolution solve_hamilton_jacobi(const LagrangianSpec& spec, const ScalarField& s0,
                                 const std::vector<double>& times,
                                 const HopfLaxOptions& options) {
  require(!times.empty() && times.front() == 0.0, ErrorKind::InvalidArgument,
          "solution times must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    require(times[k] > times[k - 1], ErrorKind::InvalidArgument,
            "solution times must be increasing");
  HopfLaxOptions opts = options;
  opts.output_grid.reset();
  HJSolution sol{spec, s0, times, {}};
  sol.slices.reserve(times.size());
  sol.slices.push_back(s0);
  for (std::size_t k = 1; k < times.size(); ++k)
    sol.slices.push_back(hamilton_jacobi_field(spec, s0, times[k], opts));
  return sol;
}

namespace {

bool on_ring(const Grid& g, std::size_t flat) {
  const auto i = g.row(flat);
  if (i == 0 || i + 1 == g.axis(0).count) return true;
  if (g.dim() == 1) return false;
  const auto j = g.col(flat);
  return j == 0 || j + 1 == g.axis(1).count;
}

// Mask of nodes away from +inf values and gradient kinks.
std::vector<bool> smooth_mask(const ScalarField& s) {
  const Grid& g = s.grid();
  std::vector<bool> mask(g.size(), true);
  std::vector<double> jump(g.size(), 0.0);
  std::vector<double> jumps;
  double max_grad = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (on_ring(g, n)) {
      mask[n] = false;
      continue;
    }
    double j = 0.0;
    bool ok = s[n].is_finite();
    for (std::size_t axis = 0; ok && axis < g.dim(); ++axis) {
      const double h = g.axis(axis).spacing;
      const auto lo = axis == 0 ? g.index(g.row(n) - 1, g.col(n)) : g.index(g.row(n), g.col(n) - 1);
      const auto hi = axis == 0 ? g.index(g.row(n) + 1, g.col(n)) : g.index(g.row(n), g.col(n) + 1);
      if (s[lo].is_infinite() || s[hi].is_infinite()) {
        ok = false;
        break;
      }
      const double dp = (s[hi].value() - s[n].value()) / h;
      const double dm = (s[n].value() - s[lo].value()) / h;
      j = std::max(j, std::abs(dp - dm));
      max_grad = std::max({max_grad, std::abs(dp), std::abs(dm)});
    }
    if (!ok) {
      mask[n] = false;
      continue;
    }
    jump[n] = j;
    jumps.push_back(j);
  }
  if (jumps.empty()) return mask;
  auto mid = jumps.begin() + static_cast<std::ptrdiff_t>(jumps.size() / 2);
  std::nth_element(jumps.begin(), mid, jumps.end());
  const double threshold = std::max(10.0 * *mid, 1e-9 * (1.0 + max_grad));
  std::vector<bool> out = mask;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!mask[n] || jump[n] <= threshold) continue;
    out[n] = false;
    const auto i = g.row(n), j = g.col(n);
    out[g.index(i - 1, j)] = false;
    out[g.index(i + 1, j)] = false;
    if (g.dim() == 2) {
      out[g.index(i, j - 1)] = false;
      out[g.index(i, j + 1)] = false;
    }
  }
  return out;
}

}  // namespace

std::vector<ResidualField> hj_residual(const HJSolution& solution,
                                       const std::vector<double>& probe_times) {
  const auto& ts = solution.times;
  require(ts.size() >= 2 && solution.slices.size() == ts.size(), ErrorKind::TemporalResolution,
          "residual needs at least two solution slices");
  const double m = solution.lagrangian.mass();
  std::vector<ResidualField> out;
  for (const double tp : probe_times) {
    require(tp >= ts.front() && tp <= ts.back(), ErrorKind::TemporalResolution,
            "probe time outside the solution interval");
    const auto last = ts.size() - 1;
    const double eps = 1e-12 * std::max(1.0, std::abs(tp));
    std::size_t k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), tp + eps) -
                                             ts.begin()) - 1;
    const bool on_slice = std::abs(tp - ts[k]) <= eps;
    const ScalarField* a;
    const ScalarField* b;
    double dt;
    ScalarField spatial;
    if (on_slice && k > 0 && k < last) {
      a = &solution.slices[k - 1];
      b = &solution.slices[k + 1];
      dt = ts[k + 1] - ts[k - 1];
      spatial = solution.slices[k];
    } else if (on_slice) {
      // first or last slice: one-sided in time
      const std::size_t lo = k == 0 ? 0 : last - 1;
      a = &solution.slices[lo];
      b = &solution.slices[lo + 1];
      dt = ts[lo + 1] - ts[lo];
      spatial = solution.slices[k];
    } else {
      a = &solution.slices[k];
      b = &solution.slices[k + 1];
      dt = ts[k + 1] - ts[k];
      spatial = ScalarField(a->grid(), ExtendedReal::infinity());
      for (std::size_t n = 0; n < a->size(); ++n) {
        if ((*a)[n].is_finite() && (*b)[n].is_finite())
          spatial[n] = 0.5 * ((*a)[n].value() + (*b)[n].value());
      }
    }
    const Grid& g = spatial.grid();
    const auto mask_space = smooth_mask(spatial);
    const auto v = velocity_field(spatial, m);
    ResidualField r{tp, ScalarField(g, ExtendedReal::infinity()), std::vector<bool>(g.size(), false),
                    0.0};
    for (std::size_t n = 0; n < g.size(); ++n) {
      if (!mask_space[n] || !v.valid[n] || (*a)[n].is_infinite() || (*b)[n].is_infinite()) continue;
      const double dsdt = ((*b)[n].value() - (*a)[n].value()) / dt;
      const Point grad = v.values[n] * m;
      const double res = dsdt + norm2(grad) / (2 * m) + solution.lagrangian.potential(g.point(n));
      r.residual[n] = res;
      r.mask[n] = true;
      r.max_abs = std::max(r.max_abs, std::abs(res));
    }
    out.push_back(std::move(r));
  }
  return out;
}

void ParticleEnsemble::validate() const {
  require(positions.size() == weights.size(), ErrorKind::Shape,
          "ensemble positions and weights differ in length");
  require(!positions.empty(), ErrorKind::InvalidArgument, "ensemble is empty");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), ErrorKind::InvalidArgument, "weights must be >= 0");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::InvalidArgument,
          "ensemble weights must sum to 1");
}

ParticleEnsemble ParticleEnsemble::uniform(std::vector<Point> positions) {
  const double w = 1.0 / static_cast<double>(positions.size());
  std::vector<double> weights(positions.size(), w);
  return {std::move(positions), std::move(weights)};
}

ScalarField estimate_density(const Grid& grid, const std::vector<Point>& positions,
                             const std::vector<double>& weights, const std::vector<bool>& include,
                             DensityEstimator estimator) {
  std::vector<double> acc(grid.size(), 0.0);
  const double vol = grid.cell_volume();
  for (std::size_t p = 0; p < positions.size(); ++p) {
    if (!include[p]) continue;
    const double w = weights[p] / vol;
    if (estimator == DensityEstimator::Histogram) {
      if (grid.contains(positions[p])) acc[grid.nearest(positions[p])] += w;
      continue;
    }
    const auto s = locate(grid, positions[p]);
    if (!s) continue;
    if (grid.dim() == 1) {
      acc[s->i0] += (1 - s->fx) * w;
      acc[s->i0 + 1] += s->fx * w;
    } else {
      acc[grid.index(s->i0, s->j0)] += (1 - s->fx) * (1 - s->fy) * w;
      acc[grid.index(s->i0 + 1, s->j0)] += s->fx * (1 - s->fy) * w;
      acc[grid.index(s->i0, s->j0 + 1)] += (1 - s->fx) * s->fy * w;
      acc[grid.index(s->i0 + 1, s->j0 + 1)] += s->fx * s->fy * w;
    }
  }
  return ScalarField::from_doubles(grid, acc);
}

namespace {

// Nodal velocity field with validity, interpolated (bi)linearly.
struct SampledVelocity {
  Grid grid;
  std::vector<double> vx, vy;
  std::vector<bool> valid;

  explicit SampledVelocity(const VectorField& f)
      : grid(f.grid), vx(f.values.size()), vy(f.values.size()), valid(f.valid) {
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      vx[i] = f.values[i].x;
      vy[i] = f.values[i].y;
    }
  }

  std::optional<Point> at(const Point& p) const {
    const auto s = locate(grid, p);
    if (!s) return std::nullopt;
    const std::size_t di = 1, dj = grid.dim() == 2 ? 1 : 0;
    for (std::size_t a = 0; a <= di; ++a)
      for (std::size_t b = 0; b <= dj; ++b)
        if (!valid[grid.index(s->i0 + a, s->j0 + b)]) return std::nullopt;
    return Point{interpolate(grid, vx, *s), grid.dim() == 2 ? interpolate(grid, vy, *s) : 0.0};
  }
};

}  // namespace

AdvectionResult advect_ensemble(const LagrangianSpec& spec, const ScalarField& s0,
                                const ParticleEnsemble& ensemble, double t_end, double dt,
                                const AdvectionOptions& options) {
  ensemble.validate();
  require(t_end > 0.0, ErrorKind::InvalidHorizon, "advection horizon must be positive");
  require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be positive");
  require(options.slices >= 1, ErrorKind::InvalidArgument, "need at least one output slice");
  const Grid& grid = s0.grid();
  for (const auto& p : ensemble.positions)
    require(grid.contains(p), ErrorKind::OutOfDomain, "initial particle outside the grid");

  const std::size_t n_slices = options.slices;
  const double span = t_end / static_cast<double>(n_slices);
  std::vector<double> times(n_slices + 1);
  for (std::size_t k = 0; k <= n_slices; ++k) times[k] = span * static_cast<double>(k);
  times.back() = t_end;

  AdvectionResult out;
  out.solution = solve_hamilton_jacobi(spec, s0, times, options.hopf_lax);
  std::vector<SampledVelocity> vel;
  vel.reserve(times.size());
  for (const auto& slice : out.solution.slices) vel.emplace_back(velocity_field(slice, spec.mass()));

  const std::size_t sub = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
  const double h = span / static_cast<double>(sub);
  const std::size_t np = ensemble.positions.size();

  TrajectoryBundle& bundle = out.bundle;
  bundle.times = times;
  bundle.positions.assign(np, std::vector<Point>(times.size()));
  bundle.flags.assign(np, ParticleFlag::Valid);
  bundle.valid_until.assign(np, times.size());

  parallel_for(np, [&](std::size_t p) {
    auto velocity = [&](const Point& x, double t) -> std::optional<Point> {
      std::size_t j = std::min(static_cast<std::size_t>(t / span), n_slices - 1);
      const double w = (t - times[j]) / span;
      const auto a = vel[j].at(x);
      const auto b = vel[j + 1].at(x);
      if (!a || !b) return std::nullopt;
      return (1.0 - w) * *a + w * *b;
    };
    Point x = ensemble.positions[p];
    bundle.positions[p][0] = x;
    for (std::size_t k = 0; k < n_slices; ++k) {
      bool alive = true;
      for (std::size_t s = 0; s < sub && alive; ++s) {
        const double t = times[k] + h * static_cast<double>(s);
        const auto k1 = velocity(x, t);
        const auto k2 = k1 ? velocity(x + 0.5 * h * *k1, t + 0.5 * h) : std::nullopt;
        const auto k3 = k2 ? velocity(x + 0.5 * h * *k2, t + 0.5 * h) : std::nullopt;
        const auto k4 = k3 ? velocity(x + h * *k3, t + h) : std::nullopt;
        if (!k4) {
          alive = false;
          break;
        }
        x += (h / 6.0) * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
      }
      if (!alive || !grid.contains(x)) {
        bundle.flags[p] = grid.contains(x) ? ParticleFlag::Masked : ParticleFlag::Escaped;
        bundle.valid_until[p] = k + 1;
        for (std::size_t r = k + 1; r < times.size(); ++r) bundle.positions[p][r] = bundle.positions[p][k];
        return;
      }
      bundle.positions[p][k + 1] = x;
    }
  });

  const Grid density_grid = options.density_grid.value_or(grid);
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<Point> pos(np);
    std::vector<bool> include(np);
    double escaped = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      pos[p] = bundle.positions[p][k];
      include[p] = bundle.valid_at(p, k);
      if (!include[p]) escaped += ensemble.weights[p];
    }
    out.density.push_back(
        estimate_density(density_grid, pos, ensemble.weights, include, options.estimator));
    out.escaped_mass.push_back(escaped);
  }
  return out;
}

}  // namespace semiclassical
