#include "semiclassical/minplus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/minima.hpp>

#include "semiclassical/errors.hpp"
#include "semiclassical/parallel.hpp"

namespace semiclassical {

ExtendedReal::ExtendedReal(double v) : v_(v) {
  require(!std::isnan(v) && v != -kInf, ErrorKind::InvalidArgument,
          "extended real must be finite or +inf");
}

ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
  if (a.is_infinite() || b.is_infinite()) return ExtendedReal::infinity();
  const double s = a.v_ + b.v_;
  // overflow saturates: large positive sums become +inf, large negative ones clamp
  if (s == -ExtendedReal::kInf) return ExtendedReal(std::numeric_limits<double>::lowest());
  return ExtendedReal(s);
}

ScalarField::ScalarField(Grid grid, std::vector<ExtendedReal> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorKind::Shape,
          "field has " + std::to_string(values_.size()) + " values for " +
              std::to_string(grid_.size()) + " grid nodes");
}

ScalarField::ScalarField(Grid grid, ExtendedReal fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(const Point&)>& f) {
  std::vector<ExtendedReal> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = ExtendedReal(f(grid.point(i)));
  return {grid, std::move(v)};
}

ScalarField ScalarField::from_doubles(const Grid& grid, std::span<const double> values) {
  std::vector<ExtendedReal> v(values.begin(), values.end());
  return {grid, std::move(v)};
}

std::vector<double> ScalarField::to_doubles() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [](ExtendedReal e) { return e.value(); });
  return out;
}

ExtendedReal ScalarField::at(const Point& p) const {
  const auto s = locate(grid_, p);
  if (!s) return ExtendedReal::infinity();
  const auto fetch = [&](std::size_t i, std::size_t j) { return values_[grid_.index(i, j)]; };
  if (grid_.dim() == 1) {
    const auto a = fetch(s->i0, 0), b = fetch(s->i0 + 1, 0);
    if (a.is_infinite() || b.is_infinite()) {
      // exact node hits stay defined next to +inf neighbours
      if (s->fx == 0.0) return a;
      if (s->fx == 1.0) return b;
      return ExtendedReal::infinity();
    }
    return (1.0 - s->fx) * a.value() + s->fx * b.value();
  }
  const ExtendedReal c[4] = {fetch(s->i0, s->j0), fetch(s->i0 + 1, s->j0), fetch(s->i0, s->j0 + 1),
                             fetch(s->i0 + 1, s->j0 + 1)};
  const double w[4] = {(1 - s->fx) * (1 - s->fy), s->fx * (1 - s->fy), (1 - s->fx) * s->fy,
                       s->fx * s->fy};
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (w[k] == 0.0) continue;
    if (c[k].is_infinite()) return ExtendedReal::infinity();
    acc += w[k] * c[k].value();
  }
  return acc;
}

ScalarField delta_min(const Point& x0, const Grid& grid) {
  require(grid.contains(x0), ErrorKind::OutOfDomain, "delta_min center lies outside the grid");
  ScalarField out(grid, ExtendedReal::infinity());
  out[grid.nearest(x0)] = 0.0;
  return out;
}

ExtendedReal minplus_scalar_product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "minplus_scalar_product");
  ExtendedReal best = ExtendedReal::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) best = tmin(best, f[i] + g[i]);
  return best;
}

namespace {

constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;

// Brent search of phi on [a, b]; returns (argmin, value) or nullopt if the ends are not finite.
std::optional<std::pair<double, double>> bracketed_min(const std::function<double(double)>& phi,
                                                       double a, double b) {
  if (!(b > a)) return std::nullopt;
  if (!std::isfinite(phi(a)) || !std::isfinite(phi(b))) return std::nullopt;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::brent_find_minima(phi, a, b, kBrentBits, iters);
  return std::make_pair(r.first, r.second);
}

bool on_boundary(const Grid& g, std::size_t flat) {
  const auto i = g.row(flat);
  if (i == 0 || i + 1 == g.axis(0).count) return true;
  if (g.dim() == 1) return false;
  const auto j = g.col(flat);
  return j == 0 || j + 1 == g.axis(1).count;
}

}  // namespace

ConvolutionResult inf_convolution_detailed(const ScalarField& f, const Kernel& kernel,
                                           const ConvolutionOptions& options) {
  const Grid& in = f.grid();
  const Grid out_grid = options.output_grid.value_or(in);
  require(out_grid.dim() == in.dim(), ErrorKind::Shape,
          "inf_convolution: output grid dimension differs from input");

  ConvolutionResult result{ScalarField(out_grid, ExtendedReal::infinity()),
                           std::vector<Point>(out_grid.size()),
                           std::vector<bool>(out_grid.size(), false)};

  // Finite input nodes, gathered once.
  std::vector<std::size_t> support;
  support.reserve(in.size());
  for (std::size_t k = 0; k < in.size(); ++k)
    if (f[k].is_finite()) support.push_back(k);

  std::vector<char> boundary(out_grid.size(), 0);
  parallel_for(out_grid.size(), [&](std::size_t n) {
    const Point x = out_grid.point(n);
    ExtendedReal best = ExtendedReal::infinity();
    std::size_t best_k = in.size();
    for (const auto k : support) {
      const ExtendedReal v = f[k] + kernel(x, in.point(k));
      if (v < best) {
        best = v;
        best_k = k;
      }
    }
    if (best_k == in.size()) return;
    Point arg = in.point(best_k);

    if (options.refine) {
      auto phi_at = [&](const Point& y) {
        const ExtendedReal v = f.at(y) + kernel(x, y);
        return v.value();
      };
      for (std::size_t axis = 0; axis < in.dim(); ++axis) {
        const Axis& ax = in.axis(axis);
        const double c = axis == 0 ? arg.x : arg.y;
        const double lo = std::max(ax.origin, c - ax.spacing);
        const double hi = std::min(ax.upper(), c + ax.spacing);
        auto phi = [&](double s) {
          Point y = arg;
          (axis == 0 ? y.x : y.y) = s;
          return phi_at(y);
        };
        // f is piecewise linear, so each side of the node is searched separately
        for (const auto& [a, b] : {std::pair{lo, c}, std::pair{c, hi}}) {
          if (auto r = bracketed_min(phi, a, b); r && r->second < best.value()) {
            best = r->second;
            (axis == 0 ? arg.x : arg.y) = r->first;
          }
        }
      }
    }
    result.value[n] = best;
    result.argmin[n] = arg;
    boundary[n] = on_boundary(in, best_k) ? 1 : 0;
  });
  for (std::size_t n = 0; n < boundary.size(); ++n) result.boundary_argmin[n] = boundary[n] != 0;
  return result;
}

ScalarField inf_convolution(const ScalarField& f, const Kernel& kernel,
                            const ConvolutionOptions& options) {
  return inf_convolution_detailed(f, kernel, options).value;
}

ScalarField tropical_min_combine(const ScalarField& f, ExtendedReal lambda, const ScalarField& g,
                                 ExtendedReal mu) {
  require_same_grid(f.grid(), g.grid(), "tropical_min_combine");
  ScalarField out(f.grid(), ExtendedReal::infinity());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = tmin(lambda + f[i], mu + g[i]);
  return out;
}

}  // namespace semiclassical
