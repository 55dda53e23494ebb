#include "semiclassical/grid.hpp"

#include <algorithm>
#include <string>

#include "semiclassical/errors.hpp"

namespace semiclassical {

namespace {

void validate(const Axis& a) {
  require(a.count >= 2, ErrorKind::InvalidArgument, "grid axis needs at least 2 nodes");
  require(a.spacing > 0.0 && std::isfinite(a.spacing), ErrorKind::InvalidArgument,
          "grid spacing must be positive");
  require(std::isfinite(a.origin), ErrorKind::InvalidArgument, "grid origin must be finite");
}

std::size_t nearest_on_axis(const Axis& a, double x) {
  const double u = (x - a.origin) / a.spacing;
  if (u <= 0.0) return 0;
  const auto last = a.count - 1;
  if (u >= static_cast<double>(last)) return last;
  const auto lo = static_cast<std::size_t>(std::floor(u));
  // strict comparison: exact midpoints go to the lower node
  return (u - static_cast<double>(lo) > 0.5) ? lo + 1 : lo;
}

bool on_axis(const Axis& a, double x) {
  const double tol = 1e-12 * a.spacing;
  return x >= a.origin - tol && x <= a.upper() + tol;
}

void locate_axis(const Axis& a, double x, std::size_t& i0, double& f) {
  double u = (x - a.origin) / a.spacing;
  const auto last = static_cast<double>(a.count - 1);
  u = std::clamp(u, 0.0, last);
  auto lo = static_cast<std::size_t>(std::floor(u));
  if (lo >= a.count - 1) lo = a.count - 2;
  i0 = lo;
  f = u - static_cast<double>(lo);
}

}  // namespace

Axis Axis::spanning(double lo, double hi, std::size_t count) {
  require(count >= 2 && hi > lo, ErrorKind::InvalidArgument, "axis needs hi > lo and count >= 2");
  return Axis{lo, (hi - lo) / static_cast<double>(count - 1), count};
}

Axis Axis::periodic(double lo, double hi, std::size_t count) {
  require(count >= 2 && hi > lo, ErrorKind::InvalidArgument, "axis needs hi > lo and count >= 2");
  return Axis{lo, (hi - lo) / static_cast<double>(count), count};
}

Grid::Grid(Axis x) : dim_(1), axes_{x, Axis{}} { validate(x); }

Grid::Grid(Axis x, Axis y) : dim_(2), axes_{x, y} {
  validate(x);
  validate(y);
}

double Grid::cell_volume() const {
  return dim_ == 1 ? axes_[0].spacing : axes_[0].spacing * axes_[1].spacing;
}

Point Grid::point(std::size_t flat) const {
  if (dim_ == 1) return {axes_[0].coord(flat), 0.0};
  return {axes_[0].coord(row(flat)), axes_[1].coord(col(flat))};
}

bool Grid::contains(const Point& p) const {
  if (!on_axis(axes_[0], p.x)) return false;
  return dim_ == 1 || on_axis(axes_[1], p.y);
}

std::size_t Grid::nearest(const Point& p) const {
  const auto i = nearest_on_axis(axes_[0], p.x);
  if (dim_ == 1) return i;
  return index(i, nearest_on_axis(axes_[1], p.y));
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  require(a == b, ErrorKind::Shape, std::string(what) + ": grids differ");
}

std::optional<Stencil> locate(const Grid& grid, const Point& p) {
  if (!grid.contains(p)) return std::nullopt;
  Stencil s;
  locate_axis(grid.axis(0), p.x, s.i0, s.fx);
  if (grid.dim() == 2) locate_axis(grid.axis(1), p.y, s.j0, s.fy);
  return s;
}

double interpolate(const Grid& grid, const std::vector<double>& v, const Stencil& s) {
  if (grid.dim() == 1) return (1.0 - s.fx) * v[s.i0] + s.fx * v[s.i0 + 1];
  const auto a = v[grid.index(s.i0, s.j0)];
  const auto b = v[grid.index(s.i0 + 1, s.j0)];
  const auto c = v[grid.index(s.i0, s.j0 + 1)];
  const auto d = v[grid.index(s.i0 + 1, s.j0 + 1)];
  return (1.0 - s.fx) * (1.0 - s.fy) * a + s.fx * (1.0 - s.fy) * b + (1.0 - s.fx) * s.fy * c +
         s.fx * s.fy * d;
}

}  // namespace semiclassical
