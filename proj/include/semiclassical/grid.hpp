#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace semiclassical {

// Position or vector in one or two dimensions; 1D quantities leave y at zero.
struct Point {
  double x = 0.0;
  double y = 0.0;

  constexpr Point& operator+=(const Point& o) { x += o.x; y += o.y; return *this; }
  constexpr Point& operator-=(const Point& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Point& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Point operator+(Point a, const Point& b) { return a += b; }
  friend constexpr Point operator-(Point a, const Point& b) { return a -= b; }
  friend constexpr Point operator*(Point a, double s) { return a *= s; }
  friend constexpr Point operator*(double s, Point a) { return a *= s; }
  friend constexpr Point operator/(Point a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Point&, const Point&) = default;
};

constexpr double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
constexpr double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

// Uniform axis: nodes origin + i * spacing for i in [0, count).
struct Axis {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t count = 2;

  double coord(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
  double upper() const { return coord(count - 1); }
  double length() const { return upper() - origin; }

  // Axis with `count` nodes spanning [lo, hi] inclusive.
  static Axis spanning(double lo, double hi, std::size_t count);
  // Periodic-style axis: `count` nodes starting at lo with spacing (hi - lo) / count.
  static Axis periodic(double lo, double hi, std::size_t count);

  friend bool operator==(const Axis&, const Axis&) = default;
};

// Uniform 1D or 2D grid, row-major with axis 0 slowest.
class Grid {
 public:
  Grid() = default;
  explicit Grid(Axis x);
  Grid(Axis x, Axis y);

  std::size_t dim() const { return dim_; }
  const Axis& axis(std::size_t k) const { return axes_[k]; }
  std::size_t size() const { return dim_ == 1 ? axes_[0].count : axes_[0].count * axes_[1].count; }

  // Volume element of one node (dx or dx*dy).
  double cell_volume() const;

  std::size_t index(std::size_t i, std::size_t j = 0) const {
    return dim_ == 1 ? i : i * axes_[1].count + j;
  }
  std::size_t row(std::size_t flat) const { return dim_ == 1 ? flat : flat / axes_[1].count; }
  std::size_t col(std::size_t flat) const { return dim_ == 1 ? 0 : flat % axes_[1].count; }

  Point point(std::size_t flat) const;
  bool contains(const Point& p) const;
  // Nearest node; ties resolve toward the lower index on each axis.
  std::size_t nearest(const Point& p) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t dim_ = 0;
  Axis axes_[2]{};
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

// Location of a point within a grid for multilinear interpolation.
struct Stencil {
  std::size_t i0 = 0, j0 = 0;
  double fx = 0.0, fy = 0.0;
};

// Returns nullopt when p lies outside the grid's bounding box.
std::optional<Stencil> locate(const Grid& grid, const Point& p);

// Linear (1D) or bilinear (2D) interpolation of nodal values.
double interpolate(const Grid& grid, const std::vector<double>& values, const Stencil& s);

}  // namespace semiclassical
