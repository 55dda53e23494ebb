#pragma once

#include <compare>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "semiclassical/grid.hpp"

namespace semiclassical {

// Element of the min-plus semiring (R ∪ {+inf}, min, +).
//
// +inf is stored as the IEEE positive infinity and never participates in ordinary float
// arithmetic: addition saturates, so no operation can produce NaN or -inf.
class ExtendedReal {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  constexpr ExtendedReal() = default;  // +inf, the tropical zero
  ExtendedReal(double v);              // NOLINT(google-explicit-constructor)

  static constexpr ExtendedReal infinity() { return ExtendedReal{}; }

  constexpr bool is_infinite() const { return v_ == kInf; }
  constexpr bool is_finite() const { return v_ != kInf; }
  constexpr double value() const { return v_; }

  // Tropical multiplication: ordinary + with +inf absorbing.
  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b);
  ExtendedReal& operator+=(ExtendedReal o) { return *this = *this + o; }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }
  friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b) { return a.v_ <=> b.v_; }

 private:
  double v_ = kInf;
};

// Tropical addition.
constexpr ExtendedReal tmin(ExtendedReal a, ExtendedReal b) { return b < a ? b : a; }

// Uniform-grid sampling of an extended-real function (actions, densities).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Grid grid, std::vector<ExtendedReal> values);
  ScalarField(Grid grid, ExtendedReal fill);

  static ScalarField sample(const Grid& grid, const std::function<double(const Point&)>& f);
  static ScalarField from_doubles(const Grid& grid, std::span<const double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  ExtendedReal operator[](std::size_t i) const { return values_[i]; }
  ExtendedReal& operator[](std::size_t i) { return values_[i]; }
  std::span<const ExtendedReal> values() const { return values_; }

  // Raw doubles, +inf kept as IEEE infinity.
  std::vector<double> to_doubles() const;

  // Linear (1D) or bilinear (2D) interpolation; +inf if any stencil node is +inf or p is
  // outside the grid.
  ExtendedReal at(const Point& p) const;

 private:
  Grid grid_;
  std::vector<ExtendedReal> values_;
};

using Kernel = std::function<ExtendedReal(const Point& x, const Point& y)>;

ScalarField delta_min(const Point& x0, const Grid& grid);

ExtendedReal minplus_scalar_product(const ScalarField& f, const ScalarField& g);

struct ConvolutionOptions {
  // Continue with a bracketed 1D (per-axis in 2D) Brent minimization of
  // interpolated-f + kernel around the best node; the node value is kept if better.
  bool refine = false;
  // Output grid; defaults to the input grid.
  std::optional<Grid> output_grid;
};

struct ConvolutionResult {
  ScalarField value;
  // Minimizing input position per output node (meaningless where value is +inf).
  std::vector<Point> argmin;
  // True where the best input node sits on the input grid boundary, i.e. the true
  // infimum over an unbounded domain may lie outside the sampled window.
  std::vector<bool> boundary_argmin;
};

// result(x) = inf_y { f(y) + kernel(x, y) } over the nodes of f's grid.
ConvolutionResult inf_convolution_detailed(const ScalarField& f, const Kernel& kernel,
                                           const ConvolutionOptions& options = {});
ScalarField inf_convolution(const ScalarField& f, const Kernel& kernel,
                            const ConvolutionOptions& options = {});

// Pointwise min(lambda + f, mu + g).
ScalarField tropical_min_combine(const ScalarField& f, ExtendedReal lambda, const ScalarField& g,
                                 ExtendedReal mu);

}  // namespace semiclassical
