#include "semiclassical/lagrangian.hpp"

#include <cmath>

#include "semiclassical/errors.hpp"

namespace semiclassical {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Free: return "free";
    case PotentialKind::Linear: return "linear";
    case PotentialKind::Harmonic: return "harmonic";
    case PotentialKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

namespace {

void check_mass(double m) {
  require(m > 0.0 && std::isfinite(m), ErrorKind::InvalidArgument, "mass must be positive");
}

// Centered differences in the interior, second-order one-sided at the ends.
std::vector<double> axis_gradient(const Grid& g, const std::vector<double>& v, std::size_t axis) {
  std::vector<double> out(v.size(), 0.0);
  const std::size_t n = g.axis(axis).count;
  const double h = g.axis(axis).spacing;
  const std::size_t lines = g.size() / n;
  for (std::size_t l = 0; l < lines; ++l) {
    auto at = [&](std::size_t k) {
      return axis == 0 ? g.index(k, g.dim() == 1 ? 0 : l) : g.index(l, k);
    };
    for (std::size_t k = 0; k < n; ++k) {
      double d;
      if (k == 0) {
        d = n > 2 ? (-3 * v[at(0)] + 4 * v[at(1)] - v[at(2)]) / (2 * h) : (v[at(1)] - v[at(0)]) / h;
      } else if (k + 1 == n) {
        d = n > 2 ? (3 * v[at(k)] - 4 * v[at(k - 1)] + v[at(k - 2)]) / (2 * h)
                  : (v[at(k)] - v[at(k - 1)]) / h;
      } else {
        d = (v[at(k + 1)] - v[at(k - 1)]) / (2 * h);
      }
      out[at(k)] = d;
    }
  }
  return out;
}

}  // namespace

LagrangianSpec LagrangianSpec::free(double mass) {
  check_mass(mass);
  LagrangianSpec s;
  s.mass_ = mass;
  return s;
}

LagrangianSpec LagrangianSpec::linear(double mass, Point force) {
  check_mass(mass);
  require(std::isfinite(force.x) && std::isfinite(force.y), ErrorKind::InvalidArgument,
          "force must be finite");
  LagrangianSpec s;
  s.kind_ = PotentialKind::Linear;
  s.mass_ = mass;
  s.force_ = force;
  return s;
}

LagrangianSpec LagrangianSpec::harmonic(double mass, double omega) {
  check_mass(mass);
  require(omega >= 0.0 && std::isfinite(omega), ErrorKind::InvalidArgument,
          "omega must be non-negative");
  LagrangianSpec s;
  s.kind_ = PotentialKind::Harmonic;
  s.mass_ = mass;
  s.omega_ = omega;
  return s;
}

LagrangianSpec LagrangianSpec::tabulated(double mass, ScalarField potential) {
  check_mass(mass);
  for (auto v : potential.values())
    require(v.is_finite(), ErrorKind::InvalidArgument, "tabulated potential must be finite");
  LagrangianSpec s;
  s.kind_ = PotentialKind::Tabulated;
  s.mass_ = mass;
  const auto raw = potential.to_doubles();
  s.grad_x_ = axis_gradient(potential.grid(), raw, 0);
  if (potential.grid().dim() == 2) s.grad_y_ = axis_gradient(potential.grid(), raw, 1);
  s.table_ = std::move(potential);
  return s;
}

double LagrangianSpec::potential(const Point& x) const {
  switch (kind_) {
    case PotentialKind::Free: return 0.0;
    case PotentialKind::Linear: return -dot(force_, x);
    case PotentialKind::Harmonic: return 0.5 * mass_ * omega_ * omega_ * norm2(x);
    case PotentialKind::Tabulated: {
      const auto s = locate(table_->grid(), x);
      require(s.has_value(), ErrorKind::OutOfDomain, "position outside tabulated potential");
      return table_->at(x).value();
    }
  }
  return 0.0;
}

Point LagrangianSpec::potential_gradient(const Point& x) const {
  switch (kind_) {
    case PotentialKind::Free: return {};
    case PotentialKind::Linear: return Point{} - force_;
    case PotentialKind::Harmonic: return mass_ * omega_ * omega_ * x;
    case PotentialKind::Tabulated: {
      const auto s = locate(table_->grid(), x);
      require(s.has_value(), ErrorKind::OutOfDomain, "position outside tabulated potential");
      Point g{interpolate(table_->grid(), grad_x_, *s), 0.0};
      if (!grad_y_.empty()) g.y = interpolate(table_->grid(), grad_y_, *s);
      return g;
    }
  }
  return {};
}

}  // namespace semiclassical
