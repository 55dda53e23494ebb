#pragma once

#include <optional>
#include <string>

#include "semiclassical/grid.hpp"
#include "semiclassical/minplus.hpp"

namespace semiclassical {

enum class PotentialKind { Free, Linear, Harmonic, Tabulated };

std::string to_string(PotentialKind kind);

// L(x, v) = ½ m |v|² - V(x).
//   Linear:    V(x) = -K·x
//   Harmonic:  V(x) = ½ m ω² |x|²
//   Tabulated: V sampled on a grid, gradients from centered differences.
class LagrangianSpec {
 public:
  // Free particle of unit mass.
  LagrangianSpec() = default;
  static LagrangianSpec free(double mass);
  static LagrangianSpec linear(double mass, Point force);
  static LagrangianSpec harmonic(double mass, double omega);
  static LagrangianSpec tabulated(double mass, ScalarField potential);

  PotentialKind kind() const { return kind_; }
  double mass() const { return mass_; }
  const Point& force() const { return force_; }
  double omega() const { return omega_; }
  const std::optional<ScalarField>& table() const { return table_; }

  double potential(const Point& x) const;
  Point potential_gradient(const Point& x) const;

  // Closed-form Euler-Lagrange action exists (Free, Linear, Harmonic).
  bool has_closed_form() const { return kind_ != PotentialKind::Tabulated; }

 private:
  PotentialKind kind_ = PotentialKind::Free;
  double mass_ = 1.0;
  Point force_{};
  double omega_ = 0.0;
  std::optional<ScalarField> table_;
  // Centered-difference gradient of the table, one component per axis.
  std::vector<double> grad_x_, grad_y_;
};

}  // namespace semiclassical
