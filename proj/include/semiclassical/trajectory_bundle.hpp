#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "semiclassical/grid.hpp"

namespace semiclassical {

enum class ParticleFlag : std::uint8_t {
  Valid,
  Escaped,  // left the grid
  Masked,   // entered a region where the density is below the mask threshold
};

std::string_view to_string(ParticleFlag flag);

// Ensemble of time-indexed paths. positions[p][k] is particle p at times[k]; samples at or
// after valid_until[p] are the last valid position repeated and must not be used.
struct TrajectoryBundle {
  std::vector<double> times;
  std::vector<std::vector<Point>> positions;
  std::vector<ParticleFlag> flags;
  std::vector<std::size_t> valid_until;

  std::size_t particles() const { return positions.size(); }
  bool valid_at(std::size_t p, std::size_t k) const { return k < valid_until[p]; }
};

}  // namespace semiclassical
