#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "semiclassical/convergence.hpp"
#include "semiclassical/minplus.hpp"
#include "semiclassical/trajectory_bundle.hpp"

namespace semiclassical {

// 17 significant digits; non-finite values print as inf, -inf or nan.
std::string format_double(double v);

struct Column {
  std::string name;
  std::string unit;  // free text, "1" for dimensionless
};

// Dense table: a `# units:` comment line, a header row, then one row per record. Cells are
// preformatted strings so that empty (unmeasured) entries stay representable.
struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_csv() const;
};

// Parsed form of to_csv output (units line optional).
struct ParsedTable {
  std::vector<std::string> header;
  std::vector<std::string> units;
  std::vector<std::vector<std::string>> rows;
};
ParsedTable parse_csv(std::string_view text);

// Columns (x[, y], value) in row-major axis order; +inf written as inf.
Table field_table(const ScalarField& field, std::string_view value_name, std::string_view unit);

// Columns (hbar_factor, hbar, action_sup_err, density_dist, traj_rms, mask_coverage,
// grid_nodes, dx, dt, censored); unmeasured metrics are empty cells.
Table sweep_table(const SweepReport& report);
Table coherent_sweep_table(const CoherentSweepReport& report);

// One JSON object per particle and valid instant: {particle_id, t, x[, y], flags}.
std::string trajectory_ndjson(const TrajectoryBundle& bundle, std::size_t dim);

std::uint64_t fnv1a64(std::string_view bytes);

// Writes via a sibling temporary file and rename, so readers never see partial content.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace semiclassical
