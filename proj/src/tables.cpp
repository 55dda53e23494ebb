#include "semiclassical/tables.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "semiclassical/errors.hpp"

namespace semiclassical {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_row(std::vector<std::string> row) {
  require(row.size() == columns.size(), ErrorKind::Shape, "row width differs from the header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out = "# units:";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out += (i ? "," : " ") + columns[i].name + "=" + columns[i].unit;
  out += "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i].name;
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = line.find(sep, start);
    out.emplace_back(line.substr(start, p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

}  // namespace

ParsedTable parse_csv(std::string_view text) {
  ParsedTable t;
  bool have_header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    if (line.rfind("# units:", 0) == 0) {
      std::string_view rest = line.substr(8);
      if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      for (const auto& cell : split(rest, ',')) {
        const auto eq = cell.find('=');
        t.units.push_back(eq == std::string::npos ? "" : cell.substr(eq + 1));
      }
      continue;
    }
    if (line.front() == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    require(cells.size() == t.header.size(), ErrorKind::Parse, "ragged CSV row");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table field_table(const ScalarField& field, std::string_view value_name, std::string_view unit) {
  const Grid& g = field.grid();
  Table t;
  t.columns.push_back({"x", "length"});
  if (g.dim() == 2) t.columns.push_back({"y", "length"});
  t.columns.push_back({std::string(value_name), std::string(unit)});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    std::vector<std::string> row{format_double(p.x)};
    if (g.dim() == 2) row.push_back(format_double(p.y));
    row.push_back(format_double(field[i].value()));
    t.add_row(std::move(row));
  }
  return t;
}

Table sweep_table(const SweepReport& report) {
  Table t;
  t.columns = {{"hbar_factor", "1"},       {"hbar", "action"},        {"action_sup_err", "action"},
               {"density_dist", "length"}, {"traj_rms", "length"},    {"mask_coverage", "1"},
               {"grid_nodes", "1"},        {"dx", "length"},          {"dt", "time"},
               {"censored", "1"}};
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& p : report.points)
    t.add_row({format_double(p.hbar_factor), format_double(p.hbar), opt(p.action_sup_err),
               opt(p.density_dist), opt(p.traj_rms), format_double(p.mask_coverage),
               std::to_string(p.grid_nodes), format_double(p.dx), format_double(p.dt),
               std::to_string(p.censored)});
  return t;
}

Table coherent_sweep_table(const CoherentSweepReport& report) {
  Table t;
  t.columns = {{"hbar_factor", "1"},         {"hbar", "action"},
               {"sigma_expected", "length"}, {"sigma_analytic", "length"},
               {"sigma_evolved", "length"},  {"offset_err_analytic", "action"},
               {"offset_err_evolved", "action"}, {"l2_error", "1"},
               {"grid_nodes", "1"},          {"dx", "length"},
               {"dt", "time"}};
  for (const auto& p : report.points)
    t.add_row({format_double(p.hbar_factor), format_double(p.hbar),
               format_double(p.sigma_expected), format_double(p.sigma_analytic),
               format_double(p.sigma_evolved), format_double(p.offset_err_analytic),
               format_double(p.offset_err_evolved), format_double(p.l2_error),
               std::to_string(p.grid_nodes), format_double(p.dx), format_double(p.dt)});
  return t;
}

std::string trajectory_ndjson(const TrajectoryBundle& bundle, std::size_t dim) {
  std::string out;
  for (std::size_t p = 0; p < bundle.particles(); ++p) {
    for (std::size_t k = 0; k < bundle.times.size() && bundle.valid_at(p, k); ++k) {
      const bool last = k + 1 == bundle.valid_until[p];
      const auto flag = last ? bundle.flags[p] : ParticleFlag::Valid;
      out += "{\"particle_id\":" + std::to_string(p) + ",\"t\":" +
             format_double(bundle.times[k]) + ",\"x\":" +
             format_double(bundle.positions[p][k].x);
      if (dim == 2) out += ",\"y\":" + format_double(bundle.positions[p][k].y);
      out += ",\"flags\":\"" + std::string(to_string(flag)) + "\"}\n";
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace semiclassical
