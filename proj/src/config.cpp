#include "semiclassical/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "semiclassical/errors.hpp"

namespace semiclassical {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

bool valid_key(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
  });
}

}  // namespace

ScenarioConfig::ScenarioConfig(Schema schema) : schema_(std::move(schema)) {
  for (const auto& k : schema_) values_[k.name] = k.default_value;
}

bool ScenarioConfig::has_key(std::string_view key) const { return values_.count(key) != 0; }

void ScenarioConfig::set(std::string_view key, std::string value) {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::Parse, "unknown configuration key '" + std::string(key) + "'");
  it->second = std::move(value);
}

void ScenarioConfig::merge_text(std::string_view text, std::string_view source) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) fail(ErrorKind::Parse, where + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(ErrorKind::Parse, where + ": malformed key '" + std::string(key) + "'");
    if (!has_key(key))
      fail(ErrorKind::Parse, where + ": unknown configuration key '" + std::string(key) + "'");
    set(key, std::string(value));
  }
}

void ScenarioConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read configuration file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

void ScenarioConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorKind::Parse, "override '" + std::string(assignment) + "' is not key=value");
  merge_text(assignment, "--set");
}

const std::string& ScenarioConfig::raw(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::Parse, "unknown configuration key '" + std::string(key) + "'");
  return it->second;
}

double ScenarioConfig::get_double(std::string_view key) const {
  const auto& s = raw(key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    fail(ErrorKind::Validation, std::string(key) + " = '" + s + "' is not a finite number");
  return v;
}

std::uint64_t ScenarioConfig::get_u64(std::string_view key) const {
  const auto& s = raw(key);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorKind::Validation, std::string(key) + " = '" + s + "' is not a non-negative integer");
  return v;
}

std::size_t ScenarioConfig::get_size(std::string_view key) const {
  return static_cast<std::size_t>(get_u64(key));
}

bool ScenarioConfig::get_bool(std::string_view key) const {
  const auto& s = raw(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorKind::Validation, std::string(key) + " = '" + s + "' is not a boolean");
}

std::vector<double> ScenarioConfig::get_list(std::string_view key) const {
  const auto& s = raw(key);
  std::vector<double> out;
  std::string_view rest = s;
  while (true) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    double v = 0.0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size() || !std::isfinite(v))
      fail(ErrorKind::Validation, std::string(key) + " = '" + s + "' is not a list of numbers");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::string ScenarioConfig::emit() const {
  std::string out;
  for (const auto& k : schema_) out += k.name + " = " + values_.find(k.name)->second + "\n";
  return out;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::HopfLax: return "hopf-lax";
    case Command::ElAction: return "el-action";
    case Command::Deterministic: return "deterministic";
    case Command::Schrod: return "schrod";
    case Command::Bohm: return "bohm";
    case Command::DoubleSlit: return "double-slit";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

Command command_from_string(std::string_view name) {
  for (auto c : {Command::HopfLax, Command::ElAction, Command::Deterministic, Command::Schrod,
                 Command::Bohm, Command::DoubleSlit, Command::Sweep})
    if (to_string(c) == name) return c;
  fail(ErrorKind::Parse, "unknown subcommand '" + std::string(name) + "'");
}

namespace {

using Schema = ScenarioConfig::Schema;

void append(Schema& s, const Schema& extra) { s.insert(s.end(), extra.begin(), extra.end()); }

const Schema kRun = {
    {"run.seed", "1", "seed for every random stream"},
    {"run.threads", "0", "worker threads, 0 = hardware concurrency"},
};

const Schema kPhysics = {
    {"physics.mass", "1", "particle mass"},
    {"physics.potential", "free", "free | linear | harmonic"},
    {"physics.force", "0", "constant force K of the linear potential V = -K x"},
    {"physics.omega", "1", "harmonic angular frequency"},
};

const Schema kQuantum = {
    {"physics.hbar", "1", "reference hbar"},
    {"physics.hbar_factor", "1", "multiplier applied to the reference hbar"},
};

const Schema kGeometry = {
    {"slit.sigma", "1", "standard deviation of |psi|^2 at each slit"},
    {"slit.separation", "6", "centre-to-centre slit distance"},
    {"slit.screen_time", "60", "flight time to the screen"},
    {"slit.forward_speed", "1", "longitudinal speed (distance = speed * time)"},
    {"slit.screen_bins", "201", "screen histogram bins"},
    {"time.slices", "200", "wave function slices between slits and screen"},
    {"time.steps_per_slice", "10", "Bohm RK4 steps per slice"},
    {"bohm.particles", "100", "number of Bohm trajectories"},
    {"bohm.mask_threshold", "1e-6", "relative density below which particles are censored"},
};

Schema make_schema(Command c) {
  Schema s = kRun;
  switch (c) {
    case Command::HopfLax:
      append(s, kPhysics);
      append(s, {
                    {"initial.kind", "linear", "linear (S0 = m v0 x) | delta (at x0) | quadratic"},
                    {"initial.v0", "0", "initial velocity of the linear S0"},
                    {"initial.x0", "0", "delta position or quadratic centre"},
                    {"initial.curvature", "1", "S0 = curvature (x - x0)^2 / 2 for quadratic"},
                    {"grid.lo", "-5", "left end of the grid"},
                    {"grid.hi", "5", "right end of the grid"},
                    {"grid.nodes", "2048", "grid nodes"},
                    {"time.t", "1", "comma-separated output times"},
                    {"numerics.refine", "true", "continuous refinement around the best node"},
                });
      break;
    case Command::ElAction:
      append(s, kPhysics);
      append(s, {
                    {"path.x0", "0", "start point"},
                    {"path.x", "1", "end point"},
                    {"path.t", "1", "duration"},
                    {"numerics.steps", "200", "path elements"},
                    {"numerics.tolerance", "1e-10", "gradient tolerance"},
                });
      break;
    case Command::Deterministic:
      append(s, kPhysics);
      append(s, {
                    {"initial.x0", "1", "initial position"},
                    {"initial.v0", "0", "initial velocity"},
                    {"time.t_end", "6.283185307179586", "horizon"},
                    {"time.dt", "1e-3", "RK4 step"},
                    {"output.every", "10", "write every n-th sample"},
                });
      break;
    case Command::Schrod:
      append(s, kPhysics);
      append(s, kQuantum);
      append(s, {
                    {"state.kind", "gaussian", "gaussian | coherent"},
                    {"state.x0", "0", "packet centre"},
                    {"state.v0", "0", "packet velocity"},
                    {"state.sigma", "1", "std of |psi|^2 (gaussian only)"},
                    {"grid.lo", "-20", "left end of the periodic grid"},
                    {"grid.hi", "20", "right end of the periodic grid"},
                    {"grid.nodes", "1024", "grid nodes"},
                    {"time.dt", "1e-3", "split-step time step"},
                    {"time.steps_per_slice", "100", "steps between output slices"},
                    {"time.slices", "10", "output slices after t = 0"},
                    {"numerics.method", "split-step", "split-step | feynman"},
                });
      break;
    case Command::Bohm:
      append(s, kPhysics);
      append(s, kQuantum);
      append(s, kGeometry);
      append(s, {
                    {"bohm.scenario", "double-slit", "double-slit | gaussian | coherent"},
                    {"state.x0", "0", "packet centre (gaussian, coherent)"},
                    {"state.v0", "0", "packet velocity (gaussian, coherent)"},
                    {"state.sigma", "1", "std of |psi|^2 (gaussian)"},
                    {"grid.lo", "-20", "left end of the grid (gaussian, coherent)"},
                    {"grid.hi", "20", "right end of the grid (gaussian, coherent)"},
                    {"grid.nodes", "1024", "grid nodes (gaussian, coherent)"},
                    {"time.dt", "1e-3", "split-step time step (gaussian, coherent)"},
                    {"time.t_end", "10", "horizon (gaussian, coherent)"},
                });
      break;
    case Command::DoubleSlit:
      append(s, kQuantum);
      append(s, {{"physics.mass", "1", "particle mass"}});
      append(s, kGeometry);
      break;
    case Command::Sweep:
      append(s, {
                    {"sweep.kind", "indiscerned", "indiscerned | coherent | double-slit"},
                    {"sweep.factors", "1,0.1,0.01,0.001,0.0001", "hbar multipliers, decreasing"},
                    {"physics.mass", "1", "particle mass"},
                    {"physics.hbar", "1", "reference hbar"},
                    {"physics.force", "1", "linear force (indiscerned)"},
                    {"physics.omega", "1", "oscillator frequency (coherent)"},
                    {"state.x0", "0", "initial centre"},
                    {"state.v0", "0.5", "initial velocity"},
                    {"state.sigma", "0.25", "initial std of rho (indiscerned)"},
                    {"time.t_end", "0.5", "horizon (indiscerned; coherent uses a quarter period)"},
                    {"time.slices", "20", "output slices (indiscerned)"},
                    {"bohm.particles", "1000", "Bohm trajectories per factor"},
                });
      append(s, {
                    {"slit.sigma", "1", "double-slit: slit std"},
                    {"slit.separation", "6", "double-slit: slit distance"},
                    {"slit.screen_time", "60", "double-slit: flight time"},
                });
      break;
  }
  return s;
}

}  // namespace

const ScenarioConfig::Schema& schema_for(Command command) {
  static const std::map<Command, Schema> cache = [] {
    std::map<Command, Schema> m;
    for (auto c : {Command::HopfLax, Command::ElAction, Command::Deterministic, Command::Schrod,
                   Command::Bohm, Command::DoubleSlit, Command::Sweep})
      m.emplace(c, make_schema(c));
    return m;
  }();
  return cache.at(command);
}

ScenarioConfig default_config(Command command) { return ScenarioConfig(schema_for(command)); }

}  // namespace semiclassical
