#include "semiclassical/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "semiclassical/actions.hpp"
#include "semiclassical/bohm.hpp"
#include "semiclassical/convergence.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/hopf_lax.hpp"
#include "semiclassical/parallel.hpp"
#include "semiclassical/quantum.hpp"
#include "semiclassical/tables.hpp"

#ifndef SEMICLASSICAL_VERSION
#define SEMICLASSICAL_VERSION "0.0.0"
#endif
#ifndef SEMICLASSICAL_PRESET_DIR
#define SEMICLASSICAL_PRESET_DIR "presets"
#endif

namespace semiclassical {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Artifacts {
  fs::path dir;
  std::vector<fs::path> files;
  json outputs = json::array();
  json summary = json::object();

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    write_atomic(p, content);
    files.push_back(p);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(content)));
    outputs.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", hex}});
  }
};

using Job = std::function<void(Artifacts&)>;

[[noreturn]] void invalid(const std::string& what) { fail(ErrorKind::Validation, what); }

double positive(const ScenarioConfig& c, std::string_view key) {
  const double v = c.get_double(key);
  if (!(v > 0.0)) invalid(std::string(key) + " must be positive");
  return v;
}

std::size_t at_least(const ScenarioConfig& c, std::string_view key, std::size_t lo) {
  const std::size_t v = c.get_size(key);
  if (v < lo) invalid(std::string(key) + " must be at least " + std::to_string(lo));
  return v;
}

LagrangianSpec lagrangian_from(const ScenarioConfig& c) {
  const double m = positive(c, "physics.mass");
  const auto& kind = c.get_string("physics.potential");
  if (kind == "free") return LagrangianSpec::free(m);
  if (kind == "linear") return LagrangianSpec::linear(m, Point{c.get_double("physics.force"), 0.0});
  if (kind == "harmonic") {
    const double w = c.get_double("physics.omega");
    if (w < 0.0) invalid("physics.omega must be non-negative");
    return LagrangianSpec::harmonic(m, w);
  }
  invalid("physics.potential must be free, linear or harmonic, not '" + kind + "'");
}

double hbar_from(const ScenarioConfig& c) {
  return positive(c, "physics.hbar") * positive(c, "physics.hbar_factor");
}

std::pair<double, double> interval(const ScenarioConfig& c) {
  const double lo = c.get_double("grid.lo"), hi = c.get_double("grid.hi");
  if (!(hi > lo)) invalid("grid.hi must exceed grid.lo");
  return {lo, hi};
}

std::string fmt(double v) { return format_double(v); }

// --- hopf-lax ---------------------------------------------------------------------------

Job prepare_hopf_lax(const ScenarioConfig& c) {
  const auto spec = lagrangian_from(c);
  const auto [lo, hi] = interval(c);
  const Grid grid(Axis::spanning(lo, hi, at_least(c, "grid.nodes", 2)));
  const auto kind = c.get_string("initial.kind");
  const double v0 = c.get_double("initial.v0"), x0 = c.get_double("initial.x0");
  const double curv = c.get_double("initial.curvature");
  if (kind != "linear" && kind != "delta" && kind != "quadratic")
    invalid("initial.kind must be linear, delta or quadratic");
  if (kind == "delta" && !grid.contains(Point{x0, 0.0})) invalid("initial.x0 lies outside the grid");
  if (kind == "quadratic" && curv < 0.0) invalid("initial.curvature must be non-negative");
  const auto times = c.get_list("time.t");
  for (double t : times)
    if (!(t > 0.0)) invalid("time.t entries must be positive");
  HopfLaxOptions opts;
  opts.refine = c.get_bool("numerics.refine");

  return [=](Artifacts& art) {
    const double m = spec.mass();
    ScalarField s0 =
        kind == "delta" ? delta_min(Point{x0, 0.0}, grid)
        : kind == "linear"
            ? ScalarField::sample(grid, [&](const Point& p) { return m * v0 * p.x; })
            : ScalarField::sample(grid, [&](const Point& p) {
                return 0.5 * curv * (p.x - x0) * (p.x - x0);
              });
    const Point snapped = grid.point(grid.nearest(Point{x0, 0.0}));
    const bool closed_linear = kind == "linear" && spec.kind() != PotentialKind::Harmonic;
    const double K = spec.force().x;

    Table t;
    t.columns = {{"t", "time"},     {"x", "length"},       {"action", "action"},
                 {"velocity", "length/time"}, {"interior", "1"}, {"reference", "action"}};
    json errs = json::array();
    for (double time : times) {
      const auto hf = hamilton_jacobi_field_detailed(spec, s0, time, opts);
      const auto vf = velocity_field(hf.action, m);
      double max_err = 0.0, max_ref = 0.0;
      bool any_ref = false;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.point(i).x;
        std::optional<double> ref;
        if (closed_linear)
          ref = m * v0 * x - 0.5 * m * v0 * v0 * time + K * x * time - 0.5 * K * v0 * time * time -
                K * K * time * time * time / (6.0 * m);
        else if (kind == "delta")
          ref = el_action_closed(spec, Point{x, 0.0}, time, snapped).value();
        const double s = hf.action[i].value();
        if (ref && hf.interior[i]) {
          any_ref = true;
          max_err = std::max(max_err, std::abs(s - *ref));
          max_ref = std::max(max_ref, std::abs(*ref));
        }
        t.add_row({fmt(time), fmt(x), fmt(s), vf.valid[i] ? fmt(vf.values[i].x) : "",
                   hf.interior[i] ? "1" : "0", ref ? fmt(*ref) : ""});
      }
      if (any_ref)
        errs.push_back({{"t", time},
                        {"max_abs_err", max_err},
                        {"max_rel_err", max_ref > 0 ? max_err / max_ref : max_err}});
    }
    art.write("hopf_lax.csv", t.to_csv());
    art.summary["reference_errors"] = errs;
  };
}

// --- el-action -----------------------------------------------------------------------

Job prepare_el_action(const ScenarioConfig& c) {
  const auto spec = lagrangian_from(c);
  const double x0 = c.get_double("path.x0"), x = c.get_double("path.x");
  const double t = positive(c, "path.t");
  const std::size_t steps = at_least(c, "numerics.steps", 2);
  NumericActionOptions opts;
  opts.gradient_tolerance = positive(c, "numerics.tolerance");
  return [=](Artifacts& art) {
    const auto num = el_action_numeric(spec, Point{x, 0.0}, t, Point{x0, 0.0}, steps, opts);
    Table tab;
    tab.columns = {{"s", "time"}, {"x", "length"}, {"v", "length/time"}};
    for (std::size_t k = 0; k < num.path.size(); ++k)
      tab.add_row({fmt(num.path.times[k]), fmt(num.path.positions[k].x),
                   fmt(num.path.velocities[k].x)});
    art.write("el_action.csv", tab.to_csv());
    art.summary["action_numeric"] = num.action.value();
    art.summary["gradient_norm"] = num.gradient_norm;
    art.summary["iterations"] = num.iterations;
    art.summary["action_closed"] = el_action_closed(spec, Point{x, 0.0}, t, Point{x0, 0.0}).value();
  };
}

// --- deterministic ---------------------------------------------------------------------

Job prepare_deterministic(const ScenarioConfig& c) {
  const auto spec = lagrangian_from(c);
  const double x0 = c.get_double("initial.x0"), v0 = c.get_double("initial.v0");
  const double t_end = positive(c, "time.t_end"), dt = positive(c, "time.dt");
  const std::size_t every = at_least(c, "output.every", 1);
  return [=](Artifacts& art) {
    const auto det = deterministic_action(spec, Point{x0, 0.0}, Point{v0, 0.0}, t_end, dt);
    const auto& xi = det.xi();
    Table tab;
    tab.columns = {{"t", "time"}, {"xi", "length"}, {"xi_dot", "length/time"}, {"g", "action"}};
    for (std::size_t k = 0; k < xi.size(); ++k)
      if (k % every == 0 || k + 1 == xi.size())
        tab.add_row({fmt(xi.times[k]), fmt(xi.positions[k].x), fmt(xi.velocities[k].x),
                     fmt(det.g_values()[k])});
    art.write("deterministic.csv", tab.to_csv());
    art.summary["energy_drift"] = det.energy_drift();
  };
}

// --- schrod -------------------------------------------------------------------------------

struct StateSetup {
  LagrangianSpec spec;
  Grid grid;
  double hbar = 1.0;
  std::string kind;
  double x0 = 0.0, v0 = 0.0, sigma = 1.0;

  WaveFunction initial() const {
    if (kind == "coherent") {
      CoherentStateParams p;
      p.mass = spec.mass();
      p.omega = spec.omega();
      p.hbar = hbar;
      p.x0 = Point{x0, 0.0};
      p.v0 = Point{v0, 0.0};
      return coherent_state(p, 0.0, grid).psi;
    }
    return gaussian_packet(grid, Point{x0, 0.0}, sigma, Point{v0, 0.0}, hbar, spec.mass());
  }
};

StateSetup state_from(const ScenarioConfig& c) {
  StateSetup s;
  s.spec = lagrangian_from(c);
  s.hbar = hbar_from(c);
  const auto [lo, hi] = interval(c);
  s.grid = Grid(Axis::periodic(lo, hi, at_least(c, "grid.nodes", 4)));
  s.kind = c.get_string("state.kind");
  s.x0 = c.get_double("state.x0");
  s.v0 = c.get_double("state.v0");
  s.sigma = positive(c, "state.sigma");
  if (s.kind != "gaussian" && s.kind != "coherent") invalid("state.kind must be gaussian or coherent");
  if (s.kind == "coherent" && (s.spec.kind() != PotentialKind::Harmonic || !(s.spec.omega() > 0)))
    invalid("a coherent state needs physics.potential = harmonic with omega > 0");
  if (!(s.x0 > lo && s.x0 < hi)) invalid("state.x0 lies outside the grid");
  return s;
}

Job prepare_schrod(const ScenarioConfig& c) {
  const StateSetup st = state_from(c);
  const double dt = positive(c, "time.dt");
  const std::size_t per = at_least(c, "time.steps_per_slice", 1);
  const std::size_t slices = at_least(c, "time.slices", 1);
  const auto method = c.get_string("numerics.method");
  if (method != "split-step" && method != "feynman")
    invalid("numerics.method must be split-step or feynman");
  return [=](Artifacts& art) {
    const WaveFunction psi0 = st.initial();
    Evolution evo;
    if (method == "split-step") {
      evo = evolve_slices(psi0, st.spec, dt, per, slices);
    } else {
      for (std::size_t k = 0; k <= slices; ++k) {
        const double t = dt * static_cast<double>(per * k);
        evo.times.push_back(t);
        evo.slices.push_back(k == 0 ? psi0 : feynman_propagate(psi0, st.spec, t));
      }
    }
    Table tab;
    tab.columns = {{"t", "time"},   {"x", "length"}, {"rho", "1/length"},
                   {"action", "action"}, {"re", "1/sqrt(length)"}, {"im", "1/sqrt(length)"}};
    json moments = json::array();
    for (std::size_t k = 0; k < evo.slices.size(); ++k) {
      const auto& psi = evo.slices[k];
      const auto pair = madelung_decompose(psi);
      for (std::size_t i = 0; i < psi.size(); ++i)
        tab.add_row({fmt(evo.times[k]), fmt(psi.grid().point(i).x), fmt(pair.rho[i].value()),
                     pair.mask[i] ? fmt(pair.action[i].value()) : "", fmt(psi[i].real()),
                     fmt(psi[i].imag())});
      const auto mom = position_moments(psi);
      moments.push_back({{"t", evo.times[k]}, {"mean", mom.mean.x}, {"variance", mom.variance.x},
                         {"norm", psi.norm()}});
    }
    art.write("schrod.csv", tab.to_csv());
    art.summary["moments"] = moments;
    art.summary["max_edge_mass"] = evo.log.max_edge_mass;
    art.summary["norm_drift"] = evo.log.norm_drift;
  };
}

// --- bohm / double-slit -------------------------------------------------------------------

DoubleSlitGeometry geometry_from(const ScenarioConfig& c) {
  DoubleSlitGeometry g;
  g.mass = positive(c, "physics.mass");
  g.hbar = positive(c, "physics.hbar");
  g.slit_sigma = positive(c, "slit.sigma");
  g.slit_separation = positive(c, "slit.separation");
  g.screen_time = positive(c, "slit.screen_time");
  if (c.has_key("slit.forward_speed")) g.forward_speed = positive(c, "slit.forward_speed");
  if (c.has_key("slit.screen_bins")) g.screen_bins = at_least(c, "slit.screen_bins", 8);
  if (c.has_key("time.slices")) g.slices = at_least(c, "time.slices", 2);
  if (c.has_key("time.steps_per_slice")) g.steps_per_slice = at_least(c, "time.steps_per_slice", 1);
  if (c.has_key("bohm.mask_threshold")) g.mask_threshold = positive(c, "bohm.mask_threshold");
  try {
    g.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }
  return g;
}

json equivariance_json(const std::vector<double>& times, const std::vector<double>& ks,
                       std::size_t n) {
  const double band = 1.63 / std::sqrt(static_cast<double>(n));
  json j = {{"band", band}, {"max_ks", 0.0}, {"within_band", true}};
  double mx = 0.0;
  for (double k : ks) mx = std::max(mx, k);
  j["max_ks"] = mx;
  j["within_band"] = mx < band;
  j["slices"] = times.size();
  return j;
}

Table equivariance_table(const std::vector<double>& times, const std::vector<double>& ks) {
  Table t;
  t.columns = {{"t", "time"}, {"ks", "1"}};
  for (std::size_t k = 0; k < ks.size(); ++k) t.add_row({fmt(times[k]), fmt(ks[k])});
  return t;
}

std::size_t valid_at_end(const TrajectoryBundle& b) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < b.particles(); ++p) n += b.valid_at(p, b.times.size() - 1) ? 1 : 0;
  return n;
}

void run_double_slit(const DoubleSlitGeometry& geo, double factor, std::size_t n,
                     std::uint64_t seed, Artifacts& art) {
  const auto r = double_slit_scenario(geo, factor, n, seed);
  art.write("trajectories.ndjson", trajectory_ndjson(r.bundle, 1));
  Table screen;
  screen.columns = {{"x", "length"}, {"probability", "1"}, {"count", "1"}};
  for (std::size_t b = 0; b < r.screen.bin_centers.size(); ++b)
    screen.add_row({fmt(r.screen.bin_centers[b]), fmt(r.screen.probability[b]),
                    fmt(r.screen.particle_counts[b])});
  art.write("screen.csv", screen.to_csv());

  bool half_planes = true;
  for (std::size_t p = 0; p < r.bundle.particles(); ++p) {
    const double s0 = r.initial[p].x;
    for (std::size_t k = 0; k < r.bundle.times.size() && r.bundle.valid_at(p, k); ++k)
      if (s0 * r.bundle.positions[p][k].x < 0.0) half_planes = false;
  }
  art.summary["hbar"] = r.hbar;
  art.summary["resolved_fringes"] = r.screen.maxima.size();
  art.summary["fringe_maxima"] = r.screen.maxima;
  art.summary["visibility"] = r.screen.visibility;
  art.summary["fringe_spacing"] = r.screen.fringe_spacing;
  // asymptotic spacing; the envelope pulls outer maxima inward when few fringes fit
  art.summary["far_field_fringe_spacing"] =
      2.0 * std::numbers::pi * r.hbar * geo.screen_time / (geo.mass * geo.slit_separation);
  art.summary["screen_distance"] = geo.forward_speed * geo.screen_time;
  art.summary["half_planes_preserved"] = half_planes;
  art.summary["valid_at_screen"] = valid_at_end(r.bundle);
  if (valid_at_end(r.bundle) >= 100) {
    const auto ks = equivariance_check(r.bundle, r.evolution.slices);
    art.write("equivariance.csv", equivariance_table(r.bundle.times, ks).to_csv());
    art.summary["equivariance"] = equivariance_json(r.bundle.times, ks, n);
  }
}

Job prepare_double_slit(const ScenarioConfig& c) {
  const auto geo = geometry_from(c);
  const double factor = positive(c, "physics.hbar_factor");
  const std::size_t n = at_least(c, "bohm.particles", 1);
  const std::uint64_t seed = c.get_u64("run.seed");
  return [=](Artifacts& art) { run_double_slit(geo, factor, n, seed, art); };
}

Job prepare_bohm(const ScenarioConfig& c) {
  const auto scenario = c.get_string("bohm.scenario");
  if (scenario == "double-slit") return prepare_double_slit(c);
  if (scenario != "gaussian" && scenario != "coherent")
    invalid("bohm.scenario must be double-slit, gaussian or coherent");
  StateSetup st;
  {
    // bohm.scenario plays the role of state.kind here
    st.spec = lagrangian_from(c);
    st.hbar = hbar_from(c);
    const auto [lo, hi] = interval(c);
    st.grid = Grid(Axis::periodic(lo, hi, at_least(c, "grid.nodes", 4)));
    st.kind = scenario;
    st.x0 = c.get_double("state.x0");
    st.v0 = c.get_double("state.v0");
    st.sigma = positive(c, "state.sigma");
    if (scenario == "coherent" && (st.spec.kind() != PotentialKind::Harmonic || !(st.spec.omega() > 0)))
      invalid("a coherent state needs physics.potential = harmonic with omega > 0");
    if (!(st.x0 > lo && st.x0 < hi)) invalid("state.x0 lies outside the grid");
  }
  const double dt = positive(c, "time.dt"), t_end = positive(c, "time.t_end");
  const std::size_t slices = at_least(c, "time.slices", 1);
  const std::size_t substeps = at_least(c, "time.steps_per_slice", 1);
  const std::size_t n = at_least(c, "bohm.particles", 1);
  const double mask = positive(c, "bohm.mask_threshold");
  const std::uint64_t seed = c.get_u64("run.seed");
  const double span = t_end / static_cast<double>(slices);
  const auto per = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
  return [=](Artifacts& art) {
    const WaveFunction psi0 = st.initial();
    const auto evo = evolve_slices(psi0, st.spec, span / static_cast<double>(per), per, slices);
    const auto x0 = sample_quantum_equilibrium(psi0, n, seed);
    const auto bundle = integrate_bohm(evo.times, evo.slices, x0,
                                       span / static_cast<double>(substeps), mask);
    art.write("trajectories.ndjson", trajectory_ndjson(bundle, 1));
    art.summary["valid_at_end"] = valid_at_end(bundle);
    if (valid_at_end(bundle) >= 100) {
      const auto ks = equivariance_check(bundle, evo.slices);
      art.write("equivariance.csv", equivariance_table(evo.times, ks).to_csv());
      art.summary["equivariance"] = equivariance_json(evo.times, ks, n);
    }
  };
}

// --- sweep ----------------------------------------------------------------------------------

Job prepare_sweep(const ScenarioConfig& c) {
  const auto kind = c.get_string("sweep.kind");
  const auto factors = c.get_list("sweep.factors");
  try {
    validate_factors(factors);
  } catch (const Error& e) {
    invalid(e.what());
  }
  const std::size_t n = at_least(c, "bohm.particles", 1);
  const std::uint64_t seed = c.get_u64("run.seed");
  const double m = positive(c, "physics.mass"), hbar = positive(c, "physics.hbar");
  if (kind == "indiscerned") {
    IndiscernedScenario sc;
    sc.mass = m;
    sc.hbar_ref = hbar;
    sc.force = c.get_double("physics.force");
    sc.x0 = c.get_double("state.x0");
    sc.v0 = c.get_double("state.v0");
    sc.sigma0 = positive(c, "state.sigma");
    sc.t_end = positive(c, "time.t_end");
    sc.slices = at_least(c, "time.slices", 1);
    return [=](Artifacts& art) {
      const auto r = indiscerned_sweep(sc, factors, n, seed);
      art.write("sweep.csv", sweep_table(r).to_csv());
      art.summary["action_nonincreasing"] =
          SweepReport::nonincreasing(r.column(&SweepPoint::action_sup_err));
      art.summary["density_nonincreasing"] =
          SweepReport::nonincreasing(r.column(&SweepPoint::density_dist));
      art.summary["trajectory_nonincreasing"] =
          SweepReport::nonincreasing(r.column(&SweepPoint::traj_rms));
    };
  }
  if (kind == "coherent") {
    CoherentStateParams p;
    p.mass = m;
    p.hbar = hbar;
    p.omega = positive(c, "physics.omega");
    p.x0 = Point{c.get_double("state.x0"), 0.0};
    p.v0 = Point{c.get_double("state.v0"), 0.0};
    if (p.x0.x == 0.0 && p.v0.x == 0.0) invalid("coherent sweep needs a nonzero amplitude");
    return [=](Artifacts& art) {
      const auto r = coherent_limit_check(p, factors);
      art.write("coherent_sweep.csv", coherent_sweep_table(r).to_csv());
      art.summary["t"] = r.t;
      art.summary["slope_analytic"] = r.slope_analytic;
      art.summary["slope_evolved"] = r.slope_evolved;
    };
  }
  if (kind == "double-slit") {
    DoubleSlitGeometry geo;
    geo.mass = m;
    geo.hbar = hbar;
    geo.slit_sigma = positive(c, "slit.sigma");
    geo.slit_separation = positive(c, "slit.separation");
    geo.screen_time = positive(c, "slit.screen_time");
    return [=](Artifacts& art) {
      const auto r = trajectory_limit_check(geo, factors, n, seed);
      art.write("sweep.csv", sweep_table(r).to_csv());
      art.summary["trajectory_nonincreasing"] =
          SweepReport::nonincreasing(r.column(&SweepPoint::traj_rms));
    };
  }
  invalid("sweep.kind must be indiscerned, coherent or double-slit");
}

Job prepare(Command command, const ScenarioConfig& c) {
  switch (command) {
    case Command::HopfLax: return prepare_hopf_lax(c);
    case Command::ElAction: return prepare_el_action(c);
    case Command::Deterministic: return prepare_deterministic(c);
    case Command::Schrod: return prepare_schrod(c);
    case Command::Bohm: return prepare_bohm(c);
    case Command::DoubleSlit: return prepare_double_slit(c);
    case Command::Sweep: return prepare_sweep(c);
  }
  invalid("unknown command");
}

std::string describe(Command c) {
  switch (c) {
    case Command::HopfLax: return "min-plus Hamilton-Jacobi action on a grid";
    case Command::ElAction: return "least action between two points, closed form and numeric";
    case Command::Deterministic: return "classical orbit and its action along the path";
    case Command::Schrod: return "split-step Schroedinger evolution of a packet";
    case Command::Bohm: return "Bohm trajectories and equivariance statistics";
    case Command::DoubleSlit: return "two-slit interference with Bohm arrivals at the screen";
    case Command::Sweep: return "hbar-to-zero convergence sweeps";
  }
  return {};
}

int exit_code_for(ErrorKind kind, bool validating) {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Parse: return kExitParse;
    case ErrorKind::Validation: return kExitValidation;
    default: return validating ? kExitValidation : kExitNumerical;
  }
}

std::string platform_string() {
  std::string s;
#if defined(__linux__)
  s = "linux";
#elif defined(__APPLE__)
  s = "macos";
#elif defined(_WIN32)
  s = "windows";
#else
  s = "unknown";
#endif
#if defined(__x86_64__)
  s += "-x86_64";
#elif defined(__aarch64__)
  s += "-aarch64";
#endif
#if defined(__clang__)
  s += " clang " __clang_version__;
#elif defined(__GNUC__)
  s += " gcc " __VERSION__;
#endif
  return s;
}

}  // namespace

RunOutcome run_command(Command command, const ScenarioConfig& config, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  Artifacts art;
  art.dir = out_dir;
  json error = nullptr;

  auto record = [&](int code, std::string kind, std::string what) {
    outcome.exit_code = code;
    outcome.error = what;
    error = {{"kind", std::move(kind)}, {"message", std::move(what)}};
  };

  Job job;
  try {
    const auto threads = config.get_size("run.threads");
    set_thread_count(static_cast<unsigned>(threads));
    config.get_u64("run.seed");
    job = prepare(command, config);
  } catch (const Error& e) {
    record(exit_code_for(e.kind(), true), std::string(to_string(e.kind())), e.what());
  } catch (const std::exception& e) {
    record(kExitValidation, "validation", e.what());
  }
  if (job) {
    try {
      job(art);
    } catch (const Error& e) {
      record(exit_code_for(e.kind(), false), std::string(to_string(e.kind())), e.what());
    } catch (const std::exception& e) {
      record(kExitNumerical, "numerical", e.what());
    }
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {
      {"command", std::string(to_string(command))},
      {"version", SEMICLASSICAL_VERSION},
      {"platform", platform_string()},
      {"config", json::object()},
      {"threads", thread_count()},
      {"wall_time_s", wall},
      {"status", outcome.exit_code == kExitOk ? "ok" : "error"},
      {"exit_code", outcome.exit_code},
      {"error", error},
      {"outputs", art.outputs},
      {"summary", art.summary},
  };
  for (const auto& k : config.schema()) manifest["config"][k.name] = config.raw(k.name);
  try {
    const std::string text = manifest.dump(2) + "\n";
    write_atomic(out_dir / "manifest.json", text);
    art.files.push_back(out_dir / "manifest.json");
  } catch (const std::exception& e) {
    if (outcome.exit_code == kExitOk) {
      outcome.exit_code = kExitIo;
      outcome.error = e.what();
    }
  }
  outcome.files = art.files;
  return outcome;
}

fs::path preset_path(const std::string& name) {
  if (name.find('/') != std::string::npos || fs::path(name).extension() == ".cfg") return name;
  fs::path dir = SEMICLASSICAL_PRESET_DIR;
  if (const char* env = std::getenv("SEMICLASSICAL_PRESET_DIR"); env && *env) dir = env;
  return dir / (name + ".cfg");
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Semiclassical action, Hopf-Lax and Bohmian trajectory experiments"};
  app.set_version_flag("--version", std::string(SEMICLASSICAL_VERSION));
  app.require_subcommand(1);

  std::string config_path, preset, out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> n;
  bool print_config = false;

  std::vector<std::pair<Command, CLI::App*>> subs;
  for (auto c : {Command::HopfLax, Command::ElAction, Command::Deterministic, Command::Schrod,
                 Command::Bohm, Command::DoubleSlit, Command::Sweep}) {
    auto* sub = app.add_subcommand(std::string(to_string(c)), describe(c));
    sub->add_option("--config", config_path, "configuration file (key = value)");
    sub->add_option("--preset", preset, "preset name or path, applied before --config");
    sub->add_option("--set", overrides, "override key=value (repeatable)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "overrides run.seed");
    sub->add_option("--threads", threads, "overrides run.threads");
    sub->add_option("--n", n, "number of particles (bohm.particles)");
    sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
    subs.emplace_back(c, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  Command command = Command::HopfLax;
  for (auto& [c, sub] : subs)
    if (sub->parsed()) command = c;

  ScenarioConfig cfg = default_config(command);
  try {
    if (!preset.empty()) cfg.merge_file(preset_path(preset));
    if (!config_path.empty()) cfg.merge_file(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);
    if (seed) cfg.set("run.seed", std::to_string(*seed));
    if (threads) cfg.set("run.threads", std::to_string(*threads));
    if (n) {
      if (!cfg.has_key("bohm.particles"))
        fail(ErrorKind::Parse, "--n is not accepted by " + std::string(to_string(command)));
      cfg.set("bohm.particles", std::to_string(*n));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Io ? kExitIo : kExitParse;
  }

  if (print_config) {
    std::cout << cfg.emit();
    return kExitOk;
  }

  const auto outcome = run_command(command, cfg, out_dir);
  if (outcome.exit_code != kExitOk) {
    std::cerr << "error: " << outcome.error << "\n";
  } else {
    for (const auto& f : outcome.files) std::cout << f.string() << "\n";
  }
  return outcome.exit_code;
}

}  // namespace semiclassical
