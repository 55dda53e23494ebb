// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is the number of
// failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "semiclassical/actions.hpp"
#include "semiclassical/bohm.hpp"
#include "semiclassical/config.hpp"
#include "semiclassical/convergence.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/hopf_lax.hpp"
#include "semiclassical/quantum.hpp"

using namespace semiclassical;

namespace {

constexpr double pi = std::numbers::pi;

Point px(double x) { return Point{x, 0.0}; }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Strict sort order of valid 1D particles, relative to their initial order.
bool order_preserved(const TrajectoryBundle& b) {
  std::vector<std::size_t> order(b.particles());
  for (std::size_t q = 0; q < order.size(); ++q) order[q] = q;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto c) { return b.positions[a][0].x < b.positions[c][0].x; });
  for (std::size_t k = 0; k < b.times.size(); ++k) {
    double prev = -INFINITY;
    for (std::size_t q : order) {
      if (!b.valid_at(q, k)) continue;
      if (!(b.positions[q][k].x > prev)) return false;
      prev = b.positions[q][k].x;
    }
  }
  return true;
}

std::vector<TrajectoryBundle> g_bundles;  // every 1D Bohm run, for the non-crossing criterion

Verdict hopf_lax_linear() {
  const double m = 1.0, K = 1.0, v0 = 0.5, t = 1.0;
  const Grid g(Axis::spanning(-5, 5, 2048));
  const auto s0 = ScalarField::sample(g, [&](const Point& p) { return m * v0 * p.x; });
  const auto t0 = std::chrono::steady_clock::now();
  const auto hl = hamilton_jacobi_field_detailed(LagrangianSpec::linear(m, Point{K, 0}), s0, t);
  const double elapsed = seconds_since(t0);
  double err = 0.0, scale = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!hl.interior[i]) continue;
    const double x = g.point(i).x;
    const double exact = m * v0 * x - 0.5 * m * v0 * v0 * t + K * x * t - 0.5 * K * v0 * t * t -
                         K * K * t * t * t / (6 * m);
    err = std::max(err, std::abs(hl.action[i].value() - exact));
    scale = std::max(scale, std::abs(exact));
    ++used;
  }
  const double rel = err / scale;
  return {rel < 1e-6 && elapsed < 5.0 && used > g.size() / 2,
          fmt("sup rel err %.3g on %zu interior nodes, %.2f s", rel, used, elapsed)};
}

Verdict elementary_solution() {
  const Grid g(Axis::spanning(-4, 4, 513));
  double worst = 0.0;
  std::size_t nodes = 0;
  for (const auto& spec : {LagrangianSpec::free(1.3), LagrangianSpec::linear(0.8, Point{1.7, 0}),
                           LagrangianSpec::harmonic(1.1, 0.9)}) {
    for (double x0 : {-2.3, 0.0, 0.71, 3.9}) {
      for (double t : {0.3, 1.0, 2.5}) {
        const Point snapped = g.point(g.nearest(px(x0)));
        const auto s = hamilton_jacobi_field(spec, delta_min(px(x0), g), t);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double k = el_action_closed(spec, g.point(i), t, snapped).value();
          worst = std::max(worst, std::abs(s[i].value() - k));
          ++nodes;
        }
      }
    }
  }
  return {worst == 0.0, fmt("max |S - kernel| = %.3g over %zu nodes", worst, nodes)};
}

Verdict tropical_linearity() {
  // dyadic grid, data, masses and times keep every sum exact
  const Grid g(Axis{-2.0, 0.125, 33});
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> ints(-256, 256), pick(0, 2);
  auto dyadic = [&] { return ints(rng) / 32.0; };
  const double masses[] = {0.5, 1.0, 2.0}, times[] = {0.25, 0.5, 1.0};
  HopfLaxOptions opts;
  opts.refine = false;
  const int cases = 1000;
  std::size_t mismatches = 0;
  for (int c = 0; c < cases; ++c) {
    const auto spec = LagrangianSpec::free(masses[pick(rng)]);
    const double t = times[pick(rng)];
    std::vector<ExtendedReal> a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = ints(rng) % 5 == 0 ? ExtendedReal::infinity() : ExtendedReal(dyadic());
      b[i] = ints(rng) % 5 == 0 ? ExtendedReal::infinity() : ExtendedReal(dyadic());
    }
    const ScalarField fa(g, a), fb(g, b);
    const double lambda = dyadic(), mu = dyadic();
    const auto lhs = hamilton_jacobi_field(spec, tropical_min_combine(fa, lambda, fb, mu), t, opts);
    const auto rhs = tropical_min_combine(hamilton_jacobi_field(spec, fa, t, opts), lambda,
                                          hamilton_jacobi_field(spec, fb, t, opts), mu);
    for (std::size_t i = 0; i < g.size(); ++i) mismatches += lhs[i] == rhs[i] ? 0 : 1;
  }
  return {mismatches == 0, fmt("%d cases, %zu nodewise mismatches", cases, mismatches)};
}

Verdict numeric_action() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> pos(-3, 3), mass(0.5, 2.0), force(-2, 2), unit(0, 1);
  const int cases = 600;
  double worst = 0.0;
  for (int c = 0; c < cases; ++c) {
    LagrangianSpec spec;
    double t = 0.2 + 2.8 * unit(rng);
    switch (c % 3) {
      case 0: spec = LagrangianSpec::free(mass(rng)); break;
      case 1: spec = LagrangianSpec::linear(mass(rng), Point{force(rng), 0}); break;
      default: {
        const double omega = 0.3 + 1.7 * unit(rng);
        // stay off the first caustic: omega t < pi
        t = (0.05 + 0.9 * unit(rng)) * pi / omega;
        spec = LagrangianSpec::harmonic(mass(rng), omega);
      }
    }
    const Point a = px(pos(rng)), b = px(pos(rng));
    const double num = el_action_numeric(spec, a, t, b, 200).action.value();
    worst = std::max(worst, std::abs(num - el_action_closed(spec, a, t, b).value()));
  }
  return {worst < 1e-6, fmt("%d cases, max |delta| = %.3g", cases, worst)};
}

Verdict coherent_evolution() {
  CoherentStateParams p;
  p.x0 = px(2.0);
  p.v0 = px(0.5);
  const Grid g(Axis::periodic(-12, 12, 1024));
  const double period = 2 * pi / p.omega;
  const std::size_t slices = 100, per = 1000;
  const double dt = period / double(slices * per);
  const auto ev = evolve_slices(coherent_state(p, 0.0, g).psi,
                                LagrangianSpec::harmonic(p.mass, p.omega), dt, per, slices);
  const double var = p.hbar / (2 * p.mass * p.omega);
  double l2 = 0.0, var_rel = 0.0;
  for (std::size_t k = 0; k < ev.slices.size(); ++k) {
    l2 = std::max(l2, l2_distance(ev.slices[k], coherent_state(p, ev.times[k], g).psi));
    var_rel = std::max(var_rel, std::abs(position_moments(ev.slices[k]).variance.x - var) / var);
  }
  return {l2 < 1e-6 && var_rel < 1e-8,
          fmt("one period, 1024 nodes, dt %.3g: max L2 %.3g, max variance rel err %.3g", dt, l2, var_rel)};
}

Verdict coherent_limit() {
  // 2D state: the zero-point offset is (d/2) hbar omega t = hbar omega t
  CoherentStateParams p;
  p.dim = 2;
  p.hbar = 0.5;
  p.x0 = Point{1.0, -0.5};
  p.v0 = Point{0.3, 0.8};
  const Grid g(Axis::periodic(-6, 6, 96), Axis::periodic(-6, 6, 96));
  const double t = 1.0;
  const std::size_t steps = 10000;
  const auto evolved = split_step_evolve(coherent_state(p, 0.0, g).psi,
                                         LagrangianSpec::harmonic(p.mass, p.omega), t / steps, steps);
  const auto cs = coherent_state(p, t, g);
  auto offset_error = [&](const WaveFunction& psi) {
    const auto pair = madelung_decompose(psi);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!pair.mask[i]) continue;
      const double s_det = p.mass * dot(cs.center_velocity, g.point(i)) + cs.g;
      const double r = pair.action[i].value() - s_det + p.hbar * p.omega * t;
      worst = std::max(worst, std::abs(std::remainder(r, 2 * pi * p.hbar)));
    }
    return worst;
  };
  const double e_analytic = offset_error(cs.psi), e_evolved = offset_error(evolved);

  CoherentStateParams q;
  q.x0 = px(1.0);
  q.v0 = px(0.5);
  const auto sweep = coherent_limit_check(q, {1, 1e-1, 1e-2, 1e-3, 1e-4});
  const bool slopes = std::abs(sweep.slope_analytic - 0.5) <= 0.01 && std::abs(sweep.slope_evolved - 0.5) <= 0.01;
  return {e_analytic < 1e-6 && e_evolved < 1e-6 && slopes,
          fmt("offset err analytic %.3g, evolved %.3g; sigma slope analytic %.6f, evolved %.6f",
              e_analytic, e_evolved, sweep.slope_analytic, sweep.slope_evolved)};
}

Verdict feynman_vs_split_step() {
  const double t = 4.0;
  const Grid g(Axis::periodic(-20, 20, 512));
  const auto psi = gaussian_packet(g, px(-1.0), 1.0, px(0.5), 1.0, 1.0);
  const auto f = feynman_propagate(psi, LagrangianSpec::free(1.0), t);
  const auto s = split_step_evolve(psi, LagrangianSpec::free(1.0), t / 400, 400);
  const double d = l2_distance(f, s);
  return {d < 1e-4, fmt("free packet, 512 nodes, t = %.1f: L2 %.3g", t, d)};
}

Verdict equivariance() {
  const std::size_t n = 10000;
  const double band = 1.63 / std::sqrt(double(n));

  const Grid gf(Axis::periodic(-30, 30, 1024));
  const auto free0 = gaussian_packet(gf, px(0.0), 1.0, px(0.5), 1.0, 1.0);
  const auto free_ev = evolve_slices(free0, LagrangianSpec::free(1.0), 1e-2, 10, 100);
  const auto free_b = integrate_bohm(free_ev.times, free_ev.slices,
                                     sample_quantum_equilibrium(free0, n, 11), 1e-2);
  const auto ks_free = equivariance_check(free_b, free_ev.slices);

  CoherentStateParams p;
  p.x0 = px(2.0);
  const Grid gc(Axis::periodic(-12, 12, 512));
  const auto coh0 = coherent_state(p, 0.0, gc).psi;
  const auto coh_ev = evolve_slices(coh0, LagrangianSpec::harmonic(1.0, 1.0), 1e-3, 10, 628);
  const auto coh_b = integrate_bohm(coh_ev.times, coh_ev.slices,
                                    sample_quantum_equilibrium(coh0, n, 12), 1e-3);
  const auto ks_coh = equivariance_check(coh_b, coh_ev.slices);

  // negative control: every particle starts right of the centre
  auto biased = sample_quantum_equilibrium(free0, n, 13);
  for (auto& x : biased) x.x = std::abs(x.x);
  const auto neg_b = integrate_bohm(free_ev.times, free_ev.slices, biased, 1e-2);
  const auto ks_neg = equivariance_check(neg_b, free_ev.slices);

  g_bundles.push_back(free_b);
  g_bundles.push_back(coh_b);
  const double mf = *std::max_element(ks_free.begin(), ks_free.end());
  const double mc = *std::max_element(ks_coh.begin(), ks_coh.end());
  const double mn = *std::min_element(ks_neg.begin(), ks_neg.end());
  return {mf < band && mc < band && mn > band,
          fmt("n = %zu, band %.4f: max KS free %.4f, coherent %.4f; negative control min KS %.4f",
              n, band, mf, mc, mn)};
}

ScenarioConfig double_slit_preset() {
  auto cfg = default_config(Command::DoubleSlit);
  cfg.merge_file(std::string(SEMICLASSICAL_PRESETS) + "/double-slit.cfg");
  return cfg;
}

Verdict fig4_analog() {
  const auto cfg = double_slit_preset();
  DoubleSlitGeometry geo;
  geo.mass = cfg.get_double("physics.mass");
  geo.hbar = cfg.get_double("physics.hbar");
  geo.slit_sigma = cfg.get_double("slit.sigma");
  geo.slit_separation = cfg.get_double("slit.separation");
  geo.screen_time = cfg.get_double("slit.screen_time");
  geo.forward_speed = cfg.get_double("slit.forward_speed");
  geo.screen_bins = cfg.get_size("slit.screen_bins");
  geo.slices = cfg.get_size("time.slices");
  geo.steps_per_slice = cfg.get_size("time.steps_per_slice");
  geo.mask_threshold = cfg.get_double("bohm.mask_threshold");
  const auto r = double_slit_scenario(geo, cfg.get_double("physics.hbar_factor"),
                                      cfg.get_size("bohm.particles"), 1);
  g_bundles.push_back(r.bundle);
  std::size_t crossings = 0;
  for (std::size_t q = 0; q < r.bundle.particles(); ++q)
    for (std::size_t k = 0; k < r.bundle.times.size(); ++k)
      if (r.bundle.valid_at(q, k) && r.bundle.positions[q][k].x * r.initial[q].x <= 0) ++crossings;
  double vmin = 1.0;
  for (double v : r.screen.visibility) vmin = std::min(vmin, v);
  return {r.screen.maxima.size() >= 3 && vmin > 0.5 && crossings == 0,
          fmt("n = %zu: %zu fringes, min visibility %.3f, half-plane violations %zu",
              r.bundle.particles(), r.screen.maxima.size(), vmin, crossings)};
}

Verdict non_crossing() {
  std::size_t broken = 0, particles = 0;
  for (const auto& b : g_bundles) {
    broken += order_preserved(b) ? 0 : 1;
    particles += b.particles();
  }
  return {broken == 0 && !g_bundles.empty(),
          fmt("%zu runs, %zu particles, %zu runs with reordering", g_bundles.size(), particles, broken)};
}

Verdict fig5_sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = indiscerned_sweep(IndiscernedScenario{}, {1, 1e-1, 1e-2, 1e-3, 1e-4}, 1000, 5);
  const double elapsed = seconds_since(t0);
  const auto a = r.column(&SweepPoint::action_sup_err);
  const auto d = r.column(&SweepPoint::density_dist);
  const auto t = r.column(&SweepPoint::traj_rms);
  double coverage = 1.0;
  for (const auto& p : r.points) coverage = std::min(coverage, p.mask_coverage);
  const bool mono = SweepReport::nonincreasing(a) && SweepReport::nonincreasing(d) &&
                    SweepReport::nonincreasing(t);
  return {mono && coverage >= 0.9 && elapsed < 600,
          fmt("action %.3g -> %.3g, density %.3g -> %.3g, trajectory %.3g -> %.3g, coverage %.4f, %.1f s",
              a.front(), a.back(), d.front(), d.back(), t.front(), t.back(), coverage, elapsed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"linear-potential Hopf-Lax closed form", hopf_lax_linear},
      {"elementary solution", elementary_solution},
      {"tropical linearity of the Hopf-Lax operator", tropical_linearity},
      {"numeric Euler-Lagrange action vs closed forms", numeric_action},
      {"coherent-state split-step evolution", coherent_evolution},
      {"coherent-state hbar limit identities", coherent_limit},
      {"Feynman propagator vs split-step", feynman_vs_split_step},
      {"equivariance", equivariance},
      {"double-slit fringes and half-planes", fig4_analog},
      {"non-crossing", non_crossing},
      {"indiscerned hbar sweep", fig5_sweep},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
