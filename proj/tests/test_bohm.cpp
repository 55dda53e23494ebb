#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "semiclassical/bohm.hpp"
#include "semiclassical/errors.hpp"

using namespace semiclassical;

namespace {

Point px(double x) { return Point{x, 0.0}; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

double mean_x(const std::vector<Point>& xs) {
  double s = 0.0;
  for (const auto& p : xs) s += p.x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("equilibrium sampling: Gaussian moments within three standard errors") {
  const double x0 = 0.8, sigma = 1.3;
  const Grid g(Axis::periodic(-12, 12, 1024));
  const auto psi = gaussian_packet(g, px(x0), sigma, px(0.0), 1.0, 1.0);
  const std::size_t n = 10000;
  const auto xs = sample_quantum_equilibrium(psi, n, 42);
  REQUIRE(xs.size() == n);
  const double m = mean_x(xs);
  double var = 0.0;
  for (const auto& p : xs) var += (p.x - m) * (p.x - m);
  var /= static_cast<double>(n - 1);
  CHECK(std::abs(m - x0) < 3 * sigma / std::sqrt(double(n)));
  // standard error of the sample variance for a Gaussian: σ² sqrt(2 / (n - 1))
  CHECK(std::abs(var - sigma * sigma) < 3 * sigma * sigma * std::sqrt(2.0 / double(n - 1)));
}

TEST_CASE("equilibrium sampling: determinism") {
  const Grid g(Axis::periodic(-6, 6, 256));
  const auto psi = gaussian_packet(g, px(0.0), 1.0, px(0.0), 1.0, 1.0);
  CHECK(sample_quantum_equilibrium(psi, 1, 7) == sample_quantum_equilibrium(psi, 1, 7));
  CHECK(sample_quantum_equilibrium(psi, 50, 7) == sample_quantum_equilibrium(psi, 50, 7));
  CHECK(sample_quantum_equilibrium(psi, 50, 7) != sample_quantum_equilibrium(psi, 50, 8));
}

TEST_CASE("equilibrium sampling: slit mixture weight") {
  DoubleSlitGeometry geo;
  const Grid g = double_slit_grid(geo, geo.hbar);
  const auto psi = double_slit_initial_state(geo, g, geo.hbar);
  const std::size_t n = 10000;
  const auto xs = sample_quantum_equilibrium(psi, n, 3);
  const double upper = double(std::count_if(xs.begin(), xs.end(), [](const Point& p) { return p.x > 0; })) / n;
  CHECK(std::abs(upper - 0.5) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("equilibrium sampling: 2D marginals") {
  const Grid g(Axis::periodic(-6, 6, 96), Axis::periodic(-6, 6, 96));
  const auto psi = gaussian_packet(g, Point{1.0, -0.5}, 0.9, Point{}, 1.0, 1.0);
  const std::size_t n = 10000;
  const auto xs = sample_quantum_equilibrium(psi, n, 5);
  double mx = 0.0, my = 0.0;
  for (const auto& p : xs) {
    mx += p.x;
    my += p.y;
  }
  CHECK(std::abs(mx / n - 1.0) < 3 * 0.9 / std::sqrt(double(n)));
  CHECK(std::abs(my / n + 0.5) < 3 * 0.9 / std::sqrt(double(n)));
}

TEST_CASE("density CDF: bounds and inverse") {
  const Grid g(Axis::periodic(-6, 6, 256));
  const auto psi = gaussian_packet(g, px(0.3), 1.0, px(0.0), 1.0, 1.0);
  const DensityCdf cdf(psi, 0);
  CHECK(cdf(-100.0) == 0.0);
  CHECK(cdf(100.0) == 1.0);
  CHECK(cdf(0.3) == doctest::Approx(0.5).epsilon(1e-6));
  for (double u : {0.01, 0.2, 0.5, 0.77, 0.99}) CHECK(cdf(cdf.inverse(u)) == doctest::Approx(u).epsilon(1e-12));
}

TEST_CASE("Bohm: coherent state transports particles rigidly") {
  CoherentStateParams p;
  p.x0 = px(1.5);
  p.v0 = px(0.5);
  const Grid g(Axis::periodic(-8, 8, 256));
  const auto spec = LagrangianSpec::harmonic(p.mass, p.omega);
  // linear-in-time interpolation between slices costs O(spacing²); keep the spacing at 1e-3
  const auto ev = evolve_slices(coherent_state(p, 0.0, g).psi, spec, 5e-4, 2, 2000);
  const auto x0 = sample_quantum_equilibrium(ev.slices[0], 200, 9);
  const auto b = integrate_bohm(ev.times, ev.slices, x0, 5e-4);
  for (std::size_t k = 0; k < b.times.size(); ++k) {
    const double shift = coherent_state(p, b.times[k], g).center.x - p.x0.x;
    for (std::size_t q = 0; q < b.particles(); ++q) {
      if (!b.valid_at(q, k)) continue;
      CHECK(std::abs(b.positions[q][k].x - x0[q].x - shift) < 1e-6);
    }
  }
  const auto ks = equivariance_check(b, ev.slices);
  for (double d : ks) CHECK(d < 1.63 / std::sqrt(200.0));
}

TEST_CASE("Bohm: plane-wave phase moves every particle at v0") {
  // four wavelengths fit the periodic box exactly
  const double hbar = 0.5, m = 2.0, k = 2 * std::numbers::pi * 4 / 20, v0 = hbar * k / m;
  const Grid g(Axis::periodic(-10, 10, 256));
  std::vector<Complex> amps(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) amps[i] = std::polar(1.0, k * g.point(i).x);
  WaveFunction psi(g, amps, hbar, m);
  psi.normalize();
  const std::vector<double> times{0.0, 1.0};
  const std::vector<WaveFunction> slices{psi, psi};
  const std::vector<Point> x0{px(-3.0), px(0.0), px(2.5)};
  const auto b = integrate_bohm(times, slices, x0, 0.05);
  for (std::size_t q = 0; q < x0.size(); ++q) CHECK(b.positions[q][1].x == doctest::Approx(x0[q].x + v0).epsilon(1e-10));
}

TEST_CASE("Bohm: free Gaussian trajectories fan out hyperbolically without crossing") {
  const double hbar = 1.0, m = 1.0, sigma = 1.0, c = -1.0, v = 0.4;
  const Grid g(Axis::periodic(-20, 20, 512));
  const auto psi0 = gaussian_packet(g, px(c), sigma, px(v), hbar, m);
  const auto ev = evolve_slices(psi0, LagrangianSpec::free(m), 1e-3, 1, 2000);
  const auto x0 = sample_quantum_equilibrium(psi0, 300, 13);
  const auto b = integrate_bohm(ev.times, ev.slices, x0, 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k < b.times.size(); ++k) {
    const double t = b.times[k];
    const double tau = hbar * t / (2 * m * sigma * sigma);
    for (std::size_t q = 0; q < b.particles(); ++q) {
      if (!b.valid_at(q, k)) continue;
      const double exact = c + v * t + (x0[q].x - c) * std::sqrt(1 + tau * tau);
      worst = std::max(worst, std::abs(b.positions[q][k].x - exact));
    }
  }
  CHECK(worst < 1e-6);

  std::vector<std::size_t> order(b.particles());
  for (std::size_t q = 0; q < order.size(); ++q) order[q] = q;
  std::sort(order.begin(), order.end(), [&](auto a, auto b2) { return x0[a].x < x0[b2].x; });
  for (std::size_t k = 0; k < b.times.size(); ++k)
    for (std::size_t r = 1; r < order.size(); ++r)
      if (b.valid_at(order[r - 1], k) && b.valid_at(order[r], k))
        CHECK(b.positions[order[r - 1]][k].x < b.positions[order[r]][k].x);
}

TEST_CASE("Bohm: escaped and masked particles are flagged") {
  const Grid g(Axis::periodic(-5, 5, 128));
  const auto psi = gaussian_packet(g, px(0.0), 0.5, px(0.0), 1.0, 1.0);
  const std::vector<double> times{0.0, 0.5};
  const std::vector<WaveFunction> slices{psi, psi};
  const auto b = integrate_bohm(times, slices, {px(0.0), px(4.9)}, 0.1);
  CHECK(b.flags[0] == ParticleFlag::Valid);
  CHECK(b.flags[1] == ParticleFlag::Masked);
  CHECK(b.valid_until[1] == 1);
  CHECK(b.positions[1][1] == b.positions[1][0]);

  // a plane wave carries a particle off the grid
  std::vector<Complex> amps(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) amps[i] = std::polar(1.0, 2 * std::numbers::pi * g.point(i).x / 10 * 8);
  WaveFunction wave(g, amps, 1.0, 1.0);
  wave.normalize();
  const auto e = integrate_bohm(times, {wave, wave}, {px(4.0)}, 0.1);
  CHECK(e.flags[0] == ParticleFlag::Escaped);
}

TEST_CASE("equivariance: negative control and power requirement") {
  const Grid g(Axis::periodic(-10, 10, 512));
  const auto psi = gaussian_packet(g, px(0.0), 1.0, px(0.0), 1.0, 1.0);
  const auto ev = evolve_slices(psi, LagrangianSpec::free(1.0), 1e-2, 10, 5);
  auto biased = sample_quantum_equilibrium(psi, 500, 1);
  for (auto& p : biased) p.x = std::abs(p.x);
  const auto b = integrate_bohm(ev.times, ev.slices, biased, 1e-2);
  const auto ks = equivariance_check(b, ev.slices);
  for (double d : ks) CHECK(d > 0.3);

  const auto few = integrate_bohm(ev.times, ev.slices, sample_quantum_equilibrium(psi, 50, 1), 1e-2);
  CHECK(kind_of([&] { equivariance_check(few, ev.slices); }) == ErrorKind::StatisticalPower);
}

TEST_CASE("fringe analysis on a synthetic pattern") {
  std::vector<double> x, p;
  for (int i = -200; i <= 200; ++i) {
    const double xi = i * 0.05;
    x.push_back(xi);
    p.push_back(std::exp(-xi * xi / 400) * std::pow(std::cos(xi), 2));
  }
  const auto f = analyze_fringes(x, p);
  REQUIRE(f.maxima.size() >= 5);
  CHECK(f.fringe_spacing == doctest::Approx(std::numbers::pi).epsilon(0.02));
  for (double v : f.visibility) CHECK(v > 0.9);
  std::vector<double> flat(x.size(), 1.0);
  CHECK(analyze_fringes(x, flat).maxima.empty());
}

TEST_CASE("double slit: fringes, symmetry and half-plane confinement") {
  DoubleSlitGeometry geo;
  geo.slices = 100;
  const auto r = double_slit_scenario(geo, 1.0, 200, 17);
  CHECK(r.screen.maxima.size() >= 3);
  for (double v : r.screen.visibility) CHECK(v > 0.5);
  // maxima of the exact superposition of two freely spread Gaussians
  const double tau = geo.hbar * geo.screen_time / (2 * geo.mass * geo.slit_sigma * geo.slit_sigma);
  const Complex width = 4.0 * geo.slit_sigma * geo.slit_sigma * Complex(1.0, tau);
  auto exact = [&](double x) {
    const double a = geo.slit_separation / 2;
    return std::norm(std::exp(-(x - a) * (x - a) / width) + std::exp(-(x + a) * (x + a) / width));
  };
  std::vector<double> peaks;
  double top = 0.0;
  for (double x = -200; x <= 200; x += 0.01) top = std::max(top, exact(x));
  for (double x = -200; x <= 200; x += 0.01)
    if (exact(x) > exact(x - 0.01) && exact(x) >= exact(x + 0.01) && exact(x) > 0.05 * top) peaks.push_back(x);
  REQUIRE(peaks.size() == r.screen.maxima.size());
  const double bin = r.screen.bin_centers[1] - r.screen.bin_centers[0];
  for (std::size_t i = 0; i < peaks.size(); ++i) CHECK(std::abs(r.screen.maxima[i] - peaks[i]) <= bin);

  const auto& b = r.bundle;
  for (std::size_t q = 0; q < b.particles(); ++q) {
    const double s = r.initial[q].x;
    for (std::size_t k = 0; k < b.times.size(); ++k)
      if (b.valid_at(q, k)) CHECK(b.positions[q][k].x * s > 0.0);
  }

  // the axis is invariant and reflected starts give reflected paths
  const std::vector<Point> probe{px(0.0), px(2.7), px(-2.7)};
  const auto pb = integrate_bohm(r.evolution.times, r.evolution.slices, probe,
                                 geo.screen_time / double(geo.slices * geo.steps_per_slice));
  for (std::size_t k = 0; k < pb.times.size(); ++k) {
    CHECK(std::abs(pb.positions[0][k].x) < 1e-9);
    CHECK(pb.positions[1][k].x == doctest::Approx(-pb.positions[2][k].x).epsilon(1e-9));
  }
}

TEST_CASE("double slit: configuration errors") {
  DoubleSlitGeometry geo;
  geo.slit_sigma = 0.0;
  CHECK_THROWS_AS(geo.validate(), Error);
  DoubleSlitGeometry ok;
  CHECK(kind_of([&] { double_slit_scenario(ok, 0.0, 10, 1); }) == ErrorKind::InvalidArgument);
  BohmConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
