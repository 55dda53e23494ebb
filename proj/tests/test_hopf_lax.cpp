#include <doctest.h>

#include <cmath>
#include <random>

#include "semiclassical/errors.hpp"
#include "semiclassical/hopf_lax.hpp"

using namespace semiclassical;

namespace {

Point px(double x) { return Point{x, 0.0}; }

double linear_closed(double m, double K, double v0, double x, double t) {
  return m * v0 * x - 0.5 * m * v0 * v0 * t + K * x * t - 0.5 * K * v0 * t * t -
         K * K * t * t * t / (6 * m);
}

// max |a - b| over nodes where both are finite and mask holds
double masked_max_diff(const ScalarField& a, const ScalarField& b, const std::vector<bool>& mask) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (mask[i] && a[i].is_finite() && b[i].is_finite())
      worst = std::max(worst, std::abs(a[i].value() - b[i].value()));
  return worst;
}

}  // namespace

TEST_CASE("Hopf-Lax: linear potential with linear initial action matches the closed form") {
  const double m = 1.0, K = 1.0, v0 = 0.5, t = 1.0;
  const Grid g(Axis::spanning(-5, 5, 201));
  const auto s0 = ScalarField::sample(g, [&](const Point& p) { return m * v0 * p.x; });
  const auto hl = hamilton_jacobi_field_detailed(LagrangianSpec::linear(m, Point{K, 0}), s0, t);
  double worst = 0.0, scale = 0.0;
  std::size_t interior = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!hl.interior[i]) continue;
    ++interior;
    const double exact = linear_closed(m, K, v0, g.point(i).x, t);
    worst = std::max(worst, std::abs(hl.action[i].value() - exact));
    scale = std::max(scale, std::abs(exact));
  }
  CHECK(interior > 150);
  CHECK(worst / scale < 1e-10);
}

TEST_CASE("Hopf-Lax: free particle at rest keeps a zero action") {
  const Grid g(Axis::spanning(-2, 2, 41));
  const ScalarField s0(g, ExtendedReal(0.0));
  for (double t : {0.1, 1.0, 7.0}) {
    const auto s = hamilton_jacobi_field(LagrangianSpec::free(1.3), s0, t);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(s[i].value() == 0.0);
  }
}

TEST_CASE("Hopf-Lax: delta initial action reproduces the kernel exactly") {
  const Grid g(Axis::spanning(-3, 3, 61));
  const Point x0 = px(0.4);
  const auto s0 = delta_min(x0, g);
  const Point snapped = g.point(g.nearest(x0));
  for (const auto& spec : {LagrangianSpec::free(1.0), LagrangianSpec::linear(0.7, Point{-1.3, 0}),
                           LagrangianSpec::harmonic(1.0, 0.8)}) {
    for (bool refine : {false, true}) {
      HopfLaxOptions opts;
      opts.refine = refine;
      const auto s = hamilton_jacobi_field(spec, s0, 1.1, opts);
      for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(s[i] == el_action_closed(spec, g.point(i), 1.1, snapped));
    }
  }
}

TEST_CASE("Hopf-Lax: harmonic caustic time raises a singularity error") {
  const Grid g(Axis::spanning(-1, 1, 11));
  const ScalarField s0(g, ExtendedReal(0.0));
  try {
    hamilton_jacobi_field(LagrangianSpec::harmonic(1.0, 2.0), s0, std::acos(-1.0) / 2);
    FAIL("expected a singularity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singularity);
  }
  CHECK_THROWS_AS(hamilton_jacobi_field(LagrangianSpec::free(1), s0, 0.0), Error);
}

TEST_CASE("Hopf-Lax operator is tropically linear on dyadic data") {
  // all values and kernel evaluations are dyadic so every sum is exact
  const Grid g(Axis{-2.0, 0.125, 33});
  const auto spec = LagrangianSpec::free(1.0);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> ints(-64, 64);
  auto dyadic = [&] { return ints(rng) / 16.0; };
  HopfLaxOptions opts;
  opts.refine = false;
  for (int c = 0; c < 50; ++c) {
    std::vector<ExtendedReal> a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = ints(rng) % 7 == 0 ? ExtendedReal::infinity() : ExtendedReal(dyadic());
      b[i] = ExtendedReal(dyadic());
    }
    const ScalarField fa(g, a), fb(g, b);
    const double lambda = dyadic(), mu = dyadic();
    const auto lhs = hamilton_jacobi_field(spec, tropical_min_combine(fa, lambda, fb, mu), 0.5, opts);
    const auto rhs = tropical_min_combine(hamilton_jacobi_field(spec, fa, 0.5, opts), lambda,
                                          hamilton_jacobi_field(spec, fb, 0.5, opts), mu);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(lhs[i] == rhs[i]);
  }
}

TEST_CASE("Hopf-Lax: semigroup property for the linear potential") {
  const double m = 1.0, K = 0.7, v0 = 0.3;
  const auto spec = LagrangianSpec::linear(m, Point{K, 0});
  const Grid g(Axis::spanning(-6, 6, 241));
  const auto s0 = ScalarField::sample(g, [&](const Point& p) { return m * v0 * p.x; });
  const auto direct = hamilton_jacobi_field_detailed(spec, s0, 1.0);
  const auto half = hamilton_jacobi_field_detailed(spec, s0, 0.4);
  const auto composed = hamilton_jacobi_field_detailed(spec, half.action, 0.6);
  std::vector<bool> mask(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) mask[i] = direct.interior[i] && composed.interior[i];
  CHECK(std::count(mask.begin(), mask.end(), true) > 150);
  CHECK(masked_max_diff(direct.action, composed.action, mask) < 1e-6);
}

TEST_CASE("velocity field: examples") {
  const double m = 1.0, K = 1.0, v0 = 0.5, t = 0.8;
  const Grid g(Axis::spanning(-5, 5, 101));
  const auto lin = ScalarField::sample(g, [&](const Point& p) { return linear_closed(m, K, v0, p.x, t); });
  const auto v = velocity_field(lin, m);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(v.valid[i]);
    CHECK(v.values[i].x == doctest::Approx(v0 + K * t / m).epsilon(1e-12));
  }

  const auto zero = velocity_field(ScalarField(g, ExtendedReal(3.0)), 2.0);
  for (const auto& p : zero.values) CHECK(p.x == 0.0);

  // quadratic action: centered differences are exact for parabolas
  const double x0 = 0.3, tt = 2.0;
  const auto quad = ScalarField::sample(g, [&](const Point& p) { return m * (p.x - x0) * (p.x - x0) / (2 * tt); });
  const auto vq = velocity_field(quad, m);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(vq.values[i].x == doctest::Approx((g.point(i).x - x0) / tt).epsilon(1e-10));

  auto holed = lin;
  holed[50] = ExtendedReal::infinity();
  const auto vh = velocity_field(holed, m);
  CHECK_FALSE(vh.valid[49]);
  CHECK_FALSE(vh.valid[50]);
  CHECK_FALSE(vh.valid[51]);
  CHECK(vh.valid[47]);
  CHECK_THROWS_AS(velocity_field(lin, 0.0), Error);
}

TEST_CASE("velocity field: 2D gradient") {
  const Grid g(Axis::spanning(-1, 1, 21), Axis::spanning(-2, 2, 41));
  const auto s = ScalarField::sample(g, [](const Point& p) { return 2 * p.x - 3 * p.y; });
  const auto v = velocity_field(s, 2.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(v.values[i].x == doctest::Approx(1.0));
    CHECK(v.values[i].y == doctest::Approx(-1.5));
  }
}

TEST_CASE("HJ residual: zero for the trivial solution") {
  const Grid g(Axis::spanning(-2, 2, 41));
  const ScalarField zero(g, ExtendedReal(0.0));
  const auto sol = solve_hamilton_jacobi(LagrangianSpec::free(1.0), zero, {0.0, 0.5, 1.0});
  const auto r = hj_residual(sol, {0.0, 0.25, 0.5, 1.0});
  REQUIRE(r.size() == 4);
  for (const auto& f : r) CHECK(f.max_abs == 0.0);
}

TEST_CASE("HJ residual: linear closed form converges with slice spacing") {
  const double m = 1.0, K = 1.0, v0 = 0.5;
  const auto spec = LagrangianSpec::linear(m, Point{K, 0});
  const Grid g(Axis::spanning(-5, 5, 101));
  const auto s0 = ScalarField::sample(g, [&](const Point& p) { return m * v0 * p.x; });
  auto residual = [&](double dt) {
    const auto sol = solve_hamilton_jacobi(spec, s0, {0.0, 1.0 - dt, 1.0, 1.0 + dt});
    const auto r = hj_residual(sol, {1.0});
    return r[0].max_abs;
  };
  const double r1 = residual(0.1), r2 = residual(0.05);
  CHECK(r1 < 1e-2);
  CHECK(r1 / r2 > 3.5);
}

TEST_CASE("HJ residual: delta-seeded free solution is small away from the kink") {
  const Grid g(Axis::spanning(-4, 4, 161));
  // two point sources produce a kink on the bisector x = 0
  const auto s0 = tropical_min_combine(delta_min(px(-1.0), g), 0.0, delta_min(px(1.0), g), 0.0);
  const auto sol = solve_hamilton_jacobi(LagrangianSpec::free(1.0), s0, {0.0, 0.99, 1.0, 1.01});
  const auto r = hj_residual(sol, {1.0})[0];
  const std::size_t mid = g.nearest(px(0.0));
  CHECK_FALSE(r.mask[mid]);
  CHECK_FALSE(r.mask[0]);
  CHECK_FALSE(r.mask[g.size() - 1]);
  CHECK(std::count(r.mask.begin(), r.mask.end(), true) > 140);
  CHECK(r.max_abs < 1e-3);
}

TEST_CASE("HJ residual: errors") {
  const Grid g(Axis::spanning(-1, 1, 11));
  const ScalarField s0(g, ExtendedReal(0.0));
  const auto one = solve_hamilton_jacobi(LagrangianSpec::free(1), s0, {0.0});
  try {
    hj_residual(one, {0.0});
    FAIL("expected a temporal-resolution error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TemporalResolution);
  }
  const auto two = solve_hamilton_jacobi(LagrangianSpec::free(1), s0, {0.0, 1.0});
  CHECK_THROWS_AS(hj_residual(two, {1.5}), Error);
  CHECK_THROWS_AS(solve_hamilton_jacobi(LagrangianSpec::free(1), s0, {0.5, 1.0}), Error);
  CHECK_THROWS_AS(solve_hamilton_jacobi(LagrangianSpec::free(1), s0, {0.0, 1.0, 1.0}), Error);
}

TEST_CASE("advection: constant velocity field translates particles rigidly") {
  const double m = 1.0, K = 0.5, v0 = 0.4, t_end = 1.0;
  const auto spec = LagrangianSpec::linear(m, Point{K, 0});
  const Grid g(Axis::spanning(-4, 4, 161));
  const auto s0 = ScalarField::sample(g, [&](const Point& p) { return m * v0 * p.x; });
  std::vector<Point> start;
  for (int i = 0; i < 21; ++i) start.push_back(px(-1.0 + 0.1 * i));
  AdvectionOptions opts;
  opts.slices = 5;
  const auto r = advect_ensemble(spec, s0, ParticleEnsemble::uniform(start), t_end, 0.01, opts);
  for (std::size_t p = 0; p < start.size(); ++p) {
    CHECK(r.bundle.flags[p] == ParticleFlag::Valid);
    for (std::size_t k = 0; k < r.bundle.times.size(); ++k) {
      const double t = r.bundle.times[k];
      CHECK(r.bundle.positions[p][k].x ==
            doctest::Approx(start[p].x + v0 * t + K * t * t / (2 * m)).epsilon(1e-9));
    }
  }
}

TEST_CASE("advection: single free particle follows x0 + v0 t") {
  const Grid g(Axis::spanning(-3, 3, 61));
  const double v0 = -0.7;
  const auto s0 = ScalarField::sample(g, [&](const Point& p) { return v0 * p.x; });
  const auto r = advect_ensemble(LagrangianSpec::free(1.0), s0, ParticleEnsemble::uniform({px(1.0)}), 2.0, 0.05);
  for (std::size_t k = 0; k < r.bundle.times.size(); ++k)
    CHECK(r.bundle.positions[0][k].x == doctest::Approx(1.0 + v0 * r.bundle.times[k]).epsilon(1e-10));
}

TEST_CASE("advection: escaped mass bookkeeping") {
  const Grid g(Axis::spanning(-2, 2, 41));
  const auto s0 = ScalarField::sample(g, [](const Point& p) { return 1.5 * p.x; });
  std::vector<Point> start;
  for (int i = 0; i < 10; ++i) start.push_back(px(-1.8 + 0.4 * i));
  AdvectionOptions opts;
  opts.slices = 8;
  opts.estimator = DensityEstimator::Linear;
  const auto r = advect_ensemble(LagrangianSpec::free(1.0), s0, ParticleEnsemble::uniform(start), 2.0, 0.01, opts);
  CHECK(r.escaped_mass.front() == 0.0);
  CHECK(r.escaped_mass.back() > 0.5);
  for (std::size_t k = 0; k < r.density.size(); ++k) {
    double mass = 0.0;
    for (double d : r.density[k].to_doubles()) mass += d * g.cell_volume();
    CHECK(mass + r.escaped_mass[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (std::size_t p = 0; p < start.size(); ++p)
    if (r.bundle.flags[p] == ParticleFlag::Escaped) CHECK(r.bundle.valid_until[p] < r.bundle.times.size());
}

TEST_CASE("advection: errors") {
  const Grid g(Axis::spanning(-1, 1, 11));
  const ScalarField s0(g, ExtendedReal(0.0));
  const auto spec = LagrangianSpec::free(1);
  auto kind = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind([&] { advect_ensemble(spec, s0, ParticleEnsemble::uniform({px(2.0)}), 1, 0.1); }) ==
        ErrorKind::OutOfDomain);
  CHECK(kind([&] { advect_ensemble(spec, s0, ParticleEnsemble::uniform({px(0.0)}), 0, 0.1); }) ==
        ErrorKind::InvalidHorizon);
  CHECK(kind([&] { advect_ensemble(spec, s0, ParticleEnsemble{{px(0)}, {0.5}}, 1, 0.1); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind([&] { advect_ensemble(spec, s0, ParticleEnsemble{{px(0)}, {0.5, 0.5}}, 1, 0.1); }) ==
        ErrorKind::Shape);
}
