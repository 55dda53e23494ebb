#include "semiclassical/actions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "semiclassical/errors.hpp"

namespace semiclassical {

void Trajectory::validate() const {
  require(positions.size() == times.size() && velocities.size() == times.size(), ErrorKind::Shape,
          "trajectory arrays must share the time axis");
  for (std::size_t k = 1; k < times.size(); ++k)
    require(times[k] > times[k - 1], ErrorKind::InvalidArgument,
            "trajectory times must be strictly increasing");
}

namespace {

void check_horizon(double t) {
  require(t > 0.0 && std::isfinite(t), ErrorKind::InvalidHorizon,
          "time horizon must be positive, got " + std::to_string(t));
}

}  // namespace

ExtendedReal el_action_closed(const LagrangianSpec& spec, const Point& x, double t,
                              const Point& x0) {
  check_horizon(t);
  const double m = spec.mass();
  switch (spec.kind()) {
    case PotentialKind::Free:
      return m * norm2(x - x0) / (2.0 * t);
    case PotentialKind::Linear: {
      const Point& k = spec.force();
      return m * norm2(x - x0) / (2.0 * t) + dot(k, x + x0) * t / 2.0 -
             norm2(k) * t * t * t / (24.0 * m);
    }
    case PotentialKind::Harmonic: {
      const double w = spec.omega();
      if (w == 0.0) return m * norm2(x - x0) / (2.0 * t);
      const double s = std::sin(w * t);
      const double c = std::cos(w * t);
      require(std::abs(s) > 1e-12, ErrorKind::Singularity,
              "harmonic action is singular at focal time omega*t = k*pi");
      return m * w / (2.0 * s) * ((norm2(x) + norm2(x0)) * c - 2.0 * dot(x, x0));
    }
    case PotentialKind::Tabulated:
      fail(ErrorKind::InvalidArgument, "no closed-form action for a tabulated potential");
  }
  return ExtendedReal::infinity();
}

Trajectory optimal_trajectory_linear(double mass, const Point& force, const Point& x, double t,
                                     const Point& x0, std::size_t n) {
  check_horizon(t);
  require(mass > 0.0, ErrorKind::InvalidArgument, "mass must be positive");
  require(n >= 2, ErrorKind::InvalidArgument, "trajectory needs at least 2 samples");
  Trajectory out;
  out.times.resize(n);
  out.positions.resize(n);
  out.velocities.resize(n);
  const Point a = force / mass;
  const Point v0 = (x - x0) / t - a * (t / 2.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = t * static_cast<double>(k) / static_cast<double>(n - 1);
    out.times[k] = s;
    out.positions[k] = x0 + (s / t) * (x - x0) - a * (t * s / 2.0) + a * (s * s / 2.0);
    out.velocities[k] = v0 + a * s;
  }
  // exact end points
  out.positions.front() = x0;
  out.positions.back() = x;
  return out;
}

namespace {

// Quadratic Lagrange element on local coordinate tau in [0, 1] with nodes 0, 1/2, 1.
constexpr std::array<double, 3> shape(double tau) {
  return {2.0 * (tau - 0.5) * (tau - 1.0), -4.0 * tau * (tau - 1.0), 2.0 * tau * (tau - 0.5)};
}

// ∫ N_a' N_b' dtau over the element.
constexpr double kStiffness[3][3] = {
    {7.0 / 3.0, -8.0 / 3.0, 1.0 / 3.0},
    {-8.0 / 3.0, 16.0 / 3.0, -8.0 / 3.0},
    {1.0 / 3.0, -8.0 / 3.0, 7.0 / 3.0},
};

struct GaussRule {
  std::array<double, 3> tau;
  std::array<double, 3> weight;
  std::array<std::array<double, 3>, 3> basis;  // basis[q][a]
};

GaussRule gauss3() {
  const double r = 0.5 * std::sqrt(0.6);
  GaussRule g{{0.5 - r, 0.5, 0.5 + r}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}, {}};
  for (int q = 0; q < 3; ++q) g.basis[q] = shape(g.tau[q]);
  return g;
}

// Discrete action over the full node vector (end points included).
class P2Action {
 public:
  P2Action(const LagrangianSpec& spec, double h, std::size_t elements)
      : spec_(spec), h_(h), elements_(elements), rule_(gauss3()) {}

  double value(const std::vector<Point>& z) const {
    const double m = spec_.mass();
    double kinetic = 0.0, potential = 0.0;
    for (std::size_t e = 0; e < elements_; ++e) {
      const Point* n = &z[2 * e];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) kinetic += kStiffness[a][b] * dot(n[a], n[b]);
      for (int q = 0; q < 3; ++q) potential += rule_.weight[q] * spec_.potential(at(n, q));
    }
    return m / (2.0 * h_) * kinetic - h_ * potential;
  }

  // Gradient with respect to every node; end-point entries are ignored by the caller.
  void gradient(const std::vector<Point>& z, std::vector<Point>& g) const {
    const double m = spec_.mass();
    std::fill(g.begin(), g.end(), Point{});
    for (std::size_t e = 0; e < elements_; ++e) {
      const Point* n = &z[2 * e];
      Point* out = &g[2 * e];
      for (int a = 0; a < 3; ++a) {
        Point k{};
        for (int b = 0; b < 3; ++b) k += kStiffness[a][b] * n[b];
        out[a] += (m / h_) * k;
      }
      for (int q = 0; q < 3; ++q) {
        const Point dv = spec_.potential_gradient(at(n, q));
        for (int a = 0; a < 3; ++a) out[a] -= (h_ * rule_.weight[q] * rule_.basis[q][a]) * dv;
      }
    }
  }

 private:
  Point at(const Point* n, int q) const {
    const auto& b = rule_.basis[q];
    return b[0] * n[0] + b[1] * n[1] + b[2] * n[2];
  }

  const LagrangianSpec& spec_;
  double h_;
  std::size_t elements_;
  GaussRule rule_;
};

// Kinetic Hessian over interior nodes, identical for each coordinate.
class KineticPreconditioner {
 public:
  KineticPreconditioner(double m, double h, std::size_t elements)
      : dofs_(2 * elements - 1) {
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t e = 0; e < elements; ++e) {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const long ia = static_cast<long>(2 * e + a) - 1;
          const long ib = static_cast<long>(2 * e + b) - 1;
          if (ia < 0 || ib < 0 || ia >= static_cast<long>(dofs_) || ib >= static_cast<long>(dofs_))
            continue;
          trips.emplace_back(ia, ib, m / h * kStiffness[a][b]);
        }
      }
    }
    Eigen::SparseMatrix<double> mat(static_cast<long>(dofs_), static_cast<long>(dofs_));
    mat.setFromTriplets(trips.begin(), trips.end());
    solver_.compute(mat);
    require(solver_.info() == Eigen::Success, ErrorKind::Convergence,
            "kinetic preconditioner factorization failed");
  }

  // out = P^{-1} g on interior entries (index 1..dofs).
  void apply(const std::vector<Point>& g, std::vector<Point>& out) const {
    Eigen::VectorXd bx(static_cast<long>(dofs_)), by(static_cast<long>(dofs_));
    for (std::size_t i = 0; i < dofs_; ++i) {
      bx[static_cast<long>(i)] = g[i + 1].x;
      by[static_cast<long>(i)] = g[i + 1].y;
    }
    const Eigen::VectorXd sx = solver_.solve(bx);
    const Eigen::VectorXd sy = solver_.solve(by);
    std::fill(out.begin(), out.end(), Point{});
    for (std::size_t i = 0; i < dofs_; ++i)
      out[i + 1] = {sx[static_cast<long>(i)], sy[static_cast<long>(i)]};
  }

 private:
  std::size_t dofs_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

double interior_dot(const std::vector<Point>& a, const std::vector<Point>& b) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

}  // namespace

NumericAction el_action_numeric(const LagrangianSpec& spec, const Point& x, double t,
                                const Point& x0, std::size_t n_steps,
                                const NumericActionOptions& options) {
  check_horizon(t);
  require(n_steps >= 2, ErrorKind::InvalidArgument, "numeric action needs at least two elements");
  const std::size_t nodes = 2 * n_steps + 1;
  const double h = t / static_cast<double>(n_steps);
  const P2Action action(spec, h, n_steps);

  std::vector<Point> z(nodes);
  for (std::size_t j = 0; j < nodes; ++j)
    z[j] = x0 + (static_cast<double>(j) / static_cast<double>(nodes - 1)) * (x - x0);
  z.front() = x0;
  z.back() = x;

  std::vector<Point> g(nodes), s(nodes), d(nodes), trial(nodes), g_trial(nodes);
  action.gradient(z, g);
  double gnorm = std::sqrt(interior_dot(g, g));
  std::size_t iter = 0;

  if (nodes > 2 && gnorm > options.gradient_tolerance) {
    const KineticPreconditioner pre(spec.mass(), h, n_steps);
    pre.apply(g, s);
    for (std::size_t i = 0; i < nodes; ++i) d[i] = Point{} - s[i];
    double gs = interior_dot(g, s);

    auto slope = [&](double alpha) {
      for (std::size_t i = 0; i < nodes; ++i) trial[i] = z[i] + alpha * d[i];
      action.gradient(trial, g_trial);
      return interior_dot(g_trial, d);
    };

    while (gnorm > options.gradient_tolerance) {
      if (++iter > options.max_iterations)
        throw ConvergenceError("numeric action minimizer did not converge", gnorm);
      double d0 = interior_dot(g, d);
      if (d0 >= 0.0) {  // lost descent; restart along -P^{-1} g
        for (std::size_t i = 0; i < nodes; ++i) d[i] = Point{} - s[i];
        d0 = -gs;
      }
      // secant search on the directional derivative; one step for quadratic actions
      double a_prev = 0.0, f_prev = d0, a = 1.0, f = slope(a);
      for (int ls = 0; ls < 30 && std::abs(f) > 1e-10 * std::abs(d0); ++ls) {
        if (f == f_prev) break;
        const double a_next = a - f * (a - a_prev) / (f - f_prev);
        if (!std::isfinite(a_next)) break;
        a_prev = a;
        f_prev = f;
        a = a_next;
        f = slope(a);
      }
      for (std::size_t i = 0; i < nodes; ++i) z[i] = trial[i];
      std::vector<Point> s_new(nodes);
      pre.apply(g_trial, s_new);
      double num = 0.0;
      for (std::size_t i = 1; i + 1 < nodes; ++i) num += dot(g_trial[i], s_new[i] - s[i]);
      const double beta = (iter % (nodes - 2 + 1) == 0) ? 0.0 : std::max(0.0, num / gs);
      g.swap(g_trial);
      s.swap(s_new);
      gs = interior_dot(g, s);
      for (std::size_t i = 0; i < nodes; ++i) d[i] = beta * d[i] - s[i];
      const double new_norm = std::sqrt(interior_dot(g, g));
      gnorm = new_norm;
    }
  }

  NumericAction out;
  out.action = action.value(z);
  out.gradient_norm = gnorm;
  out.iterations = iter;
  Trajectory& path = out.path;
  path.times.resize(nodes);
  path.positions = z;
  path.velocities.assign(nodes, Point{});
  std::vector<int> hits(nodes, 0);
  for (std::size_t e = 0; e < n_steps; ++e) {
    const Point* n = &z[2 * e];
    path.velocities[2 * e] += (-3.0 * n[0] + 4.0 * n[1] - n[2]) / h;
    path.velocities[2 * e + 1] += (n[2] - n[0]) / h;
    path.velocities[2 * e + 2] += (n[0] - 4.0 * n[1] + 3.0 * n[2]) / h;
    ++hits[2 * e];
    ++hits[2 * e + 1];
    ++hits[2 * e + 2];
  }
  for (std::size_t j = 0; j < nodes; ++j) {
    path.times[j] = 0.5 * h * static_cast<double>(j);
    path.velocities[j] = path.velocities[j] / static_cast<double>(hits[j]);
  }
  path.times.back() = t;
  return out;
}

namespace {

struct Phase {
  Point x, v;
};

Phase rk4_step(const LagrangianSpec& spec, const Phase& p, double dt) {
  const double m = spec.mass();
  auto acc = [&](const Point& x) { return spec.potential_gradient(x) * (-1.0 / m); };
  const Point k1x = p.v, k1v = acc(p.x);
  const Point k2x = p.v + 0.5 * dt * k1v, k2v = acc(p.x + 0.5 * dt * k1x);
  const Point k3x = p.v + 0.5 * dt * k2v, k3v = acc(p.x + 0.5 * dt * k2x);
  const Point k4x = p.v + dt * k3v, k4v = acc(p.x + dt * k3x);
  return {p.x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
          p.v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

// dg/dt with ξ'' = -∇V(ξ)/m, so -m ξ''·ξ = ∇V(ξ)·ξ.
double g_rate(const LagrangianSpec& spec, const Phase& p) {
  return -0.5 * spec.mass() * norm2(p.v) - spec.potential(p.x) +
         dot(spec.potential_gradient(p.x), p.x);
}

double energy(const LagrangianSpec& spec, const Phase& p) {
  return 0.5 * spec.mass() * norm2(p.v) + spec.potential(p.x);
}

}  // namespace

double DeterministicAction::action(const Point& x, std::size_t k) const {
  return spec_.mass() * dot(xi_.velocities[k], x) + g_[k];
}

DeterministicAction::State DeterministicAction::state_at(double t) const {
  const auto& ts = xi_.times;
  require(t >= 0.0 && t <= ts.back() * (1 + 1e-12), ErrorKind::OutOfDomain,
          "time outside the integrated interval");
  const double dt = ts.size() > 1 ? ts[1] - ts[0] : 0.0;
  std::size_t k = dt > 0 ? static_cast<std::size_t>(std::floor(t / dt)) : 0;
  k = std::min(k, ts.size() - 1);
  const double tau = t - ts[k];
  const Phase p0{xi_.positions[k], xi_.velocities[k]};
  if (tau == 0.0) return {p0.x, p0.v, g_[k]};
  const Phase mid = rk4_step(spec_, p0, 0.5 * tau);
  const Phase end = rk4_step(spec_, mid, 0.5 * tau);
  const double g = g_[k] + tau / 6.0 * (g_rate(spec_, p0) + 4.0 * g_rate(spec_, mid) +
                                        g_rate(spec_, end));
  return {end.x, end.v, g};
}

double DeterministicAction::action_at(const Point& x, double t) const {
  const auto s = state_at(t);
  return spec_.mass() * dot(s.velocity, x) + s.g;
}

DeterministicAction deterministic_action(const LagrangianSpec& spec, const Point& x0,
                                         const Point& v0, double t_end, double dt) {
  require(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
  check_horizon(t_end);
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);

  DeterministicAction out(spec);
  Trajectory& xi = out.xi_;
  xi.times.resize(steps + 1);
  xi.positions.resize(steps + 1);
  xi.velocities.resize(steps + 1);
  std::vector<double> rate(steps + 1);

  Phase p{x0, v0};
  const double e0 = energy(spec, p);
  const double scale = std::max({std::abs(e0), 0.5 * spec.mass() * norm2(v0),
                                 std::abs(spec.potential(x0)), 1e-300});
  double drift = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    if (k > 0) p = rk4_step(spec, p, h);
    xi.times[k] = h * static_cast<double>(k);
    xi.positions[k] = p.x;
    xi.velocities[k] = p.v;
    rate[k] = g_rate(spec, p);
    drift = std::max(drift, std::abs(energy(spec, p) - e0) / scale);
  }
  xi.times.back() = t_end;
  out.energy_drift_ = drift;
  require(drift <= 1e-6, ErrorKind::Stability,
          "energy drift " + std::to_string(drift) + " exceeds 1e-6; reduce dt");

  // cumulative Simpson; odd sample counts close with the 3-point end-interval rule
  auto& g = out.g_;
  g.assign(steps + 1, 0.0);
  for (std::size_t k = 2; k <= steps; k += 2)
    g[k] = g[k - 2] + h / 3.0 * (rate[k - 2] + 4.0 * rate[k - 1] + rate[k]);
  if (steps >= 1) g[1] = h / 12.0 * (5.0 * rate[0] + 8.0 * rate[1] - (steps >= 2 ? rate[2] : rate[1]));
  for (std::size_t k = 3; k <= steps; k += 2)
    g[k] = g[k - 1] + h / 12.0 * (-rate[k - 2] + 8.0 * rate[k - 1] + 5.0 * rate[k]);
  if (steps == 1) g[1] = 0.5 * h * (rate[0] + rate[1]);
  return out;
}

}  // namespace semiclassical
