#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semiclassical/actions.hpp"
#include "semiclassical/bohm.hpp"
#include "semiclassical/convergence.hpp"
#include "semiclassical/errors.hpp"
#include "semiclassical/hopf_lax.hpp"
#include "semiclassical/quantum.hpp"

namespace py = pybind11;
using namespace semiclassical;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

// Arrays are shaped like the grid: (nx,) in 1D, (nx, ny) in 2D.
std::vector<py::ssize_t> grid_shape(const Grid& g) {
  if (g.dim() == 1) return {py::ssize_t(g.axis(0).count)};
  return {py::ssize_t(g.axis(0).count), py::ssize_t(g.axis(1).count)};
}

py::array_t<double> vector_array(const std::vector<double>& v) {
  py::array_t<double> out(std::vector<py::ssize_t>{py::ssize_t(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

template <class T>
py::array_t<T> to_array(const Grid& g, const std::vector<T>& v) {
  py::array_t<T> out(grid_shape(g));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<bool> mask_array(const Grid& g, const std::vector<bool>& m) {
  py::array_t<bool> out(grid_shape(g));
  auto* p = out.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = m[i];
  return out;
}

py::array_t<double> field_array(const ScalarField& f) { return to_array(f.grid(), f.to_doubles()); }

template <class T, class A>
std::vector<T> flat(const Grid& g, const A& a, const char* what) {
  require(std::size_t(a.size()) == g.size(), ErrorKind::Shape,
          std::string(what) + " does not match the grid size");
  return std::vector<T>(a.data(), a.data() + a.size());
}

ScalarField field_from(const Grid& g, const DoubleArray& a) {
  const auto v = flat<double>(g, a, "field");
  return ScalarField::from_doubles(g, v);
}

py::array_t<double> points_array(const std::vector<Point>& pts, std::size_t dim) {
  py::array_t<double> out({py::ssize_t(pts.size()), py::ssize_t(dim)});
  auto r = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r(i, 0) = pts[i].x;
    if (dim == 2) r(i, 1) = pts[i].y;
  }
  return out;
}

// Position history shaped (particles, times, dim); invalid samples are NaN.
py::array_t<double> bundle_positions(const TrajectoryBundle& b, std::size_t dim) {
  py::array_t<double> out({py::ssize_t(b.particles()), py::ssize_t(b.times.size()), py::ssize_t(dim)});
  auto r = out.mutable_unchecked<3>();
  for (std::size_t q = 0; q < b.particles(); ++q)
    for (std::size_t k = 0; k < b.times.size(); ++k) {
      const bool ok = b.valid_at(q, k);
      r(q, k, 0) = ok ? b.positions[q][k].x : NAN;
      if (dim == 2) r(q, k, 1) = ok ? b.positions[q][k].y : NAN;
    }
  return out;
}

py::dict sweep_dict(const SweepReport& r) {
  py::dict d;
  d["scenario"] = r.scenario;
  py::list pts;
  for (const auto& p : r.points) {
    py::dict e;
    e["hbar_factor"] = p.hbar_factor;
    e["hbar"] = p.hbar;
    e["action_sup_err"] = p.action_sup_err;
    e["density_dist"] = p.density_dist;
    e["traj_rms"] = p.traj_rms;
    e["mask_coverage"] = p.mask_coverage;
    e["grid_nodes"] = p.grid_nodes;
    e["dx"] = p.dx;
    e["dt"] = p.dt;
    e["censored"] = p.censored;
    pts.append(e);
  }
  d["points"] = pts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_semiclassical, m) {
  m.doc() = "Min-plus Hamilton-Jacobi actions, semiclassical wave mechanics and Bohm trajectories";

  static PyObject* error_type = py::exception<Error>(m, "SemiclassicalError", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::class_<Axis>(m, "Axis")
      .def_static("spanning", &Axis::spanning, py::arg("lo"), py::arg("hi"), py::arg("count"))
      .def_static("periodic", &Axis::periodic, py::arg("lo"), py::arg("hi"), py::arg("count"))
      .def_readonly("origin", &Axis::origin)
      .def_readonly("spacing", &Axis::spacing)
      .def_readonly("count", &Axis::count)
      .def("coords", [](const Axis& a) {
        std::vector<double> c(a.count);
        for (std::size_t i = 0; i < a.count; ++i) c[i] = a.coord(i);
        return vector_array(c);
      });

  py::class_<Grid>(m, "Grid")
      .def(py::init<Axis>(), py::arg("x"))
      .def(py::init<Axis, Axis>(), py::arg("x"), py::arg("y"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("shape", [](const Grid& g) { return grid_shape(g); })
      .def("axis", &Grid::axis, py::arg("k"));

  py::class_<LagrangianSpec>(m, "Lagrangian")
      .def_static("free", &LagrangianSpec::free, py::arg("mass"))
      .def_static("linear", [](double mass, double fx, double fy) {
        return LagrangianSpec::linear(mass, Point{fx, fy});
      }, py::arg("mass"), py::arg("force"), py::arg("force_y") = 0.0)
      .def_static("harmonic", &LagrangianSpec::harmonic, py::arg("mass"), py::arg("omega"))
      .def_property_readonly("kind", [](const LagrangianSpec& s) { return to_string(s.kind()); })
      .def_property_readonly("mass", &LagrangianSpec::mass)
      .def_property_readonly("omega", &LagrangianSpec::omega);

  // actions
  m.def("el_action", [](const LagrangianSpec& s, double x, double t, double x0) {
    return el_action_closed(s, Point{x, 0}, t, Point{x0, 0}).value();
  }, py::arg("lagrangian"), py::arg("x"), py::arg("t"), py::arg("x0"),
        "Closed-form least action from x0 to x in time t; inf past a caustic.");
  m.def("el_action_numeric", [](const LagrangianSpec& s, double x, double t, double x0, std::size_t n) {
    const auto r = el_action_numeric(s, Point{x, 0}, t, Point{x0, 0}, n);
    return py::make_tuple(r.action.value(), r.path.times, points_array(r.path.positions, 1).attr("ravel")());
  }, py::arg("lagrangian"), py::arg("x"), py::arg("t"), py::arg("x0"), py::arg("n_steps") = 200,
        "Discrete least action; returns (action, times, path).");

  // Hopf-Lax
  m.def("hopf_lax", [](const LagrangianSpec& s, const Grid& g, const DoubleArray& s0, double t, bool refine) {
    HopfLaxOptions o;
    o.refine = refine;
    const auto r = hamilton_jacobi_field_detailed(s, field_from(g, s0), t, o);
    return py::make_tuple(field_array(r.action), mask_array(g, r.interior));
  }, py::arg("lagrangian"), py::arg("grid"), py::arg("s0"), py::arg("t"), py::arg("refine") = true,
        "Min-plus Hamilton-Jacobi solution at time t; returns (action, interior). +inf encodes no data.");
  m.def("delta", [](const Grid& g, double x0, double y0) {
    return field_array(delta_min(Point{x0, y0}, g));
  }, py::arg("grid"), py::arg("x0"), py::arg("y0") = 0.0, "Min-plus delta: 0 at the nearest node, +inf elsewhere.");
  m.def("velocity_field", [](const Grid& g, const DoubleArray& s, double mass) {
    const auto v = velocity_field(field_from(g, s), mass);
    std::vector<double> vx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) vx[i] = v.valid[i] ? v.values[i].x : NAN;
    return to_array(g, vx);
  }, py::arg("grid"), py::arg("action"), py::arg("mass"), "Gradient of the action over the mass; NaN where invalid.");

  // wave functions
  py::class_<WaveFunction>(m, "WaveFunction")
      .def(py::init([](const Grid& g, const ComplexArray& a, double hbar, double mass) {
        return WaveFunction(g, flat<Complex>(g, a, "amplitudes"), hbar, mass);
      }), py::arg("grid"), py::arg("psi"), py::arg("hbar"), py::arg("mass"))
      .def_property_readonly("grid", &WaveFunction::grid)
      .def_property_readonly("hbar", &WaveFunction::hbar)
      .def_property_readonly("mass", &WaveFunction::mass)
      .def_property_readonly("psi", [](const WaveFunction& w) { return to_array(w.grid(), w.amplitudes()); })
      .def("density", [](const WaveFunction& w) { return to_array(w.grid(), w.density()); })
      .def("norm", &WaveFunction::norm)
      .def("mean", [](const WaveFunction& w) { return position_moments(w).mean.x; })
      .def("variance", [](const WaveFunction& w) { return position_moments(w).variance.x; });

  m.def("gaussian_packet", [](const Grid& g, double x0, double sigma, double v0, double hbar, double mass) {
    return gaussian_packet(g, Point{x0, 0}, sigma, Point{v0, 0}, hbar, mass);
  }, py::arg("grid"), py::arg("x0"), py::arg("sigma"), py::arg("v0"), py::arg("hbar"), py::arg("mass"));
  m.def("coherent_state", [](const Grid& g, double t, double mass, double omega, double hbar, double x0, double v0) {
    CoherentStateParams p;
    p.mass = mass;
    p.omega = omega;
    p.hbar = hbar;
    p.x0 = Point{x0, 0};
    p.v0 = Point{v0, 0};
    p.dim = g.dim();
    return coherent_state(p, t, g).psi;
  }, py::arg("grid"), py::arg("t"), py::arg("mass") = 1.0, py::arg("omega") = 1.0, py::arg("hbar") = 1.0,
        py::arg("x0") = 0.0, py::arg("v0") = 0.0);
  m.def("l2_distance", &l2_distance, py::arg("a"), py::arg("b"));
  m.def("split_step", [](const WaveFunction& psi, const LagrangianSpec& s, double dt, std::size_t n) {
    return split_step_evolve(psi, s, dt, n);
  }, py::arg("psi"), py::arg("lagrangian"), py::arg("dt"), py::arg("n_steps"),
        py::call_guard<py::gil_scoped_release>());
  m.def("feynman_propagate", &feynman_propagate, py::arg("psi"), py::arg("lagrangian"), py::arg("t"),
        py::call_guard<py::gil_scoped_release>());
  m.def("madelung", [](const WaveFunction& psi, double threshold) {
    const auto pair = madelung_decompose(psi, threshold);
    const auto q = quantum_potential(pair, psi.hbar(), psi.mass());
    return py::make_tuple(field_array(pair.rho), field_array(pair.action), field_array(q),
                          mask_array(psi.grid(), pair.mask));
  }, py::arg("psi"), py::arg("mask_threshold") = 1e-6,
        "Returns (rho, action, quantum potential, mask); action and potential are +inf off the mask.");

  // Bohm
  m.def("bohm", [](const WaveFunction& psi0, const LagrangianSpec& s, double dt, std::size_t steps_per_slice,
                   std::size_t slices, std::size_t n, std::uint64_t seed) {
    const auto ev = evolve_slices(psi0, s, dt, steps_per_slice, slices);
    const auto x0 = sample_quantum_equilibrium(psi0, n, seed);
    const auto b = integrate_bohm(ev.times, ev.slices, x0, dt);
    return py::make_tuple(vector_array(b.times),
                          bundle_positions(b, psi0.grid().dim()), equivariance_check(b, ev.slices));
  }, py::arg("psi0"), py::arg("lagrangian"), py::arg("dt"), py::arg("steps_per_slice"), py::arg("slices"),
        py::arg("n_particles"), py::arg("seed") = 1,
        "Evolves psi0 and transports equilibrium-sampled particles; returns (times, positions, ks_per_slice).");
  m.def("sample_equilibrium", [](const WaveFunction& psi, std::size_t n, std::uint64_t seed) {
    return points_array(sample_quantum_equilibrium(psi, n, seed), psi.grid().dim());
  }, py::arg("psi"), py::arg("n"), py::arg("seed") = 1);
  m.def("double_slit", [](double hbar_scale, std::size_t n, std::uint64_t seed, std::size_t slices) {
    DoubleSlitGeometry geo;
    geo.slices = slices;
    const auto r = double_slit_scenario(geo, hbar_scale, n, seed);
    py::dict d;
    d["times"] = r.bundle.times;
    d["positions"] = bundle_positions(r.bundle, 1);
    d["bin_centers"] = r.screen.bin_centers;
    d["probability"] = r.screen.probability;
    d["particle_counts"] = r.screen.particle_counts;
    d["maxima"] = r.screen.maxima;
    d["visibility"] = r.screen.visibility;
    d["fringe_spacing"] = r.screen.fringe_spacing;
    return d;
  }, py::arg("hbar_scale") = 1.0, py::arg("n_particles") = 100, py::arg("seed") = 1, py::arg("slices") = 200);

  // sweeps
  m.def("indiscerned_sweep", [](const std::vector<double>& factors, std::size_t n, std::uint64_t seed) {
    return sweep_dict(indiscerned_sweep(IndiscernedScenario{}, factors, n, seed));
  }, py::arg("factors"), py::arg("n_particles") = 1000, py::arg("seed") = 1);
  m.def("coherent_sweep", [](const std::vector<double>& factors, double x0, double v0) {
    CoherentStateParams p;
    p.x0 = Point{x0, 0};
    p.v0 = Point{v0, 0};
    const auto r = coherent_limit_check(p, factors);
    py::dict d;
    d["t"] = r.t;
    d["slope_analytic"] = r.slope_analytic;
    d["slope_evolved"] = r.slope_evolved;
    py::list sig;
    for (const auto& pt : r.points) sig.append(py::make_tuple(pt.hbar, pt.sigma_expected, pt.sigma_evolved));
    d["sigma"] = sig;
    return d;
  }, py::arg("factors"), py::arg("x0") = 1.0, py::arg("v0") = 0.5);
}
