import math

import numpy as np
import pytest

import semiclassical as sc


def test_hopf_lax_linear_closed_form():
    grid = sc.Grid(sc.Axis.spanning(-5.0, 5.0, 257))
    x = grid.axis(0).coords()
    s, interior = sc.hopf_lax(sc.Lagrangian.linear(1.0, 1.0), grid, 0.5 * x, 1.0)
    exact = 0.5 * x - 0.125 + x - 0.25 - 1.0 / 6.0
    assert interior.sum() > 100
    assert np.max(np.abs(s[interior] - exact[interior])) < 1e-9


def test_delta_reproduces_kernel():
    grid = sc.Grid(sc.Axis.spanning(-2.0, 2.0, 65))
    lag = sc.Lagrangian.harmonic(1.0, 1.0)
    s, _ = sc.hopf_lax(lag, grid, sc.delta(grid, 0.5), 0.7)
    kernel = [sc.el_action(lag, xi, 0.7, 0.5) for xi in grid.axis(0).coords()]
    assert np.array_equal(s, np.array(kernel))


def test_numeric_action_matches_closed_form():
    lag = sc.Lagrangian.free(2.0)
    action, times, path = sc.el_action_numeric(lag, 1.0, 0.5, -1.0, 50)
    assert action == pytest.approx(sc.el_action(lag, 1.0, 0.5, -1.0), abs=1e-8)
    assert path[0] == pytest.approx(-1.0) and path[-1] == pytest.approx(1.0)
    assert len(times) == len(path)


def test_split_step_tracks_coherent_state():
    grid = sc.Grid(sc.Axis.periodic(-10.0, 10.0, 256))
    psi0 = sc.coherent_state(grid, 0.0, x0=1.5, v0=0.3)
    psi = sc.split_step(psi0, sc.Lagrangian.harmonic(1.0, 1.0), 1e-3, 1000)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert sc.l2_distance(psi, sc.coherent_state(grid, 1.0, x0=1.5, v0=0.3)) < 1e-5
    assert psi.variance() == pytest.approx(0.5, rel=1e-5)


def test_madelung_and_feynman():
    grid = sc.Grid(sc.Axis.periodic(-20.0, 20.0, 512))
    psi = sc.gaussian_packet(grid, 0.0, 1.0, 0.5, 1.0, 1.0)
    rho, action, q, mask = sc.madelung(psi)
    assert np.all(np.isinf(action[~mask]))
    assert rho.sum() * grid.axis(0).spacing == pytest.approx(1.0, abs=1e-10)
    free = sc.Lagrangian.free(1.0)
    f = sc.feynman_propagate(psi, free, 4.0)
    s = sc.split_step(psi, free, 1e-2, 400)
    assert sc.l2_distance(f, s) < 1e-4


def test_bohm_equivariance_and_shapes():
    grid = sc.Grid(sc.Axis.periodic(-20.0, 20.0, 512))
    psi = sc.gaussian_packet(grid, 0.0, 1.0, 0.5, 1.0, 1.0)
    times, pos, ks = sc.bohm(psi, sc.Lagrangian.free(1.0), 1e-2, 10, 20, 500, seed=3)
    assert pos.shape == (500, len(times), 1)
    assert max(ks) < 1.63 / math.sqrt(500)
    order = np.argsort(pos[:, 0, 0])
    assert np.all(np.diff(pos[order, -1, 0]) > 0)


def test_double_slit_fringes():
    r = sc.double_slit(n_particles=50, slices=100)
    assert len(r["maxima"]) >= 3
    assert min(r["visibility"]) > 0.5


def test_sweeps():
    r = sc.coherent_sweep([1.0, 0.1, 0.01])
    assert r["slope_evolved"] == pytest.approx(0.5, abs=0.01)
    s = sc.indiscerned_sweep([1.0, 0.1], n_particles=100)
    rms = [p["traj_rms"] for p in s["points"]]
    assert rms[1] < rms[0]


def test_errors_carry_kind():
    with pytest.raises(sc.SemiclassicalError) as info:
        sc.Grid(sc.Axis.spanning(0.0, 1.0, 1))
    assert info.value.kind
    grid = sc.Grid(sc.Axis.spanning(0.0, 1.0, 8))
    with pytest.raises(sc.SemiclassicalError) as info:
        sc.hopf_lax(sc.Lagrangian.free(1.0), grid, np.zeros(3), 1.0)
    assert info.value.kind == "shape"
