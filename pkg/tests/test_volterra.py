import numpy as np
import pytest
from scipy.linalg import expm

from spinflow.maps import MapParams, SingularRateError, apply_map, snapshot
from spinflow.states import EXCITED, MAXIMALLY_MIXED, PLUS, QubitState
from spinflow.volterra import (
    IntegrationDivergenceError,
    generator_matrix,
    integrate_memory_kernel,
    integrate_post_markovian,
    integrate_quadrature,
    integrate_tcl,
)

PROBE_STATES = (EXCITED, MAXIMALLY_MIXED, QubitState(0.3, 0.2 - 0.35j))


def _closed_path(kind, p, s0, times):
    return [apply_map(snapshot(kind, p, t), s0) for t in times]


def _max_gap(states_a, states_b):
    gaps = [
        max(abs(a.population_e - b.population_e), abs(a.coherence - b.coherence))
        for a, b in zip(states_a, states_b)
    ]
    return max(gaps)


@pytest.mark.parametrize("r,n", [(0.1, 0.5), (0.24, 10.0), (0.5, 1.0)])
def test_memory_kernel_ode_matches_closed_form(r, n):
    p = MapParams.from_ratio(r, n_occ=n)
    g = generator_matrix(p)
    for s0 in PROBE_STATES:
        traj = integrate_memory_kernel(g, p, s0, 10.0, points=51)
        assert _max_gap(traj.states, _closed_path("mem", p, s0, traj.times)) < 1e-8
        assert traj.max_residual <= 1e-10


@pytest.mark.parametrize("r,n", [(0.3, 1.0), (2.0, 0.5)])
def test_post_markovian_ode_matches_closed_form(r, n):
    p = MapParams.from_ratio(r, n_occ=n)
    g = generator_matrix(p)
    for s0 in PROBE_STATES:
        traj = integrate_post_markovian(g, p, s0, 10.0, points=51)
        assert _max_gap(traj.states, _closed_path("post", p, s0, traj.times)) < 1e-8
        assert traj.max_residual <= 1e-10


@pytest.mark.parametrize("kind", ["mem", "post"])
def test_quadrature_matches_closed_form(kind):
    p = MapParams.from_ratio(0.2, n_occ=1.0)
    g = generator_matrix(p)
    traj = integrate_quadrature(kind, g, p, EXCITED, 8.0, steps=4000)
    assert _max_gap(traj.states, _closed_path(kind, p, EXCITED, traj.times)) < 1e-6
    assert traj.max_residual <= 1e-10


@pytest.mark.parametrize("kind", ["mem", "post"])
def test_quadrature_is_second_order(kind):
    p = MapParams.from_ratio(0.2, n_occ=1.0)
    g = generator_matrix(p)

    def worst_error(steps):
        traj = integrate_quadrature(kind, g, p, EXCITED, 6.0, steps=steps)
        return _max_gap(traj.states, _closed_path(kind, p, EXCITED, traj.times))

    ratio = worst_error(400) / worst_error(800)
    assert 3.5 < ratio < 4.5


def test_quadrature_post_kernel_matches_matrix_exponential():
    # the closed-form kernel rows used by the quadrature must equal
    # e^{-tau} expm(ghat tau) for the actual generator
    p = MapParams.from_ratio(0.35, n_occ=2.0)
    ghat = generator_matrix(p) / p.gamma
    traj = integrate_quadrature("post", generator_matrix(p), p, EXCITED, 2.0, steps=100)
    h = traj.meta["h"]
    for m in (1, 7, 50, 100):
        expected = np.exp(-m * h) * expm(ghat * m * h)
        fast = np.exp(-p.R * m * h)
        slow = np.exp(-0.5 * p.R * m * h)
        pumped = p.n_occ / (2.0 * p.n_occ + 1.0) * (1.0 - fast)
        built = np.exp(-m * h) * np.diag([fast, slow, slow, 1.0])
        built[0, 3] = np.exp(-m * h) * pumped
        np.testing.assert_allclose(built, expected, atol=1e-13)


def test_memory_kernel_auxiliary_is_state_derivative():
    p = MapParams.from_ratio(0.2, n_occ=1.0)
    traj = integrate_memory_kernel(generator_matrix(p), p, EXCITED, 6.0, points=601)
    pe = traj.population_path()
    dpe = np.gradient(pe, traj.times)
    np.testing.assert_allclose(traj.auxiliary[5:-5, 0], dpe[5:-5], atol=2e-4)


def test_zero_coupling_freezes_every_route():
    p = MapParams(gamma0=0.0, gamma=1.0, n_occ=3.0)
    g = generator_matrix(p)
    for traj in (
        integrate_memory_kernel(g, p, PLUS, 5.0, points=21),
        integrate_post_markovian(g, p, PLUS, 5.0, points=21),
        integrate_quadrature("mem", g, p, PLUS, 5.0, steps=100),
        integrate_tcl("post", p, PLUS, 5.0, points=21),
    ):
        assert _max_gap(traj.states, [PLUS] * len(traj.states)) < 1e-9


@pytest.mark.parametrize("kind,r", [("mem", 0.1), ("mem", 0.25), ("post", 0.7)])
def test_evolved_states_stay_valid(kind, r):
    p = MapParams.from_ratio(r, n_occ=1.0)
    g = generator_matrix(p)
    integrate = integrate_memory_kernel if kind == "mem" else integrate_post_markovian
    traj = integrate(g, p, QubitState(0.9, 0.2j), 15.0, points=101)
    assert all(s.is_valid(tol=1e-8) for s in traj.states)


@pytest.mark.parametrize("kind,r", [("mem", 0.2), ("post", 0.6), ("post", 1.8)])
def test_time_local_route_matches_closed_form(kind, r):
    p = MapParams.from_ratio(r, n_occ=0.8)
    s0 = QubitState(0.75, 0.1 + 0.25j)
    traj = integrate_tcl(kind, p, s0, 12.0, points=41)
    assert _max_gap(traj.states, _closed_path(kind, p, s0, traj.times)) < 1e-6


def test_time_local_route_refuses_singular_horizon():
    p = MapParams.from_ratio(0.5, n_occ=1.0)
    with pytest.raises(SingularRateError, match="4.71238898"):
        integrate_tcl("mem", p, EXCITED, 5.0)
    # just inside the safe horizon it integrates fine
    traj = integrate_tcl("mem", p, EXCITED, 4.5, points=31)
    assert traj.max_residual <= 1e-10


def test_argument_validation():
    p = MapParams.from_ratio(0.2, n_occ=1.0)
    g = generator_matrix(p)
    with pytest.raises(ValueError, match="t_end"):
        integrate_memory_kernel(g, p, EXCITED, 0.0)
    with pytest.raises(ValueError, match="tol"):
        integrate_post_markovian(g, p, EXCITED, 1.0, tol=1e-2)
    with pytest.raises(ValueError, match="steps"):
        integrate_quadrature("mem", g, p, EXCITED, 1.0, steps=50)
    with pytest.raises(ValueError, match="valid qubit state"):
        integrate_memory_kernel(g, p, QubitState(1.4, 0.0), 1.0)


def test_divergence_error_carries_last_good_time():
    err = IntegrationDivergenceError("stalled", last_good_time=2.5)
    assert err.last_good_time == 2.5
    assert "stalled" in str(err)
