"""Unit tests for Hamiltonian paths and their derivative norms."""

import math

import numpy as np
import pytest

from adialab import matcore, schedule
from adialab.errors import DomainError, InterpolationGap, NotHermitian, OutOfRange

S_SAMPLES = np.linspace(0.0, 1.0, 11)
FD_REL_TOL = 1e-6


def test_geodesic_endpoints():
    sched = schedule.QubitGeodesic(np.pi / 2, 0.0)
    np.testing.assert_allclose(sched.eval(0.0), matcore.SIGMA_Z, atol=1e-15)
    # polar angle s*theta: pi/4 at the midpoint, pi/2 (the target axis) at s=1
    np.testing.assert_allclose(
        sched.eval(0.5), (matcore.SIGMA_X + matcore.SIGMA_Z) / np.sqrt(2.0), atol=1e-14
    )
    np.testing.assert_allclose(sched.eval(1.0), matcore.SIGMA_X, atol=1e-14)


def test_linear_endpoints():
    theta = np.pi / 2
    sched = schedule.qubit_linear(theta, 0.0)
    np.testing.assert_allclose(sched.eval(0.0), matcore.SIGMA_Z, atol=1e-15)
    np.testing.assert_allclose(
        sched.eval(1.0), schedule.bloch_hamiltonian(theta, 0.0), atol=1e-15
    )


def test_bloch_helpers():
    np.testing.assert_allclose(schedule.bloch_vector(np.pi / 2, 0.0), [1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(schedule.bloch_hamiltonian(np.pi / 2, 0.0), matcore.SIGMA_X, atol=1e-15)
    np.testing.assert_allclose(schedule.bloch_hamiltonian(0.0, 0.0), matcore.SIGMA_Z, atol=1e-15)


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.0, np.pi])
def test_geodesic_is_involutory(theta):
    """Unit Bloch vector means H(s)^2 = identity at every s."""
    sched = schedule.QubitGeodesic(theta, 0.7)
    for s in S_SAMPLES:
        h = sched.eval(float(s))
        np.testing.assert_allclose(h @ h, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(np.linalg.eigvalsh(h), [-1.0, 1.0], atol=1e-12)


@pytest.mark.parametrize("theta", [0.5, np.pi / 2, 2.5])
def test_linear_eigenvalues_closed_form(theta):
    sched = schedule.qubit_linear(theta, 0.0)
    for s in S_SAMPLES:
        lam = np.sqrt(1.0 - 2.0 * (1.0 - s) * s * (1.0 - np.cos(theta)))
        np.testing.assert_allclose(
            np.linalg.eigvalsh(sched.eval(float(s))), [-lam, lam], atol=1e-10
        )


def test_linear_second_derivative_vanishes():
    sched = schedule.qubit_linear(1.3, 0.4)
    for s in (0.0, 0.5, 1.0):
        assert matcore.max_abs(sched.eval_d2(s)) == 0.0


def test_geodesic_derivative_norms_pointwise():
    theta = 1.0
    sched = schedule.QubitGeodesic(theta, 0.0)
    for s in S_SAMPLES:
        assert matcore.operator_norm(sched.eval_d1(float(s))) == pytest.approx(theta, abs=1e-12)
        assert matcore.operator_norm(sched.eval_d2(float(s))) == pytest.approx(theta**2, abs=1e-12)


def test_derivative_norms_scan_and_closed_form():
    lin = schedule.qubit_linear(np.pi / 2, 0.0)
    scan = lin.derivative_norms(501)
    assert scan.h1_max == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert scan.h2_max == 0.0
    assert scan.grid_size == 501
    exact = lin.exact_derivative_norms()
    assert exact.h1_max == pytest.approx(np.sqrt(2.0), rel=1e-12)

    geo = schedule.QubitGeodesic(1.0, 0.0)
    scan = geo.derivative_norms(501)
    assert scan.h1_max == pytest.approx(1.0, rel=1e-9)
    assert scan.h2_max == pytest.approx(1.0, rel=1e-9)

    const = schedule.LinearInterpolation(matcore.SIGMA_Z, matcore.SIGMA_Z)
    scan = const.derivative_norms(101)
    assert scan.h1_max == 0.0 and scan.h2_max == 0.0


@pytest.mark.parametrize(
    "sched",
    [schedule.QubitGeodesic(np.pi, 0.0), schedule.qubit_linear(np.pi / 2, 0.0)],
    ids=["geodesic", "linear"],
)
def test_finite_difference_matches_analytic(sched):
    for s in S_SAMPLES:
        a1 = sched.eval_d1(float(s))
        a2 = sched.eval_d2(float(s))
        f1 = schedule.fd_d1(sched.eval, float(s))
        f2 = schedule.fd_d2(sched.eval, float(s))
        assert matcore.max_abs(f1 - a1) <= FD_REL_TOL * max(1.0, matcore.max_abs(a1))
        assert matcore.max_abs(f2 - a2) <= FD_REL_TOL * max(1.0, matcore.max_abs(a2))


def test_eval_domain_checks():
    sched = schedule.QubitGeodesic(1.0, 0.0)
    with pytest.raises(OutOfRange):
        sched.eval(-0.01)
    with pytest.raises(OutOfRange):
        sched.eval(1.01)
    with pytest.raises(OutOfRange):
        sched.eval_d1(1.5)


def test_geodesic_parameter_domain():
    with pytest.raises(DomainError):
        schedule.QubitGeodesic(-0.1, 0.0)
    with pytest.raises(DomainError):
        schedule.QubitGeodesic(np.pi + 0.1, 0.0)
    with pytest.raises(DomainError):
        schedule.QubitGeodesic(1.0, 2 * np.pi)
    # theta = pi itself is a valid geodesic
    schedule.QubitGeodesic(np.pi, 0.0)


def test_linear_rejects_non_hermitian_endpoint():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(NotHermitian):
        schedule.LinearInterpolation(matcore.SIGMA_Z, bad)


def _tabulated_from_geodesic(n_knots=41):
    geo = schedule.QubitGeodesic(1.0, 0.0)
    knots = np.linspace(0.0, 1.0, n_knots)
    samples = np.stack([geo.eval(float(s)) for s in knots])
    return geo, schedule.Tabulated(knots, samples)


def test_tabulated_interpolates_geodesic():
    geo, tab = _tabulated_from_geodesic()
    assert tab.dim == 2
    for s in S_SAMPLES:
        assert matcore.max_abs(tab.eval(float(s)) - geo.eval(float(s))) <= 1e-5
    # derivatives come from finite differences on the spline
    mid = 0.5
    assert matcore.max_abs(tab.eval_d1(mid) - geo.eval_d1(mid)) <= 1e-4


def test_tabulated_json_roundtrip(tmp_path):
    _, tab = _tabulated_from_geodesic(11)
    path = tmp_path / "sched.json"
    tab.to_json(path)
    back = schedule.Tabulated.from_json(path)
    assert back.dim == tab.dim
    np.testing.assert_allclose(back.knots, tab.knots, atol=0)
    for s in (0.0, 0.25, 1.0):
        np.testing.assert_allclose(back.eval(s), tab.eval(s), atol=1e-14)


def test_tabulated_grid_validation():
    z = matcore.SIGMA_Z
    with pytest.raises(InterpolationGap):
        schedule.Tabulated(np.array([0.0, 0.4]), np.stack([z, z]))  # no coverage of s=1
    with pytest.raises(InterpolationGap):
        schedule.Tabulated(np.array([0.0, 0.6, 0.5, 1.0]), np.stack([z, z, z, z]))
    with pytest.raises(ValueError):
        schedule.Tabulated(np.array([0.0, 1.0]), np.zeros((3, 2, 2), dtype=complex))
    bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(NotHermitian):
        schedule.Tabulated(np.array([0.0, 1.0]), np.stack([z, bad]))


def test_tabulated_eval_outside_domain():
    _, tab = _tabulated_from_geodesic(11)
    with pytest.raises(OutOfRange):
        tab.eval(1.2)


def test_linear_qubit_gap_closed_form():
    theta = np.pi / 2
    assert schedule.linear_qubit_min_gap(theta) == pytest.approx(np.sqrt(2.0), rel=1e-15)
    assert schedule.linear_qubit_gap(theta, 0.5) == pytest.approx(np.sqrt(2.0), rel=1e-15)
    np.testing.assert_allclose(schedule.linear_qubit_gap(theta, np.array([0.0, 1.0])), [2.0, 2.0])
    # the minimum sits at s = 1/2
    s = np.linspace(0, 1, 101)
    gaps = schedule.linear_qubit_gap(theta, s)
    assert s[np.argmin(gaps)] == pytest.approx(0.5)


def test_random_linear_is_deterministic():
    a = schedule.random_linear(4, 9)
    b = schedule.random_linear(4, 9)
    np.testing.assert_allclose(a.eval(0.0), b.eval(0.0), atol=0)
    np.testing.assert_allclose(a.eval(1.0), b.eval(1.0), atol=0)
    c = schedule.random_linear(4, 10)
    assert matcore.max_abs(a.eval(1.0) - c.eval(1.0)) > 1e-3


@pytest.mark.parametrize("dim", [2, 4, 8])
def test_random_linear_designed_spectrum(dim):
    sched = schedule.random_linear(dim, 3)
    target = np.concatenate([[-1.0], np.linspace(-0.2, 1.0, dim - 1)])
    for s in (0.0, 1.0):
        h = sched.eval(s)
        assert matcore.is_hermitian(h)
        np.testing.assert_allclose(np.linalg.eigvalsh(h), np.sort(target), atol=1e-10)
