import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagknot.errors import AxisError, ZeroSectionError
from lagknot.maslov import HalfInteger
from lagknot.sphere import (
    Covector,
    Geodesic,
    JacobiSolution,
    action_of_constant_path,
    antipodal,
    circle_action,
    circle_action_family,
    conjugate_points,
    energy,
    geodesic_flow,
    geodesic_index,
    jacobi_system,
    morse_index,
    random_covector,
    reparametrized_flow_check,
    tangent_frame,
)

times = st.floats(min_value=-3, max_value=3, allow_nan=False)
norms = st.floats(min_value=0.05, max_value=12, allow_nan=False)


def test_covector_validation():
    with pytest.raises(ValueError):
        Covector(np.array([2.0, 0, 0]), np.zeros(3))
    with pytest.raises(ValueError):
        Covector(np.array([1.0, 0, 0]), np.array([1.0, 0, 0]))
    xi = Covector.project([0, 0, 2.0], [1.0, 0, 5.0])
    assert np.allclose(xi.u, [0, 0, 1]) and np.allclose(xi.v, [1, 0, 0])


def test_tangent_frame_is_orthonormal_and_tangent():
    rng = np.random.default_rng(1)
    for _ in range(20):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        E = tangent_frame(u)
        assert np.allclose(E.T @ E, np.eye(2))
        assert np.allclose(u @ E, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), norms, times, times)
def test_geodesic_flow_group_law(seed, norm, s, t):
    xi = random_covector(np.random.default_rng(seed), norm)
    lhs = geodesic_flow(xi, s + t)
    rhs = geodesic_flow(geodesic_flow(xi, s), t)
    assert lhs.distance(rhs) < 1e-9
    assert abs(lhs.norm - norm) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), norms, times)
def test_circle_action_is_periodic(seed, norm, s):
    xi = random_covector(np.random.default_rng(seed), norm)
    assert circle_action(2 * np.pi, xi).distance(xi) < 1e-9
    assert circle_action(s, circle_action(-s, xi)).distance(xi) < 1e-9
    assert circle_action(np.pi, xi).distance(antipodal(xi)) < 1e-12


def test_circle_action_on_zero_section_raises():
    with pytest.raises(ZeroSectionError):
        circle_action(1.0, Covector(np.array([0, 0, 1.0]), np.zeros(3)))


def test_circle_action_family_endpoints():
    rng = np.random.default_rng(4)
    xi = random_covector(rng, 2.0)
    assert circle_action_family(0.0, 0.7, xi).distance(circle_action(0.7, xi)) < 1e-12
    zero = Covector(np.array([0, 0, 1.0]), np.zeros(3))
    assert circle_action_family(1.0, 0.7, zero).distance(zero) < 1e-12
    # the axis s u + (1 - s) u x v vanishes only on the zero-section with s = 0
    with pytest.raises(AxisError):
        circle_action_family(0.0, 0.7, zero)


def test_reparametrized_flow_matches_closed_form():
    rng = np.random.default_rng(8)
    xi = random_covector(rng, 1.3)
    left, right = reparametrized_flow_check(lambda h: h ** 2, lambda h: 2 * h, xi, 0.8, steps=800)
    assert left.distance(right) < 1e-6


def test_jacobi_solution_is_symplectic():
    xi = random_covector(np.random.default_rng(2), 3 * np.pi)
    sol = JacobiSolution(jacobi_system(Geodesic(xi)))
    assert sol.symplectic_drift < 1e-10
    # J(r) = sin(L r)/L for curvature L^2 in the normal direction
    L = 3 * np.pi
    assert abs(sol(0.37)[3, 1] - np.sin(L * 0.37) / L) < 1e-8
    assert abs(sol(0.37)[2, 0] - 0.37) < 1e-10


@pytest.mark.parametrize("k", [1, 2, 3])
def test_conjugate_points_of_long_geodesics(k):
    geo = Geodesic(random_covector(np.random.default_rng(k), k * np.pi))
    data = conjugate_points(geo)
    assert [round(d.r, 9) for d in data] == [round(i / k, 9) for i in range(1, k + 1)]
    assert all(d.multiplicity == 1 for d in data)
    assert morse_index(geo) == HalfInteger(2 * k - 1)


def test_short_geodesic_has_index_zero():
    xi = random_covector(np.random.default_rng(0), 0.5)
    assert morse_index(Geodesic(xi)) == 0
    assert geodesic_index(xi) == 0


@pytest.mark.parametrize("speed", [0.0, 1.0, np.pi, 7.5])
def test_action_of_constant_path_is_energy(speed):
    xi = random_covector(np.random.default_rng(3), speed)
    assert abs(action_of_constant_path(xi) - energy(Geodesic(xi))) < 1e-9
