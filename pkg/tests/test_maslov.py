import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagknot.errors import DegenerateCrossingError, DegenerateInputError
from lagknot.families import (
    constant_jacobi,
    model_pair,
    random_pair,
    random_unitary,
    rotation_pair,
    symplectic_path,
    unitary_path,
)
from lagknot.maslov import (
    HalfInteger,
    LagrangianFrame,
    LagrangianPath,
    concatenate,
    crossing_form,
    find_crossings,
    intersection_dimension,
    is_symplectic,
    jacobi_pair,
    kernel_events,
    maslov_index_pair,
    maslov_via_conjugate_points,
    standard_form,
    symplectic_inverse,
)

halves = st.integers(min_value=-1000, max_value=1000).map(HalfInteger)


@given(halves, halves, halves)
def test_half_integer_group_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a - a == 0
    assert -(-a) == a
    assert float(a + b) == float(a) + float(b)


@given(halves)
def test_half_integer_integrality(a):
    assert a.is_integer == (a.twice_value % 2 == 0)
    assert (a + HalfInteger(1)).is_integer != a.is_integer


def test_half_integer_of_and_str():
    assert HalfInteger.of(1.5) == HalfInteger(3)
    assert str(HalfInteger(3)) == "3/2"
    assert str(HalfInteger(-4)) == "-2"
    with pytest.raises(ValueError):
        HalfInteger.of(0.3)
    with pytest.raises(TypeError):
        HalfInteger(1.0)


def test_standard_form_and_inverse():
    rng = np.random.default_rng(0)
    om = standard_form(2)
    assert np.allclose(om, -om.T)
    psi = symplectic_path(rng, 2)
    A = psi(0.7)
    assert is_symplectic(A)
    assert np.allclose(symplectic_inverse(A) @ A, np.eye(4))
    assert not is_symplectic(2 * np.eye(4))


def test_frames_and_intersections():
    h, v = LagrangianFrame.horizontal(2), LagrangianFrame.vertical(2)
    assert intersection_dimension(h, v) == 0
    assert intersection_dimension(h, h) == 2
    mixed = LagrangianFrame(np.array([[1.0, 0], [0, 0], [0, 0], [0, 1.0]]))
    assert intersection_dimension(h, mixed) == 1
    with pytest.raises(ValueError):
        LagrangianFrame(np.array([[1.0, 0], [0, 0], [0, 1.0], [0, 0]]))  # not isotropic
    with pytest.raises(DegenerateInputError):
        LagrangianFrame(np.array([[1.0, 1.0], [0, 0], [0, 0], [0, 0]]))


def test_from_unitary_is_lagrangian():
    rng = np.random.default_rng(3)
    U = random_unitary(rng, 3)
    f = LagrangianFrame.from_unitary(U)
    om = standard_form(3)
    assert np.max(np.abs(f.basis.T @ om @ f.basis)) < 1e-12


def test_sign_normalisation():
    assert maslov_index_pair(*rotation_pair()) == 1
    lam, lam2 = rotation_pair()
    assert maslov_index_pair(lam2, lam) == -1


def test_model_pair_signs():
    assert maslov_index_pair(*model_pair(1.0)) == HalfInteger(1)
    assert maslov_index_pair(*model_pair(-1.0)) == HalfInteger(-1)
    assert maslov_index_pair(*model_pair(3.0)) == HalfInteger(1)


def test_crossing_form_of_rotation_is_positive():
    lam, _ = rotation_pair()
    q = crossing_form(lam, 0.0, np.array([[1.0], [0.0]]))
    assert q.shape == (1, 1) and q[0, 0] > 0


def test_two_dimensional_rotation():
    U = unitary_path(np.eye(2, dtype=complex), np.diag([1.0, 2.0]), 0, np.pi)
    K = LagrangianPath.constant(LagrangianFrame.horizontal(2).basis, 0, np.pi)
    # crossings at pi/2 (second factor) and the endpoints: 1/2 + 1/2 + 1 + 1
    assert maslov_index_pair(U, K) == 3
    recs = find_crossings(U, K)
    assert [r.intersection_dim for r in recs] == [2, 1, 2]


def test_concatenation_additivity():
    rng = np.random.default_rng(9)
    lam, lam2 = random_pair(rng, 2)
    full = maslov_index_pair(lam, lam2)
    left = maslov_index_pair(lam.restrict(0, 0.4), lam2.restrict(0, 0.4))
    right = maslov_index_pair(lam.restrict(0.4, 1), lam2.restrict(0.4, 1))
    assert full == left + right
    joined = concatenate(lam.restrict(0, 0.4), lam.restrict(0.4, 1))
    assert maslov_index_pair(joined, lam2) == full


def test_degenerate_crossing_raises():
    flat = LagrangianPath.constant(np.array([[1.0], [0.0]]), -1, 1)
    cubic = LagrangianPath(lambda t: np.array([[1.0], [t ** 3]]), -1, 1)
    with pytest.raises(DegenerateCrossingError):
        maslov_index_pair(cubic, flat)


def test_domain_mismatch():
    lam, lam2 = rotation_pair()
    with pytest.raises(ValueError):
        maslov_index_pair(lam, lam2.restrict(0, 1))


def test_jacobi_oracle_on_constant_curvature():
    # J'' = -k^2 pi^2 J vanishes at r = 1/k, 2/k, ..., 1: half of each endpoint plus k - 1 interior zeros
    for k in (1, 2, 3):
        expected = HalfInteger(2 * k)
        sol = constant_jacobi(1, -(k * np.pi) ** 2 * np.eye(1))
        assert maslov_via_conjugate_points(sol, 1) == expected
        assert maslov_index_pair(*jacobi_pair(sol, 1, vectorized=True)) == expected
        ev = kernel_events(sol, 1)
        assert ev["start"] == 1 and ev["end"] == 1
        assert len(ev["interior"]) == k - 1


def test_flat_jacobi_has_no_conjugate_points():
    sol = constant_jacobi(2, np.zeros((2, 2)))
    assert maslov_via_conjugate_points(sol, 2) == 1
    assert kernel_events(sol, 2)["interior"] == []
