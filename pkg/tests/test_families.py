import numpy as np

from lagknot.families import perturbed, random_jacobi, random_pair, symplectic_path, unitary_path
from lagknot.maslov import is_symplectic, maslov_index_pair, maslov_via_conjugate_points
from lagknot.smooth import bump, integrated_smoothstep, smoothstep


def test_smoothstep_shape():
    x = np.linspace(-1, 2, 301)
    y = smoothstep(x)
    assert np.all(y[x <= 0] == 0) and np.all(y[x >= 1] == 1)
    assert np.all(np.diff(y) >= 0)
    assert bump(np.array([-1.0, 1.0, 2.0])).tolist() == [0.0, 0.0, 0.0]
    assert integrated_smoothstep(np.array(0.0)) == 0.0


def test_perturbation_fixes_endpoints():
    rng = np.random.default_rng(0)
    lam, lam2 = random_pair(rng, 2)
    p = perturbed(lam, rng)
    assert np.allclose(p.rule(0.0), lam.rule(0.0))
    assert np.allclose(p.rule(1.0), lam.rule(1.0))
    assert not np.allclose(p.rule(0.5), lam.rule(0.5))
    assert maslov_index_pair(p, lam2) == maslov_index_pair(lam, lam2)


def test_symplectic_path_batches():
    psi = symplectic_path(np.random.default_rng(1), 3)
    A = psi(np.array([0.0, 0.3, 1.0]))
    assert np.allclose(A[0], np.eye(6))
    assert all(is_symplectic(a) for a in A)


def test_unitary_path_vectorised_matches_scalar():
    rng = np.random.default_rng(2)
    lam, _ = random_pair(rng, 3)
    ts = np.array([0.1, 0.6])
    assert np.allclose(lam.rule(ts)[1], lam.rule(0.6))


def test_random_jacobi_is_reproducible():
    a = maslov_via_conjugate_points(random_jacobi(np.random.default_rng(3), 2), 2)
    b = maslov_via_conjugate_points(random_jacobi(np.random.default_rng(3), 2), 2)
    assert a == b


def test_full_turn_against_itself():
    path = unitary_path(np.eye(1, dtype=complex), np.eye(1), 0, np.pi)
    assert maslov_index_pair(path, path) == 0
