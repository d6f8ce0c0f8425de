"""Explicit and randomised families of Lagrangian paths, symplectic paths and Jacobi systems."""

from __future__ import annotations

import numpy as np

from .maslov import LagrangianPath, standard_form
from .sphere import JacobiSolution, JacobiSystem


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    M = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (M + M.T)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def unitary_path(U0: np.ndarray, H: np.ndarray, a: float = 0.0, b: float = 1.0) -> LagrangianPath:
    """t -> U0 exp(i t H) (R^n), as frames [Re; Im]."""
    w, V = np.linalg.eigh(H)

    def rule(t):
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * np.multiply.outer(t, w))
        U = U0 @ (V * phase[..., None, :]) @ V.conj().T
        return np.concatenate([U.real, U.imag], axis=-2)

    return LagrangianPath(rule, a, b, vectorized=True)


def random_path(rng: np.random.Generator, n: int, speed: float = 3.0) -> LagrangianPath:
    return unitary_path(random_unitary(rng, n), random_symmetric(rng, n, speed))


def hamiltonian_generator(S: np.ndarray) -> np.ndarray:
    """Omega^T S, whose exponentials are symplectic."""
    return standard_form(S.shape[0] // 2).T @ S


def symplectic_path(rng: np.random.Generator, n: int, scale: float = 0.5):
    """t -> exp(t Omega^T S) for a random symmetric S (vectorised)."""
    X = hamiltonian_generator(random_symmetric(rng, 2 * n, scale))
    w, V = np.linalg.eig(X)
    Vinv = np.linalg.inv(V)

    def psi(t):
        t = np.asarray(t, dtype=float)
        D = np.exp(np.multiply.outer(t, w))
        return ((V * D[..., None, :]) @ Vinv).real

    return psi


def perturbed(path: LagrangianPath, rng: np.random.Generator, eps: float = 0.05) -> LagrangianPath:
    """Homotopy with fixed endpoints: t -> exp(eps sin(pi s) Omega^T S) Lambda(t), s the rescaled time."""
    n = path.n
    X = hamiltonian_generator(random_symmetric(rng, 2 * n))
    w, V = np.linalg.eig(X)
    Vinv = np.linalg.inv(V)
    a, b = path.a, path.b

    def rule(t):
        t = np.asarray(t, dtype=float)
        amp = eps * np.sin(np.pi * (t - a) / (b - a))
        D = np.exp(np.multiply.outer(amp, w))
        M = ((V * D[..., None, :]) @ Vinv).real
        return M @ np.asarray(path.rule(t))

    return LagrangianPath(rule, a, b, vectorized=True)


def model_pair(c: float = 1.0) -> tuple[LagrangianPath, LagrangianPath]:
    """lam(s) = {(r, r s c)} x R x 0 and lam'(s) = R x 0 x 0 x R in coordinates (z, x1, x2, x3).

    The form dz ^ dx1 + dx2 ^ dx3 is the standard one for the ordering
    (z, x2; x1, x3), which is the layout used here.
    """
    def rule(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape + (4, 2))
        out[..., 0, 0] = 1.0
        out[..., 2, 0] = c * s
        out[..., 1, 1] = 1.0
        return out

    fixed = np.zeros((4, 2))
    fixed[0, 0] = 1.0
    fixed[3, 1] = 1.0
    return LagrangianPath(rule, 0.0, 1.0, vectorized=True), LagrangianPath.constant(fixed)


def rotation_pair() -> tuple[LagrangianPath, LagrangianPath]:
    """e^{is}(R x 0) for s in [0, pi] against R x 0."""
    return (unitary_path(np.eye(1, dtype=complex), np.eye(1), 0.0, np.pi),
            LagrangianPath.constant(np.array([[1.0], [0.0]]), 0.0, np.pi))


def constant_jacobi(n: int, R: np.ndarray, step: float = 1e-3) -> JacobiSolution:
    R = np.asarray(R, dtype=float)
    return JacobiSolution(JacobiSystem(lambda r: R, n, step, R_batch=lambda rs: np.broadcast_to(R, (len(rs), n, n))))


def random_jacobi(rng: np.random.Generator, n: int, step: float = 1e-3) -> JacobiSolution:
    """R(r) = -(a I + B cos(2 pi f r) + C r) with random symmetric B, C and a > 0.

    Strong negative curvature produces several conjugate points on [0, 1].
    """
    a = rng.uniform(5.0, 60.0)
    B = random_symmetric(rng, n, 3.0)
    C = random_symmetric(rng, n, 3.0)
    f = rng.uniform(0.5, 2.0)

    def R(r):
        return -(a * np.eye(n) + B * np.cos(2 * np.pi * f * r) + C * r)

    def R_batch(rs):
        rs = np.asarray(rs, dtype=float)[:, None, None]
        return -(a * np.eye(n) + B * np.cos(2 * np.pi * f * rs) + C * rs)

    return JacobiSolution(JacobiSystem(R, n, step, R_batch=R_batch))


def random_pair(rng: np.random.Generator, n: int, shared_start: bool = False,
                speed: float = 3.0) -> tuple[LagrangianPath, LagrangianPath]:
    """Two random unitary paths; with shared_start both begin at the same subspace."""
    U0 = random_unitary(rng, n)
    V0 = U0 if shared_start else random_unitary(rng, n)
    return (unitary_path(U0, random_symmetric(rng, n, speed)),
            unitary_path(V0, random_symmetric(rng, n, speed)))
