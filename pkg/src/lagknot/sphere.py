"""Geometry of T*S^2 = TS^2 for the round unit sphere.

A covector is a pair ``(u, v)`` in R^3 x R^3 with ``|u| = 1`` and
``<u, v> = 0``.  The symplectic form is ``eta = sum_i dv_i ^ du_i`` and the
canonical one-form is ``theta = sum_i v_i du_i``.  Hamiltonian vector fields
are taken with the convention under which ``H = |v|^2 / 2`` generates the
forward geodesic flow ``u' = v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import AxisError, IntegrationError, ZeroSectionError
from .maslov import (
    HalfInteger,
    LagrangianFrame,
    LagrangianPath,
    coherent_index_from_frame_data,
    intersection_dimension,
    is_symplectic,
    jacobi_pair,
    kernel_events,
    standard_form,
)

UNIT_TOL = 1e-12
JACOBI_STEP = 1e-3


@dataclass(frozen=True)
class Covector:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(3)
        v = np.asarray(self.v, dtype=float).reshape(3)
        if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
            raise ValueError(f"base point is not on the unit sphere (|u| = {np.linalg.norm(u)!r})")
        if abs(u @ v) > UNIT_TOL * max(1.0, np.linalg.norm(v)):
            raise ValueError("fibre vector is not tangent to the sphere")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def project(cls, u, v) -> "Covector":
        """Nearest valid covector: normalise u, remove the normal part of v."""
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        v = np.asarray(v, dtype=float)
        return cls(u, v - (u @ v) * u)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.v))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    def distance(self, other: "Covector") -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def antipode(self) -> "Covector":
        return Covector(-self.u, -self.v)


def random_covector(rng: np.random.Generator, norm: float | None = None) -> Covector:
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    v = rng.normal(size=3)
    v -= (u @ v) * u
    if norm is not None:
        v *= norm / np.linalg.norm(v)
    return Covector(u, v)


def tangent_frame(u: np.ndarray) -> np.ndarray:
    """An orthonormal basis (as columns) of the tangent plane at u."""
    u = np.asarray(u, dtype=float)
    seed = np.eye(3)[np.argmin(np.abs(u))]
    e1 = seed - (seed @ u) * u
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    return np.column_stack([e1, e2])


def rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation by `angle` about axis/|axis| (Rodrigues)."""
    axis = np.asarray(axis, dtype=float)
    nrm = np.linalg.norm(axis)
    if nrm == 0.0:
        raise AxisError("rotation axis is zero")
    k = axis / nrm
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


# --------------------------------------------------------------------------
# flows


def geodesic_flow(xi: Covector, t: float) -> Covector:
    """Time-t map of the geodesic flow (Hamiltonian |v|^2/2)."""
    s = xi.norm
    if s == 0.0:
        return xi
    c, n = np.cos(s * t), np.sin(s * t)
    u = c * xi.u + n * xi.v / s
    v = -s * n * xi.u + c * xi.v
    return Covector.project(u, v)


def circle_action(angle: float, xi: Covector) -> Covector:
    """Rotate (u, v) by `angle` about the axis u x v: the normalised geodesic flow."""
    if xi.norm == 0.0:
        raise ZeroSectionError("the circle action is undefined on the zero-section")
    R = rotation(np.cross(xi.u, xi.v), angle)
    return Covector.project(R @ xi.u, R @ xi.v)


def circle_action_family(s: float, angle: float, xi: Covector) -> Covector:
    """The deformed action that rotates about s*u + (1-s)*(u x v).

    ``s = 0`` is `circle_action`; ``s = 1`` rotates each fibre about u and is
    defined on the zero-section too.
    """
    axis = s * xi.u + (1 - s) * np.cross(xi.u, xi.v)
    if np.linalg.norm(axis) == 0.0:
        raise AxisError(f"degenerate rotation axis for s={s!r}, xi=({xi.u.tolist()}, {xi.v.tolist()})")
    R = rotation(axis, angle)
    return Covector.project(R @ xi.u, R @ xi.v)


def antipodal(xi: Covector) -> Covector:
    return Covector(-xi.u, -xi.v)


def hamiltonian_vector_field(K: Callable, xi_arr: np.ndarray, h: float = 1e-6,
                             grad: Callable | None = None) -> np.ndarray:
    """Hamiltonian vector field of K on the constraint manifold |u| = 1, <u, v> = 0.

    `K` is a function of the 6-vector (u, v); its Euclidean gradient is taken by
    central differences unless `grad` is supplied.  The constrained field is
    the unconstrained one corrected by the Hamiltonian fields of the two
    constraint functions, with multipliers fixed by tangency.
    """
    z = np.asarray(xi_arr, dtype=float)
    if grad is None:
        g = np.empty(6)
        for i in range(6):
            e = np.zeros(6)
            e[i] = h
            g[i] = (K(z + e) - K(z - e)) / (2 * h)
    else:
        g = np.asarray(grad(z), dtype=float)
    u, v = z[:3], z[3:]
    Ku, Kv = g[:3], g[3:]
    b = -(u @ Kv)
    a = Kv @ v - u @ Ku
    du = Kv + b * u
    dv = -Ku - a * u - b * v
    return np.concatenate([du, dv])


def rk4(field: Callable, z0: np.ndarray, t: float, steps: int) -> np.ndarray:
    z = np.asarray(z0, dtype=float).copy()
    dt = t / steps
    for _ in range(steps):
        k1 = field(z)
        k2 = field(z + 0.5 * dt * k1)
        k3 = field(z + 0.5 * dt * k2)
        k4 = field(z + dt * k3)
        z = z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(z)):
        raise IntegrationError("RK4 produced non-finite values")
    return z


def reparametrized_flow_check(Psi: Callable, dPsi: Callable, xi: Covector, t: float,
                              steps: int = 2000) -> tuple[Covector, Covector]:
    """Both sides of phi^{Psi(H)}_t(x) = phi^H_{t Psi'(H(x))}(x) with H = |v|^2/2.

    The left side integrates the Hamiltonian vector field of Psi(H) by RK4;
    the right side is the closed-form geodesic flow.
    """
    def K(z):
        return Psi(0.5 * float(z[3:] @ z[3:]))

    def field(z):
        return hamiltonian_vector_field(K, z)

    left = rk4(field, xi.as_array(), t, steps)
    H = 0.5 * xi.norm ** 2
    right = geodesic_flow(xi, t * dPsi(H))
    return Covector.project(left[:3], left[3:]), right


# --------------------------------------------------------------------------
# Jacobi transport


@dataclass(frozen=True)
class JacobiSystem:
    """The first-order Jacobi system A' = [[0, R(r)], [1, 0]] A on [0, 1]."""

    R: Callable
    n: int
    step: float = JACOBI_STEP
    R_batch: Callable | None = None

    def generators(self, rs: np.ndarray) -> np.ndarray:
        """Generators at all parameters in rs, using R_batch when available."""
        if self.R_batch is None:
            return np.array([self.generator(r) for r in rs])
        Rs = np.asarray(self.R_batch(rs), dtype=float).reshape(len(rs), self.n, self.n)
        if np.max(np.abs(Rs - np.swapaxes(Rs, 1, 2))) > 1e-12:
            raise ValueError("R is not symmetric on the integration grid")
        out = np.zeros((len(rs), 2 * self.n, 2 * self.n))
        out[:, :self.n, self.n:] = Rs
        out[:, self.n:, :self.n] = np.eye(self.n)
        return out

    def generator(self, r: float) -> np.ndarray:
        Rr = np.asarray(self.R(r), dtype=float).reshape(self.n, self.n)
        if np.max(np.abs(Rr - Rr.T)) > 1e-12:
            raise ValueError(f"R({r}) is not symmetric")
        zero = np.zeros((self.n, self.n))
        return np.block([[zero, Rr], [np.eye(self.n), zero]])


class JacobiSolution:
    """Fixed-step RK4 solution of a JacobiSystem with cubic Hermite dense output."""

    def __init__(self, system: JacobiSystem, drift_tol: float = 1e-6):
        self.system = system
        steps = max(1, int(round(1.0 / system.step)))
        self.nodes = np.linspace(0.0, 1.0, steps + 1)
        h = self.nodes[1] - self.nodes[0]
        dim = 2 * system.n
        A = np.eye(dim)
        values = [A]
        # generators at nodes and midpoints, each evaluated once
        grid = np.linspace(0.0, 1.0, 2 * steps + 1)
        G = system.generators(grid)
        for i in range(steps):
            Xa, Xm, Xb = G[2 * i], G[2 * i + 1], G[2 * i + 2]
            k1 = Xa @ A
            k2 = Xm @ (A + h / 2 * k1)
            k3 = Xm @ (A + h / 2 * k2)
            k4 = Xb @ (A + h * k3)
            A = A + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            values.append(A)
        self.values = np.array(values)
        self.derivs = G[::2] @ self.values
        self.h = h
        om = standard_form(system.n)
        drift = np.max(np.abs(np.swapaxes(self.values, 1, 2) @ om @ self.values - om))
        self.symplectic_drift = float(drift)
        if drift > drift_tol:
            raise IntegrationError(f"Jacobi transport lost symplecticity (drift {drift:.3g})")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        rr = np.atleast_1d(r)
        if np.any(rr < -1e-12) or np.any(rr > 1 + 1e-12):
            raise ValueError("Jacobi transport is defined on [0, 1]")
        idx = np.clip(np.floor(rr / self.h).astype(int), 0, len(self.nodes) - 2)
        s = ((rr - self.nodes[idx]) / self.h)[:, None, None]
        y0, y1 = self.values[idx], self.values[idx + 1]
        d0, d1 = self.derivs[idx] * self.h, self.derivs[idx + 1] * self.h
        h00 = 2 * s ** 3 - 3 * s ** 2 + 1
        h10 = s ** 3 - 2 * s ** 2 + s
        h01 = -2 * s ** 3 + 3 * s ** 2
        h11 = s ** 3 - s ** 2
        out = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
        return out[0] if scalar else out


def jacobi_transport(system: JacobiSystem, r: float) -> np.ndarray:
    """A(r) for the Jacobi system, symplectic to 1e-8 (checked)."""
    A = JacobiSolution(system)(r)
    if not is_symplectic(A, 1e-8):
        raise IntegrationError(f"A({r}) is not symplectic to 1e-8")
    return A


# --------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True)
class Geodesic:
    """The geodesic r -> base point of geodesic_flow(initial, r), r in [0, 1]."""

    initial: Covector

    @property
    def speed(self) -> float:
        return self.initial.norm

    def point(self, r: float) -> np.ndarray:
        return geodesic_flow(self.initial, r).u

    def velocity(self, r: float) -> np.ndarray:
        return geodesic_flow(self.initial, r).v

    def parallel_frame(self, r: float) -> np.ndarray:
        """Orthonormal frame (unit tangent, unit normal) transported along the geodesic."""
        xi = geodesic_flow(self.initial, r)
        t = xi.v / np.linalg.norm(xi.v)
        normal = np.cross(self.initial.u, self.initial.v)
        normal /= np.linalg.norm(normal)
        return np.column_stack([t, normal])


@dataclass(frozen=True)
class ConjugateDatum:
    r: float
    multiplicity: int


def curvature_matrix(geodesic: Geodesic, r: float) -> np.ndarray:
    """R(r) of the Jacobi system of a round-sphere geodesic, in its parallel frame.

    For constant curvature 1 the curvature operator X -> Rm(X, c')c' is
    ``|c'|^2 (X - <X, T> T)``; the Jacobi equation J'' = R J carries the
    opposite sign.
    """
    E = geodesic.parallel_frame(r)
    T = geodesic.velocity(r)
    T = T / np.linalg.norm(T)
    speed2 = geodesic.speed ** 2
    proj = E.T @ (np.eye(3) - np.outer(T, T)) @ E
    R = -speed2 * proj
    return 0.5 * (R + R.T)


def curvature_matrices(geodesic: Geodesic, rs: np.ndarray) -> np.ndarray:
    """`curvature_matrix` evaluated at every parameter in rs at once."""
    rs = np.asarray(rs, dtype=float)
    xi = geodesic.initial
    L = xi.norm
    vh = xi.v / L
    c, s = np.cos(L * rs)[:, None], np.sin(L * rs)[:, None]
    T = -s * xi.u + c * vh
    normal = np.cross(xi.u, vh)
    normal = normal / np.linalg.norm(normal)
    E = np.stack([T, np.broadcast_to(normal, T.shape)], axis=2)
    P = np.eye(3) - T[:, :, None] * T[:, None, :]
    R = -L ** 2 * np.swapaxes(E, 1, 2) @ P @ E
    return 0.5 * (R + np.swapaxes(R, 1, 2))


def jacobi_system(geodesic: Geodesic, step: float = JACOBI_STEP) -> JacobiSystem:
    if geodesic.speed == 0.0:
        raise ValueError("geodesic has zero speed")
    return JacobiSystem(lambda r: curvature_matrix(geodesic, r), 2, step,
                        R_batch=lambda rs: curvature_matrices(geodesic, rs))


def conjugate_points(geodesic: Geodesic, samples: int = 401,
                     solution: "JacobiSolution | None" = None) -> list[ConjugateDatum]:
    """Conjugate parameters r in (0, 1] of c(0) along the geodesic, with multiplicities.

    Multiplicities are the dimension of Lambda cap A(r)^{-1} Lambda, measured
    by `intersection_dimension`.
    """
    sol = solution if solution is not None else JacobiSolution(jacobi_system(geodesic))
    ev = kernel_events(sol, 2, samples)
    horizontal = LagrangianFrame.horizontal(2)
    out = []
    times = [r for r, _ in ev["interior"]]
    if ev["end"]:
        times.append(1.0)
    for r in times:
        A = sol(r)
        moved = LagrangianFrame(np.linalg.solve(A, horizontal.basis))
        k = intersection_dimension(horizontal, moved)
        if k:
            out.append(ConjugateDatum(float(r), k))
    return out


def morse_index(geodesic: Geodesic) -> HalfInteger:
    """Interior conjugate multiplicities plus half the multiplicity at r = 1."""
    twice = 0
    for d in conjugate_points(geodesic):
        twice += d.multiplicity if d.r == 1.0 else 2 * d.multiplicity
    return HalfInteger(twice)


def energy(geodesic: Geodesic) -> float:
    return 0.5 * geodesic.speed ** 2


def liouville_pairing(xi_arr: np.ndarray, K: Callable, grad: Callable | None = None) -> float:
    """(i_X theta)(xi) for the Hamiltonian vector field X of K."""
    X = hamiltonian_vector_field(K, xi_arr, grad=grad)
    return float(xi_arr[3:] @ X[:3])


def action_of_constant_path(xi: Covector) -> float:
    """-H(xi) + integral over [0, 1] of (i_X theta)(phi_t(xi)) dt, with H = |v|^2/2."""
    def H(z):
        return 0.5 * float(z[3:] @ z[3:])

    def dH(z):
        return np.concatenate([np.zeros(3), z[3:]])

    def integrand(t):
        return liouville_pairing(geodesic_flow(xi, t).as_array(), H, dH)

    value, err = quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    if not np.isfinite(value) or err > 1e-8:
        raise IntegrationError(f"quadrature error estimate {err:.3g}")
    return -H(xi.as_array()) + value


def index_path_data(xi: Covector) -> tuple[LagrangianPath, LagrangianPath]:
    """The vertical path and the Jacobi-transported vertical path at xi.

    The symplectic trivialisation is the one induced by a parallel orthonormal
    frame along the geodesic of xi; in it the vertical space is R^2 x 0 and the
    transported one is A(r)^{-1}(R^2 x 0).
    """
    if xi.norm == 0.0:
        raise ZeroSectionError("index data needs a nonzero covector")
    sol = JacobiSolution(jacobi_system(Geodesic(xi)))
    return jacobi_pair(sol, 2, vectorized=True)


def geodesic_index(xi: Covector) -> HalfInteger:
    """Coherent index of the constant path at xi, from its frame data (dim L = 2)."""
    lam, lam2 = index_path_data(xi)
    return coherent_index_from_frame_data(lam, lam2, 2)
