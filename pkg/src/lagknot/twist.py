"""Model Dehn twists of T*S^2 and the profile functions that define them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import AxisError, ZeroSectionError
from .smooth import smoothstep
from .sphere import (
    Covector,
    antipodal,
    circle_action,
    circle_action_family,
    geodesic_flow,
    hamiltonian_vector_field,
    rk4,
    tangent_frame,
)

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class TwistProfile:
    """The angle function psi of a model twist.

    ``psi_pos`` gives psi on t >= 0 and must vanish for t >= support_radius;
    negative arguments are filled in by psi(-t) = 2 pi - psi(t).  ``dpsi_pos``
    is its derivative, used to build the Hamiltonian that generates the twist.
    """

    psi_pos: Callable
    dpsi_pos: Callable
    support_radius: float
    eps: float
    r: int | None = None
    delta: float | None = None
    kind: str = "custom"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        val = np.where(a >= self.support_radius, 0.0, self.psi_pos(np.minimum(a, self.support_radius)))
        out = np.where(t >= 0, val, TWO_PI - val)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        out = np.where(a >= self.support_radius, 0.0, self.dpsi_pos(np.minimum(a, self.support_radius)))
        return float(out) if out.ndim == 0 else out


def _smoothstep_derivative(x, h=1e-7):
    x = np.asarray(x, dtype=float)
    return (smoothstep(x + h) - smoothstep(x - h)) / (2 * h)


def make_profile(r: int) -> TwistProfile:
    """Profile for 2r-fold twisting: psi = pi - t/(2r) on [0, 2 pi (r - 1/4)], zero past 2 pi r.

    Across the blend zone the linear piece is multiplied by a smooth step that
    vanishes at 2 pi r; since the linear piece is itself zero there, psi stays
    smooth and nonincreasing.
    """
    if r < 1:
        raise ValueError("r must be a positive integer")
    delta = TWO_PI * (r - 0.25)
    support = TWO_PI * r
    width = support - delta

    def lin(t):
        return np.pi - t / (2 * r)

    def psi(t):
        t = np.asarray(t, dtype=float)
        return lin(t) * (1.0 - smoothstep((t - delta) / width))

    def dpsi(t):
        t = np.asarray(t, dtype=float)
        x = (t - delta) / width
        return -(1.0 - smoothstep(x)) / (2 * r) - lin(t) * _smoothstep_derivative(x) / width

    return TwistProfile(psi, dpsi, support, eps=support, r=r, delta=delta, kind="linear")


def make_surgery_profile(eps: float) -> TwistProfile:
    """Profile with psi = pi - t on [0, eps], positive on (eps, 2 eps), zero beyond."""
    if not 0 < eps < np.pi / 2:
        raise ValueError("need 0 < eps < pi/2 so that psi stays positive on (eps, 2 eps)")

    def psi(t):
        t = np.asarray(t, dtype=float)
        return (np.pi - t) * (1.0 - smoothstep((t - eps) / eps))

    def dpsi(t):
        t = np.asarray(t, dtype=float)
        x = (t - eps) / eps
        return -(1.0 - smoothstep(x)) - (np.pi - t) * _smoothstep_derivative(x) / eps

    return TwistProfile(psi, dpsi, 2 * eps, eps=eps, kind="surgery")


def make_flat_profile(eps: float) -> TwistProfile:
    """Profile with psi = pi near the zero-section, decreasing to 0 at eps."""
    inner = eps / 4

    def psi(t):
        t = np.asarray(t, dtype=float)
        return np.pi * (1.0 - smoothstep((t - inner) / (eps - inner)))

    def dpsi(t):
        t = np.asarray(t, dtype=float)
        return -np.pi * _smoothstep_derivative((t - inner) / (eps - inner)) / (eps - inner)

    return TwistProfile(psi, dpsi, eps, eps=eps, kind="flat")


@dataclass(frozen=True)
class ModelTwist:
    profile: TwistProfile


def twist(m: ModelTwist, xi: Covector) -> Covector:
    """tau(xi): rotate by psi(|xi|) under the circle action; antipodal on the zero-section."""
    s = xi.norm
    if s == 0.0:
        return Covector(-xi.u, xi.v * 0.0)
    if s >= m.profile.support_radius:
        return xi
    return circle_action(m.profile(s), xi)


def twist_inverse(m: ModelTwist, xi: Covector) -> Covector:
    s = xi.norm
    if s == 0.0:
        return Covector(-xi.u, xi.v * 0.0)
    if s >= m.profile.support_radius:
        return xi
    return circle_action(-m.profile(s), xi)


def twist_power(m: ModelTwist, k: int, xi: Covector) -> Covector:
    """k-fold composite of the twist (its inverse for k < 0)."""
    step = twist if k >= 0 else twist_inverse
    for _ in range(abs(int(k))):
        xi = step(m, xi)
    return xi


def twist_via_hamiltonian(m: ModelTwist, xi: Covector, steps: int = 400) -> Covector:
    """tau = A o (time-one map of the flow of Psi(|xi|)), with Psi' = psi - pi.

    Integrates the Hamiltonian vector field of Psi(|v|) by RK4.  The gradient
    (psi(|v|) - pi) v/|v| extends smoothly over v = 0, so this route has no
    special case on the zero-section.
    """
    prof = m.profile

    def grad(z):
        v = z[3:]
        s = np.linalg.norm(v)
        if s == 0.0:
            return np.zeros(6)
        return np.concatenate([np.zeros(3), (prof(s) - np.pi) * v / s])

    def field(z):
        return hamiltonian_vector_field(None, z, grad=grad)

    z = rk4(field, xi.as_array(), 1.0, steps)
    return antipodal(Covector.project(z[:3], z[3:]))


# --------------------------------------------------------------------------
# symplecticity by finite differences


def tangent_curves(xi: Covector):
    """Four curves through xi whose velocities span the tangent space of T*S^2."""
    E = tangent_frame(xi.u)
    curves = []
    for i in range(2):
        e = E[:, i]

        def base_curve(h, e=e):
            u = xi.u + h * e
            u = u / np.linalg.norm(u)
            return Covector(u, xi.v - (xi.v @ u) * u)

        curves.append(base_curve)
    for i in range(2):
        e = E[:, i]
        curves.append(lambda h, e=e: Covector(xi.u, xi.v + h * e))
    return curves


def pushforward(fmap: Callable, xi: Covector, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Tangent vectors at xi and their images under fmap, as rows of (4, 6) arrays."""
    before, after = [], []
    for c in tangent_curves(xi):
        p, q = c(h), c(-h)
        before.append((p.as_array() - q.as_array()) / (2 * h))
        after.append((fmap(p).as_array() - fmap(q).as_array()) / (2 * h))
    return np.array(before), np.array(after)


def eta_matrix(vectors: np.ndarray) -> np.ndarray:
    """Gram matrix of eta = sum dv_i ^ du_i on rows (du, dv)."""
    du, dv = vectors[:, :3], vectors[:, 3:]
    return dv @ du.T - du @ dv.T


def check_symplectic(fmap: Callable, samples: Iterable[Covector], h: float = 1e-5) -> float:
    """Largest |eta(F_* X, F_* Y) - eta(X, Y)| over tangent pairs at the samples."""
    worst = 0.0
    for xi in samples:
        X, FX = pushforward(fmap, xi, h)
        worst = max(worst, float(np.max(np.abs(eta_matrix(FX) - eta_matrix(X)))))
    return worst


def local_jacobian(fmap: Callable, xi: Covector, h: float = 1e-6) -> np.ndarray:
    """4 x 4 matrix of the derivative of fmap at xi in tangent bases at xi and fmap(xi)."""
    X, FX = pushforward(fmap, xi, h)
    image = fmap(xi)
    Y, _ = pushforward(lambda z: z, image, h)
    coeffs, *_ = np.linalg.lstsq(Y.T, FX.T, rcond=None)
    return coeffs


# --------------------------------------------------------------------------
# the isotopy from tau^2 to the identity


def square_isotopy_stage(m: ModelTwist, s: float, scale: float, xi: Covector) -> Covector:
    """The map xi -> sigma^(s)(exp(2 i scale psi(|xi|)))(xi).

    (s, scale) = (0, 1) is tau^2 and (1, 0) is the identity.  The profile must
    equal pi near zero so that tau^2 is the identity near the zero-section.
    """
    prof = m.profile
    norm = xi.norm
    if norm >= prof.support_radius:
        return xi
    angle = 2 * scale * prof(norm)
    if norm == 0.0 and s == 0.0:
        if np.isclose(np.remainder(angle, TWO_PI), 0.0) or np.isclose(np.remainder(angle, TWO_PI), TWO_PI):
            return xi
        raise AxisError(f"stage (s={s}, scale={scale}) is undefined on the zero-section at u={xi.u.tolist()}")
    return circle_action_family(s, angle, xi)


# --------------------------------------------------------------------------
# exponential charts and twisted fibres


def exp_map(x: np.ndarray, frame: np.ndarray, q: np.ndarray) -> np.ndarray:
    """exp_x of the tangent vector with coordinates q in the orthonormal `frame` at x."""
    q = np.asarray(q, dtype=float)
    r = np.linalg.norm(q)
    if r == 0.0:
        return np.asarray(x, dtype=float)
    w = frame @ q / r
    return np.cos(r) * x + np.sin(r) * w


def exp_derivative(x: np.ndarray, frame: np.ndarray, q: np.ndarray) -> np.ndarray:
    """3 x 2 derivative of q -> exp_x(frame q)."""
    q = np.asarray(q, dtype=float)
    r = np.linalg.norm(q)
    if r == 0.0:
        return frame.copy()
    qh = q / r
    w = frame @ qh
    radial = -np.sin(r) * x + np.cos(r) * w
    # d/dq of (q/r) = (I - qh qh^T)/r
    ang = np.sin(r) * frame @ (np.eye(2) - np.outer(qh, qh)) / r
    return np.outer(radial, qh) + ang


def chart_inverse(x: np.ndarray, frame: np.ndarray, xi: Covector) -> tuple[np.ndarray, np.ndarray]:
    """(P, q) in T*B_pi = R^2 x B_pi for the cotangent lift of exp_x.

    q = exp_x^{-1}(u) and P is the pullback of v by the derivative of exp_x at q.
    """
    x = np.asarray(x, dtype=float)
    c = float(np.clip(xi.u @ x, -1.0, 1.0))
    theta = np.arccos(c)
    w = xi.u - c * x
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        if theta > 1.0:
            raise ValueError("point is the antipode of the chart centre")
        q = np.zeros(2)
    else:
        q = theta * (frame.T @ w) / nw
    D = exp_derivative(x, frame, q)
    return D.T @ xi.v, q


def chart_forward(x: np.ndarray, frame: np.ndarray, P: np.ndarray, q: np.ndarray) -> Covector:
    """Inverse of `chart_inverse`."""
    u = exp_map(x, frame, q)
    D = exp_derivative(x, frame, q)
    v, *_ = np.linalg.lstsq(D.T, np.asarray(P, dtype=float), rcond=None)
    return Covector.project(u, v)


def twisted_fiber_graph(m: ModelTwist, p: np.ndarray) -> np.ndarray:
    """The point (p, -psi(|p|) p/|p|) of the image of a twisted fibre in the chart at x."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    if r == 0.0:
        raise ZeroSectionError("the fibre graph is punctured at p = 0")
    return np.concatenate([p, -m.profile(r) * p / r])


def twisted_fiber_graph_antipodal(m: ModelTwist, p: np.ndarray) -> np.ndarray:
    """The point (p, -(pi - psi(|p|)) p/|p|) describing the same fibre near the zero-section."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    if r == 0.0:
        raise ZeroSectionError("the fibre graph is punctured at p = 0")
    return np.concatenate([p, -(np.pi - m.profile(r)) * p / r])


def fiber_covector(x: np.ndarray, frame: np.ndarray, p: np.ndarray) -> Covector:
    """The covector at x with frame coordinates p."""
    return Covector(x, frame @ np.asarray(p, dtype=float))


def inverse_twisted_fiber_point(m: ModelTwist, x: np.ndarray, frame: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Chart-at-x image of tau^{-1} applied to the fibre covector p at x."""
    xi = twist_inverse(m, fiber_covector(x, frame, p))
    P, q = chart_inverse(x, frame, xi)
    return np.concatenate([P, q])
