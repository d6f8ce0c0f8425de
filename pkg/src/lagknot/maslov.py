"""Linear symplectic algebra and the Maslov index for pairs of Lagrangian paths.

Conventions
-----------
Vectors of R^{2n} are written ``(x; y)`` with ``x, y`` in R^n and the
symplectic form is ``omega(z, w) = z^T Omega w`` with

    Omega = [[0, I], [-I, 0]],

so that ``omega((x, 0), (0, y)) = <x, y>``.  With this choice the path
``s -> e^{is} (R x 0)`` in R^2 crosses ``R x 0`` positively, and the index of
that path against the constant horizontal line over ``[0, pi]`` is ``+1``.

The index of a pair ``(lam, lam2)`` is the crossing-form sum

    mu = 1/2 sign G(a) + sum_{a<t<b} sign G(t) + 1/2 sign G(b),

where ``G`` is the crossing form of ``lam`` minus that of ``lam2``, restricted
to the intersection.  The crossing form of a path at ``t0`` is the derivative
of its graph map over ``Lambda(t0)`` with respect to the orthogonal (and
Lagrangian) complement ``J Lambda(t0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateCrossingError, DegenerateInputError, ResolutionError

RANK_RTOL = 1e-8
REFINE_WIDTH = 1e-10
FD_STEP = 1e-5
DEGENERATE_TOL = 1e-6
ENDPOINT_SNAP = 1e-8
MAX_CONDITION = 1e10
DEFAULT_SAMPLES = 401


# --------------------------------------------------------------------------
# half-integers


@total_ordering
@dataclass(frozen=True)
class HalfInteger:
    """An exact element of (1/2)Z, stored as twice its value."""

    twice_value: int

    def __post_init__(self):
        if not isinstance(self.twice_value, (int, np.integer)):
            raise TypeError("twice_value must be an integer")
        object.__setattr__(self, "twice_value", int(self.twice_value))

    @classmethod
    def of(cls, value) -> "HalfInteger":
        if isinstance(value, HalfInteger):
            return value
        f = Fraction(value) * 2
        if f.denominator != 1:
            raise ValueError(f"{value!r} is not a half-integer")
        return cls(int(f))

    def _coerce(self, other):
        if isinstance(other, HalfInteger):
            return other
        if isinstance(other, (int, np.integer, Fraction)):
            return HalfInteger.of(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return HalfInteger(self.twice_value + other.twice_value)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return HalfInteger(self.twice_value - other.twice_value)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return HalfInteger(-self.twice_value)

    def __mul__(self, k):
        if isinstance(k, (int, np.integer)):
            return HalfInteger(self.twice_value * int(k))
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.twice_value == other.twice_value

    def __hash__(self):
        return hash(("HalfInteger", self.twice_value))

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.twice_value < other.twice_value

    def __float__(self):
        return self.twice_value / 2

    def to_fraction(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    def __str__(self):
        if self.is_integer:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"

    def __repr__(self):
        return f"HalfInteger({self})"


# --------------------------------------------------------------------------
# linear symplectic algebra


def standard_form(n: int) -> np.ndarray:
    """The 2n x 2n matrix Omega = [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def complex_structure(n: int) -> np.ndarray:
    """J with Omega J = I, i.e. omega(z, J w) = <z, w>."""
    return standard_form(n).T


def is_symplectic(A: np.ndarray, tol: float = 1e-8) -> bool:
    n = A.shape[0] // 2
    om = standard_form(n)
    return bool(np.max(np.abs(A.T @ om @ A - om)) <= tol)


def symplectic_inverse(A: np.ndarray) -> np.ndarray:
    """Inverse of a symplectic matrix (or a stack of them) via Omega^T A^T Omega."""
    n = A.shape[-1] // 2
    om = standard_form(n)
    return om.T @ np.swapaxes(A, -1, -2) @ om


@dataclass(frozen=True)
class SymplecticSpace:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("half-dimension must be positive")

    @property
    def form(self) -> np.ndarray:
        return standard_form(self.n)

    def omega(self, z, w) -> float:
        return float(np.asarray(z) @ self.form @ np.asarray(w))


def _orthonormal(basis: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(basis)
    return q


@dataclass(frozen=True)
class LagrangianFrame:
    """A Lagrangian subspace of R^{2n}, stored by an orthonormal basis."""

    basis: np.ndarray
    space: SymplecticSpace = field(default=None)
    isotropy_tol: float = 1e-8

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != 2 * b.shape[1]:
            raise ValueError(f"expected a 2n x n basis, got shape {b.shape}")
        n = b.shape[1]
        space = self.space or SymplecticSpace(n)
        if space.n != n:
            raise ValueError("basis does not match the symplectic space")
        s = np.linalg.svd(b, compute_uv=False)
        if s[-1] <= 0 or s[0] / s[-1] > MAX_CONDITION:
            raise DegenerateInputError(f"frame is rank deficient or ill-conditioned (singular values {s})")
        q = _orthonormal(b)
        defect = np.max(np.abs(q.T @ space.form @ q))
        if defect > self.isotropy_tol:
            raise ValueError(f"basis spans a non-isotropic subspace (defect {defect:.3g})")
        object.__setattr__(self, "basis", q)
        object.__setattr__(self, "space", space)

    @property
    def n(self) -> int:
        return self.space.n

    @classmethod
    def horizontal(cls, n: int) -> "LagrangianFrame":
        """R^n x 0."""
        return cls(np.vstack([np.eye(n), np.zeros((n, n))]))

    @classmethod
    def vertical(cls, n: int) -> "LagrangianFrame":
        """0 x R^n."""
        return cls(np.vstack([np.zeros((n, n)), np.eye(n)]))

    @classmethod
    def from_unitary(cls, U: np.ndarray) -> "LagrangianFrame":
        """Image of R^n under a unitary matrix, viewed in R^{2n} = C^n."""
        return cls(np.vstack([U.real, U.imag]))


def _as_basis(frame) -> np.ndarray:
    if isinstance(frame, LagrangianFrame):
        return frame.basis
    b = np.asarray(frame, dtype=float)
    s = np.linalg.svd(b, compute_uv=False)
    if s[-1] <= 0 or s[0] / s[-1] > MAX_CONDITION:
        raise DegenerateInputError(f"frame is rank deficient or ill-conditioned (singular values {s})")
    return _orthonormal(b)


def intersection_dimension(frame1, frame2, rtol: float = RANK_RTOL) -> int:
    """dim(span frame1 cap span frame2) for two Lagrangian frames of the same space.

    Both bases are orthonormalised, concatenated into a 2n x 2n matrix and the
    dimension is 2n minus its numerical rank.
    """
    z1 = _as_basis(frame1)
    z2 = _as_basis(frame2)
    if z1.shape != z2.shape:
        raise ValueError("frames live in different symplectic spaces")
    s = np.linalg.svd(np.hstack([z1, z2]), compute_uv=False)
    return int(np.sum(s < rtol * s[0]))


# --------------------------------------------------------------------------
# paths


class LagrangianPath:
    """A path t -> Lambda(t) in the Lagrangian Grassmannian over [a, b].

    Parameters
    ----------
    rule : callable
        Maps a parameter to a 2n x n basis (any basis; it is orthonormalised).
        With ``vectorized=True`` it must also accept a 1-d array of
        parameters and return an array of shape (N, 2n, n).
    a, b : float
        Domain endpoints, a < b.
    """

    def __init__(self, rule: Callable, a: float, b: float, vectorized: bool = False):
        if not b > a:
            raise ValueError("path domain must satisfy a < b")
        self.rule = rule
        self.a = float(a)
        self.b = float(b)
        self.vectorized = vectorized
        z = np.asarray(rule(self.a), dtype=float)
        self.n = z.shape[1]

    @classmethod
    def constant(cls, frame, a: float = 0.0, b: float = 1.0) -> "LagrangianPath":
        basis = _as_basis(frame)

        def rule(t):
            t = np.asarray(t, dtype=float)
            if t.ndim == 0:
                return basis
            return np.broadcast_to(basis, t.shape + basis.shape)

        return cls(rule, a, b, vectorized=True)

    @classmethod
    def from_samples(cls, ts: Sequence[float], bases: Sequence[np.ndarray]) -> "LagrangianPath":
        """Interpolate a dense sample list by a cubic spline of the basis entries."""
        ts = np.asarray(ts, dtype=float)
        bases = np.asarray(bases, dtype=float)
        spline = CubicSpline(ts, bases, axis=0)
        return cls(spline, ts[0], ts[-1], vectorized=True)

    def basis(self, t: float) -> np.ndarray:
        return _orthonormal(np.asarray(self.rule(float(t)), dtype=float))

    def frame(self, t: float) -> LagrangianFrame:
        return LagrangianFrame(self.basis(t))

    def bases(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self.vectorized:
            raw = np.asarray(self.rule(ts), dtype=float)
        else:
            raw = np.stack([np.asarray(self.rule(float(t)), dtype=float) for t in ts])
        q, _ = np.linalg.qr(raw)
        return q

    def restrict(self, a: float, b: float) -> "LagrangianPath":
        if a < self.a - 1e-12 or b > self.b + 1e-12:
            raise ValueError("restriction leaves the domain")
        return LagrangianPath(self.rule, a, b, self.vectorized)

    def conjugate(self, psi: Callable) -> "LagrangianPath":
        """The path t -> psi(t) Lambda(t) for a path psi of symplectic matrices."""
        rule = self.rule
        if self.vectorized:
            def new_rule(t):
                return np.asarray(psi(t)) @ np.asarray(rule(t))
        else:
            def new_rule(t):
                return np.asarray(psi(t)) @ np.asarray(rule(t))
        return LagrangianPath(new_rule, self.a, self.b, self.vectorized)

    def max_step_angle(self, samples: int = DEFAULT_SAMPLES) -> float:
        """Largest principal angle between consecutive sampled subspaces."""
        z = self.bases(np.linspace(self.a, self.b, samples))
        cos = np.linalg.svd(np.swapaxes(z[:-1], 1, 2) @ z[1:], compute_uv=False)
        return float(np.arccos(np.clip(cos.min(), -1.0, 1.0)))


def concatenate(first: LagrangianPath, second: LagrangianPath) -> LagrangianPath:
    """Concatenate two paths whose domains abut (first.b == second.a)."""
    if abs(first.b - second.a) > 1e-12:
        raise ValueError("paths do not abut")
    cut = first.b

    def rule(t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return first.rule(float(t)) if t <= cut else second.rule(float(t))
        out = np.empty((t.size, 2 * first.n, first.n))
        left = t <= cut
        if left.any():
            out[left] = first.bases(t[left])
        if (~left).any():
            out[~left] = second.bases(t[~left])
        return out

    return LagrangianPath(rule, first.a, second.b, vectorized=True)


# --------------------------------------------------------------------------
# crossings


@dataclass(frozen=True)
class CrossingRecord:
    time: float
    intersection_dim: int
    crossing_form_signature: int
    is_endpoint: bool

    def __post_init__(self):
        if self.intersection_dim < 1:
            raise ValueError("a crossing has positive intersection dimension")
        if abs(self.crossing_form_signature) > self.intersection_dim:
            raise ValueError("signature exceeds the intersection dimension")


def _graph(z0: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Graph map of span(z) over span(z0) w.r.t. the complement J span(z0)."""
    n = z0.shape[1]
    w = complex_structure(n) @ z0
    B = z0.T @ z
    C = w.T @ z
    return np.linalg.solve(B.T, C.T).T


def _graph_derivative(path: LagrangianPath, t0: float, z0: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Derivative at t0 of the graph map, by finite differences with one Richardson step."""
    lo, hi = path.a, path.b

    def G(t):
        return _graph(z0, path.basis(t))

    def central(step):
        return (G(t0 + step) - G(t0 - step)) / (2 * step)

    def forward(step):
        return (-3 * G(t0) + 4 * G(t0 + step) - G(t0 + 2 * step)) / (2 * step)

    def backward(step):
        return (3 * G(t0) - 4 * G(t0 - step) + G(t0 - 2 * step)) / (2 * step)

    if t0 - h >= lo and t0 + h <= hi:
        rule = central
    elif t0 + 2 * h <= hi:
        rule = forward
    else:
        rule = backward
    d = (4 * rule(h / 2) - rule(h)) / 3
    return 0.5 * (d + d.T)


def crossing_form(path: LagrangianPath, t: float, vectors: np.ndarray) -> np.ndarray:
    """The crossing form of `path` at t, on the columns of `vectors` (which lie in Lambda(t))."""
    z0 = path.basis(t)
    coords = z0.T @ vectors
    return coords.T @ _graph_derivative(path, t, z0) @ coords


def relative_crossing(lam: LagrangianPath, lam2: LagrangianPath, t: float, rtol: float = RANK_RTOL):
    """Intersection basis and relative crossing form Gamma(lam) - Gamma(lam2) at t."""
    z1 = lam.basis(t)
    z2 = lam2.basis(t)
    m = np.hstack([z1, z2])
    _, s, vt = np.linalg.svd(m)
    k = int(np.sum(s < rtol * s[0]))
    if k == 0:
        return np.zeros((2 * lam.n, 0)), np.zeros((0, 0))
    null = vt[-k:].T
    vecs = _orthonormal(z1 @ null[: lam.n])
    q = crossing_form(lam, t, vecs) - crossing_form(lam2, t, vecs)
    return vecs, 0.5 * (q + q.T)


def _signature(q: np.ndarray, t: float, tol: float) -> int:
    if q.size == 0:
        return 0
    ev = np.linalg.eigvalsh(q)
    if np.min(np.abs(ev)) < tol:
        raise DegenerateCrossingError(t, ev)
    return int(np.sum(ev > 0) - np.sum(ev < 0))


def _golden_min(f, lo: float, hi: float, width: float = REFINE_WIDTH):
    g = (np.sqrt(5) - 1) / 2
    c = hi - g * (hi - lo)
    d = lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > width:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = f(d)
    t = 0.5 * (lo + hi)
    return t, f(t)


def _grid_min(f_batch, lo: float, hi: float, width: float = REFINE_WIDTH, points: int = 17) -> float:
    """Shrink [lo, hi] around the smallest sampled value of a vectorised f until it is narrower than width."""
    while hi - lo > width:
        ts = np.linspace(lo, hi, points)
        i = int(np.argmin(f_batch(ts)))
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, points - 1)]
    return 0.5 * (lo + hi)


def _valley_events(ts: np.ndarray, sig: np.ndarray, lead: np.ndarray, evaluate, rtol: float,
                   a: float, b: float, smallest_batch=None) -> list[tuple[float, int]]:
    """Locate interior parameters where a family of singular values dips to zero.

    `sig` holds the smallest singular value on the sample grid and `evaluate(t)`
    returns ``(smallest, all_singular_values, scale)`` at an arbitrary t.
    Candidates are grid-local minima; each is refined by golden-section search
    to width REFINE_WIDTH (or by batched grid refinement when
    `smallest_batch` is given) and kept when some singular values fall below
    ``rtol * scale`` there.
    """
    events: list[tuple[float, int]] = []
    N = len(ts)
    for i in range(N):
        left = sig[i - 1] if i > 0 else np.inf
        right = sig[i + 1] if i < N - 1 else np.inf
        if not (sig[i] <= left and sig[i] <= right):
            continue
        if sig[i] > 0.25 * lead[i]:
            continue
        lo = ts[max(i - 1, 0)]
        hi = ts[min(i + 1, N - 1)]
        if smallest_batch is None:
            t_star, _ = _golden_min(lambda t: evaluate(t)[0], lo, hi)
        else:
            t_star = _grid_min(smallest_batch, lo, hi)
        if t_star - a < ENDPOINT_SNAP or b - t_star < ENDPOINT_SNAP:
            continue
        _, s, scale = evaluate(t_star)
        k = int(np.sum(s < rtol * scale))
        if k == 0:
            if s.min() < 100 * rtol * scale:
                raise ResolutionError(
                    f"ambiguous dimension jump near t={t_star:.12g} (smallest singular value {s.min():.3g})")
            continue
        if any(abs(t_star - t) < 1e-8 for t, _ in events):
            continue
        events.append((float(t_star), k))
    return events


def find_crossings(lam: LagrangianPath, lam2: LagrangianPath, samples: int = DEFAULT_SAMPLES,
                   rtol: float = RANK_RTOL, degenerate_tol: float = DEGENERATE_TOL) -> list[CrossingRecord]:
    """All crossings of the pair, with the signature of the relative crossing form."""
    if (lam.a, lam.b) != (lam2.a, lam2.b):
        raise ValueError("paths must share their domain")
    if lam.n != lam2.n:
        raise ValueError("paths live in different dimensions")
    a, b = lam.a, lam.b
    ts = np.linspace(a, b, samples)
    m = np.concatenate([lam.bases(ts), lam2.bases(ts)], axis=2)
    s = np.linalg.svd(m, compute_uv=False)

    def evaluate(t):
        sv = np.linalg.svd(np.hstack([lam.basis(t), lam2.basis(t)]), compute_uv=False)
        return sv[-1], sv, sv[0]

    def smallest_batch(tt):
        mm = np.concatenate([lam.bases(tt), lam2.bases(tt)], axis=2)
        return np.linalg.svd(mm, compute_uv=False)[:, -1]

    records = []
    for t, endpoint in ((a, True), (b, True)):
        _, sv, scale = evaluate(t)
        k = int(np.sum(sv < rtol * scale))
        if k:
            _, q = relative_crossing(lam, lam2, t, rtol)
            records.append(CrossingRecord(t, k, _signature(q, t, degenerate_tol), endpoint))
    for t, k in _valley_events(ts, s[:, -1], s[:, 0], evaluate, rtol, a, b, smallest_batch):
        _, q = relative_crossing(lam, lam2, t, rtol)
        records.append(CrossingRecord(t, q.shape[0], _signature(q, t, degenerate_tol), False))
    records.sort(key=lambda r: r.time)
    return records


def _constant_dimension(lam, lam2, samples, rtol) -> int | None:
    ts = np.linspace(lam.a, lam.b, samples)
    m = np.concatenate([lam.bases(ts), lam2.bases(ts)], axis=2)
    s = np.linalg.svd(m, compute_uv=False)
    dims = np.sum(s < rtol * s[:, :1], axis=1)
    if dims[0] > 0 and np.all(dims == dims[0]):
        return int(dims[0])
    return None


def maslov_index_pair(lam: LagrangianPath, lam2: LagrangianPath, samples: int = DEFAULT_SAMPLES,
                      rtol: float = RANK_RTOL, degenerate_tol: float = DEGENERATE_TOL) -> HalfInteger:
    """Maslov index mu(lam, lam2) of two Lagrangian paths on a common interval.

    Raises
    ------
    DegenerateCrossingError
        if a crossing form is singular.
    ResolutionError
        if a dip of the intersection dimension cannot be decided.
    """
    if _constant_dimension(lam, lam2, samples, rtol) is not None:
        # intersection of constant positive dimension along the whole path
        return HalfInteger(0)
    twice = 0
    for rec in find_crossings(lam, lam2, samples, rtol, degenerate_tol):
        twice += rec.crossing_form_signature * (1 if rec.is_endpoint else 2)
    return HalfInteger(twice)


# --------------------------------------------------------------------------
# conjugate-point oracle


def _lower_left(A: np.ndarray) -> np.ndarray:
    n = A.shape[-1] // 2
    return A[..., n:, :n]


def kernel_events(A_path: Callable, n: int, samples: int = DEFAULT_SAMPLES,
                  rtol: float = RANK_RTOL) -> dict:
    """Parameters r in [0, 1] where A(r)^{-1}(R^n x 0) meets R^n x 0, with dimensions.

    The dimension at r equals the kernel dimension of the lower-left block of
    A(r); the returned dict has keys ``start``, ``end`` (dimensions at 0 and 1)
    and ``interior`` (list of (r, dim)).
    """
    def svals(r):
        A = np.asarray(A_path(r), dtype=float)
        sv = np.linalg.svd(_lower_left(A), compute_uv=False)
        return sv, max(1.0, float(np.linalg.norm(A, 2)))

    def evaluate(r):
        sv, scale = svals(r)
        return sv[-1] / scale, sv, scale

    rs = np.linspace(0.0, 1.0, samples)
    smallest = np.empty(samples)
    for i, r in enumerate(rs):
        sv, scale = svals(r)
        smallest[i] = sv[-1] / scale
    sv0, sc0 = svals(0.0)
    sv1, sc1 = svals(1.0)
    interior = _valley_events(rs, smallest, np.ones(samples), evaluate, rtol, 0.0, 1.0)
    return {
        "start": int(np.sum(sv0 < rtol * sc0)),
        "end": int(np.sum(sv1 < rtol * sc1)),
        "interior": interior,
    }


def maslov_via_conjugate_points(A_path: Callable, n: int | None = None,
                                samples: int = DEFAULT_SAMPLES) -> HalfInteger:
    """Index of (R^n x 0, A(r)^{-1}(R^n x 0)) from intersection dimensions alone.

    Returns 1/2 dim at r=0 + sum of interior dimensions + 1/2 dim at r=1.  This
    never looks at a crossing form, so it serves as an oracle for
    `maslov_index_pair` on paths generated by the Jacobi equation.
    """
    if n is None:
        n = np.asarray(A_path(0.0)).shape[0] // 2
    ev = kernel_events(A_path, n, samples)
    return HalfInteger(ev["start"] + 2 * sum(k for _, k in ev["interior"]) + ev["end"])


def coherent_index_from_frame_data(lam_x: LagrangianPath, lam2_x: LagrangianPath, dim_L: int,
                                   samples: int = DEFAULT_SAMPLES) -> HalfInteger:
    """i(gamma_x) = mu(lam_x, lam2_x) - dim_L / 2."""
    return maslov_index_pair(lam_x, lam2_x, samples) - HalfInteger(dim_L)


def jacobi_pair(A_path: Callable, n: int, vectorized: bool = False) -> tuple[LagrangianPath, LagrangianPath]:
    """The constant path R^n x 0 and r -> A(r)^{-1}(R^n x 0) on [0, 1]."""
    horizontal = np.vstack([np.eye(n), np.zeros((n, n))])

    def rule(r):
        A = np.asarray(A_path(r), dtype=float)
        return symplectic_inverse(A) @ horizontal

    return LagrangianPath.constant(horizontal), LagrangianPath(rule, 0.0, 1.0, vectorized=vectorized)
