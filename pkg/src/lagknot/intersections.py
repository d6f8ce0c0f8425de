"""Intersection circles of a twisted fibre with the antipodal fibre of T*S^2."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import LagknotError
from .maslov import HalfInteger
from .sphere import (
    Covector,
    Geodesic,
    JacobiSolution,
    action_of_constant_path,
    conjugate_points,
    jacobi_system,
    morse_index,
    tangent_frame,
)
from .twist import ModelTwist, make_profile, twist_power

INDEX_SHIFT = 2


class ProfileConsistencyError(LagknotError):
    """A level-set root of the profile fell outside its linear region."""


@dataclass(frozen=True)
class CleanCircle:
    j: int
    radius: float
    action: float
    index_prime: int
    winding: HalfInteger
    psi_level: int

    @property
    def dimension(self) -> int:
        return 1


@dataclass(frozen=True)
class IntersectionTable:
    r: int
    circles: tuple[CleanCircle, ...]
    base_point: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        actions = [c.action for c in self.circles]
        if any(b <= a for a, b in zip(actions, actions[1:])):
            raise ValueError("circle actions must be strictly increasing")


def _circle(j: int, r: int, radius: float, index_prime: int | None = None) -> CleanCircle:
    if index_prime is None:
        index_prime = 2 * j - 2 + INDEX_SHIFT
    return CleanCircle(j=j, radius=radius, action=0.5 * radius ** 2, index_prime=index_prime,
                       winding=HalfInteger(2 * j - 1), psi_level=r - j + 1)


def compute_circles(r: int, grid: int = 4000) -> IntersectionTable:
    """Radii t at which 2 r psi(t) + pi lies in 2 pi Z, ordered by action.

    Roots are bracketed on a grid over the whole support of the profile and
    polished by brentq, so a badly built profile would show up as a root in
    the blend zone.  r = 0 is the untwisted pair of disjoint fibres.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return IntersectionTable(0, ())
    prof = make_profile(r)

    def g(t):
        return np.cos(r * prof(t))

    ts = np.linspace(0.0, prof.support_radius, grid + 1)
    vals = g(ts)
    roots = []
    for a, b, fa, fb in zip(ts[:-1], ts[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(g, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps))
    for t in roots:
        if t >= prof.delta:
            raise ProfileConsistencyError(f"root t={t:.12g} lies outside the linear region [0, {prof.delta:.12g})")
    roots.sort()
    return IntersectionTable(r, tuple(_circle(j, r, t) for j, t in enumerate(roots, start=1)))


def synthetic_table(r: int, radii) -> IntersectionTable:
    """A table with prescribed radii, for negative controls."""
    return IntersectionTable(r, tuple(_circle(j, r, float(t)) for j, t in enumerate(radii, start=1)))


# --------------------------------------------------------------------------
# cleanness


@dataclass
class CircleReport:
    j: int
    radius: float
    samples: int
    multiplicity_ok: bool
    membership_ok: bool
    max_jacobi_defect: float
    max_membership_defect: float
    multiplicities: list = field(default_factory=list)

    def passed(self, tol: float) -> bool:
        return self.multiplicity_ok and self.membership_ok and self.max_jacobi_defect < tol


@dataclass
class CleanReport:
    r: int
    circles: list
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(c.passed(self.tolerance) for c in self.circles)

    @property
    def max_jacobi_defect(self) -> float:
        return max((c.max_jacobi_defect for c in self.circles), default=0.0)


def circle_point(model: ModelTwist, r: int, x: np.ndarray, radius: float, theta: float) -> Covector:
    """The image under tau^{2r} of the fibre covector at x of length radius, direction theta."""
    E = tangent_frame(x)
    p = radius * (np.cos(theta) * E[:, 0] + np.sin(theta) * E[:, 1])
    return twist_power(model, 2 * r, Covector(x, p))


def _jacobi_defect(model, r, x, radius, theta, sol, geo, h=1e-5, checks=21) -> float:
    """Compare the variation field of the circle family with the predicted Jacobi field."""
    plus = Geodesic(circle_point(model, r, x, radius, theta + h))
    minus = Geodesic(circle_point(model, r, x, radius, theta - h))
    xi = geo.initial
    y0 = geo.parallel_frame(0.0).T @ np.cross(x, xi.v)
    worst = 0.0
    for s in np.linspace(0.0, 1.0, checks):
        fd = (plus.point(s) - minus.point(s)) / (2 * h)
        A = sol(s)
        predicted = geo.parallel_frame(s) @ (A[2:, :2] @ y0)
        worst = max(worst, float(np.max(np.abs(fd - predicted))))
    return worst


def verify_clean(table: IntersectionTable, samples_per_circle: int = 32, tol: float = 1e-4) -> CleanReport:
    """Check each sampled intersection point of a table.

    At xi on a circle, with c the geodesic of xi on [0, 1]:
    (a) c(1) is conjugate to c(0) with multiplicity exactly one;
    (b) rotating the circle about the axis through x and A(x) moves c by the
        Jacobi field with J(0) = 0, J'(0) = x cross c'(0), within tol;
    (c) xi sits over A(x) and c(1) = x, so xi really lies in both fibres.
    """
    r = max(table.r, 1)
    model = ModelTwist(make_profile(r))
    x = np.asarray(table.base_point, dtype=float)
    reports = []
    for circ in table.circles:
        mults, jac, memb = [], 0.0, 0.0
        mult_ok = True
        for k in range(samples_per_circle):
            theta = 2 * np.pi * k / samples_per_circle
            xi = circle_point(model, r, x, circ.radius, theta)
            geo = Geodesic(xi)
            sol = JacobiSolution(jacobi_system(geo))
            data = conjugate_points(geo, solution=sol)
            end = [d.multiplicity for d in data if d.r == 1.0]
            m1 = end[0] if end else 0
            mults.append(m1)
            mult_ok &= m1 == 1
            jac = max(jac, _jacobi_defect(model, r, x, circ.radius, theta, sol, geo))
            memb = max(memb, float(np.linalg.norm(xi.u + x)), float(np.linalg.norm(geo.point(1.0) - x)))
        reports.append(CircleReport(circ.j, circ.radius, samples_per_circle, mult_ok, memb < 1e-9,
                                    jac, memb, mults))
    return CleanReport(table.r, reports, tol)


# --------------------------------------------------------------------------
# actions and indices


def circle_geodesic(circ: CleanCircle, x=(0.0, 0.0, 1.0)) -> Geodesic:
    x = np.asarray(x, dtype=float)
    E = tangent_frame(-x)
    return Geodesic(Covector(-x, circ.radius * E[:, 0]))


def index_table(table: IntersectionTable) -> list[tuple[int, int]]:
    """(j, i'(C_j)) in the normalisation with i'(C_1) = 2.

    The raw index of C_j is the Morse index 2j - 3/2 of its geodesic; removing
    half the circle dimension gives 2j - 2, and the global shift gives 2j.
    """
    out = []
    for circ in table.circles:
        raw = morse_index(circle_geodesic(circ)) - HalfInteger(circ.dimension)
        if not raw.is_integer:
            raise ValueError(f"index of circle {circ.j} is not an integer: {raw}")
        out.append((circ.j, int(raw.twice_value // 2) + INDEX_SHIFT))
    return out


def index_gaps(rows) -> list[int]:
    return [b[1] - a[1] for a, b in zip(rows, rows[1:])]


def action_gaps(table: IntersectionTable) -> list[float]:
    a = [c.action for c in table.circles]
    return [y - x for x, y in zip(a, a[1:])]


def expected_action_gap(j: int) -> float:
    return np.pi ** 2 / 2 * ((2 * j - 1) ** 2 - (2 * j - 3) ** 2)


def action_check(table: IntersectionTable) -> float:
    """Largest |action of the constant path - radius^2/2| over the circles."""
    worst = 0.0
    for circ in table.circles:
        a = action_of_constant_path(circle_geodesic(circ).initial)
        worst = max(worst, abs(a - 0.5 * circ.radius ** 2))
    return worst

