"""Lagrangian handles, the figure-eight sphere, its branched-cover lifts and (A_m) chains."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, least_squares
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import CountUncertainError, ProximityError, ResolutionError
from .smooth import bump, integrated_smoothstep, smoothstep
from .sphere import Covector, tangent_frame
from .twist import (
    ModelTwist,
    TwistProfile,
    chart_inverse,
    inverse_twisted_fiber_point,
    twist_inverse,
    twisted_fiber_graph,
)


# --------------------------------------------------------------------------
# handle curves and patches


@dataclass(frozen=True)
class ProfileCurve:
    """A plane curve s -> (y1, y2) on [s_min, s_max]."""

    rule: Callable
    s_min: float
    s_max: float
    support_radius: float
    name: str = "curve"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.asarray(self.rule(s), dtype=float)


def corner_curve(rho: float = 0.5, extent: float = 3.0) -> ProfileCurve:
    """The axes (R+ x 0) u (0 x R-) with the corner smoothed inside radius rho.

    c(s) = (g(s), -g(-s)) with g(s) = 2 rho I((s + rho) / (2 rho)), I the
    integrated smooth step; g(s) = s for s >= rho and 0 for s <= -rho, so the
    curve is the y1-axis for s >= rho and the negative y2-axis for s <= -rho.
    Both coordinates are monotone and the curve stays in the closed fourth
    quadrant away from the origin, so no pair x, -x lies on it.
    """
    def g(s):
        return 2 * rho * integrated_smoothstep((s + rho) / (2 * rho))

    def rule(s):
        return np.stack([g(s), -g(-s)], axis=-1)

    return ProfileCurve(rule, -extent, extent, rho, "corner")


def axes_curve(extent: float = 3.0) -> ProfileCurve:
    """The unsmoothed union of the two half-axes through the origin."""
    def rule(s):
        return np.stack([np.maximum(s, 0.0), np.minimum(s, 0.0)], axis=-1)

    return ProfileCurve(rule, -extent, extent, 0.0, "axes")


def antipodal_curve(extent: float = 3.0, a: float = 0.6) -> ProfileCurve:
    """The parabola y2 = (1 - (y1/a)^2)/2, which passes through (a, 0) and (-a, 0)."""
    def rule(s):
        s = np.asarray(s, dtype=float)
        return np.stack([s, 0.5 * (1.0 - (s / a) ** 2)], axis=-1)

    return ProfileCurve(rule, -extent, extent, extent, "antipodal")


def rho_cutoff(t, eps: float):
    """0 for t <= eps/4, 1 for t >= eps/2."""
    return smoothstep((np.asarray(t, dtype=float) - eps / 4) / (eps / 4))


def surgery_curve(profile: TwistProfile, s_max: float | None = None) -> ProfileCurve:
    """c(s) = (rho(pi - psi(s)) s, -psi(s)) for s > 0."""
    eps = profile.eps

    def rule(s):
        s = np.asarray(s, dtype=float)
        psi = profile(s)
        return np.stack([rho_cutoff(np.pi - psi, eps) * s, -psi], axis=-1)

    top = s_max if s_max is not None else 4 * eps
    return ProfileCurve(rule, 1e-9, top, 2 * eps, "surgery-one")


def surgery_curve_dual(profile: TwistProfile, s_max: float | None = None) -> ProfileCurve:
    """The handle curve for the positive twist of a fibre, in the swapped chart.

    In the chart (x12, x34) = (q, -P) the deformed image of the fibre under
    the positive twist is swept by (psi(s), -rho(pi - psi(s)) s).
    """
    eps = profile.eps

    def rule(s):
        s = np.asarray(s, dtype=float)
        psi = profile(s)
        return np.stack([psi, -rho_cutoff(np.pi - psi, eps) * s], axis=-1)

    top = s_max if s_max is not None else 4 * eps
    return ProfileCurve(rule, 1e-9, top, 2 * eps, "surgery-two")


def _sweep(y, t):
    y = np.asarray(y)
    c, s = np.cos(t), np.sin(t)
    return np.stack([y[..., 0] * c, y[..., 0] * s, y[..., 1] * c, y[..., 1] * s], axis=-1)


@dataclass
class HandlePatch:
    """Samples (y1 cos t, y1 sin t, y2 cos t, y2 sin t) over an (s, t) grid."""

    curve: ProfileCurve
    s: np.ndarray
    t: np.ndarray
    jitter: float = 0.0

    @classmethod
    def grid(cls, curve: ProfileCurve, ns: int = 100, nt: int = 100, jitter: float = 0.0):
        s = np.linspace(curve.s_min, curve.s_max, ns)
        t = np.linspace(0.0, 2 * np.pi, nt, endpoint=False)
        return cls(curve, s, t, jitter)

    def evaluate(self, s, t) -> np.ndarray:
        y = self.curve(s)
        if self.jitter:
            y = y * (1.0 + self.jitter * np.sin(3 * np.asarray(t)))[..., None]
        return _sweep(y, t)

    def points(self) -> np.ndarray:
        S, T = np.meshgrid(self.s, self.t, indexing="ij")
        return self.evaluate(S, T)


def omega_handle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """dx1 ^ dx3 + dx2 ^ dx4 on the last axis."""
    return a[..., 0] * b[..., 2] - a[..., 2] * b[..., 0] + a[..., 1] * b[..., 3] - a[..., 3] * b[..., 1]


def handle_lagrangian_defect(patch: HandlePatch, h: float = 1e-4) -> float:
    S, T = np.meshgrid(patch.s, patch.t, indexing="ij")
    ds = (patch.evaluate(S + h, T) - patch.evaluate(S - h, T)) / (2 * h)
    dt = (patch.evaluate(S, T + h) - patch.evaluate(S, T - h)) / (2 * h)
    area = np.linalg.norm(ds, axis=-1) * np.linalg.norm(dt, axis=-1)
    if not np.all(np.isfinite(area)):
        raise ValueError("degenerate grid cell in handle patch")
    return float(np.max(np.abs(omega_handle(ds, dt))))


def handle_asymptotic_defect(patch: HandlePatch) -> float:
    """Distance from the union of the two coordinate planes, outside the support radius."""
    pts = patch.points()
    S = np.broadcast_to(patch.s[:, None], pts.shape[:2])
    outside = np.abs(S) >= patch.curve.support_radius
    if patch.curve.name.startswith("surgery"):
        outside = S >= patch.curve.support_radius
    p = pts[outside]
    if len(p) == 0:
        return 0.0
    d = np.minimum(np.linalg.norm(p[:, 2:], axis=1), np.linalg.norm(p[:, :2], axis=1))
    return float(np.max(d))


@dataclass
class EmbeddednessVerdict:
    embedded: bool | None
    pair: tuple | None = None
    min_far_distance: float = np.inf

    @property
    def label(self) -> str:
        return {True: "embedded", False: "collision", None: "inconclusive"}[self.embedded]


def _certify_collision(patch: HandlePatch, a: tuple, b: tuple, ds: float, dt: float):
    """Polish a candidate pair by least squares; return the colliding parameters or None.

    The pair is a collision only if the two sample points can be made to
    coincide while their parameters stay more than two grid steps apart.
    """
    lo, hi = patch.curve.s_min, patch.curve.s_max

    def F(x):
        return patch.evaluate(x[0], x[1]) - patch.evaluate(x[2], x[3])

    x0 = np.array([a[0], a[1], b[0], b[1]])
    sol = least_squares(F, x0, bounds=([lo, -np.inf, lo, -np.inf], [hi, np.inf, hi, np.inf]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    s1, t1, s2, t2 = sol.x
    gap = abs(np.remainder(t1 - t2 + np.pi, 2 * np.pi) - np.pi)
    if np.linalg.norm(F(sol.x)) < 1e-9 and (abs(s1 - s2) > 2 * ds or gap > 2 * dt):
        return (float(s1), float(np.remainder(t1, 2 * np.pi))), (float(s2), float(np.remainder(t2, 2 * np.pi)))
    return None


def handle_embeddedness(patch: HandlePatch, ratio: float = 2.0, max_candidates: int = 40) -> EmbeddednessVerdict:
    """Scan for pairs of samples that are close in R^4 but far apart on the surface.

    For each pair within three local grid spacings of each other, the
    distance in R^4 is compared with the parameter-space distance
    sqrt(d_arc^2 + (r d_t)^2), r the larger radius; on an embedded patch the
    two agree to first order, so a ratio above `ratio` marks a candidate.
    Candidates are confirmed by `_certify_collision`, so a coarse grid never
    reports a collision that is not there.  If nothing is confirmed but the
    curve comes within a grid spacing of the origin, the scan cannot decide
    and the verdict is inconclusive.
    """
    y = patch.curve(patch.s)
    seg = np.linalg.norm(np.diff(y, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    dt = patch.t[1] - patch.t[0]
    ds = float(np.max(np.diff(patch.s)))
    radius = np.linalg.norm(y, axis=1)
    ds_local = np.concatenate([seg[:1], np.maximum(seg[:-1], seg[1:]), seg[-1:]])
    pts = patch.points()
    ns, nt = pts.shape[:2]
    flat = pts.reshape(-1, 4)
    idx_s = np.repeat(np.arange(ns), nt)
    idx_t = np.tile(np.arange(nt), ns)
    spacing = np.maximum(ds_local[idx_s], radius[idx_s] * dt)
    tree = cKDTree(flat)
    bound = 3.0 * float(np.max(spacing))
    pairs = tree.query_pairs(bound, output_type="ndarray")
    best = np.inf
    unresolved = False
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        dist = np.linalg.norm(flat[i] - flat[j], axis=1)
        local = 3.0 * np.maximum(spacing[i], spacing[j])
        dti = np.abs(idx_t[i] - idx_t[j])
        dti = np.minimum(dti, nt - dti) * dt
        r = np.maximum(radius[idx_s[i]], radius[idx_s[j]])
        par = np.hypot(arc[idx_s[i]] - arc[idx_s[j]], r * dti)
        close = dist < local
        bad = np.flatnonzero(close & (par > ratio * dist + 1e-12))
        for k in bad[np.argsort(dist[bad])][:max_candidates]:
            a, b = int(i[k]), int(j[k])
            hit = _certify_collision(patch, (patch.s[idx_s[a]], patch.t[idx_t[a]]),
                                     (patch.s[idx_s[b]], patch.t[idx_t[b]]), ds, dt)
            if hit is not None:
                return EmbeddednessVerdict(False, hit, float(dist[k]))
        unresolved = len(bad) > max_candidates
        far = ~close
        if np.any(far):
            best = float(np.min(dist[far]))
    if unresolved or np.min(radius) < float(np.max(ds_local)):
        return EmbeddednessVerdict(None, None, best)
    return EmbeddednessVerdict(True, None, best)


# --------------------------------------------------------------------------
# the figure-eight sphere


def figure_eight(t) -> np.ndarray:
    """f(t1, t2, t3) = (t2 (1 + i t1), t3 (1 + i t1)); accepts (..., 3) arrays."""
    t = np.asarray(t, dtype=float)
    w = 1 + 1j * t[..., 0]
    return np.stack([t[..., 1] * w, t[..., 2] * w], axis=-1)


def branch_function(z) -> np.ndarray:
    z = np.asarray(z)
    return z[..., 0] ** 2 + z[..., 1] ** 2 - 0.5


def omega0(a, b) -> np.ndarray:
    """Standard form sum dx ^ dy on complex vectors (last axis)."""
    return np.sum(np.imag(np.conj(a) * b), axis=-1)


def sphere_samples(n_theta: int = 80, n_phi: int = 80) -> np.ndarray:
    """Polar grid on S^2 around the t1-axis, poles included once."""
    th = np.linspace(0.0, np.pi, n_theta)[1:-1]
    ph = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    T, P = np.meshgrid(th, ph, indexing="ij")
    pts = np.stack([np.cos(T), np.sin(T) * np.cos(P), np.sin(T) * np.sin(P)], axis=-1).reshape(-1, 3)
    return np.vstack([[1.0, 0.0, 0.0], pts, [-1.0, 0.0, 0.0]])


def sphere_tangents(t: np.ndarray, h: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference derivatives of f along two orthonormal tangent directions at each t."""
    t = np.atleast_2d(t)
    d1, d2 = [], []
    for p in t:
        E = tangent_frame(p)
        out = []
        for k in range(2):
            a = p + h * E[:, k]
            b = p - h * E[:, k]
            out.append((figure_eight(a / np.linalg.norm(a)) - figure_eight(b / np.linalg.norm(b))) / (2 * h))
        d1.append(out[0])
        d2.append(out[1])
    return np.array(d1), np.array(d2)


@dataclass
class FigureEightReport:
    double_point: list
    min_rank_sv: float
    lagrangian_defect: float
    branch_margin: float


def figure_eight_checks(samples: np.ndarray) -> FigureEightReport:
    a, b = sphere_tangents(samples)
    J = np.stack([np.concatenate([a.real, a.imag], axis=1), np.concatenate([b.real, b.imag], axis=1)], axis=2)
    sv = np.linalg.svd(J, compute_uv=False)
    lag = float(np.max(np.abs(omega0(a, b))))
    margin = float(np.min(np.abs(branch_function(figure_eight(samples)))))
    dp = [figure_eight(np.array([1.0, 0, 0])).tolist(), figure_eight(np.array([-1.0, 0, 0])).tolist()]
    return FigureEightReport(dp, float(np.min(sv[:, -1])), lag, margin)


def meridian(s):
    """Great-circle path from (1,0,0) to (-1,0,0) through (0,1,0)."""
    s = np.asarray(s, dtype=float)
    return np.stack([np.cos(np.pi * s), np.sin(np.pi * s), np.zeros_like(s)], axis=-1)


def linking_number(loop: np.ndarray, min_distance: float = 1e-3, drift_tol: float = 0.1) -> int:
    """Winding number of z1^2 + z2^2 - 1/2 along a closed sampled loop in C^2."""
    loop = np.asarray(loop)
    g = branch_function(loop)
    if np.min(np.abs(g)) < min_distance:
        raise ProximityError(f"loop comes within {np.min(np.abs(g)):.3g} of the branch curve")
    if abs(g[0] - g[-1]) > 1e-9 * max(1.0, abs(g[0])):
        raise ValueError("loop is not closed")
    steps = np.angle(g[1:] / g[:-1])
    if np.max(np.abs(steps)) > np.pi / 2:
        raise ResolutionError("argument jumps by more than pi/2 between samples")
    w = float(np.sum(steps)) / (2 * np.pi)
    if abs(w - round(w)) > drift_tol:
        raise ResolutionError(f"winding {w:.4f} is not close to an integer")
    return int(round(w))


def figure_eight_meridian_loop(n: int = 2001, turns: int = 1) -> np.ndarray:
    """f along the meridian, traversed `turns` times; closes at the double point."""
    pieces = [figure_eight(meridian(np.linspace(0.0, 1.0, n)))]
    for _ in range(1, turns):
        pieces.append(pieces[0][1:])
    return np.concatenate(pieces)


# --------------------------------------------------------------------------
# the branched cover


@dataclass(frozen=True)
class BranchedCover:
    """H = {z1^2 + z2^2 = z3^(m+1) + 1/2} over C^2 with deck map z3 -> e^{2 pi i/(m+1)} z3."""

    m: int

    @property
    def order(self) -> int:
        return self.m + 1

    @property
    def root_of_unity(self) -> complex:
        return np.exp(2j * np.pi / self.order)

    def residual(self, z) -> np.ndarray:
        z = np.asarray(z)
        return np.abs(z[..., 0] ** 2 + z[..., 1] ** 2 - z[..., 2] ** self.order - 0.5)

    def deck(self, z, power: int = 1) -> np.ndarray:
        z = np.array(z, dtype=complex)
        z[..., 2] = z[..., 2] * self.root_of_unity ** power
        return z

    def roots(self, w) -> np.ndarray:
        """All z3 with z3^(m+1) = w, shape (..., m+1)."""
        w = np.asarray(w, dtype=complex)
        base = np.abs(w) ** (1.0 / self.order) * np.exp(1j * np.angle(w) / self.order)
        return base[..., None] * self.root_of_unity ** np.arange(self.order)


@dataclass
class LiftedPath:
    s: np.ndarray
    points: np.ndarray

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def lift_path(cover: BranchedCover, path: Callable, seed: complex, steps: int = 2000,
              ambiguity: float = 0.25, min_step: float = 1e-9) -> LiftedPath:
    """Continue z3 along s -> path(s) in C^2 (s in [0, 1]) by nearest-root tracking.

    A step is accepted when the nearest root is closer than `ambiguity` times
    the second nearest; otherwise it is halved.
    """
    z0 = np.asarray(path(0.0), dtype=complex)
    if abs(seed ** cover.order - branch_function(z0)) > 1e-8:
        raise ValueError("seed does not lie over the start of the path")
    s, z3 = 0.0, complex(seed)
    h = 1.0 / steps
    out_s, out = [0.0], [np.array([z0[0], z0[1], z3])]
    while s < 1.0:
        h = min(h, 1.0 - s)
        z = np.asarray(path(s + h), dtype=complex)
        w = branch_function(z)
        if abs(w) < 1e-12:
            raise ProximityError(f"path meets the branch curve near s={s + h:.6g}")
        cand = cover.roots(w)
        d = np.abs(cand - z3)
        order = np.argsort(d)
        if cover.order > 1 and d[order[0]] > ambiguity * d[order[1]]:
            h /= 2
            if h < min_step:
                raise ResolutionError(f"root tracking ambiguous near s={s:.6g}")
            continue
        s += h
        z3 = complex(cand[order[0]])
        out_s.append(s)
        out.append(np.array([z[0], z[1], z3]))
        h = min(2 * h, 1.0 / steps)
    return LiftedPath(np.array(out_s), np.array(out))


def seed_root(cover: BranchedCover, w: complex) -> complex:
    """The root of z^(m+1) = w with the smallest nonnegative argument."""
    roots = cover.roots(w)
    ang = np.mod(np.angle(roots), 2 * np.pi)
    return complex(roots[np.argmin(ang)])


def meridian_lift(cover: BranchedCover, steps: int = 4000) -> LiftedPath:
    """Lift of f along the meridian, seeded by `seed_root` over f(1,0,0) = 0."""
    def path(s):
        return figure_eight(meridian(s))

    return lift_path(cover, path, seed_root(cover, -0.5), steps)


@dataclass
class LiftedSphere:
    """The lift t -> (f(t), Z(t1)) of the figure-eight sphere, Z continuous in t1."""

    cover: BranchedCover
    track_t1: np.ndarray
    track_z3: np.ndarray

    def z3(self, t1, near=None) -> np.ndarray:
        t1 = np.asarray(t1, dtype=float)
        if near is None:
            order = np.argsort(self.track_t1)
            xs = self.track_t1[order]
            near = (np.interp(t1, xs, self.track_z3.real[order])
                    + 1j * np.interp(t1, xs, self.track_z3.imag[order]))
        w = (1 - t1 ** 2) * (1 + 1j * t1) ** 2 - 0.5
        cand = self.cover.roots(w)
        k = np.argmin(np.abs(cand - np.asarray(near)[..., None]), axis=-1)
        return np.take_along_axis(cand, k[..., None], axis=-1)[..., 0]

    def __call__(self, t, power: int = 0, near=None) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        f = figure_eight(t)
        z = np.concatenate([f, self.z3(t[..., 0], near)[..., None]], axis=-1)
        return self.cover.deck(z, power) if power else z


def lifted_sphere(cover: BranchedCover, steps: int = 4000) -> LiftedSphere:
    lift = meridian_lift(cover, steps)
    t1 = np.cos(np.pi * lift.s)
    return LiftedSphere(cover, t1, lift.points[:, 2])


@dataclass
class LiftRelation:
    start: np.ndarray
    end: np.ndarray
    deck_power: int | None
    defect_sigma: float
    defect_sigma_inverse: float


def lift_relation(cover: BranchedCover, steps: int = 4000) -> LiftRelation:
    """Compare the lifted endpoints over the double point with deck images of the start."""
    lift = meridian_lift(cover, steps)
    a, b = lift.start, lift.end
    powers = [np.max(np.abs(cover.deck(a, k) - b)) for k in range(cover.order)]
    k = int(np.argmin(powers))
    power = k if powers[k] < 1e-8 else None
    if power is not None and power > cover.order // 2:
        power -= cover.order
    return LiftRelation(a, b, power, float(np.max(np.abs(cover.deck(a, 1) - b))),
                        float(np.max(np.abs(cover.deck(a, -1) - b))))


def monodromy_loop(k: int, radius: float = 0.25):
    """A loop in C^2 whose linking number with the branch curve is k."""
    def path(s):
        return np.array([np.sqrt(0.5 + radius * np.exp(2j * np.pi * k * s)), 0.0])

    return path


def loop_closes(cover: BranchedCover, k: int, steps: int = 2000) -> bool:
    path = monodromy_loop(k)
    seed = seed_root(cover, branch_function(path(0.0)))
    lift = lift_path(cover, path, seed, steps)
    return bool(abs(lift.end[2] - lift.start[2]) < 1e-8)


# --------------------------------------------------------------------------
# (A_m) configurations


def _sphere_chart(t0: np.ndarray):
    E = tangent_frame(t0)

    def chart(ab):
        p = t0 + E @ ab
        return p / np.linalg.norm(p)

    return chart


def _refine_intersection(sphere: LiftedSphere, i: int, j: int, ta: np.ndarray, tb: np.ndarray,
                         tol: float = 1e-10, max_iter: int = 60, h: float = 1e-7):
    """Gauss-Newton on L_i(a) = L_j(b) in local charts around two sample points."""
    ca, cb = _sphere_chart(ta), _sphere_chart(tb)
    near_a = sphere(ta)[2]
    near_b = sphere(tb)[2]

    def F(x):
        za = sphere(ca(x[:2]), i - 1, near=near_a)
        zb = sphere(cb(x[2:]), j - 1, near=near_b * sphere.cover.root_of_unity ** 0)
        d = za - zb
        return np.concatenate([d.real, d.imag])

    x = np.zeros(4)
    res = np.linalg.norm(F(x))
    for _ in range(max_iter):
        if res < 1e-13:
            break
        J = np.empty((6, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            J[:, k] = (F(x + e) - F(x - e)) / (2 * h)
        step, *_ = np.linalg.lstsq(J, -F(x), rcond=None)
        x = x + step
        res = np.linalg.norm(F(x))
    if res > tol:
        return None
    pa, pb = ca(x[:2]), cb(x[2:])
    # transversality: tangent planes of the two sheets span a 4-space
    T = []
    for c, x0, pw, nr in ((ca, x[:2], i - 1, near_a), (cb, x[2:], j - 1, near_b)):
        for k in range(2):
            e = np.zeros(2)
            e[k] = 1e-6
            d = (sphere(c(x0 + e), pw, near=nr) - sphere(c(x0 - e), pw, near=nr)) / 2e-6
            T.append(np.concatenate([d.real, d.imag]))
    T = np.array(T).T
    Q1, _ = np.linalg.qr(T[:, :2])
    Q2, _ = np.linalg.qr(T[:, 2:])
    angle = float(np.linalg.svd(np.hstack([Q1, Q2]), compute_uv=False)[-1])
    return {"point": sphere(pa, i - 1, near=near_a), "t_i": pa, "t_j": pb,
            "residual": float(res), "transversality": angle}


@dataclass
class AmConfiguration:
    m: int
    counts: list
    points: dict = field(default_factory=dict)
    min_transversality: float = np.inf
    samples: int = 0


def build_am_configuration(m: int, n_theta: int = 60, n_phi: int = 60, radius: float = 1e-2,
                           cover_steps: int = 4000) -> AmConfiguration:
    """Sample L_k = sigma^(k-1)(L_1) and count pairwise intersections.

    Pairs of samples within `radius` are grouped into clusters; each cluster
    is refined by Gauss-Newton and counted only if the residual drops below
    1e-10.  Refined points closer than 1e-8 are merged.
    """
    cover = BranchedCover(m)
    sphere = lifted_sphere(cover, cover_steps)
    t = sphere_samples(n_theta, n_phi)
    base = sphere(t)
    clouds = [cover.deck(base, k) for k in range(m)]
    flat = [np.concatenate([c.real, c.imag], axis=1) for c in clouds]
    counts = [[None] * m for _ in range(m)]
    found = {}
    worst_angle = np.inf
    for i in range(m):
        for j in range(i + 1, m):
            ti, tj = cKDTree(flat[i]), cKDTree(flat[j])
            near = ti.query_ball_tree(tj, radius)
            rows, cols = [], []
            for a, lst in enumerate(near):
                for b in lst:
                    rows.append(a)
                    cols.append(b)
            sols = []
            if rows:
                n = len(t)
                graph = coo_matrix((np.ones(len(rows)), (rows, np.array(cols) + n)), shape=(2 * n, 2 * n))
                _, labels = connected_components(graph, directed=False)
                rows, cols = np.array(rows), np.array(cols)
                for lab in sorted(set(labels[rows].tolist())):
                    mask = labels[rows] == lab
                    a_idx, b_idx = rows[mask], cols[mask]
                    d = np.linalg.norm(flat[i][a_idx] - flat[j][b_idx], axis=1)
                    k = int(np.argmin(d))
                    sol = _refine_intersection(sphere, i + 1, j + 1, t[a_idx[k]], t[b_idx[k]])
                    if sol is None:
                        raise CountUncertainError(f"cluster near sample {int(a_idx[k])} of L_{i + 1} "
                                                  f"and L_{j + 1} did not refine")
                    if not any(np.max(np.abs(sol["point"] - s["point"])) < 1e-8 for s in sols):
                        sols.append(sol)
            counts[i][j] = counts[j][i] = len(sols)
            found[(i + 1, j + 1)] = sols
            for s in sols:
                worst_angle = min(worst_angle, s["transversality"])
    return AmConfiguration(m, counts, found, worst_angle, len(t))


def expected_am_counts(m: int) -> list:
    return [[None if i == j else (1 if abs(i - j) == 1 else 0) for j in range(m)] for i in range(m)]


def deck_invariance(cover: BranchedCover, points: np.ndarray) -> tuple[float, float]:
    """(max rule residual after sigma, max change of pairwise distances under sigma)."""
    moved = cover.deck(points)
    res = float(np.max(cover.residual(moved)))
    D0 = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    D1 = np.linalg.norm(moved[:, None, :] - moved[None, :, :], axis=-1)
    return res, float(np.max(np.abs(D0 - D1)))


def write_cloud_csv(path, clouds) -> None:
    """Rows: sphere_id, sample_id, Re z1, Im z1, Re z2, Im z2, Re z3, Im z3."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sphere_id", "sample_id", "re_z1", "im_z1", "re_z2", "im_z2", "re_z3", "im_z3"])
        for k, cloud in enumerate(clouds, start=1):
            for n, z in enumerate(cloud):
                w.writerow([k, n] + [f"{v:.12g}" for c in z for v in (c.real, c.imag)])


# --------------------------------------------------------------------------
# the correction form


@dataclass(frozen=True)
class CorrectionProfile:
    """beta: 0 near 0, 1 on [eps, 1/eps], a negative lobe before 2/eps, 0 beyond."""

    eps: float
    lobe_scale: float

    @property
    def lobe(self) -> tuple[float, float]:
        return 1 / self.eps + 0.25 / self.eps, 2 / self.eps

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        e = self.eps
        up = smoothstep((r - e / 2) / (e / 2))
        w = 0.25 / e
        down = 1.0 - smoothstep((r - 1 / e) / w)
        a, b = self.lobe
        out = np.where(r <= 1 / e, up, down) - self.lobe_scale * bump((r - a) / (b - a))
        return float(out) if out.ndim == 0 else out

    def moment(self) -> float:
        e = self.eps
        knots = [0.0, e / 2, e, 1 / e, 1 / e + 0.25 / e, 2 / e]
        total = 0.0
        for a, b in zip(knots[:-1], knots[1:]):
            val, _ = quad(lambda r: r * self(r), a, b, limit=200, epsabs=1e-14)
            total += val
        return total


def make_correction_profile(eps: float = 0.2) -> CorrectionProfile:
    """Solve for the lobe scale that makes the first moment vanish."""
    c = brentq(lambda k: CorrectionProfile(eps, k).moment(), 0.0, 1e3, xtol=1e-14, rtol=1e-14)
    return CorrectionProfile(eps, c)


def omega_prime(a, b, beta_value) -> np.ndarray:
    """omega - beta (i/2) dz3 ^ dzbar3 on complex 3-vectors."""
    a = np.asarray(a)
    b = np.asarray(b)
    full = np.imag(np.conj(a) * b)
    return full[..., 0] + full[..., 1] + (1.0 - beta_value) * full[..., 2]


def hypersurface_frame(cover: BranchedCover, z: np.ndarray) -> np.ndarray | None:
    """Real oriented frame (e1, i e1, e2, i e2) of T_z H from a unitary kernel basis."""
    grad = np.array([2 * z[0], 2 * z[1], -cover.order * z[2] ** cover.m])
    if np.linalg.norm(grad) < 1e-8:
        return None
    _, _, Vh = np.linalg.svd(grad.conj()[None, :])
    K = Vh[1:].conj().T
    e1, e2 = K[:, 0], K[:, 1]
    return np.array([e1, 1j * e1, e2, 1j * e2])


def pfaffian4(M: np.ndarray) -> float:
    return float(M[0, 1] * M[2, 3] - M[0, 2] * M[1, 3] + M[0, 3] * M[1, 2])


def hypersurface_samples(cover: BranchedCover, rng: np.random.Generator, count: int,
                         z3_radii=None) -> np.ndarray:
    """Points of H; with z3_radii given, |z3| is drawn from those values."""
    pts = []
    for k in range(count):
        if z3_radii is None:
            z1, z2 = rng.normal(size=2) + 1j * rng.normal(size=2)
            w = z1 ** 2 + z2 ** 2 - 0.5
            z3 = cover.roots(w)[rng.integers(cover.order)]
        else:
            rad = z3_radii[k % len(z3_radii)]
            z3 = rad * np.exp(2j * np.pi * rng.random())
            z2 = rng.normal() + 1j * rng.normal()
            z1 = np.sqrt(z3 ** cover.order + 0.5 - z2 ** 2 + 0j)
        pts.append([z1, z2, z3])
    return np.array(pts, dtype=complex)


@dataclass
class CorrectionReport:
    moment: float
    beta_max: float
    lagrangian_defect: float
    pfaffian_margin: float
    min_sphere_z3: float
    skipped: int


def correction_form_defects(profile: CorrectionProfile, sphere: LiftedSphere, sphere_points: np.ndarray,
                            hyper_points: np.ndarray, h: float = 1e-6) -> CorrectionReport:
    """(a) omega' on tangent pairs of the configuration spheres; (b) Pfaffian margin on H."""
    cover = sphere.cover
    lag = 0.0
    min_r = np.inf
    for t in sphere_points:
        z = sphere(t)
        min_r = min(min_r, abs(z[2]))
        E = tangent_frame(t)
        d = []
        for k in range(2):
            a, b = t + h * E[:, k], t - h * E[:, k]
            d.append((sphere(a / np.linalg.norm(a), near=z[2]) - sphere(b / np.linalg.norm(b), near=z[2])) / (2 * h))
        for p in range(cover.m):
            # deck images are isometries fixing |z3|, so each L_k sees the same values
            da = cover.deck(d[0], p)
            db = cover.deck(d[1], p)
            lag = max(lag, abs(float(omega_prime(da, db, profile(abs(z[2]))))))
    margin = np.inf
    skipped = 0
    for z in hyper_points:
        F = hypersurface_frame(cover, z)
        if F is None:
            skipped += 1
            continue
        b = profile(abs(z[2]))
        M = np.array([[omega_prime(F[i], F[j], b) for j in range(4)] for i in range(4)])
        margin = min(margin, abs(pfaffian4(M)))
    rs = np.linspace(0.0, 3 / profile.eps, 20001)
    return CorrectionReport(profile.moment(), float(np.max(profile(rs))), lag, float(margin), float(min_r), skipped)


# --------------------------------------------------------------------------
# surgery and twisted fibres


def antipodal_chart_point(m: ModelTwist, x: np.ndarray, frame: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Chart-at-A(x) image of tau^{-1} applied to the fibre covector p at x.

    The chart uses the same frame vectors at -x as at x.
    """
    xi = twist_inverse(m, Covector(x, frame @ np.asarray(p, dtype=float)))
    P, q = chart_inverse(-x, frame, xi)
    return np.concatenate([P, q])


@dataclass
class SurgeryIdentityReport:
    chart_x_defect: float
    chart_ax_defect: float
    chart_ax_literal_defect: float
    window_defect: float
    handle_lagrangian_defect: float
    handle_match_defect: float
    untouched_defect: float


def surgery_graph_identity(profile: TwistProfile, rng: np.random.Generator, count: int = 100,
                           x=(0.0, 0.0, 1.0)) -> SurgeryIdentityReport:
    """Formula-level checks of the surgery description of tau^{-1} of a fibre.

    chart at x: tau^{-1}(x, p) has chart image (p, -psi(|p|) p/|p|).
    chart at A(x): the image P' = -p, q' = -(pi - psi) p/|p|, i.e. the graph
    q' = (pi - psi(|P'|)) P'/|P'|; the literal formula with the opposite sign
    is measured separately.  In the window |p| < eps this is (P', P').
    handle: after P -> rho(pi - |q|) P the chart-at-x image is swept by the
    curve (rho(pi - psi(s)) s, -psi(s)).
    """
    from .twist import twisted_fiber_graph_antipodal

    m = ModelTwist(profile)
    eps = profile.eps
    x = np.asarray(x, dtype=float)
    F = tangent_frame(x)
    d_x = d_ax = d_lit = d_win = d_match = d_untouched = 0.0
    curve = surgery_curve(profile)
    for _ in range(count):
        theta = rng.uniform(0, 2 * np.pi)
        direction = np.array([np.cos(theta), np.sin(theta)])
        s = rng.uniform(eps / 4 * 1.01, 2 * eps)
        p = s * direction
        img = inverse_twisted_fiber_point(m, x, F, p)
        d_x = max(d_x, float(np.max(np.abs(img - twisted_fiber_graph(m, p)))))
        if profile(s) > 1e-3:
            # keep away from the boundary of B_pi, where the chart at A(x) degenerates
            ax = antipodal_chart_point(m, x, F, p)
            Pp = ax[:2]
            psi = profile(np.linalg.norm(Pp))
            geo = np.concatenate([Pp, (np.pi - psi) * Pp / np.linalg.norm(Pp)])
            d_ax = max(d_ax, float(np.max(np.abs(ax - geo))))
            d_lit = max(d_lit, float(np.max(np.abs(ax - twisted_fiber_graph_antipodal(m, Pp)))))
            if s < eps:
                d_win = max(d_win, float(np.max(np.abs(ax[2:] - ax[:2]))))
        # handle identification in the chart at x
        P, q = img[:2], img[2:]
        deformed = np.concatenate([rho_cutoff(np.pi - np.linalg.norm(q), eps) * P, q])
        handle = _sweep(curve(s), theta)
        d_match = max(d_match, float(np.max(np.abs(deformed - handle))))
        far = (2 * eps + rng.uniform(0.0, 1.0)) * direction
        d_untouched = max(d_untouched, float(np.max(np.abs(twisted_fiber_graph(m, far) - np.concatenate([far, [0, 0]])))))
    patch = HandlePatch.grid(curve, 100, 100)
    return SurgeryIdentityReport(d_x, d_ax, d_lit, d_win, handle_lagrangian_defect(patch), d_match, d_untouched)


@dataclass
class BraidReport:
    quadrant_ok: bool
    graph_ok: bool
    min_distance_to_origin: float
    max_curve_gap: float
    interpolated_lagrangian_defect: float
    interpolated_embedded: bool


def braid_ingredients(profile: TwistProfile, stages: int = 5, n: int = 4001) -> BraidReport:
    """Compare the two surgery handles built from one fibre and one sphere.

    Writing (y1, y2) = ((w + z)/2, (w - z)/2), both handle curves are graphs
    z = Z(w) with Z(w) >= |w| (closed fourth quadrant), extended by the axes
    where Z(w) = |w|.  The straight-line family between them is then a family
    of graphs in the fourth quadrant avoiding the origin, so every stage is a
    handle curve.  The curves themselves differ; their largest gap is reported.
    """
    c1, c2 = surgery_curve(profile, 6 * profile.eps), surgery_curve_dual(profile, 6 * profile.eps)
    s = np.linspace(c1.s_min, c1.s_max, n)
    graphs = []
    ok_quadrant = ok_graph = True
    for c in (c1, c2):
        y = c(s)
        ok_quadrant &= bool(np.all(y[:, 0] >= -1e-15) and np.all(y[:, 1] <= 1e-15))
        w, z = y[:, 0] + y[:, 1], y[:, 0] - y[:, 1]
        dw = np.diff(w)
        mono = np.all(dw > 0) or np.all(dw < 0)
        ok_graph &= bool(mono)
        order = np.argsort(w)
        graphs.append((w[order], z[order]))
    lo = min(g[0][0] for g in graphs) - 1.0
    hi = max(g[0][-1] for g in graphs) + 1.0
    W = np.linspace(lo, hi, n)

    def Z(g):
        w, z = g
        out = np.interp(W, w, z)
        out = np.where(W < w[0], np.abs(W), out)
        return np.where(W > w[-1], np.abs(W), out)

    Z1, Z2 = Z(graphs[0]), Z(graphs[1])
    gap = float(np.max(np.abs(Z1 - Z2)))
    min_origin = np.inf
    lag = 0.0
    embedded = True
    for lam in np.linspace(0.0, 1.0, stages):
        Zl = (1 - lam) * Z1 + lam * Z2
        ok_quadrant &= bool(np.all(Zl >= np.abs(W) - 1e-12))
        y = np.stack([(W + Zl) / 2, (W - Zl) / 2], axis=-1)
        min_origin = min(min_origin, float(np.min(np.linalg.norm(y, axis=1))))
        ws, zs = W.copy(), Zl.copy()
        curve = ProfileCurve(lambda q, ws=ws, zs=zs: np.stack([(q + np.interp(q, ws, zs)) / 2,
                                                              (q - np.interp(q, ws, zs)) / 2], axis=-1),
                             lo, hi, max(abs(lo), abs(hi)), f"stage-{lam:g}")
        patch = HandlePatch.grid(curve, 200, 64)
        lag = max(lag, handle_lagrangian_defect(patch, h=1e-4))
        verdict = handle_embeddedness(patch)
        embedded &= verdict.embedded is True
    return BraidReport(ok_quadrant, ok_graph, min_origin, gap, lag, embedded)
