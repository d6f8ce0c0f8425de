"""Verification suites, check results and deterministic report documents."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .errors import LagknotError, ResolutionError

SUITES = ("maslov", "geometry", "twist", "intersections", "floer", "surgery")

# topic id -> what the check is about
ANCHORS = {
    "index.axioms": "Maslov index of path pairs: homotopy, conjugation, additivity, reversal, constancy, mod-1 rule",
    "index.model-pair": "index 1/2 of the model pair with positive second derivative",
    "index.change-of-index": "index offsets 0 and 1 at the minimum and maximum of the perturbing function",
    "index.rotation": "normalisation of the sign convention by a half rotation in R^2",
    "index.conjugate-points": "index of the Jacobi pair equals the weighted count of intersection dimensions",
    "geodesics.flow-laws": "geodesic flow and circle action group laws",
    "geodesics.morse": "Morse index of sphere geodesics from conjugate multiplicities",
    "geodesics.index": "coherent index of a constant path equals the Morse index",
    "geodesics.action": "action of a constant path equals the energy of its geodesic",
    "twist.identity-outside": "the model twist is the identity outside its support",
    "twist.symplectic": "the model twist is smooth and symplectic",
    "twist.zero-section": "the model twist is antipodal on the zero-section",
    "twist.power": "tau^(2r) equals the backward geodesic flow near the zero-section",
    "twist.order-two": "stages of the isotopy from tau^2 to the identity",
    "twist.fibre-graph": "chart image of a twisted fibre",
    "circles.radii": "intersection circles at radii (2j-1) pi",
    "circles.actions": "action gaps between consecutive circles",
    "circles.indices": "index gaps between consecutive circles",
    "circles.clean": "clean intersection along each circle",
    "circles.negative-control": "a closed geodesic of length 2 pi is rejected",
    "circles.disjoint": "untwisted fibres are disjoint",
    "floer.e1": "first page of the action spectral sequence",
    "floer.survivors": "entries that survive to the limit page",
    "floer.soundness": "survivors persist under every admissible boundary operator",
    "floer.nonvanishing": "Floer homology after 2r twists is nonzero",
    "floer.torus-rank": "rank identity for the two-circle filtration of the torus",
    "floer.parity": "total dimension parity is preserved",
    "surgery.handle": "Lagrangian handles are Lagrangian and asymptotically flat",
    "surgery.embedded": "handle embeddedness and its negative controls",
    "surgery.figure-eight": "figure-eight Lagrangian immersion with one double point",
    "surgery.linking": "linking number of the image of a meridian with the branch curve",
    "surgery.lift": "lift relation over the double point",
    "surgery.monodromy": "monodromy of lifts matches linking number",
    "surgery.deck": "deck transformation preserves the hypersurface",
    "surgery.am": "(A_m) intersection pattern of deck translates",
    "surgery.correction": "correction form: moment condition and nondegeneracy",
    "surgery.graph": "surgery description of an inverse twisted fibre",
    "surgery.braid": "the two surgery handles are handle-isotopic",
}

DEFAULT_TOLERANCES = {
    "symplectic": 1e-6,
    "flow": 1e-9,
    "jacobi": 1e-4,
    "table": 1e-9,
    "action": 1e-8,
    "handle": 1e-9,
    "graph": 1e-6,
    "lift": 1e-8,
    "moment": 1e-8,
    "stage": 1e-3,
}

SIG_DIGITS = 12


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if x == 0 or not np.isfinite(x):
        return float(x)
    return float(f"{x:.{digits}g}")


def _clean(obj):
    """Convert numpy scalars and arrays to JSON-ready values, rounding floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return round_sig(v)
    if isinstance(obj, complex):
        return [round_sig(obj.real), round_sig(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


@dataclass
class CheckResult:
    name: str
    paper_anchor: str
    status: str
    metrics: dict
    witness: object = None

    def __post_init__(self):
        if self.paper_anchor not in ANCHORS:
            raise ValueError(f"unknown anchor {self.paper_anchor!r}")
        if self.status not in ("pass", "fail", "inconclusive"):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "pass" and self.metrics.get("max_defect", 0.0) > self.metrics.get("tolerance", np.inf):
            raise ValueError(f"{self.name}: pass with defect above tolerance")


@dataclass
class Config:
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    r_max: int = 4
    timings: bool = False

    def echo(self) -> dict:
        return {"seed": self.seed, "tolerances": dict(sorted(self.tolerances.items())),
                "r_max": self.r_max}


@dataclass
class ReportDocument:
    tool_version: str
    seed: int
    config: dict
    results: list

    @property
    def summary(self) -> dict:
        out = {"pass": 0, "fail": 0, "inconclusive": 0}
        for r in self.results:
            out[r.status] += 1
        out["total"] = len(self.results)
        return out

    @property
    def failures(self) -> int:
        return self.summary["fail"]

    def to_dict(self) -> dict:
        return _clean({
            "tool_version": self.tool_version,
            "seed": self.seed,
            "config": self.config,
            "results": [asdict(r) for r in self.results],
            "summary": self.summary,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_markdown(self) -> str:
        lines = ["| check | anchor | status | max defect | tolerance |", "|---|---|---|---|---|"]
        for r in self.results:
            m = r.metrics
            lines.append(f"| {r.name} | {r.paper_anchor} | {r.status} | "
                         f"{_fmt(m.get('max_defect'))} | {_fmt(m.get('tolerance'))} |")
        s = self.summary
        lines.append("")
        lines.append(f"{s['pass']} passed, {s['fail']} failed, {s['inconclusive']} inconclusive")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def _result(name, anchor, ok, defect, tol, witness=None) -> CheckResult:
    return CheckResult(name, anchor, "pass" if ok else "fail",
                       {"max_defect": float(defect), "tolerance": float(tol)}, witness)


# --------------------------------------------------------------------------
# suites


def maslov_axiom_suite(rng: np.random.Generator, count: int) -> dict:
    """Counts of axiom violations over `count` random regular pairs (n cycles through 1, 2, 3)."""
    from .families import perturbed, random_pair, symplectic_path
    from .maslov import HalfInteger, intersection_dimension, maslov_index_pair

    bad = {"reversal": 0, "additivity": 0, "conjugation": 0, "constancy": 0, "mod_one": 0, "homotopy": 0}
    values = []
    for k in range(count):
        n = 1 + k % 3
        lam, lam2 = random_pair(rng, n, shared_start=(k % 2 == 1))
        mu = maslov_index_pair(lam, lam2)
        values.append(str(mu))
        bad["reversal"] += mu != -maslov_index_pair(lam2, lam)
        c = float(rng.uniform(0.2, 0.8))
        split = (maslov_index_pair(lam.restrict(0.0, c), lam2.restrict(0.0, c))
                 + maslov_index_pair(lam.restrict(c, 1.0), lam2.restrict(c, 1.0)))
        bad["additivity"] += mu != split
        psi = symplectic_path(rng, n)
        bad["conjugation"] += mu != maslov_index_pair(lam.conjugate(psi), lam2.conjugate(psi))
        bad["constancy"] += maslov_index_pair(lam, lam) != 0
        d0 = intersection_dimension(lam.frame(lam.a), lam2.frame(lam2.a))
        d1 = intersection_dimension(lam.frame(lam.b), lam2.frame(lam2.b))
        bad["mod_one"] += not (mu - HalfInteger(d0) + HalfInteger(d1)).is_integer
        bad["homotopy"] += mu != maslov_index_pair(perturbed(lam, rng), lam2)
    return {"violations": bad, "indices": values}


def suite_maslov(cfg: Config, rng: np.random.Generator) -> list:
    from .families import constant_jacobi, model_pair, random_jacobi, rotation_pair
    from .maslov import jacobi_pair, maslov_index_pair, maslov_via_conjugate_points

    out = []
    ax = maslov_axiom_suite(rng, 12)
    total = sum(ax["violations"].values())
    out.append(_result("maslov.axioms", "index.axioms", total == 0, total, 0, ax))
    mu = maslov_index_pair(*model_pair(1.0))
    out.append(_result("maslov.model-pair", "index.model-pair", float(mu) == 0.5, abs(float(mu) - 0.5), 0, str(mu)))
    lo, hi = maslov_index_pair(*model_pair(1.0)), maslov_index_pair(*model_pair(-1.0))
    offsets = [float(0.5 - float(lo)), float(0.5 - float(hi))]
    out.append(_result("maslov.change-of-index", "index.change-of-index", offsets == [0.0, 1.0],
                       abs(offsets[0]) + abs(offsets[1] - 1), 0, offsets))
    rot = maslov_index_pair(*rotation_pair())
    out.append(_result("maslov.rotation", "index.rotation", rot == 1, abs(float(rot) - 1), 0, str(rot)))
    pairs = []
    for R, n in ((np.zeros((1, 1)), 1), (-np.pi ** 2 * np.eye(1), 1), (-9 * np.pi ** 2 * np.eye(1), 1)):
        sol = constant_jacobi(n, R)
        pairs.append((str(maslov_index_pair(*jacobi_pair(sol, n, vectorized=True))),
                      str(maslov_via_conjugate_points(sol, n))))
    for k in range(4):
        n = 1 + k % 2
        sol = random_jacobi(rng, n)
        pairs.append((str(maslov_index_pair(*jacobi_pair(sol, n, vectorized=True))),
                      str(maslov_via_conjugate_points(sol, n))))
    mismatches = sum(a != b for a, b in pairs)
    expected_fixed = [p[1] for p in pairs[:3]] == ["1/2", "1", "3"]
    out.append(_result("maslov.oracle", "index.conjugate-points", mismatches == 0 and expected_fixed,
                       mismatches, 0, pairs))
    return out


def suite_geometry(cfg: Config, rng: np.random.Generator) -> list:
    from .sphere import (Geodesic, action_of_constant_path, circle_action, geodesic_flow, geodesic_index,
                         morse_index, random_covector)

    tol = cfg.tolerances["flow"]
    worst_flow = worst_action = 0.0
    for _ in range(50):
        xi = random_covector(rng, float(rng.uniform(0.1, 10)))
        s, t = rng.uniform(-2, 2, 2)
        worst_flow = max(worst_flow, geodesic_flow(xi, s + t).distance(geodesic_flow(geodesic_flow(xi, s), t)))
        worst_action = max(worst_action, circle_action(s + t, xi).distance(circle_action(s, circle_action(t, xi))),
                           circle_action(2 * np.pi, xi).distance(xi))
    out = [_result("geometry.flow-laws", "geodesics.flow-laws", max(worst_flow, worst_action) < tol,
                   max(worst_flow, worst_action), tol)]
    rows, ok = [], True
    for speed, expect in ((np.pi / 2, 0), (np.pi, 1), (3 * np.pi, 5), (5 * np.pi, 9)):
        xi = random_covector(rng, speed)
        m = morse_index(Geodesic(xi))
        i = geodesic_index(xi)
        rows.append([round_sig(speed), str(m), str(i)])
        ok &= m.twice_value == expect and i == m
    out.append(_result("geometry.morse-index", "geodesics.index", ok, 0 if ok else 1, 0, rows))
    tol_a = cfg.tolerances["action"]
    worst = 0.0
    for speed in (0.0, np.pi, 3 * np.pi, 5 * np.pi):
        xi = random_covector(rng, speed)
        worst = max(worst, abs(action_of_constant_path(xi) - 0.5 * speed ** 2))
    out.append(_result("geometry.action", "geodesics.action", worst < tol_a, worst, tol_a))
    return out


def suite_twist(cfg: Config, rng: np.random.Generator) -> list:
    from .sphere import Covector, circle_action, geodesic_flow, random_covector, tangent_frame
    from .twist import (ModelTwist, check_symplectic, inverse_twisted_fiber_point, local_jacobian,
                        make_flat_profile, make_profile, make_surgery_profile, square_isotopy_stage, twist,
                        twist_power, twisted_fiber_graph)

    out = []
    m2 = ModelTwist(make_profile(2))
    samples = [random_covector(rng, float(rng.uniform(4 * np.pi, 20))) for _ in range(20)]
    outside = max(twist(m2, xi).distance(xi) for xi in samples)
    out.append(_result("twist.identity-outside", "twist.identity-outside", outside == 0.0, outside, 0))
    tol = cfg.tolerances["symplectic"]
    samples = ([random_covector(rng, float(v)) for v in rng.uniform(0, 4 * np.pi, 150)]
               + [random_covector(rng, float(v)) for v in rng.uniform(0, 1e-3, 50)])
    d = check_symplectic(lambda z: twist(m2, z), samples)
    out.append(_result("twist.symplectic", "twist.symplectic", d < tol, d, tol, {"samples": len(samples)}))
    zs = max(twist(m2, Covector(u.u, np.zeros(3))).distance(Covector(-u.u, np.zeros(3)))
             for u in [random_covector(rng, 1.0) for _ in range(10)])
    anti = max(circle_action(-1.0 * np.pi, xi).distance(xi.antipode())
               for xi in [random_covector(rng, float(rng.uniform(0.1, 5))) for _ in range(10)])
    out.append(_result("twist.zero-section", "twist.zero-section", max(zs, anti) < 1e-12, max(zs, anti), 1e-12))
    tol_f = cfg.tolerances["flow"]
    worst = 0.0
    for r in range(1, cfg.r_max + 1):
        m = ModelTwist(make_profile(r))
        for _ in range(10):
            xi = random_covector(rng, float(rng.uniform(0, m.profile.delta)))
            worst = max(worst, twist_power(m, 2 * r, xi).distance(geodesic_flow(xi, -1.0)))
    out.append(_result("twist.power", "twist.power", worst < tol_f, worst, tol_f, {"r_max": cfg.r_max}))
    flat = ModelTwist(make_flat_profile(1.0))
    dets = []
    for k in range(20):
        s, sc = float(rng.uniform()), float(rng.uniform())
        xi = random_covector(rng, float(rng.uniform(0.01, 1.2)))
        dets.append(abs(np.linalg.det(local_jacobian(lambda z: square_isotopy_stage(flat, s, sc, z), xi))))
    xi = random_covector(rng, 0.5)
    ends = max(square_isotopy_stage(flat, 0, 1, xi).distance(twist_power(flat, 2, xi)),
               square_isotopy_stage(flat, 1, 0, xi).distance(xi))
    bound = cfg.tolerances["stage"]
    out.append(CheckResult("twist.order-two", "twist.order-two",
                           "pass" if min(dets) > bound and ends < 1e-12 else "fail",
                           {"max_defect": float(ends), "tolerance": 1e-12, "min_abs_det": float(min(dets)),
                            "det_bound": bound}))
    ms = ModelTwist(make_surgery_profile(0.3))
    x = np.array([0.0, 0.0, 1.0])
    F = tangent_frame(x)
    worst = 0.0
    for _ in range(50):
        p = rng.normal(size=2)
        p = p / np.linalg.norm(p) * rng.uniform(0.01, 0.7)
        worst = max(worst, float(np.max(np.abs(inverse_twisted_fiber_point(ms, x, F, p) - twisted_fiber_graph(ms, p)))))
    tol_g = cfg.tolerances["graph"]
    out.append(_result("twist.fibre-graph", "twist.fibre-graph", worst < tol_g, worst, tol_g))
    return out


def suite_intersections(cfg: Config, rng: np.random.Generator) -> list:
    from .intersections import (action_check, action_gaps, compute_circles, expected_action_gap, index_gaps,
                                index_table, synthetic_table, verify_clean)

    out = []
    tol = cfg.tolerances["table"]
    rad = gap = 0.0
    idx_ok = True
    rows = {}
    for r in range(1, cfg.r_max + 1):
        t = compute_circles(r)
        rad = max(rad, max(abs(c.radius - (2 * c.j - 1) * np.pi) for c in t.circles))
        g = action_gaps(t)
        gap = max([gap] + [abs(x - expected_action_gap(j)) for j, x in enumerate(g, start=2)])
        it = index_table(t)
        rows[str(r)] = it
        idx_ok &= all(v == 2 for v in index_gaps(it)) and it[0][1] == 2 and len(it) == r
    out.append(_result("intersections.radii", "circles.radii", rad < tol, rad, tol))
    out.append(_result("intersections.action-gaps", "circles.actions", gap < tol, gap, tol))
    out.append(_result("intersections.index-gaps", "circles.indices", idx_ok, 0 if idx_ok else 1, 0, rows))
    tol_a = cfg.tolerances["action"]
    a = action_check(compute_circles(cfg.r_max))
    out.append(_result("intersections.action-energy", "circles.actions", a < tol_a, a, tol_a))
    tol_j = cfg.tolerances["jacobi"]
    worst, ok = 0.0, True
    for r in range(1, min(cfg.r_max, 3) + 1):
        rep = verify_clean(compute_circles(r), 8, tol_j)
        worst = max(worst, rep.max_jacobi_defect)
        ok &= rep.passed
    out.append(_result("intersections.clean", "circles.clean", ok, worst, tol_j, {"samples_per_circle": 8}))
    neg = verify_clean(synthetic_table(2, [2 * np.pi]), 4, tol_j)
    c = neg.circles[0]
    out.append(_result("intersections.negative-control", "circles.negative-control", not neg.passed,
                       0 if not neg.passed else 1, 0,
                       {"multiplicity_ok": c.multiplicity_ok, "membership_ok": c.membership_ok,
                        "membership_defect": c.max_membership_defect}))
    empty = compute_circles(0)
    out.append(_result("intersections.disjoint", "circles.disjoint", len(empty.circles) == 0, len(empty.circles), 0))
    return out


def suite_floer(cfg: Config, rng: np.random.Generator) -> list:
    from .floer import (BigradedPage, e1_page_from_indices, hf_nonvanishing, parity_check, random_two_level_complex,
                        rank_feasibility_t2, survives_to_infinity, survivor_soundness, two_level_ranks)
    from .intersections import compute_circles, index_table

    out = []
    ok = True
    pages = {}
    for r in range(1, cfg.r_max + 1):
        page = e1_page_from_indices(index_table(compute_circles(r)))
        expected = {(p, q) for p in range(1, r + 1) for q in (p, p + 1)}
        ok &= set(page.support) == expected and all(v == 1 for v in page.entries.values())
        pages[r] = page
    out.append(_result("floer.e1-page", "floer.e1", ok, 0 if ok else 1, 0,
                       {str(r): [list(c) for c in p.support] for r, p in pages.items()}))
    surv_ok = all(survives_to_infinity(p, (1, 1)).survives and survives_to_infinity(p, (r, r + 1)).survives
                  for r, p in pages.items())
    out.append(_result("floer.survivors", "floer.survivors", surv_ok, 0 if surv_ok else 1, 0))
    sound = [survivor_soundness(pages[r], r) for r in range(1, cfg.r_max + 1)]
    s_ok = all(s.sound for s in sound)
    out.append(_result("floer.soundness", "floer.soundness", s_ok, 0 if s_ok else 1, 0,
                       {str(s.r): s.operators for s in sound}))
    nv = [hf_nonvanishing(r) for r in range(0, cfg.r_max + 1)]
    nv_ok = (not nv[0].nonzero) and all(x.nonzero and (1, 1) in x.witnesses for x in nv[1:])
    out.append(_result("floer.nonvanishing", "floer.nonvanishing", nv_ok, 0 if nv_ok else 1, 0,
                       {str(x.r): x.nonzero for x in nv}))
    feas = rank_feasibility_t2(4, 2)
    bad_les = 0
    for _ in range(50):
        n0, n1 = (int(v) for v in rng.integers(0, 6, 2))
        t = two_level_ranks(*random_two_level_complex(rng, n0, n1))
        bad_les += t.total != t.sub + t.quotient - 2 * t.connecting
    t_ok = feas == {(2, 0)} and bad_les == 0
    out.append(_result("floer.torus-rank", "floer.torus-rank", t_ok, bad_les, 0, sorted(feas)))
    par = [parity_check(pages[2]), parity_check(BigradedPage({})), parity_check(BigradedPage({(1, 1): 1}))]
    p_ok = par == [False, False, True]
    out.append(_result("floer.parity", "floer.parity", p_ok, 0 if p_ok else 1, 0, par))
    return out


def suite_surgery(cfg: Config, rng: np.random.Generator) -> list:
    from .surgery import (BranchedCover, HandlePatch, antipodal_curve, axes_curve, braid_ingredients,
                          build_am_configuration, corner_curve, correction_form_defects, deck_invariance,
                          expected_am_counts, figure_eight_checks, figure_eight_meridian_loop,
                          handle_asymptotic_defect, handle_embeddedness, handle_lagrangian_defect,
                          hypersurface_samples, lift_relation, lifted_sphere, linking_number, loop_closes,
                          make_correction_profile, sphere_samples, surgery_graph_identity)
    from .twist import make_surgery_profile

    out = []
    tol_h = cfg.tolerances["handle"]
    patch = HandlePatch.grid(corner_curve(), 100, 100)
    lag = handle_lagrangian_defect(patch)
    asym = handle_asymptotic_defect(patch)
    jit = handle_lagrangian_defect(HandlePatch.grid(corner_curve(), 100, 100, jitter=0.1))
    out.append(CheckResult("surgery.handle", "surgery.handle",
                           "pass" if lag < tol_h and asym < 1e-10 and jit > 1e-3 else "fail",
                           {"max_defect": float(lag), "tolerance": tol_h, "asymptotic_defect": float(asym),
                            "jitter_defect": float(jit)}))
    verdicts = [handle_embeddedness(HandlePatch.grid(c, 100, 100)).label
                for c in (corner_curve(), antipodal_curve(), axes_curve())]
    e_ok = verdicts == ["embedded", "collision", "collision"]
    out.append(_result("surgery.embedded", "surgery.embedded", e_ok, 0 if e_ok else 1, 0, verdicts))
    fe = figure_eight_checks(sphere_samples(100, 100))
    dp_ok = np.allclose(fe.double_point[0], fe.double_point[1], atol=1e-15)
    f_ok = dp_ok and fe.lagrangian_defect < tol_h and fe.min_rank_sv > 0.1 and fe.branch_margin > 0.1
    out.append(CheckResult("surgery.figure-eight", "surgery.figure-eight", "pass" if f_ok else "fail",
                           {"max_defect": fe.lagrangian_defect, "tolerance": tol_h, "min_rank_sv": fe.min_rank_sv,
                            "branch_margin": fe.branch_margin}))
    lk = linking_number(figure_eight_meridian_loop())
    lk2 = linking_number(figure_eight_meridian_loop(turns=2))
    out.append(_result("surgery.linking", "surgery.linking", lk == 1, abs(lk - 1), 0,
                       {"meridian": lk, "double_meridian": lk2}))
    tol_l = cfg.tolerances["lift"]
    rels = {m: lift_relation(BranchedCover(m)) for m in (2, 3, 4)}
    sig = max(r.defect_sigma for r in rels.values())
    out.append(_result("surgery.lift-relation", "surgery.lift", sig < tol_l, sig, tol_l,
                       {str(m): {"deck_power": r.deck_power, "sigma_inverse_defect": r.defect_sigma_inverse}
                        for m, r in rels.items()}))
    mono_ok = all(r.deck_power == lk for r in rels.values())
    closes = {str(m): [loop_closes(BranchedCover(m), k) for k in range(m + 2)] for m in (2, 3)}
    mono_ok &= all(c == [k % (int(m) + 1) == 0 for k in range(int(m) + 2)] for m, c in closes.items())
    out.append(_result("surgery.monodromy", "surgery.monodromy", mono_ok, 0 if mono_ok else 1, 0, closes))
    am = {m: build_am_configuration(m) for m in (2, 3, 4)}
    am_ok = all(c.counts == expected_am_counts(m) for m, c in am.items())
    angle = min(c.min_transversality for c in am.values())
    out.append(CheckResult("surgery.am", "surgery.am", "pass" if am_ok and angle > 0.1 else "fail",
                           {"max_defect": 0.0 if am_ok else 1.0, "tolerance": 0.0, "min_transversality": angle},
                           {str(m): c.counts for m, c in am.items()}))
    cover = BranchedCover(3)
    sphere = lifted_sphere(cover)
    pts = sphere(sphere_samples(20, 20))
    res, dist = deck_invariance(cover, pts)
    out.append(_result("surgery.deck", "surgery.deck", max(res, dist) < 1e-10, max(res, dist), 1e-10))
    prof = make_correction_profile(0.2)
    hyper = np.vstack([hypersurface_samples(cover, rng, 40),
                       hypersurface_samples(cover, rng, 20, [0.05, 1.0, 3.0, 7.0, 12.0])])
    rep = correction_form_defects(prof, sphere, sphere_samples(20, 20), hyper)
    tol_m = cfg.tolerances["moment"]
    c_ok = abs(rep.moment) < tol_m and rep.lagrangian_defect < tol_m and rep.pfaffian_margin > 0 and rep.beta_max <= 1
    out.append(CheckResult("surgery.correction", "surgery.correction", "pass" if c_ok else "fail",
                           {"max_defect": max(abs(rep.moment), rep.lagrangian_defect), "tolerance": tol_m,
                            "pfaffian_margin": rep.pfaffian_margin, "min_sphere_z3": rep.min_sphere_z3}))
    tol_g = cfg.tolerances["graph"]
    g = surgery_graph_identity(make_surgery_profile(0.3), rng)
    worst = max(g.chart_x_defect, g.chart_ax_defect, g.window_defect, g.handle_match_defect, g.untouched_defect)
    out.append(CheckResult("surgery.graph", "surgery.graph",
                           "pass" if worst < tol_g and g.handle_lagrangian_defect < tol_h else "fail",
                           {"max_defect": worst, "tolerance": tol_g,
                            "handle_lagrangian_defect": g.handle_lagrangian_defect,
                            "literal_antipodal_chart_defect": g.chart_ax_literal_defect}))
    b = braid_ingredients(make_surgery_profile(0.3))
    b_ok = b.quadrant_ok and b.graph_ok and b.interpolated_embedded and b.min_distance_to_origin > 0
    out.append(CheckResult("surgery.braid", "surgery.braid", "pass" if b_ok else "fail",
                           {"max_defect": b.interpolated_lagrangian_defect, "tolerance": tol_h,
                            "curve_gap": b.max_curve_gap, "min_distance_to_origin": b.min_distance_to_origin}))
    return out


SUITE_FUNCTIONS: dict[str, Callable] = {
    "maslov": suite_maslov,
    "geometry": suite_geometry,
    "twist": suite_twist,
    "intersections": suite_intersections,
    "floer": suite_floer,
    "surgery": suite_surgery,
}


def run_suite(suite: str, cfg: Config | None = None) -> ReportDocument:
    """Run one suite (or all) with a fresh generator per suite seeded from cfg.seed."""
    cfg = cfg or Config()
    if suite == "all":
        names = list(SUITES)
    elif suite in SUITE_FUNCTIONS:
        names = [suite]
    else:
        raise KeyError(suite)
    results = []
    for k, name in enumerate(names):
        rng = np.random.default_rng([cfg.seed, SUITES.index(name)])
        start = time.perf_counter()
        try:
            batch = SUITE_FUNCTIONS[name](cfg, rng)
        except ResolutionError as exc:
            batch = [CheckResult(f"{name}.error", _first_anchor(name), "inconclusive",
                                 {"max_defect": float("inf"), "tolerance": 0.0}, str(exc))]
        except LagknotError as exc:
            batch = [CheckResult(f"{name}.error", _first_anchor(name), "fail",
                                 {"max_defect": float("inf"), "tolerance": 0.0}, str(exc))]
        if cfg.timings:
            elapsed = (time.perf_counter() - start) * 1e3
            for r in batch:
                r.metrics["runtime_ms"] = elapsed / len(batch)
        results.extend(batch)
    return ReportDocument(__version__, cfg.seed, cfg.echo(), results)


def _first_anchor(suite: str) -> str:
    prefix = {"maslov": "index.", "geometry": "geodesics.", "twist": "twist.", "intersections": "circles.",
              "floer": "floer.", "surgery": "surgery."}[suite]
    return next(k for k in ANCHORS if k.startswith(prefix))


# --------------------------------------------------------------------------
# tables


def action_rows(r: int) -> list[dict]:
    from .intersections import compute_circles

    t = compute_circles(r)
    return [{"j": c.j, "radius": c.radius, "action": c.action, "index_prime": c.index_prime} for c in t.circles]


def index_rows(r: int) -> list[dict]:
    from .intersections import compute_circles, index_table

    return [{"j": j, "index_prime": i} for j, i in index_table(compute_circles(r))]


def e1_rows(r: int) -> list[dict]:
    from .floer import e1_page_from_indices
    from .intersections import compute_circles, index_table

    page = e1_page_from_indices(index_table(compute_circles(r)))
    return [{"p": p, "q": q, "dim": page[(p, q)]} for p, q in page.support]


TABLE_COLUMNS = {
    "actions": ["j", "radius", "action", "index_prime"],
    "indices": ["j", "index_prime"],
    "e1page": ["p", "q", "dim"],
}


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def emit_table(kind: str, r: int, fmt: str) -> str:
    if kind not in TABLE_COLUMNS:
        raise KeyError(kind)
    if fmt not in ("json", "csv", "md"):
        raise ValueError(fmt)
    if r < 1:
        raise ValueError("r must be at least 1")
    rows = {"actions": action_rows, "indices": index_rows, "e1page": e1_rows}[kind](r)
    cols = TABLE_COLUMNS[kind]
    if fmt == "json":
        return json.dumps({"kind": kind, "r": r, "rows": _clean(rows)}, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        lines = [",".join(cols)] + [",".join(_cell(row[c]) for c in cols) for row in rows]
        return "\n".join(lines) + "\n"
    if kind == "e1page":
        return _e1_grid(rows, r)
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    lines += ["| " + " | ".join(_cell(row[c]) for c in cols) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _e1_grid(rows, r: int) -> str:
    """Markdown grid with q descending down the rows and p across the columns."""
    cells = {(row["p"], row["q"]) for row in rows}
    qs = sorted({q for _, q in cells}, reverse=True)
    lines = ["| q \\ p | " + " | ".join(str(p) for p in range(1, r + 1)) + " |",
             "|---|" + "---|" * r]
    for q in qs:
        lines.append(f"| {q} | " + " | ".join("Z/2" if (p, q) in cells else "." for p in range(1, r + 1)) + " |")
    return "\n".join(lines) + "\n"
