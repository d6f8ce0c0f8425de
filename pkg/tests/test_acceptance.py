"""Acceptance criteria 1-9.  Each test records a single PASS/FAIL line, shown in the terminal summary."""

import subprocess
import sys
import time

import numpy as np

from lagknot.families import model_pair, random_jacobi
from lagknot.floer import (
    e1_page_from_indices,
    hf_nonvanishing,
    rank_feasibility_t2,
    survives_to_infinity,
    survivor_soundness,
)
from lagknot.intersections import (
    action_check,
    action_gaps,
    circle_geodesic,
    compute_circles,
    expected_action_gap,
    index_gaps,
    index_table,
    synthetic_table,
    verify_clean,
)
from lagknot.maslov import HalfInteger, jacobi_pair, maslov_index_pair, maslov_via_conjugate_points
from lagknot.report import maslov_axiom_suite
from lagknot.sphere import Covector, circle_action, geodesic_flow, morse_index, random_covector
from lagknot.surgery import (
    BranchedCover,
    HandlePatch,
    build_am_configuration,
    corner_curve,
    correction_form_defects,
    expected_am_counts,
    figure_eight,
    figure_eight_checks,
    figure_eight_meridian_loop,
    handle_lagrangian_defect,
    hypersurface_samples,
    lift_relation,
    lifted_sphere,
    linking_number,
    make_correction_profile,
    sphere_samples,
    surgery_graph_identity,
)
from lagknot.twist import (
    ModelTwist,
    check_symplectic,
    local_jacobian,
    make_flat_profile,
    make_profile,
    make_surgery_profile,
    square_isotopy_stage,
    twist,
    twist_power,
)


def _conclude(record, number, checks: dict, elapsed: float, limit: float, extra: str = ""):
    checks = dict(checks)
    checks[f"time<{limit:g}s"] = elapsed < limit
    failed = [k for k, v in checks.items() if not v]
    ok = not failed
    detail = f"{elapsed:.1f}s"
    if extra:
        detail += f"  {extra}"
    if failed:
        detail += f"  failed: {', '.join(failed)}"
    record(number, ok, detail)
    assert ok, detail


def test_criterion_1_maslov_axioms(record_criterion):
    start = time.perf_counter()
    res = maslov_axiom_suite(np.random.default_rng(2024), 50)
    elapsed = time.perf_counter() - start
    checks = {name: count == 0 for name, count in res["violations"].items()}
    _conclude(record_criterion, 1, checks, elapsed, 10.0, f"50 pairs, violations {res['violations']}")


def test_criterion_2_model_pair(record_criterion):
    start = time.perf_counter()
    mu_min = maslov_index_pair(*model_pair(1.0))
    mu_max = maslov_index_pair(*model_pair(-1.0))
    half = HalfInteger(1)
    # i_H = i - mu and i' = i - 1/2, so the offset i_H - i' is 1/2 - mu
    offsets = (half - mu_min, half - mu_max)
    elapsed = time.perf_counter() - start
    checks = {"mu=1/2": mu_min == half, "offset_min=0": offsets[0] == 0, "offset_max=1": offsets[1] == 1}
    _conclude(record_criterion, 2, checks, elapsed, 1.0, f"mu={mu_min}, offsets=({offsets[0]}, {offsets[1]})")


def test_criterion_3_conjugate_point_oracle(record_criterion):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    mismatches = []
    values = []
    for k in range(20):
        n = 1 + k % 2
        sol = random_jacobi(rng, n)
        a = maslov_index_pair(*jacobi_pair(sol, n, vectorized=True))
        b = maslov_via_conjugate_points(sol, n)
        values.append(str(b))
        if a != b:
            mismatches.append((k, str(a), str(b)))
    elapsed = time.perf_counter() - start
    _conclude(record_criterion, 3, {"20 families agree": not mismatches}, elapsed, 30.0,
              f"indices {values}")


def test_criterion_4_tables(record_criterion):
    start = time.perf_counter()
    radius_err = gap_err = action_err = 0.0
    index_ok = morse_ok = True
    for r in range(1, 7):
        table = compute_circles(r)
        assert len(table.circles) == r
        radius_err = max(radius_err, max(abs(c.radius - (2 * c.j - 1) * np.pi) for c in table.circles))
        gaps = action_gaps(table)
        gap_err = max([gap_err] + [abs(g - expected_action_gap(j)) for j, g in enumerate(gaps, start=2)])
        index_ok &= all(g == 2 for g in index_gaps(index_table(table)))
        morse_ok &= all(morse_index(circle_geodesic(c)) == HalfInteger(4 * c.j - 3) for c in table.circles)
        action_err = max(action_err, action_check(table))
    elapsed = time.perf_counter() - start
    checks = {"radii": radius_err < 1e-9, "action gaps": gap_err < 1e-9, "index gaps": index_ok,
              "morse 2j-3/2": morse_ok, "action=radius^2/2": action_err < 1e-8}
    _conclude(record_criterion, 4, checks, elapsed, 30.0,
              f"radius err {radius_err:.2e}, gap err {gap_err:.2e}, action err {action_err:.2e}")


def test_criterion_5_clean_intersections(record_criterion):
    start = time.perf_counter()
    worst = 0.0
    passed = True
    for r in range(1, 5):
        rep = verify_clean(compute_circles(r), samples_per_circle=32, tol=1e-4)
        worst = max(worst, rep.max_jacobi_defect)
        passed &= rep.passed
    control = verify_clean(synthetic_table(2, [2 * np.pi]), samples_per_circle=8, tol=1e-4)
    elapsed = time.perf_counter() - start
    checks = {"r<=4 clean": passed, "2pi control rejected": not control.passed}
    _conclude(record_criterion, 5, checks, elapsed, 60.0,
              f"max Jacobi defect {worst:.2e}, control membership defect "
              f"{control.circles[0].max_membership_defect:.2f}")


def test_criterion_6_twist(record_criterion):
    rng = np.random.default_rng(11)
    start = time.perf_counter()
    model = ModelTwist(make_profile(2))
    samples = ([random_covector(rng, float(v)) for v in rng.uniform(1e-3, 4 * np.pi + 1, 900)]
               + [random_covector(rng, float(v)) for v in rng.uniform(0.0, 1e-3, 100)])
    sym = check_symplectic(lambda z: twist(model, z), samples)
    power = 0.0
    for r in range(1, 5):
        m = ModelTwist(make_profile(r))
        for _ in range(25):
            xi = random_covector(rng, float(rng.uniform(0, m.profile.delta)))
            power = max(power, twist_power(m, 2 * r, xi).distance(geodesic_flow(xi, -1.0)))
    anti = 0.0
    for _ in range(50):
        xi = random_covector(rng, float(rng.uniform(0.01, 10)))
        anti = max(anti, circle_action(np.pi, xi).distance(Covector(-xi.u, -xi.v)))
    flat = ModelTwist(make_flat_profile(1.0))
    dets = []
    for _ in range(100):
        s, scale = rng.uniform(0, 1, 2)
        xi = random_covector(rng, float(rng.uniform(0.01, 1.5)))
        dets.append(abs(np.linalg.det(local_jacobian(lambda z: square_isotopy_stage(flat, s, scale, z), xi))))
    elapsed = time.perf_counter() - start
    checks = {"symplectic": sym < 1e-6, "tau^2r=phi_-1": power < 1e-9, "antipodal": anti < 1e-12,
              "stages regular": min(dets) > 1e-3}
    _conclude(record_criterion, 6, checks, elapsed, 60.0,
              f"symplectic {sym:.2e}, power {power:.2e}, antipodal {anti:.2e}, min |det| {min(dets):.3f}")


def test_criterion_7_floer(record_criterion):
    start = time.perf_counter()
    pages_ok = surv_ok = True
    for r in range(1, 7):
        page = e1_page_from_indices(index_table(compute_circles(r)))
        expected = {(p, q): 1 for p in range(1, r + 1) for q in (p, p + 1)}
        pages_ok &= {c: page[c] for c in page.support} == expected
        surv_ok &= survives_to_infinity(page, (1, 1)).survives and survives_to_infinity(page, (r, r + 1)).survives
    ops = {}
    sound = True
    for r in range(1, 5):
        res = survivor_soundness(e1_page_from_indices(index_table(compute_circles(r))), r)
        ops[r] = res.operators
        sound &= res.sound
    feas = rank_feasibility_t2(4, 2)
    nv = {r: hf_nonvanishing(r).nonzero for r in range(0, 7)}
    elapsed = time.perf_counter() - start
    checks = {"E1 pages": pages_ok, "survivors": surv_ok, "soundness": sound, "feasibility": feas == {(2, 0)},
              "nonvanishing": nv == {0: False, **{r: True for r in range(1, 7)}}}
    _conclude(record_criterion, 7, checks, elapsed, 120.0, f"operators enumerated {ops}")


def test_criterion_8_surgery(record_criterion):
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    handle = handle_lagrangian_defect(HandlePatch.grid(corner_curve(), 100, 100))
    dp = [figure_eight(np.array([s, 0.0, 0.0])) for s in (1.0, -1.0)]
    fe = figure_eight_checks(sphere_samples(100, 100))
    link = linking_number(figure_eight_meridian_loop())
    lifts = {m: lift_relation(BranchedCover(m)) for m in (2, 3, 4)}
    counts = {m: build_am_configuration(m).counts for m in (2, 3, 4)}
    cover = BranchedCover(3)
    prof = make_correction_profile(0.2)
    hyper = np.vstack([hypersurface_samples(cover, rng, 60),
                       hypersurface_samples(cover, rng, 40, [0.05, 1.0, 3.0, 7.0, 12.0])])
    corr = correction_form_defects(prof, lifted_sphere(cover), sphere_samples(20, 20), hyper)
    graph = surgery_graph_identity(make_surgery_profile(0.3), rng)
    graph_defect = max(graph.chart_x_defect, graph.chart_ax_defect, graph.window_defect,
                       graph.handle_match_defect, graph.untouched_defect)
    elapsed = time.perf_counter() - start
    checks = {
        "handle": handle < 1e-9,
        "double point (0,0)": all(np.all(p == 0) for p in dp),
        "omega0": fe.lagrangian_defect < 1e-9,
        "linking number 1": link == 1,
        "lift relation sigma": all(x.defect_sigma < 1e-8 for x in lifts.values()),
        "A_m counts": all(counts[m] == expected_am_counts(m) for m in counts),
        "beta moment": abs(corr.moment) < 1e-8,
        "pfaffian margin": corr.pfaffian_margin > 0 and corr.skipped == 0,
        "graph identity": graph_defect < 1e-6,
    }
    lift_info = {m: x.deck_power for m, x in lifts.items()}
    _conclude(record_criterion, 8, checks, elapsed, 180.0,
              f"linking {link}, lift deck powers {lift_info} (sigma^-1 defect "
              f"{max(x.defect_sigma_inverse for x in lifts.values()):.1e}), handle {handle:.1e}, "
              f"moment {corr.moment:.1e}, pfaffian {corr.pfaffian_margin:.3f}, graph {graph_defect:.1e}")


def test_criterion_9_determinism(record_criterion, tmp_path):
    start = time.perf_counter()
    outputs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        proc = subprocess.run([sys.executable, "-m", "lagknot", "verify", "all", "--seed", "0", "--out", str(path)],
                              capture_output=True, text=True)
        assert proc.returncode in (0, 1), proc.stderr
        outputs.append(path.read_bytes())
    elapsed = time.perf_counter() - start
    _conclude(record_criterion, 9, {"byte-identical": outputs[0] == outputs[1]}, elapsed, 600.0,
              f"{len(outputs[0])} bytes per report")
