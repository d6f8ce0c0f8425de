import numpy as np
import pytest

from lagknot.surgery import (
    BranchedCover,
    HandlePatch,
    antipodal_curve,
    axes_curve,
    braid_ingredients,
    build_am_configuration,
    corner_curve,
    correction_form_defects,
    deck_invariance,
    expected_am_counts,
    figure_eight,
    figure_eight_checks,
    figure_eight_meridian_loop,
    handle_asymptotic_defect,
    handle_embeddedness,
    handle_lagrangian_defect,
    hypersurface_samples,
    lift_relation,
    lifted_sphere,
    linking_number,
    loop_closes,
    make_correction_profile,
    pfaffian4,
    sphere_samples,
    surgery_curve,
    surgery_graph_identity,
    write_cloud_csv,
)
from lagknot.twist import make_surgery_profile


def test_corner_handle_is_lagrangian_and_embedded():
    patch = HandlePatch.grid(corner_curve(), 100, 100)
    assert handle_lagrangian_defect(patch) < 1e-9
    assert handle_asymptotic_defect(patch) < 1e-10
    assert handle_embeddedness(patch).label == "embedded"


def test_coarse_grid_is_not_a_collision():
    # the neck is narrower than the grid spacing, so the scan must not decide
    assert handle_embeddedness(HandlePatch.grid(corner_curve(), 40, 40)).label == "inconclusive"


def test_handle_negative_controls():
    assert handle_lagrangian_defect(HandlePatch.grid(corner_curve(), 60, 60, jitter=0.1)) > 1e-3
    for curve in (antipodal_curve(), axes_curve()):
        v = handle_embeddedness(HandlePatch.grid(curve, 60, 60))
        assert v.label == "collision"
        (s1, t1), (s2, t2) = v.pair
        assert np.allclose(HandlePatch.grid(curve, 2, 2).evaluate(s1, t1),
                           HandlePatch.grid(curve, 2, 2).evaluate(s2, t2), atol=1e-9)


def test_surgery_curve_handle():
    patch = HandlePatch.grid(surgery_curve(make_surgery_profile(0.3)), 60, 60)
    assert handle_lagrangian_defect(patch) < 1e-9


def test_figure_eight_double_point():
    a = figure_eight(np.array([1.0, 0.0, 0.0]))
    b = figure_eight(np.array([-1.0, 0.0, 0.0]))
    assert np.all(a == 0) and np.all(b == 0)
    rep = figure_eight_checks(sphere_samples(40, 40))
    assert rep.lagrangian_defect < 1e-9
    assert rep.min_rank_sv > 0.1
    assert rep.branch_margin > 0.1


def test_linking_numbers_are_consistent():
    one = linking_number(figure_eight_meridian_loop())
    two = linking_number(figure_eight_meridian_loop(turns=2))
    assert abs(one) == 1
    assert two == 2 * one


def test_lifts_over_the_double_point():
    for m in (1, 2, 3):
        rel = lift_relation(BranchedCover(m))
        assert rel.deck_power is not None
        # the lift monodromy and the meridian linking number agree
        expected = linking_number(figure_eight_meridian_loop()) % (m + 1)
        assert rel.deck_power % (m + 1) == expected


@pytest.mark.parametrize("m", [1, 2, 3])
def test_monodromy_order(m):
    closes = [loop_closes(BranchedCover(m), k) for k in range(m + 2)]
    assert closes == [k % (m + 1) == 0 for k in range(m + 2)]


def test_deck_transformation_preserves_hypersurface():
    cover = BranchedCover(2)
    rng = np.random.default_rng(0)
    pts = hypersurface_samples(cover, rng, 30)
    res, dist = deck_invariance(cover, pts)
    assert res < 1e-10 and dist < 1e-10
    assert np.max(np.abs(cover.deck(pts, cover.order) - pts)) < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_am_counts(m):
    conf = build_am_configuration(m)
    assert conf.counts == expected_am_counts(m)
    assert conf.min_transversality > 0.1


def test_expected_am_shape():
    assert expected_am_counts(3) == [[None, 1, 0], [1, None, 1], [0, 1, None]]


def test_cloud_csv(tmp_path):
    cover = BranchedCover(2)
    pts = lifted_sphere(cover)(sphere_samples(5, 5))
    path = tmp_path / "cloud.csv"
    write_cloud_csv(path, [pts, cover.deck(pts)])
    lines = path.read_text().splitlines()
    assert len(lines) == 2 * len(pts) + 1
    assert lines[1].startswith("1,0,")


def test_correction_form():
    prof = make_correction_profile(0.2)
    assert abs(prof.moment()) < 1e-8
    cover = BranchedCover(2)
    rng = np.random.default_rng(4)
    hyper = hypersurface_samples(cover, rng, 30)
    rep = correction_form_defects(prof, lifted_sphere(cover), sphere_samples(12, 12), hyper)
    assert rep.lagrangian_defect < 1e-8
    assert rep.pfaffian_margin > 0
    assert rep.beta_max <= 1.0


def test_pfaffian_of_standard_form():
    J = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)
    assert pfaffian4(J) == 1.0
    assert pfaffian4(J) ** 2 == pytest.approx(np.linalg.det(J))


def test_surgery_graph_identity():
    rep = surgery_graph_identity(make_surgery_profile(0.3), np.random.default_rng(2), count=40)
    assert max(rep.chart_x_defect, rep.chart_ax_defect, rep.window_defect,
               rep.handle_match_defect, rep.untouched_defect) < 1e-6
    # the literal minus sign in the antipodal chart does not describe the fibre
    assert rep.chart_ax_literal_defect > 1.0


def test_braid_handles_are_isotopic():
    rep = braid_ingredients(make_surgery_profile(0.3), stages=3, n=1501)
    assert rep.quadrant_ok and rep.graph_ok and rep.interpolated_embedded
    assert rep.min_distance_to_origin > 0
    assert rep.interpolated_lagrangian_defect < 1e-9
