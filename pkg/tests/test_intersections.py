import numpy as np
import pytest

from lagknot.intersections import (
    IntersectionTable,
    action_check,
    action_gaps,
    compute_circles,
    expected_action_gap,
    index_gaps,
    index_table,
    synthetic_table,
    verify_clean,
)
from lagknot.maslov import HalfInteger


@pytest.mark.parametrize("r", [1, 2, 3, 5])
def test_radii_and_levels(r):
    t = compute_circles(r)
    assert [c.j for c in t.circles] == list(range(1, r + 1))
    for c in t.circles:
        assert abs(c.radius - (2 * c.j - 1) * np.pi) < 1e-9
        assert c.psi_level == r - c.j + 1
        assert c.winding == HalfInteger(2 * c.j - 1)
        assert c.action == pytest.approx(0.5 * c.radius ** 2)


def test_untwisted_fibres_are_disjoint():
    assert compute_circles(0).circles == ()
    with pytest.raises(ValueError):
        compute_circles(-1)


def test_actions_must_increase():
    with pytest.raises(ValueError):
        synthetic_table(2, [3 * np.pi, np.pi])


def test_gaps():
    t = compute_circles(4)
    for j, g in enumerate(action_gaps(t), start=2):
        assert g == pytest.approx(expected_action_gap(j), abs=1e-9)
    rows = index_table(t)
    assert rows == [(1, 2), (2, 4), (3, 6), (4, 8)]
    assert index_gaps(rows) == [2, 2, 2]
    assert action_check(t) < 1e-8


def test_clean_small_case():
    rep = verify_clean(compute_circles(2), samples_per_circle=6)
    assert rep.passed
    assert rep.max_jacobi_defect < 1e-4
    assert all(c.multiplicities == [1] * 6 for c in rep.circles)


def test_negative_control_rejected():
    rep = verify_clean(synthetic_table(2, [2 * np.pi]), samples_per_circle=4)
    assert not rep.passed
    c = rep.circles[0]
    # the geodesic of length 2 pi still has a simple conjugate point at r = 1, but it does not reach x
    assert c.multiplicity_ok
    assert not c.membership_ok


def test_table_default_base_point():
    t = IntersectionTable(1, ())
    assert t.base_point == (0.0, 0.0, 1.0)
