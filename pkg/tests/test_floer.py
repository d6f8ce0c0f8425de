import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagknot.floer import (
    BigradedPage,
    FilteredComplexSpec,
    LocalHFModel,
    NonCleanError,
    VacuousInputError,
    complex_spec,
    d_max,
    differential_degree,
    e1_page,
    e1_page_from_indices,
    enumerate_boundaries,
    gf2_inverse,
    gf2_matmul,
    gf2_nullspace,
    gf2_rank,
    graded_homology,
    hf_nonvanishing,
    parity_check,
    random_two_level_complex,
    rank_feasibility_t2,
    survives_to_infinity,
    survivor_soundness,
    survivors,
    two_level_ranks,
)
from lagknot.intersections import compute_circles, synthetic_table, verify_clean

bit_matrices = st.integers(1, 7).flatmap(
    lambda n: st.lists(st.integers(0, 1), min_size=n * n, max_size=n * n).map(
        lambda xs: np.array(xs, dtype=np.uint8).reshape(n, n)))


@given(bit_matrices)
def test_rank_nullity(M):
    N = gf2_nullspace(M)
    assert N.shape[1] == M.shape[1] - gf2_rank(M)
    assert not np.any(gf2_matmul(M, N))
    assert gf2_rank(N) == N.shape[1]


@given(bit_matrices)
def test_inverse_when_full_rank(M):
    if gf2_rank(M) < M.shape[0]:
        with pytest.raises(ValueError):
            gf2_inverse(M)
    else:
        assert np.array_equal(gf2_matmul(M, gf2_inverse(M)), np.eye(M.shape[0], dtype=np.uint8))


def test_graded_homology_of_circle_and_interval():
    # two vertices, one edge, boundary hitting both: homology of an interval
    D = np.array([[0, 0, 1], [0, 0, 1], [0, 0, 0]], dtype=np.uint8)
    assert graded_homology([0, 0, 1], D) == {0: 1, 1: 0}
    # two vertices, two edges: a circle
    D = np.array([[0, 0, 1, 1], [0, 0, 1, 1], [0, 0, 0, 0], [0, 0, 0, 0]], dtype=np.uint8)
    assert graded_homology([0, 0, 1, 1], D) == {0: 1, 1: 1}


def test_local_models():
    assert LocalHFModel("clean-circle", 4).generators() == [4, 5]
    assert LocalHFModel("transverse-point", 3).generators() == [3]
    with pytest.raises(ValueError):
        LocalHFModel("torus", 0)


@pytest.mark.parametrize("r", [1, 2, 3, 6])
def test_e1_page_staircase(r):
    page = e1_page(compute_circles(r))
    assert page.support == sorted((p, q) for p in range(1, r + 1) for q in (p, p + 1))
    assert page.total_dimension == 2 * r
    assert survivors(page) == [(1, 1), (r, r + 1)]


def test_e1_page_needs_clean_input():
    bad = verify_clean(synthetic_table(2, [2 * np.pi]), samples_per_circle=2)
    with pytest.raises(NonCleanError):
        e1_page(synthetic_table(2, [2 * np.pi]), bad)


def test_differential_degrees():
    assert differential_degree(1) == (-1, 0)
    assert differential_degree(3) == (-3, 2)
    with pytest.raises(ValueError):
        differential_degree(0)
    page = e1_page_from_indices([(1, 2), (2, 4)])
    assert d_max(page) == 1 + 2 + 1


def test_survival_threats_and_vacuous_cell():
    page = BigradedPage({(1, 0): 1, (2, 0): 1})
    v = survives_to_infinity(page, (2, 0))
    assert not v.survives and v.verdict == "possibly-dies"
    assert v.threats[0] == {"d": 1, "direction": "out", "cell": (1, 0)}
    with pytest.raises(VacuousInputError):
        survives_to_infinity(page, (5, 5))


def test_boundary_enumeration_counts():
    for r, expected in ((1, 1), (2, 2), (3, 4), (4, 8)):
        spec = complex_spec(e1_page(compute_circles(r)))
        assert sum(1 for _ in enumerate_boundaries(spec)) == expected
        assert survivor_soundness(e1_page(compute_circles(r)), r).sound


def test_cancelling_pair_has_no_survivors():
    # adjacent columns whose total degrees differ by one can cancel under d_1
    page = BigradedPage({(1, 0): 1, (2, 0): 1})
    spec = complex_spec(page)
    assert spec.admissible_entries() == [(0, 1)]
    assert sum(1 for _ in enumerate_boundaries(spec)) == 2
    assert survivors(page) == []


def test_non_strict_filtration_admits_more():
    spec = FilteredComplexSpec(((1, 2),), strict=False)
    assert spec.admissible_entries() == [(0, 1)]
    assert FilteredComplexSpec(((1, 2),)).admissible_entries() == []


def test_nonvanishing():
    assert not hf_nonvanishing(0).nonzero
    for r in range(1, 5):
        res = hf_nonvanishing(r)
        assert res.nonzero and (1, 1) in res.witnesses


def test_torus_feasibility():
    assert rank_feasibility_t2(4, 2) == {(2, 0)}
    assert rank_feasibility_t2(2, 2) == {(1, 0), (2, 1)}
    with pytest.raises(ValueError):
        rank_feasibility_t2(-1, 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 6), st.integers(0, 6))
def test_long_exact_sequence_identity(seed, n0, n1):
    d00, d01, d11 = random_two_level_complex(np.random.default_rng(seed), n0, n1)
    t = two_level_ranks(d00, d01, d11)
    assert t.total == t.sub + t.quotient - 2 * t.connecting
    assert 0 <= t.connecting <= min(t.sub, t.quotient)


def test_two_level_rejects_non_complex():
    with pytest.raises(ValueError):
        two_level_ranks(np.array([[1]]), np.zeros((1, 0)), np.zeros((0, 0)))


def test_parity():
    assert parity_check(BigradedPage({(1, 1): 1})) is True
    assert parity_check(e1_page(compute_circles(3))) is False
    with pytest.raises(ValueError):
        parity_check(BigradedPage({(1, 1): 1}), BigradedPage({(1, 1): 2}))
