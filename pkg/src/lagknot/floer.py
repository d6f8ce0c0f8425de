"""Z/2 filtered complexes, the first page of the action spectral sequence, and survivors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import LagknotError


class VacuousInputError(LagknotError, ValueError):
    """A survival question was asked about a cell that is zero on the first page."""


class NonCleanError(LagknotError, ValueError):
    """A page was requested for a table that failed its cleanness checks."""


# --------------------------------------------------------------------------
# linear algebra over GF(2)


def gf2_rank(M) -> int:
    """Rank of a 0/1 matrix over GF(2)."""
    A = (np.asarray(M, dtype=np.uint8) & 1).copy()
    if A.size == 0:
        return 0
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = next((i for i in range(rank, rows) if A[i, c]), None)
        if pivot is None:
            continue
        A[[rank, pivot]] = A[[pivot, rank]]
        below = np.nonzero(A[:, c])[0]
        for i in below:
            if i != rank:
                A[i] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_matmul(A, B) -> np.ndarray:
    return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) & 1


def gf2_inverse(M) -> np.ndarray:
    """Inverse over GF(2); raises ValueError for singular input."""
    A = np.asarray(M, dtype=np.uint8) & 1
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=np.uint8)], axis=1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if aug[i, c]), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(2)")
        aug[[c, pivot]] = aug[[pivot, c]]
        for i in range(n):
            if i != c and aug[i, c]:
                aug[i] ^= aug[c]
    return aug[:, n:].copy()


def graded_homology(degrees, D) -> dict[int, int]:
    """Homology dimensions by degree of a free GF(2) complex.

    `degrees[i]` is the degree of generator i and D[i, k] is the coefficient
    of generator i in the boundary of generator k.
    """
    degrees = np.asarray(degrees, dtype=int)
    D = np.asarray(D, dtype=np.uint8) & 1
    if np.any(gf2_matmul(D, D)):
        raise ValueError("boundary operator does not square to zero")
    out = {}
    for k in sorted(set(degrees.tolist())):
        src = np.nonzero(degrees == k)[0]
        up = np.nonzero(degrees == k + 1)[0]
        down = np.nonzero(degrees == k - 1)[0]
        out_rank = gf2_rank(D[np.ix_(down, src)]) if len(down) else 0
        in_rank = gf2_rank(D[np.ix_(src, up)]) if len(up) else 0
        out[k] = len(src) - out_rank - in_rank
    return out


# --------------------------------------------------------------------------
# pages


@dataclass(frozen=True)
class BigradedPage:
    entries: dict
    page: int = 1

    def __post_init__(self):
        clean = {tuple(map(int, k)): int(v) for k, v in self.entries.items() if v}
        if any(v < 0 for v in clean.values()):
            raise ValueError("page dimensions must be nonnegative")
        object.__setattr__(self, "entries", clean)

    def __getitem__(self, cell) -> int:
        return self.entries.get(tuple(cell), 0)

    @property
    def support(self) -> list[tuple[int, int]]:
        return sorted(self.entries)

    @property
    def total_dimension(self) -> int:
        return sum(self.entries.values())

    def bounds(self) -> tuple[int, int, int, int]:
        ps = [p for p, _ in self.entries]
        qs = [q for _, q in self.entries]
        return min(ps), max(ps), min(qs), max(qs)


@dataclass(frozen=True)
class LocalHFModel:
    """Local Floer homology of one intersection component, as graded dimensions."""

    kind: str
    index_prime: int

    def __post_init__(self):
        if self.kind not in ("transverse-point", "clean-circle"):
            raise ValueError(f"unknown local model {self.kind!r}")

    def generators(self) -> list[int]:
        if self.kind == "transverse-point":
            return [self.index_prime]
        return [self.index_prime, self.index_prime + 1]


@dataclass(frozen=True)
class FilteredComplexSpec:
    """Generators sorted into filtration levels, each with its degrees."""

    levels: tuple
    strict: bool = True

    def generators(self) -> list[tuple[int, int]]:
        """(level, degree) for each generator, levels numbered from 1."""
        return [(p, d) for p, degs in enumerate(self.levels, start=1) for d in degs]

    def admissible_entries(self) -> list[tuple[int, int]]:
        """Matrix positions (target, source) a degree -1 boundary may use."""
        gens = self.generators()
        out = []
        for k, (ps, ds) in enumerate(gens):
            for i, (pt, dt) in enumerate(gens):
                lower = pt < ps if self.strict else pt <= ps
                if dt == ds - 1 and lower and i != k:
                    out.append((i, k))
        return out


def e1_page_from_indices(rows) -> BigradedPage:
    """Place H_*(S^1; Z/2) at total degrees i', i'+1 in column p for each (p, i')."""
    entries = {}
    for p, ip in rows:
        for deg in LocalHFModel("clean-circle", ip).generators():
            entries[(p, deg - p)] = entries.get((p, deg - p), 0) + 1
    return BigradedPage(entries)


def e1_page(table, clean_report=None) -> BigradedPage:
    """First page of the action spectral sequence for an intersection table."""
    from .intersections import index_table

    if clean_report is not None and not clean_report.passed:
        bad = [c.j for c in clean_report.circles if not c.passed(clean_report.tolerance)]
        raise NonCleanError(f"circles {bad} failed the cleanness checks; no page is defined")
    return e1_page_from_indices(index_table(table))


def complex_spec(page: BigradedPage) -> FilteredComplexSpec:
    if not page.entries:
        return FilteredComplexSpec(())
    pmin, pmax, _, _ = page.bounds()
    levels = []
    for p in range(pmin, pmax + 1):
        degs = []
        for (pp, q), dim in sorted(page.entries.items()):
            if pp == p:
                degs.extend([p + q] * dim)
        levels.append(tuple(degs))
    return FilteredComplexSpec(tuple(levels))


def differential_degree(d: int) -> tuple[int, int]:
    if d < 1:
        raise ValueError("differentials start at d = 1")
    return (-d, d - 1)


def d_max(page: BigradedPage) -> int:
    pmin, pmax, qmin, qmax = page.bounds()
    return (pmax - pmin) + (qmax - qmin) + 1


@dataclass
class SurvivalVerdict:
    cell: tuple[int, int]
    survives: bool
    threats: list = field(default_factory=list)
    pages_checked: int = 0

    @property
    def verdict(self) -> str:
        return "survives" if self.survives else "possibly-dies"


def survives_to_infinity(page: BigradedPage, cell) -> SurvivalVerdict:
    """Conservative survival test for a cell of the first page.

    Dimensions on later pages are only bounded above by those on the first
    page, so a cell is certified when, for every d, both the source of an
    incoming d-th differential and the target of the outgoing one are zero on
    the first page.  Anything else is recorded as a threat.
    """
    cell = tuple(cell)
    if page[cell] == 0:
        raise VacuousInputError(f"cell {cell} is zero on the first page")
    p, q = cell
    top = d_max(page)
    threats = []
    for d in range(1, top + 1):
        dp, dq = differential_degree(d)
        target = (p + dp, q + dq)
        source = (p - dp, q - dq)
        if page[target]:
            threats.append({"d": d, "direction": "out", "cell": target})
        if page[source]:
            threats.append({"d": d, "direction": "in", "cell": source})
    return SurvivalVerdict(cell, not threats, threats, top)


def survivors(page: BigradedPage) -> list[tuple[int, int]]:
    return [c for c in page.support if survives_to_infinity(page, c).survives]


@dataclass
class NonvanishingResult:
    r: int
    nonzero: bool
    witnesses: list


def hf_nonvanishing(r: int, page: BigradedPage | None = None) -> NonvanishingResult:
    """Whether the first page certifies nonzero Floer homology after 2r twists.

    r = 0 is the pair of disjoint fibres, whose complex has no generators.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return NonvanishingResult(0, False, [])
    if page is None:
        from .intersections import compute_circles

        page = e1_page(compute_circles(r))
    wit = survivors(page)
    return NonvanishingResult(r, bool(wit), wit)


# --------------------------------------------------------------------------
# exhaustive soundness


def enumerate_boundaries(spec: FilteredComplexSpec, limit: int = 1 << 20):
    """Every admissible degree -1 boundary operator with square zero."""
    gens = spec.generators()
    n = len(gens)
    entries = spec.admissible_entries()
    if 2 ** len(entries) > limit:
        raise ValueError(f"{2 ** len(entries)} candidate operators exceed the limit {limit}")
    for bits in itertools.product((0, 1), repeat=len(entries)):
        D = np.zeros((n, n), dtype=np.uint8)
        for b, (i, k) in zip(bits, entries):
            D[i, k] = b
        if not np.any(gf2_matmul(D, D)):
            yield D


@dataclass
class SoundnessResult:
    r: int
    operators: int
    sound: bool
    counterexample: object = None


def survivor_soundness(page: BigradedPage, r: int = 0) -> SoundnessResult:
    """Check every certified survivor against the homology of every boundary operator.

    For each admissible operator, the homology in each total degree must be
    at least the number of certified survivors in that degree.
    """
    spec = complex_spec(page)
    degrees = [d for _, d in spec.generators()]
    need = {}
    for p, q in survivors(page):
        need[p + q] = need.get(p + q, 0) + page[(p, q)]
    count = 0
    for D in enumerate_boundaries(spec):
        count += 1
        H = graded_homology(degrees, D)
        for deg, k in need.items():
            if H.get(deg, 0) < k:
                return SoundnessResult(r, count, False, {"degree": deg, "operator": D.tolist()})
    return SoundnessResult(r, count, True)


# --------------------------------------------------------------------------
# two-level filtrations


def rank_feasibility_t2(total_rank: int, chain_rank_per_level: int) -> set[tuple[int, int]]:
    """Pairs (g, delta) with 2g - 2 delta = total_rank, 0 <= delta <= g <= chain rank.

    g is the homology rank of each of the two filtration levels and delta the
    rank of the connecting map between them.
    """
    if total_rank < 0 or chain_rank_per_level < 0:
        raise ValueError("ranks must be nonnegative")
    return {(g, d) for g in range(chain_rank_per_level + 1) for d in range(g + 1)
            if 2 * g - 2 * d == total_rank}


@dataclass
class TwoLevelRanks:
    sub: int
    quotient: int
    total: int
    connecting: int


def two_level_ranks(d00, d01, d11) -> TwoLevelRanks:
    """Homology ranks for the complex [[d00, d01], [0, d11]] with subcomplex level 0.

    The connecting map sends a cycle z of the quotient to the class of d01 z.
    """
    d00 = np.asarray(d00, dtype=np.uint8) & 1
    d11 = np.asarray(d11, dtype=np.uint8) & 1
    d01 = np.asarray(d01, dtype=np.uint8) & 1
    n0, n1 = d00.shape[0], d11.shape[0]
    D = np.block([[d00, d01], [np.zeros((n1, n0), dtype=np.uint8), d11]])
    if np.any(gf2_matmul(D, D)):
        raise ValueError("not a complex")

    def homology(M):
        return M.shape[0] - 2 * gf2_rank(M)

    Z1 = gf2_nullspace(d11)
    im00 = gf2_rank(d00)
    if Z1.shape[1]:
        conn = gf2_rank(np.concatenate([d00, gf2_matmul(d01, Z1)], axis=1)) - im00
    else:
        conn = 0
    return TwoLevelRanks(homology(d00), homology(d11), homology(D), conn)


def gf2_nullspace(M) -> np.ndarray:
    """Columns spanning the kernel of M over GF(2)."""
    A = (np.asarray(M, dtype=np.uint8) & 1).copy()
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if A[i, c]), None)
        if pivot is None:
            continue
        A[[r, pivot]] = A[[pivot, r]]
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] ^= A[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((cols, len(free)), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for i, pc in enumerate(pivots):
            basis[pc, k] = A[i, f]
    return basis


def random_two_level_complex(rng: np.random.Generator, n0: int, n1: int):
    """Random (d00, d01, d11) of a square-zero operator preserving a two-step filtration.

    Built by conjugating a sum of elementary pairings with a random invertible
    block upper triangular change of basis.
    """
    n = n0 + n1
    D = np.zeros((n, n), dtype=np.uint8)
    free = list(rng.permutation(n))
    while len(free) >= 2 and rng.random() < 0.7:
        a, b = free.pop(), free.pop()
        # boundary must not raise the level
        src, tgt = (a, b) if (a >= n0) or (b < n0) else (b, a)
        if src == tgt:
            continue
        D[tgt, src] = 1
    while True:
        P = np.zeros((n, n), dtype=np.uint8)
        P[:n0, :n0] = rng.integers(0, 2, (n0, n0))
        P[n0:, n0:] = rng.integers(0, 2, (n1, n1))
        P[:n0, n0:] = rng.integers(0, 2, (n0, n1))
        if gf2_rank(P) == n:
            break
    M = gf2_matmul(gf2_matmul(P, D), gf2_inverse(P)).astype(np.uint8)
    return M[:n0, :n0], M[:n0, n0:], M[n0:, n0:]


def parity_check(page: BigradedPage, limit_page: BigradedPage | None = None) -> bool:
    """Parity of the total dimension; True for odd.

    Differentials over Z/2 remove dimensions in pairs, so any limit page has
    the same parity.  With `limit_page` given, that is asserted.
    """
    odd = page.total_dimension % 2 == 1
    if limit_page is not None and (limit_page.total_dimension % 2 == 1) != odd:
        raise ValueError("limit page parity differs from the first page")
    return odd
