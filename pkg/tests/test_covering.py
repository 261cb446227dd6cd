import io
import itertools
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popcorn.covering import (
    COVER_CSV_COLUMNS,
    DyadicScale,
    admissible_k_range,
    cell_of,
    cover_count,
    epsilon_cap,
    height_index,
    k_bounds,
    layer_bound_index,
    layer_cover_count,
    layer_denominators,
    layer_points,
    localized_cover_count,
    popcorn_rows,
    smallest_admissible_level,
    write_cover_csv,
)
from popcorn.errors import DomainError, ResourceCapError, VerificationError
from popcorn.popcorn_sets import RationalPoint, SetSpec, enumerate_points

SPECS = [SetSpec(1, 2), SetSpec(F(1, 2), 2), SetSpec(F(3, 2), 2), SetSpec(2, 2), SetSpec(1, 3),
         SetSpec(F(4, 3), 3), SetSpec(1, 2, "full"), SetSpec(1, 3, "full")]


def slow_height_index(q, t, j):
    # largest i with i^b q^a <= 2^{jb}, found by stepping
    i = 0
    while (i + 1) ** t.denominator * q**t.numerator <= 2 ** (j * t.denominator):
        i += 1
    return i


def brute_cells(spec, j):
    """Occupied cells of the dyadic mesh, from scratch."""
    n = 2**j
    top = n - 1
    cells = {sp + (0,) for sp in itertools.product(range(n), repeat=spec.d - 1)}
    q = 2
    while slow_height_index(q, spec.t, j) >= 1:
        h = slow_height_index(q, spec.t, j)
        for pt in enumerate_points(spec, q, q_min=q):
            cells.add(tuple(min(math.floor(c * n), top) for c in pt.coords) + (min(h, top),))
        q += 1
    return cells


def test_height_index_matches_stepping():
    for t in (F(1), F(1, 2), F(3, 2), F(2, 3), F(5, 2)):
        for j in range(1, 8):
            for q in range(2, 60):
                assert height_index(q, t, j) == slow_height_index(q, t, j)


def test_cell_of_examples():
    scale = DyadicScale(2)
    assert cell_of(RationalPoint((1,), 2), scale, F(1)) == (2, 2)
    assert cell_of(RationalPoint((1,), 4), scale, F(1)) == (1, 1)


def test_cell_of_clamps_coordinate_one():
    pt = RationalPoint((3,), 3)  # coordinate exactly 1
    for j in (1, 3, 6):
        assert cell_of(pt, DyadicScale(j), F(1))[0] == 2**j - 1


def test_scale_validation():
    with pytest.raises(DomainError):
        DyadicScale(0)
    assert DyadicScale(3).delta == F(1, 8)


@pytest.mark.parametrize("t,j,k,expected", [(1, 3, 1, 8), (F(1, 2), 3, 2, 16), (2, 4, 3, 2)])
def test_layer_bound_index_examples(t, j, k, expected):
    assert layer_bound_index(SetSpec(t, 2), DyadicScale(j), k) == expected


def test_layer_bound_index_range():
    with pytest.raises(DomainError):
        layer_bound_index(SetSpec(1, 2), DyadicScale(3), 0)
    assert layer_bound_index(SetSpec(1, 2), DyadicScale(3), 9) == 0


def test_layer_points_example():
    spec, scale = SetSpec(1, 2), DyadicScale(3)
    assert list(layer_denominators(spec, scale, 1)) == [5, 6, 7, 8]
    qs = {p.denominator for p in layer_points(spec, scale, 1)}
    assert qs == {5, 6, 7, 8}
    cells = {cell_of(p, scale, spec.t)[:-1] for p in layer_points(spec, scale, 1)}
    assert layer_cover_count(spec, scale, 1) == len(cells)


def test_empty_layer():
    spec, scale = SetSpec(1, 2), DyadicScale(3)
    # l(7) = l(8) = 1, so the k = 7 layer has no denominators
    assert len(layer_denominators(spec, scale, 7)) == 0
    assert layer_cover_count(spec, scale, 7) == 0


def test_cover_count_example():
    rep = cover_count(SetSpec(1, 2), DyadicScale(2))
    assert (rep.total, rep.base_cells, rep.popcorn_cells) == (8, 4, 4)
    for d in (2, 3, 4):
        assert cover_count(SetSpec(1, d), DyadicScale(1)).base_cells == 2 ** (d - 1)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"t={s.t},d={s.d},{s.variant}")
def test_cover_count_matches_brute_force(spec):
    for j in range(1, 6 if spec.d == 2 else 4):
        cells = brute_cells(spec, j)
        assert cover_count(spec, DyadicScale(j)).total == len(cells), j


@pytest.mark.parametrize("spec", SPECS[:5], ids=lambda s: f"t={s.t},d={s.d}")
def test_cover_count_monotone_and_bounded(spec):
    totals = [cover_count(spec, DyadicScale(j), max_points=10**12).total for j in range(1, 9 if spec.d == 2 else 6)]
    assert totals == sorted(totals)
    for j, n in enumerate(totals, start=1):
        assert 2 ** (j * (spec.d - 1)) <= n <= 2 ** (j * spec.d)


def _shifted_count(spec, j):
    """Cells of the mesh translated by delta/2 on every axis (brute force, d = 2)."""
    n = 2**j
    cells = set()
    for i in range(n + 1):
        cells.add((i, 0))  # base segment [0,1] meets every shifted column and the first row
    q = 2
    while True:
        h = F(1, q) ** int(spec.t) if spec.t.denominator == 1 else None
        if h is None or h * n < F(1, 2):
            break
        for pt in enumerate_points(spec, q, q_min=q):
            (x,) = pt.coords
            cells.add((math.floor(x * n + F(1, 2)), math.floor(h * n + F(1, 2))))
        q += 1
    # points with h*n < 1/2 sit in shifted row 0 with the base
    return len(cells)


@pytest.mark.parametrize("t", [1, 2])
def test_translation_stability(t):
    spec = SetSpec(t, 2)
    for j in range(2, 8):
        a = cover_count(spec, DyadicScale(j)).total
        b = _shifted_count(spec, j)
        assert a <= 4 * b and b <= 4 * a


@pytest.mark.parametrize("spec", [SetSpec(1, 2), SetSpec(F(1, 2), 2), SetSpec(1, 3)],
                         ids=lambda s: f"t={s.t},d={s.d}")
def test_partitioned_scan_is_deterministic(spec):
    scale = DyadicScale(8 if spec.d == 2 else 6)
    ref = popcorn_rows(spec, scale, max_points=10**12)
    for parts in (2, 3, 7, 64):
        assert popcorn_rows(spec, scale, partitions=parts, max_points=10**12) == ref
    assert popcorn_rows(spec, scale, partitions=4, workers=2, max_points=10**12) == ref


def test_cover_count_cap():
    with pytest.raises(ResourceCapError) as info:
        cover_count(SetSpec(1, 2), DyadicScale(10), max_points=1000)
    assert info.value.predicted > 1000


def test_cover_csv():
    buf = io.StringIO()
    write_cover_csv([cover_count(SetSpec(1, 2), DyadicScale(2))], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(COVER_CSV_COLUMNS)
    assert lines[1].endswith(",8,4,4")


# admissible layer range


def test_epsilon_cap_value():
    assert epsilon_cap(SetSpec(1, 2)) == F(1, 96)


@pytest.mark.parametrize("j,expected", [(6, (4, 7)), (7, (5, 10)), (8, (6, 15)), (10, (10, 30)), (12, (17, 59))])
def test_admissible_range_values(j, expected):
    kr = admissible_k_range(SetSpec(1, 2), DyadicScale(j), F(1, 128))
    assert (kr.k_min, kr.k_max) == expected
    assert list(kr) == list(range(expected[0], expected[1] + 1))


def test_k_bounds_exact_exponents():
    # k_min = floor(2^{j(1/3 + eps)}), k_max = floor(2^{j(1/2 - eps)})
    eps = F(1, 128)
    for j in (8, 11, 20):
        k_min, k_max = k_bounds(SetSpec(1, 2), DyadicScale(j), eps)
        e_min = j * (F(1, 3) + eps)
        e_max = j * (F(1, 2) - eps)
        assert 2 ** float(e_min) - 1 < k_min <= 2 ** float(e_min) + 1e-9
        assert 2 ** float(e_max) - 1 < k_max <= 2 ** float(e_max) + 1e-9


def test_admissible_range_properties_hold():
    spec = SetSpec(1, 2)
    for j in (6, 9, 12):
        scale = DyadicScale(j)
        for k in admissible_k_range(spec, scale, F(1, 128)):
            assert layer_bound_index(spec, scale, k + 1) < layer_bound_index(spec, scale, k) < 2**j


def test_admissible_range_errors():
    with pytest.raises(DomainError, match="1/96"):
        admissible_k_range(SetSpec(1, 2), DyadicScale(20), F(1, 32))
    with pytest.raises(DomainError):
        admissible_k_range(SetSpec(2, 2), DyadicScale(10), F(1, 128))
    with pytest.raises(VerificationError) as info:
        admissible_k_range(SetSpec(1, 2), DyadicScale(2), F(1, 128))
    assert info.value.diagnostics


def test_smallest_admissible_level():
    j = smallest_admissible_level(SetSpec(1, 2), F(1, 128), j_max=20)
    assert j == 3
    for jj in range(j, 14):
        admissible_k_range(SetSpec(1, 2), DyadicScale(jj), F(1, 128))


# localized counts


def brute_localized(spec, x, R, r):
    """Cells of the r-mesh meeting F within the half-open cube [x, x + R)."""
    n, top = 2**r, 2**r - 1
    side = F(1, 2**R)
    lo, hi = [v for v in x[:-1]], [v + side for v in x[:-1]]
    h_lo, h_hi = x[-1], x[-1] + side

    def inside(v, a, b):
        return a <= v < b or (v == 1 and b > 1)

    cells = set()
    if h_lo == 0:
        spans = [range(min(math.floor(a * n), top), min(math.ceil(b * n) - 1, top) + 1) for a, b in zip(lo, hi)]
        for sp in itertools.product(*spans):
            cells.add(sp + (0,))
    q = 2
    while F(1, q) ** spec.t.numerator >= (F(1, n) if h_lo == 0 else h_lo) ** spec.t.denominator:
        h = slow_height_index(q, spec.t, r)
        hv_ok = (h_lo == 0 or F(1, q**spec.t.numerator) >= h_lo**spec.t.denominator) and (
            F(1, q**spec.t.numerator) < h_hi**spec.t.denominator
        )
        if hv_ok:
            for pt in enumerate_points(spec, q, q_min=q):
                if all(inside(c, a, b) for c, a, b in zip(pt.coords, lo, hi)):
                    cells.add(tuple(min(math.floor(c * n), top) for c in pt.coords) + (h,))
        q += 1
    return len(cells)


def test_localized_examples_r_equals_R():
    s = SetSpec(1, 2)
    assert localized_cover_count(s, (F(1, 4), F(1, 4)), DyadicScale(2), DyadicScale(2)) == 1
    assert localized_cover_count(s, (F(1, 4), F(3, 4)), DyadicScale(2), DyadicScale(2)) == 0


@pytest.mark.parametrize("spec", [SetSpec(1, 2), SetSpec(2, 2), SetSpec(1, 3), SetSpec(1, 2, "full")],
                         ids=lambda s: f"t={s.t},d={s.d},{s.variant}")
def test_subcubes_partition_cover_count(spec):
    for j in range(1, 7 if spec.d == 2 else 5):
        parts = 0
        for corner in itertools.product((F(0), F(1, 2)), repeat=spec.d):
            parts += localized_cover_count(spec, corner, DyadicScale(1), DyadicScale(j))
        assert parts == cover_count(spec, DyadicScale(j)).total


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([1, 2, 3]),
    st.integers(0, 16), st.integers(0, 16), st.integers(1, 3), st.integers(0, 3),
)
def test_localized_matches_brute_force(t, xn, hn, R, extra):
    spec = SetSpec(t, 2)
    x = (F(xn, 16), F(hn, 16))
    r = R + extra
    assert localized_cover_count(spec, x, DyadicScale(R), DyadicScale(r)) == brute_localized(spec, x, R, r)


def test_localized_validation():
    s = SetSpec(1, 2)
    with pytest.raises(DomainError):
        localized_cover_count(s, (F(1, 2),), DyadicScale(1), DyadicScale(2))
    with pytest.raises(DomainError):
        localized_cover_count(s, (0, 0), DyadicScale(3), DyadicScale(2))
