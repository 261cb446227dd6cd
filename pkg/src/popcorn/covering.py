"""Dyadic mesh covers of the popcorn sets and the horizontal layer machinery.

Cells are half-open ``[i*delta, (i+1)*delta)`` along each axis with the last
cell closed, ``delta = 2**-j``. The base hyperplane ``[0,1]^{d-1} x {0}`` is
covered analytically by the bottom row of cells; every point whose height
is below ``delta`` falls into that row as well. Only points with height index
at least one are enumerated.

Occupied cells of one denominator ``q`` form a product set ``S_q^{d-1}``
(coprimality is coordinatewise), so each ``q`` costs one 1-d pass over its
residues regardless of ``d``.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, ResourceCapError, VerificationError
from .number_theory import coprime_array, iroot
from .popcorn_sets import (
    DEFAULT_MAX_POINTS,
    RationalPoint,
    SetSpec,
    parse_rational,
    point_count,
)

# Largest dense occupancy array (cells) we allocate for one height row.
MAX_ROW_CELLS = 1 << 28

COVER_CSV_COLUMNS = ("j", "delta", "total", "base_cells", "popcorn_cells")


@dataclass(frozen=True, order=True)
class DyadicScale:
    j: int

    def __post_init__(self):
        if not isinstance(self.j, int) or self.j < 1:
            raise DomainError(f"dyadic level must be an integer >= 1, got {self.j!r}")

    @property
    def delta(self) -> Fraction:
        return Fraction(1, 1 << self.j)

    @property
    def cells_per_axis(self) -> int:
        return 1 << self.j


@dataclass(frozen=True)
class CoverReport:
    scale: DyadicScale
    total: int
    base_cells: int
    popcorn_cells: int

    def csv_row(self) -> dict:
        return {
            "j": self.scale.j,
            "delta": f"1/{self.scale.cells_per_axis}",
            "total": self.total,
            "base_cells": self.base_cells,
            "popcorn_cells": self.popcorn_cells,
        }


@dataclass(frozen=True)
class KRange:
    epsilon: Fraction
    k_min: int
    k_max: int
    j: int

    def __iter__(self):
        return iter(range(self.k_min, self.k_max + 1))

    def __len__(self):
        return self.k_max - self.k_min + 1


def write_cover_csv(reports: Sequence[CoverReport], out) -> None:
    writer = csv.DictWriter(out, fieldnames=COVER_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.csv_row())


# ---------------------------------------------------------------------------
# exact indexing


def height_index(q: int, t: Fraction, j: int) -> int:
    """The unique i with i^b q^a <= 2^{jb} < (i+1)^b q^a, i.e. floor(2^j q^{-t})."""
    a, b = t.numerator, t.denominator
    qa = q**a
    bound = 1 << (j * b)
    lo, hi = 0, (1 << j) + 1  # lo satisfies the inequality, hi does not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid**b * qa <= bound:
            lo = mid
        else:
            hi = mid
    return lo


def cell_of(point: RationalPoint, scale: DyadicScale, t) -> tuple[int, ...]:
    t = parse_rational(t)
    top = scale.cells_per_axis - 1
    q = point.denominator
    spatial = tuple(min((p << scale.j) // q, top) for p in point.numerators)
    return spatial + (min(height_index(q, t, scale.j), top),)


def layer_bound_index(spec: SetSpec, scale: DyadicScale, k: int) -> int:
    """l_t(k, delta) = floor((1/(k delta))^{1/t}); zero when the root is below 1."""
    if not 1 <= k <= scale.cells_per_axis + 1:
        raise DomainError(f"k must lie in [1, 2^j + 1], got {k}")
    a, b = spec.a, spec.b
    # largest n with n^a k^b <= 2^{jb}
    return iroot((1 << (scale.j * b)) // k**b, a)


def _top_denominator(spec: SetSpec, j: int) -> int:
    # largest q with q^{-t} >= 2^{-j}
    return iroot(1 << (j * spec.b), spec.a)


# ---------------------------------------------------------------------------
# occupancy of one height row


def _residue_array(spec: SetSpec, q: int) -> np.ndarray:
    if spec.variant == "graph":
        return coprime_array(q)
    return np.arange(1, q, dtype=np.int64)


def spatial_mask(spec: SetSpec, q: int, j: int) -> np.ndarray:
    """Boolean mask over the 2^j cells of one axis hit by residues p/q."""
    n = 1 << j
    idx = (_residue_array(spec, q) << j) // q
    mask = np.zeros(n, dtype=bool)
    mask[idx] = True
    return mask


class RowUnion:
    """Union of product sets ``S^{e}`` inside an ``n^e`` grid."""

    def __init__(self, n: int, e: int):
        if n**e > MAX_ROW_CELLS:
            raise ResourceCapError("occupancy row exceeds cell budget", n**e)
        self.n, self.e = n, e
        self.full = False
        self.acc: np.ndarray | None = None
        self._seen: set[bytes] = set()

    def add(self, mask: np.ndarray) -> None:
        if self.full:
            return
        key = np.packbits(mask).tobytes()
        if key in self._seen:
            return
        self._seen.add(key)
        if mask.all():
            self.full = True
            self.acc = None
            return
        if self.acc is None:
            self.acc = np.zeros((self.n,) * self.e, dtype=bool)
        idx = np.flatnonzero(mask)
        self.acc[np.ix_(*([idx] * self.e))] = True

    def merge(self, other: "RowUnion") -> None:
        if self.full or other.full:
            self.full, self.acc = True, None
        elif other.acc is not None:
            if self.acc is None:
                self.acc = other.acc.copy()
            else:
                self.acc |= other.acc
        self._seen |= other._seen

    def count(self) -> int:
        if self.full:
            return self.n**self.e
        return 0 if self.acc is None else int(np.count_nonzero(self.acc))


def _scan_rows(spec: SetSpec, j: int, q_lo: int, q_hi: int, row_of, row_end=None) -> list:
    """Scan denominators ``q_lo..q_hi`` grouped into runs of equal row.

    ``row_of(q)`` must be nonincreasing in q. If ``row_end(row)`` gives the last
    denominator of a row, the rest of a row is skipped once it is full.
    Returns ``[row, count, union]`` entries in q order; only the first and last
    keep their RowUnion so that runs split across partitions can be merged.
    """
    n, e = 1 << j, spec.d - 1
    entries: list = []
    cur_row, cur = None, None
    q = q_lo
    while q <= q_hi:
        row = row_of(q)
        if row != cur_row:
            if cur is not None:
                entries.append([cur_row, cur.count(), cur])
            cur_row, cur = row, RowUnion(n, e)
        cur.add(spatial_mask(spec, q, j))
        if cur.full and row_end is not None:
            q = max(q, min(row_end(row), q_hi))
        q += 1
    if cur is not None:
        entries.append([cur_row, cur.count(), cur])
    for entry in entries[1:-1]:
        entry[2] = None
    return entries


def _merge_entries(parts: list[list]) -> dict[int, int]:
    counts: dict[int, int] = {}
    prev = None
    for part in parts:
        for entry in part:
            row, cnt, union = entry
            if prev is not None and prev[0] == row:
                prev[2].merge(union)
                prev[1] = prev[2].count()
                counts[row] = prev[1]
                continue
            counts[row] = cnt
            prev = entry
    return counts


def _partition(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    if hi < lo:
        return []
    parts = max(1, min(parts, hi - lo + 1))
    size = -(-(hi - lo + 1) // parts)
    return [(s, min(s + size - 1, hi)) for s in range(lo, hi + 1, size)]


def _height_rows_chunk(args):
    spec, j, lo, hi = args
    scale = DyadicScale(j)
    return _scan_rows(
        spec, j, lo, hi,
        lambda q: height_index(q, spec.t, j),
        lambda i: layer_bound_index(spec, scale, i) if i >= 1 else hi,
    )


def popcorn_rows(
    spec: SetSpec,
    scale: DyadicScale,
    *,
    partitions: int = 1,
    workers: int = 1,
    max_points: int = DEFAULT_MAX_POINTS,
) -> dict[int, int]:
    """Distinct occupied spatial cells per height index >= 1."""
    j = scale.j
    q_top = _top_denominator(spec, j)
    if q_top < 2:
        return {}
    predicted = point_count(spec, q_top)
    if predicted > max_points:
        raise ResourceCapError(f"cover at j={j} needs enumeration up to q={q_top}", predicted)
    chunks = [(spec, j, lo, hi) for lo, hi in _partition(2, q_top, partitions)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_height_rows_chunk, chunks))
    else:
        parts = [_height_rows_chunk(c) for c in chunks]
    counts = _merge_entries(parts)
    counts.pop(0, None)
    return counts


def cover_count(spec: SetSpec, scale: DyadicScale, **kwargs) -> CoverReport:
    """Mesh cover count: full base row plus occupied cells above it."""
    base = 1 << (scale.j * (spec.d - 1))
    popcorn = sum(popcorn_rows(spec, scale, **kwargs).values())
    return CoverReport(scale, base + popcorn, base, popcorn)


# ---------------------------------------------------------------------------
# horizontal layers


def layer_denominators(spec: SetSpec, scale: DyadicScale, k: int) -> range:
    hi = layer_bound_index(spec, scale, k)
    lo = layer_bound_index(spec, scale, k + 1) if k + 1 <= scale.cells_per_axis + 1 else 0
    return range(max(lo + 1, 2), hi + 1)


def layer_points(spec: SetSpec, scale: DyadicScale, k: int) -> Iterator[RationalPoint]:
    for n in layer_denominators(spec, scale, k):
        residues = _residue_array(spec, n).tolist()
        for ps in itertools.product(residues, repeat=spec.d - 1):
            yield RationalPoint(ps, n)


def layer_cover_count(spec: SetSpec, scale: DyadicScale, k: int) -> int:
    """Distinct spatial delta-cells occupied by the layer L(delta, k)."""
    ns = layer_denominators(spec, scale, k)
    if not ns:
        return 0
    union = RowUnion(scale.cells_per_axis, spec.d - 1)
    for n in ns:
        union.add(spatial_mask(spec, n, scale.j))
        if union.full:
            break
    return union.count()


def layer_recount(spec: SetSpec, scale: DyadicScale) -> dict[int, int]:
    """Per-layer cell counts over every nonempty layer k >= 1."""
    out = {}
    k = 1
    while k <= scale.cells_per_axis and layer_bound_index(spec, scale, k) >= 2:
        c = layer_cover_count(spec, scale, k)
        if c:
            out[k] = c
        k += 1
    return out


# ---------------------------------------------------------------------------
# admissible layer range


def epsilon_cap(spec: SetSpec) -> Fraction:
    d, t = spec.d, spec.t
    box_t = Fraction(d) * t / (t + d)
    return Fraction(1, 16) * min(box_t - t / (t + 1), 1 - box_t)


def _floor_pow2(e: Fraction) -> int:
    """floor(2**e) for rational e; 0 when e < 0."""
    if e < 0:
        return 0
    return iroot(1 << e.numerator, e.denominator)


def k_bounds(spec: SetSpec, scale: DyadicScale, epsilon: Fraction) -> tuple[int, int]:
    d, t, j = spec.d, spec.t, scale.j
    lower_exp = Fraction(d) * t / (t + d) - 1 - epsilon
    upper_exp = t / (t + 1) - 1 + epsilon
    # delta^x = 2^{-j x}
    return _floor_pow2(-j * lower_exp), _floor_pow2(-j * upper_exp)


def admissible_k_range(spec: SetSpec, scale: DyadicScale, epsilon) -> KRange:
    """Layer indices used by the box lower bound, with both layer properties checked."""
    epsilon = parse_rational(epsilon)
    if not spec.subcritical:
        raise DomainError(f"t = {spec.t} is not below d/(d-1) = {spec.critical_t}")
    cap = epsilon_cap(spec)
    if not 0 < epsilon < cap:
        raise DomainError(f"epsilon = {epsilon} must lie in (0, {cap}) (cap = min-gap / 16)")
    k_min, k_max = k_bounds(spec, scale, epsilon)
    bad = {}
    if k_min < 1 or k_min > k_max:
        bad["range"] = (k_min, k_max)
    for k in range(max(k_min, 1), k_max + 1):
        if k + 1 > scale.cells_per_axis + 1:
            bad[k] = "k beyond 2^j"
            break
        hi = layer_bound_index(spec, scale, k)
        lo = layer_bound_index(spec, scale, k + 1)
        if hi <= lo:
            bad[k] = "no denominator in layer"
        elif hi >= scale.cells_per_axis:
            bad[k] = f"denominator {hi} has 1/n <= delta"
    if bad:
        raise VerificationError(
            f"layer properties fail at j={scale.j}; delta not small enough", bad
        )
    return KRange(epsilon, k_min, k_max, scale.j)


def smallest_admissible_level(spec: SetSpec, epsilon, j_max: int, j_min: int = 1) -> int | None:
    """Smallest j such that the layer properties hold at every level j..j_max."""
    best = None
    for j in range(j_max, j_min - 1, -1):
        try:
            admissible_k_range(spec, DyadicScale(j), epsilon)
        except VerificationError:
            break
        best = j
    return best


# ---------------------------------------------------------------------------
# localized counts (Assouad probes)


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _max_q_with_height_at_least(spec: SetSpec, c: Fraction) -> int:
    # q^{-t} >= c  <=>  q^a c.num^b <= c.den^b
    return iroot(c.denominator**spec.b // c.numerator**spec.b, spec.a)


def _min_q_with_height_below(spec: SetSpec, c: Fraction) -> int:
    # q^{-t} < c  <=>  q^a c.num^b > c.den^b
    return max(2, _max_q_with_height_at_least(spec, c) + 1)


def localized_cover_count(
    spec: SetSpec,
    x: Sequence,
    R: DyadicScale,
    r: DyadicScale,
    *,
    max_points: int = DEFAULT_MAX_POINTS,
) -> int:
    """Number of r-mesh cells meeting F inside the half-open cube prod [x_i, x_i + R).

    The cube is clipped to the unit cube (closed at 1). If x sits on the base,
    the bottom row of the cube is filled by the base hyperplane; every point
    above it is counted individually.
    """
    x = [parse_rational(v) for v in x]
    if len(x) != spec.d or any(not 0 <= v <= 1 for v in x):
        raise DomainError(f"corner must be a point of [0,1]^{spec.d}")
    if r.j < R.j:
        raise DomainError("need r <= R")
    j = r.j
    top = r.cells_per_axis - 1
    side = R.delta
    lo = x[:-1]
    hi = [v + side for v in lo]
    h_lo, h_hi = x[-1], x[-1] + side

    def first_cell(v: Fraction) -> int:
        return min((v.numerator << j) // v.denominator, top)

    def last_cell(v: Fraction) -> int:
        # last cell holding points strictly below v
        return top if v > 1 else min(_ceil_frac(v * r.cells_per_axis) - 1, top)

    axis_span = [range(first_cell(a), last_cell(b) + 1) for a, b in zip(lo, hi)]
    total = 0
    if h_lo == 0:
        # the base hyperplane fills the bottom row (heights below r <= R)
        total += math.prod(len(s) for s in axis_span)
        thresh = r.delta
    else:
        thresh = h_lo
    q_high = _max_q_with_height_at_least(spec, thresh)
    q_low = _min_q_with_height_below(spec, h_hi)
    if q_high < q_low:
        return total
    predicted = point_count(spec, q_high, q_low)
    if predicted > max_points:
        raise ResourceCapError("localized probe enumerates too many points", predicted)
    rows: dict[int, set] = {}
    for q in range(q_low, q_high + 1):
        h = height_index(q, spec.t, j)
        if h == 0 and h_lo == 0:
            continue  # inside the base row already counted
        per_axis = []
        for a, b in zip(lo, hi):
            # a <= p/q < b, and 1 <= p <= q - 1
            p0 = max(_ceil_frac(a * q), 1)
            p1 = min(_ceil_frac(b * q) - 1, q - 1)
            ps = range(p0, p1 + 1)
            if spec.variant == "graph":
                ps = [p for p in ps if math.gcd(p, q) == 1]
            cells = {min((p << j) // q, top) for p in ps}
            if not cells:
                break
            per_axis.append(sorted(cells))
        else:
            rows.setdefault(h, set()).update(itertools.product(*per_axis))
    return total + sum(len(s) for s in rows.values())
