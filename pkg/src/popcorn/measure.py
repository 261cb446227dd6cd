"""Exact Lebesgue measures of the Diophantine interval families.

``E1(delta, n)`` is the union of the open intervals ``(m/n - delta, m/n + delta)``
over residues ``m`` coprime to ``n``; its (d-1)-dimensional analogue is the
union of the cubes centred at coprime tuples. Everything on rational input
returns a Fraction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .covering import DyadicScale, layer_bound_index, layer_cover_count, layer_denominators
from .errors import DomainError
from .number_theory import coprime_residues
from .popcorn_sets import SetSpec, parse_rational

LAYER_CSV_COLUMNS = (
    "k", "l_low", "l_high", "sum_measure", "pair_sum", "ce_floor", "cover_count",
)


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise disjoint open intervals with exact endpoints."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        prev = None
        for left, right in self.intervals:
            if not left < right:
                raise DomainError(f"empty interval ({left}, {right})")
            if prev is not None and left < prev:
                raise DomainError("intervals must be sorted and disjoint")
            prev = right

    @property
    def measure(self) -> Fraction:
        return sum((r - l for l, r in self.intervals), Fraction(0))

    def __len__(self):
        return len(self.intervals)


@dataclass(frozen=True)
class CellFamily:
    """E^{(d-1)}(delta, n): product cubes around coprime tuples with denominator n."""

    n: int
    delta: Fraction
    dim: int

    @property
    def measure(self) -> Fraction:
        return approx_intervals(self.n, self.delta).measure ** self.dim


def _merge(pairs: Iterable[tuple]) -> list[list]:
    """Merge sorted (left, right) pairs whose interiors overlap."""
    out: list[list] = []
    for left, right in pairs:
        if out and left < out[-1][1]:
            if right > out[-1][1]:
                out[-1][1] = right
        else:
            out.append([left, right])
    return out


def approx_intervals(n: int, delta, clip: bool = True) -> IntervalUnion:
    if n < 2:
        raise DomainError(f"denominator must be >= 2, got {n}")
    delta = parse_rational(delta)
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    pairs = ((Fraction(m, n) - delta, Fraction(m, n) + delta) for m in coprime_residues(n))
    merged = _merge(pairs)
    if clip:
        merged = [[max(l, Fraction(0)), min(r, Fraction(1))] for l, r in merged]
        merged = [iv for iv in merged if iv[0] < iv[1]]
    return IntervalUnion(tuple((l, r) for l, r in merged))


def union_measure(families: Sequence[IntervalUnion]) -> Fraction:
    """Measure of the union of several interval unions, by endpoint sweep."""
    pairs = sorted(iv for fam in families for iv in fam.intervals)
    return sum((r - l for l, r in _merge(pairs)), Fraction(0))


# Integer-scaled kernel for the pairwise overlaps: with delta = u/v and a
# common denominator D = q*k*v every endpoint is an integer.


@lru_cache(maxsize=65536)
def _scaled(n: int, scale: int, half: int, clip_to: int) -> tuple:
    """Merged intervals (m*scale - half, m*scale + half), clipped to [0, clip_to]."""
    merged = _merge((m * scale - half, m * scale + half) for m in coprime_residues(n))
    if clip_to:
        merged = [(max(l, 0), min(r, clip_to)) for l, r in merged]
        return tuple(iv for iv in merged if iv[0] < iv[1])
    return tuple((l, r) for l, r in merged)


def _overlap(a: Sequence, b: Sequence) -> int:
    i = k = 0
    total = 0
    while i < len(a) and k < len(b):
        lo = max(a[i][0], b[k][0])
        hi = min(a[i][1], b[k][1])
        if hi > lo:
            total += hi - lo
        if a[i][1] < b[k][1]:
            i += 1
        else:
            k += 1
    return total


def pair_intersection_measure_1d(q: int, k: int, delta, clip: bool = True) -> Fraction:
    """Exact measure of E1(delta, q) intersected with E1(delta, k), q != k."""
    if q < 2 or k < 2:
        raise DomainError(f"denominators must be >= 2, got ({q}, {k})")
    if q == k:
        raise DomainError("the overlap estimate concerns distinct denominators")
    delta = parse_rational(delta)
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    u, v = delta.numerator, delta.denominator
    D = q * k * v
    clip_to = D if clip else 0
    a = _scaled(q, k * v, u * q * k, clip_to)
    b = _scaled(k, q * v, u * q * k, clip_to)
    return Fraction(_overlap(a, b), D)


def pair_intersection_measure(q: int, k: int, delta, d: int, clip: bool = True) -> Fraction:
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    return pair_intersection_measure_1d(q, k, delta, clip) ** (d - 1)


def duffin_schaeffer_bound(q: int, k: int, delta, d: int = 2) -> Fraction:
    """c (q k delta^2)^{d-1} with c = 4^{d-1}."""
    delta = parse_rational(delta)
    return (4 * q * k * delta * delta) ** (d - 1)


def chung_erdos_bound(singles: Sequence, pairs: Sequence[Sequence]):
    """(sum mu(A_i))^2 / sum_{k,l} mu(A_k & A_l).

    Inputs are checked for consistency with some measure: symmetric,
    diagonal equal to the singles, entries within [0, min of the two singles].
    """
    m = len(singles)
    if m == 0 or any(s < 0 for s in singles) or not any(s > 0 for s in singles):
        raise DomainError("need nonnegative event measures with at least one positive")
    if len(pairs) != m or any(len(row) != m for row in pairs):
        raise DomainError("pair matrix must be square and match the singles")
    for i in range(m):
        if pairs[i][i] != singles[i]:
            raise DomainError(f"diagonal entry {i} differs from its single measure")
        for k in range(m):
            v = pairs[i][k]
            if v != pairs[k][i]:
                raise DomainError(f"pair matrix not symmetric at ({i}, {k})")
            if v < 0 or v > min(singles[i], singles[k]):
                raise DomainError(f"pair entry ({i}, {k}) = {v} inconsistent with singles")
    total = sum(singles)
    return total * total / sum(sum(row) for row in pairs)


# ---------------------------------------------------------------------------
# layer sums


def layer_families(spec: SetSpec, scale: DyadicScale, k: int) -> list[IntervalUnion]:
    return [approx_intervals(n, scale.delta) for n in layer_denominators(spec, scale, k)]


def layer_sum_measure(spec: SetSpec, scale: DyadicScale, k: int) -> Fraction:
    e = spec.d - 1
    return sum(
        (approx_intervals(n, scale.delta).measure ** e for n in layer_denominators(spec, scale, k)),
        Fraction(0),
    )


def layer_pair_sum(spec: SetSpec, scale: DyadicScale, k: int) -> Fraction:
    """Double sum of pairwise overlap measures over the layer, diagonal included."""
    ns = list(layer_denominators(spec, scale, k))
    e = spec.d - 1
    total = sum((approx_intervals(n, scale.delta).measure ** e for n in ns), Fraction(0))
    for i, n in enumerate(ns):
        for m in ns[i + 1 :]:
            total += 2 * pair_intersection_measure(n, m, scale.delta, spec.d)
    return total


def chung_erdos_layer_floor(spec: SetSpec, scale: DyadicScale, k: int) -> Fraction:
    s = layer_sum_measure(spec, scale, k)
    if s == 0:
        raise DomainError(f"layer k={k} is empty at j={scale.j}")
    return s * s / layer_pair_sum(spec, scale, k)


def layer_union_measure(spec: SetSpec, scale: DyadicScale, k: int) -> Fraction:
    """Exact measure of the layer's E-union (d = 2 only)."""
    if spec.d != 2:
        raise DomainError("exact union measure is implemented for d = 2 only")
    return union_measure(layer_families(spec, scale, k))


def layer_measure_surrogate(spec: SetSpec, scale: DyadicScale, k: int) -> Fraction:
    """delta^{d-1} times the layer cover count (comparable to the union measure)."""
    return scale.delta ** (spec.d - 1) * layer_cover_count(spec, scale, k)


def layer_envelope_ratio(spec: SetSpec, scale: DyadicScale, k: int) -> float:
    """Layer sum divided by delta^{d-1} / (k^{d/t+1} delta^{d/t})."""
    d, t = spec.d, float(spec.t)
    delta = float(scale.delta)
    scale_term = delta ** (d - 1) / (k ** (d / t + 1) * delta ** (d / t))
    return float(layer_sum_measure(spec, scale, k)) / scale_term


def loglog_factor(spec: SetSpec, scale: DyadicScale) -> float:
    """log log delta^{-d/(t+d)}."""
    d, t = spec.d, float(spec.t)
    return math.log(scale.j * math.log(2) * d / (t + d))


def layer_diagnostics(spec: SetSpec, scale: DyadicScale, ks: Iterable[int]) -> list[dict]:
    rows = []
    for k in ks:
        s = layer_sum_measure(spec, scale, k)
        p = layer_pair_sum(spec, scale, k)
        rows.append(
            {
                "k": k,
                "l_low": layer_bound_index(spec, scale, k + 1),
                "l_high": layer_bound_index(spec, scale, k),
                "sum_measure": s,
                "pair_sum": p,
                "ce_floor": s * s / p if s else Fraction(0),
                "cover_count": layer_cover_count(spec, scale, k),
            }
        )
    return rows


def write_layer_csv(rows: Sequence[dict], out) -> None:
    writer = csv.DictWriter(out, fieldnames=LAYER_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else v)
                         for k, v in row.items()})
