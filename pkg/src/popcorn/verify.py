"""Exhaustive inequality suites behind ``popcorn verify``.

Each suite returns a :class:`SuiteResult`; a suite never raises on a failed
inequality, it lists the counterexamples instead.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .covering import DyadicScale, admissible_k_range, epsilon_cap
from .errors import DomainError, VerificationError
from .measure import (
    chung_erdos_bound,
    chung_erdos_layer_floor,
    duffin_schaeffer_bound,
    layer_diagnostics,
    layer_union_measure,
    pair_intersection_measure,
    pair_intersection_measure_1d,
)
from .number_theory import growth_ratio_scan, totient, totient_sieve
from .popcorn_sets import SetSpec

SUITES = ("duffin-schaeffer", "chung-erdos", "totient", "epsilon", "layers")


@dataclass
class SuiteResult:
    suite: str
    checked: int = 0
    counterexamples: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def fail(self, item) -> None:
        self.counterexamples.append(item)


def duffin_schaeffer_suite(
    q_max: int = 200,
    levels=range(4, 13),
    d: int = 3,
    sample: int = 1000,
    seed: int = 0,
) -> SuiteResult:
    """1-d overlap <= 4 q k delta^2 on the full grid, d-dim bound on a random sample."""
    res = SuiteResult("duffin-schaeffer")
    worst = Fraction(0)
    for j in levels:
        delta = Fraction(1, 1 << j)
        for q in range(2, q_max + 1):
            for k in range(q + 1, q_max + 1):
                m = pair_intersection_measure_1d(q, k, delta)
                bound = 4 * q * k * delta * delta
                res.checked += 1
                if m > bound:
                    res.fail({"q": q, "k": k, "j": j, "measure": str(m), "bound": str(bound)})
                elif m and m / bound > worst:
                    worst = m / bound
    rng = random.Random(seed)
    for _ in range(sample):
        q, k = rng.sample(range(2, q_max + 1), 2)
        j = rng.choice(list(levels))
        delta = Fraction(1, 1 << j)
        m = pair_intersection_measure(q, k, delta, d)
        bound = duffin_schaeffer_bound(q, k, delta, d)
        res.checked += 1
        if m > bound:
            res.fail({"q": q, "k": k, "j": j, "d": d, "measure": str(m), "bound": str(bound)})
    res.summary = {"max_ratio_1d": float(worst), "q_max": q_max, "d": d}
    return res


def chung_erdos_suite(spec: SetSpec, levels, epsilon) -> SuiteResult:
    """Layer floors never exceed the exact union measure (d = 2)."""
    if spec.d != 2:
        raise DomainError("the exact Chung-Erdos check needs d = 2")
    res = SuiteResult("chung-erdos")
    for j in levels:
        scale = DyadicScale(j)
        for k in admissible_k_range(spec, scale, epsilon):
            floor = chung_erdos_layer_floor(spec, scale, k)
            union = layer_union_measure(spec, scale, k)
            res.checked += 1
            if floor > union:
                res.fail({"j": j, "k": k, "floor": str(floor), "union": str(union)})
    return res


def chung_erdos_matrix(singles, pairs) -> SuiteResult:
    """Evaluate the bound for user-supplied event measures (validated)."""
    res = SuiteResult("chung-erdos")
    bound = chung_erdos_bound(singles, pairs)
    res.checked = 1
    res.summary = {"bound": str(bound) if isinstance(bound, Fraction) else bound}
    return res


def totient_suite(limit: int = 10**6, sample: int = 1000, seed: int = 0, floor: float = 0.06) -> SuiteResult:
    res = SuiteResult("totient")
    table = totient_sieve(limit)
    rng = random.Random(seed)
    for n in sorted(rng.sample(range(2, limit + 1), min(sample, limit - 1))):
        res.checked += 1
        if table[n] != totient(n):
            res.fail({"n": n, "sieve": table[n], "direct": totient(n)})
    ratio, argmin = growth_ratio_scan(limit, table)
    res.checked += limit - 2
    if not ratio > floor:
        res.fail({"growth_ratio_min": ratio, "at": argmin, "floor": floor})
    total = int(table.values[2:].sum())
    res.summary = {
        "growth_ratio_min": ratio,
        "argmin": argmin,
        "mean_density": total / limit**2,
        "three_over_pi_sq": 3 / math.pi**2,
    }
    return res


def epsilon_suite(spec: SetSpec, levels, epsilon) -> SuiteResult:
    """Both layer properties on every admissible k, at each level."""
    res = SuiteResult("epsilon")
    ranges = {}
    for j in levels:
        res.checked += 1
        try:
            kr = admissible_k_range(spec, DyadicScale(j), epsilon)
            ranges[j] = (kr.k_min, kr.k_max)
        except VerificationError as exc:
            res.fail({"j": j, "diagnostics": {str(k): v for k, v in exc.diagnostics.items()}})
    res.summary = {"cap": str(epsilon_cap(spec)), "ranges": ranges}
    return res


def layers_suite(spec: SetSpec, levels, epsilon) -> SuiteResult:
    """Cover counts of layers against E-union measures.

    For d = 2: delta N / 3 <= measure <= 3 delta N exactly (every clipped
    interval has length >= delta and lies in the 3 cells around its centre,
    and a point is covered from at most 3 occupied cells). For any d the
    Chung-Erdos floor must stay below 3^{d-1} delta^{d-1} N.
    """
    res = SuiteResult("layers")
    rows = []
    ratios = []
    e = spec.d - 1
    for j in levels:
        scale = DyadicScale(j)
        kr = admissible_k_range(spec, scale, epsilon)
        diag = layer_diagnostics(spec, scale, kr)
        for row in diag:
            count = row["cover_count"]
            cell = scale.delta**e
            res.checked += 1
            if row["ce_floor"] > 3**e * cell * count:
                res.fail({"j": j, "k": row["k"], "issue": "floor above cell surrogate"})
            if spec.d == 2:
                union = layer_union_measure(spec, scale, row["k"])
                ratios.append(union / (cell * count))
                if not cell * count / 3 <= union <= 3 * cell * count:
                    res.fail({"j": j, "k": row["k"], "issue": "measure/count ratio", "union": str(union)})
        rows.extend(diag)
    res.summary = {"rows": rows}
    if ratios:
        res.summary["union_over_cells"] = [float(min(ratios)), float(max(ratios))]
    return res
