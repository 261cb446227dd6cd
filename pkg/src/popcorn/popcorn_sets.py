"""Exact model of the popcorn pyramid graph G_{t,d} and the full set F_{t,d}.

Points are ``(p_1/q, ..., p_{d-1}/q, q^{-t})`` with ``1 <= p_i <= q - 1``; the
graph additionally requires every ``p_i`` coprime to ``q``. The exponent ``t``
is a positive rational ``a/b`` so that every height comparison reduces to an
integer inequality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence, TextIO

from .errors import DomainError, ResourceCapError
from .number_theory import coprime_residues, totient_sieve

VARIANTS = ("graph", "full")

# Default budget on enumerated points (also used by the covering counts).
DEFAULT_MAX_POINTS = 200_000_000

# point_count switches to an order-of-magnitude figure above this denominator.
EXACT_COUNT_LIMIT = 10_000_000


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"a/b"``, ``"a"`` or a decimal string into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse rational {text!r}") from exc


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class SetSpec:
    t: Fraction
    d: int
    variant: str = "graph"

    def __post_init__(self):
        object.__setattr__(self, "t", parse_rational(self.t))
        if self.t <= 0:
            raise DomainError(f"t must be positive, got {self.t}")
        if not isinstance(self.d, int) or self.d < 2:
            raise DomainError(f"d must be an integer >= 2, got {self.d!r}")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    @property
    def a(self) -> int:
        return self.t.numerator

    @property
    def b(self) -> int:
        return self.t.denominator

    @property
    def critical_t(self) -> Fraction:
        return Fraction(self.d, self.d - 1)

    @property
    def subcritical(self) -> bool:
        # t < d/(d-1)  <=>  a(d-1) < bd
        return self.a * (self.d - 1) < self.b * self.d

    def with_variant(self, variant: str) -> "SetSpec":
        return SetSpec(self.t, self.d, variant)


@dataclass(frozen=True)
class RationalPoint:
    numerators: tuple[int, ...]
    denominator: int

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(p, self.denominator) for p in self.numerators)

    def height(self, t: Fraction) -> float:
        return float(self.denominator) ** (-float(t))

    def dump_line(self) -> str:
        return " ".join(str(v) for v in (self.denominator, *self.numerators))


class Height(NamedTuple):
    """Either zero (``q == 0``) or the exact value ``q**(-t)``."""

    q: int
    t: Fraction

    @property
    def is_zero(self) -> bool:
        return self.q == 0

    def value(self) -> float:
        return 0.0 if self.is_zero else float(self.q) ** (-float(self.t))


def evaluate(spec: SetSpec, x: Sequence[Fraction]) -> Height:
    """The popcorn pyramid function f_{t,d} at an exact rational point.

    This is the graph function for either variant; the full set has further
    points above some x (at multiples of the common denominator).
    """
    if len(x) != spec.d - 1:
        raise DomainError(f"expected {spec.d - 1} coordinates, got {len(x)}")
    coords = [parse_rational(c) for c in x]
    for c in coords:
        if not 0 <= c <= 1:
            raise DomainError(f"coordinate {c} outside [0, 1]")
    zero = Height(0, spec.t)
    q = coords[0].denominator
    if q < 2:
        return zero
    # Fractions are always reduced, so a shared denominator means coprime numerators.
    if any(c.denominator != q for c in coords):
        return zero
    return Height(q, spec.t)


def _residues(spec: SetSpec, q: int) -> list[int]:
    return coprime_residues(q) if spec.variant == "graph" else list(range(1, q))


def point_count(spec: SetSpec, q_max: int, q_min: int = 2) -> int:
    """Exact number of points with ``q_min <= q <= q_max``."""
    if q_max < q_min:
        return 0
    e = spec.d - 1
    if q_max > EXACT_COUNT_LIMIT:
        # far beyond any enumeration budget; sum (q-1)^e ~ q^d / d is enough here
        return q_max**spec.d // spec.d
    if spec.variant == "full":
        return sum((q - 1) ** e for q in range(q_min, q_max + 1))
    phi = totient_sieve(max(q_max, 2)).values
    if e == 1:
        return int(phi[q_min : q_max + 1].sum())
    return sum(int(v) ** e for v in phi[q_min : q_max + 1].tolist())


def enumerate_points(
    spec: SetSpec,
    q_max: int,
    *,
    q_min: int = 2,
    max_points: int = DEFAULT_MAX_POINTS,
) -> Iterator[RationalPoint]:
    """Stream every point with ``q_min <= q <= q_max`` in (q, numerators) order.

    The base hyperplane is not enumerated. Raises :class:`ResourceCapError`
    before yielding anything if the predicted count exceeds ``max_points``.
    """
    if q_max < 2:
        raise DomainError(f"q_max must be >= 2, got {q_max}")
    q_min = max(q_min, 2)
    predicted = point_count(spec, q_max, q_min)
    if predicted > max_points:
        raise ResourceCapError(f"enumeration up to q={q_max} exceeds cap {max_points}", predicted)
    return _stream(spec, q_min, q_max)


def _stream(spec: SetSpec, q_min: int, q_max: int) -> Iterator[RationalPoint]:
    for q in range(q_min, q_max + 1):
        for ps in itertools.product(_residues(spec, q), repeat=spec.d - 1):
            yield RationalPoint(ps, q)


def write_points(points, out: TextIO) -> int:
    """Write the ``q p_1 ... p_{d-1}`` dump format; returns the line count."""
    n = 0
    for pt in points:
        out.write(pt.dump_line() + "\n")
        n += 1
    return n


def read_points(lines) -> Iterator[RationalPoint]:
    for line in lines:
        line = line.strip()
        if not line:
            continue
        q, *ps = (int(v) for v in line.split())
        yield RationalPoint(tuple(ps), q)
