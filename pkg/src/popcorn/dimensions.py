"""Closed-form dimensions of the popcorn sets and their numerical counterparts.

Formula operations return Fractions. The empirical side fits log-log slopes
of cover counts and finds the critical exponent of an explicit two-scale
cover.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .covering import DyadicScale, _top_denominator, height_index, localized_cover_count
from .errors import DomainError, VerificationError
from .popcorn_sets import SetSpec, enumerate_points, parse_rational, point_count, rational_str


def hausdorff_dim(spec: SetSpec) -> Fraction:
    return Fraction(spec.d - 1)


def box_dim_formula(spec: SetSpec) -> Fraction:
    if spec.subcritical:
        return Fraction(spec.d**2) / (spec.d + spec.t)
    return Fraction(spec.d - 1)


def assouad_dim_formula(spec: SetSpec) -> Fraction:
    return Fraction(spec.d if spec.subcritical else spec.d - 1)


def phase_transition(spec: SetSpec) -> Fraction:
    """theta = (d-1) t / d, where dim_theta leaves the value d-1."""
    return (spec.d - 1) * spec.t / spec.d


def intermediate_dim_formula(spec: SetSpec, theta) -> Fraction:
    theta = parse_rational(theta)
    if not 0 <= theta <= 1:
        raise DomainError(f"theta must lie in [0, 1], got {theta}")
    d = spec.d
    if not spec.subcritical or theta <= phase_transition(spec):
        return Fraction(d - 1)
    return d * d * theta / (d * theta + spec.t)


def general_upper_bound(dim_at_theta, theta, phi, dim_A):
    """Upper bound for dim_phi from dim_theta and the Assouad dimension (0 < theta <= phi)."""
    if not 0 < theta <= phi <= 1:
        raise DomainError(f"need 0 < theta <= phi <= 1, got theta={theta}, phi={phi}")
    gap = phi - theta
    num = dim_at_theta * (dim_A - dim_at_theta)
    return dim_at_theta + num / (gap * dim_at_theta + theta * dim_A) * gap


def general_lower_bound(box, theta, dim_A):
    """Lower bound theta*A*B / (A - (1-theta)*B) for dim_theta."""
    if not 0 < theta <= 1:
        raise DomainError(f"need 0 < theta <= 1, got {theta}")
    denom = dim_A - (1 - theta) * box
    if denom == 0:
        raise DomainError("vanishing denominator in the lower bound")
    return theta * dim_A * box / denom


def holder_exponent_bound(d: int, t1, t2) -> Fraction:
    """Largest possible Holder exponent of a map from G_{t2,d} onto G_{t1,d}."""
    t1, t2 = parse_rational(t1), parse_rational(t2)
    if not 0 < t1 < t2 <= Fraction(d, d - 1):
        raise DomainError(f"need 0 < t1 < t2 <= d/(d-1), got t1={t1}, t2={t2}")
    return ((d - 1) * t2 + t1) / (d * t2)


def holder_ratio_curve(d: int, t1, t2, thetas: Sequence[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """dim_theta(G_{t2,d}) / dim_theta(G_{t1,d}) over a theta grid."""
    s1, s2 = SetSpec(t1, d), SetSpec(t2, d)
    return [
        (th, intermediate_dim_formula(s2, th) / intermediate_dim_formula(s1, th)) for th in thetas
    ]


def theta_grid(points: int = 101) -> list[Fraction]:
    return [Fraction(i, points - 1) for i in range(points)]


@dataclass
class DimensionReport:
    spec: SetSpec
    hausdorff: Fraction
    box: Fraction
    assouad: Fraction
    theta_profile: list[tuple[Fraction, Fraction]] = field(default_factory=list)
    derived_from_collapse: bool = False

    @classmethod
    def from_formulas(cls, spec: SetSpec, points: int = 101) -> "DimensionReport":
        return cls(
            spec=spec,
            hausdorff=hausdorff_dim(spec),
            box=box_dim_formula(spec),
            assouad=assouad_dim_formula(spec),
            theta_profile=[(th, intermediate_dim_formula(spec, th)) for th in theta_grid(points)],
            derived_from_collapse=not spec.subcritical,
        )

    def to_dict(self) -> dict:
        return {
            "t": rational_str(self.spec.t),
            "d": self.spec.d,
            "variant": self.spec.variant,
            "hausdorff": rational_str(self.hausdorff),
            "box": rational_str(self.box),
            "assouad": rational_str(self.assouad),
            "profile": [[rational_str(th), rational_str(v)] for th, v in self.theta_profile],
            "derived_from_collapse": self.derived_from_collapse,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------------------
# empirical estimation


@dataclass(frozen=True)
class BoxFit:
    slope: float
    intercept: float
    residuals: tuple[float, ...]
    last_pair_slope: float


def fit_box_dimension(counts: Sequence[tuple[int, int]]) -> BoxFit:
    """Least-squares slope of log2 N against j."""
    if len(counts) < 3:
        raise DomainError(f"need at least 3 scales, got {len(counts)}")
    js = np.array([c[0] for c in counts], dtype=float)
    if np.any(np.diff(js) <= 0):
        raise DomainError("levels must be strictly increasing")
    ys = np.log2(np.array([c[1] for c in counts], dtype=float))
    slope, intercept = np.polyfit(js, ys, 1)
    resid = ys - (slope * js + intercept)
    last = (ys[-1] - ys[-2]) / (js[-1] - js[-2])
    return BoxFit(float(slope), float(intercept), tuple(float(r) for r in resid), float(last))


@dataclass(frozen=True)
class CoverCost:
    theta: Fraction
    scale: DyadicScale
    s: float
    cost: float
    split_height_exponent: Fraction
    split_level: int  # split height is 2^-split_level
    small_level: int  # small cubes have side 2^-small_level
    mesh_cells: int
    point_cubes: int


def _two_scale_cover(spec: SetSpec, theta: Fraction, scale: DyadicScale) -> tuple:
    d, j = spec.d, scale.j
    if not spec.subcritical:
        raise DomainError("two-scale cover needs t < d/(d-1)")
    if not phase_transition(spec) < theta <= 1:
        raise DomainError(f"theta must lie in ((d-1)t/d, 1] = ({phase_transition(spec)}, 1]")
    exponent = d * spec.t / (d * theta + spec.t)
    target = j * exponent
    split = max(1, min(j, math.floor(target + Fraction(1, 2))))
    # 2^-floor(j/theta) >= delta^{1/theta}, so the small cubes stay admissible
    small = math.floor(j / theta)
    mesh = 1 << (j * (d - 1) + j - split)
    # points strictly above height 2^-split: q^a < 2^{split*b}
    q_top = _top_denominator(spec, split)
    if q_top**spec.a == 1 << (split * spec.b):
        q_top -= 1
    points = point_count(spec, q_top) if q_top >= 2 else 0
    return exponent, split, small, mesh, points


def _cost(mesh: int, points: int, j: int, small: int, s: float) -> float:
    return mesh * 2.0 ** (-j * s) + points * 2.0 ** (-small * s)


def two_scale_cover_cost(spec: SetSpec, theta, scale: DyadicScale, s: float) -> CoverCost:
    """Cost sum |U|^s of the cover: delta-cubes on a low slab, tiny cubes on points above it.

    |U| is the cube side length.
    """
    theta = parse_rational(theta)
    exponent, split, small, mesh, points = _two_scale_cover(spec, theta, scale)
    cost = _cost(mesh, points, scale.j, small, s)
    return CoverCost(theta, scale, s, cost, exponent, split, small, mesh, points)


def critical_exponent(spec: SetSpec, theta, scale: DyadicScale, tol: float = 1e-3) -> float:
    """The s at which the two-scale cover has cost exactly 1."""
    theta = parse_rational(theta)
    _, _, small, mesh, points = _two_scale_cover(spec, theta, scale)
    j = scale.j
    lo, hi = 0.0, float(spec.d)
    f_lo, f_hi = _cost(mesh, points, j, small, lo), _cost(mesh, points, j, small, hi)
    if not f_lo >= 1 >= f_hi:
        raise VerificationError(
            "cost does not bracket 1 on [0, d]", {"cost_at_0": f_lo, "cost_at_d": f_hi}
        )
    while hi - lo > tol / 2:
        mid = (lo + hi) / 2
        if _cost(mesh, points, j, small, mid) > 1:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


@dataclass(frozen=True)
class Probe:
    corner: tuple[Fraction, ...]
    R_level: int
    r_level: int
    count: int

    @property
    def exponent(self) -> float:
        if self.count <= 1:
            return 0.0
        return math.log(self.count) / ((self.r_level - self.R_level) * math.log(2))


def probe_corners(spec: SetSpec, q_probe: int, height_level: int) -> list[tuple[Fraction, ...]]:
    """Origin, every point with q <= q_probe, and the foot of each on the base.

    Heights q^{-t} that are irrational are rounded down to the 2^-height_level
    grid, which keeps the point inside the probed cube.
    """
    zero = Fraction(0)
    corners = {(zero,) * spec.d}
    for pt in enumerate_points(spec, q_probe):
        if spec.b == 1:
            h = Fraction(1, pt.denominator**spec.a)
        else:
            h = Fraction(height_index(pt.denominator, spec.t, height_level), 1 << height_level)
        corners.add(pt.coords + (h,))
        corners.add(pt.coords + (zero,))
    return sorted(corners)


def assouad_probes(
    spec: SetSpec,
    probes: int = 64,
    ratio_levels: Sequence[int] = (4, 6),
    R_levels: Sequence[int] = tuple(range(1, 9)),
    q_probe: int = 16,
    seed: int = 0,
) -> list[Probe]:
    """Localized cover counts N_r(C(x, R)) at seeded corners and scale pairs."""
    rng = random.Random(seed)
    height_level = max(R_levels) + max(ratio_levels)
    corners = probe_corners(spec, q_probe, height_level)
    out = []
    for _ in range(probes):
        x = rng.choice(corners)
        J = rng.choice(list(R_levels))
        jr = J + rng.choice(list(ratio_levels))
        n = localized_cover_count(spec, x, DyadicScale(J), DyadicScale(jr))
        out.append(Probe(x, J, jr, n))
    return out
