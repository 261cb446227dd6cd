"""Popcorn pyramid sets: exact covers, Diophantine overlap measures and dimensions."""

from .covering import (
    CoverReport,
    DyadicScale,
    KRange,
    admissible_k_range,
    cell_of,
    cover_count,
    layer_bound_index,
    layer_cover_count,
    layer_points,
    localized_cover_count,
)
from .dimensions import (
    DimensionReport,
    assouad_dim_formula,
    box_dim_formula,
    critical_exponent,
    fit_box_dimension,
    general_lower_bound,
    general_upper_bound,
    hausdorff_dim,
    holder_exponent_bound,
    intermediate_dim_formula,
    two_scale_cover_cost,
)
from .errors import DomainError, ResourceCapError, VerificationError
from .measure import (
    IntervalUnion,
    approx_intervals,
    chung_erdos_bound,
    chung_erdos_layer_floor,
    layer_pair_sum,
    layer_sum_measure,
    pair_intersection_measure,
    pair_intersection_measure_1d,
    union_measure,
)
from .number_theory import coprime_residues, gcd, totient, totient_growth_ratio, totient_sieve
from .popcorn_sets import RationalPoint, SetSpec, enumerate_points, evaluate

__version__ = "0.1.0"
