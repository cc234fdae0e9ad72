"""Bilinear, trilinear and APA schemes for matrix multiplication."""

from .core import (
    PERMUTATIONS,
    BilinearMap,
    BilinearScheme,
    TrilinearScheme,
    apply_scheme,
    as_bilinear_map,
    bilinear_to_trilinear,
    brent_residual,
    brent_verify,
    canonical_form,
    dualize,
    mm_slot_names,
    mm_trilinear_target,
    trilinear_from_terms,
    trilinear_to_bilinear,
    trilinear_verify,
)
from .builtin import (
    classical_scheme,
    complex_mult_scheme,
    strassen_scheme,
    trilinear_complex_scheme,
    trilinear_mm2_scheme,
    winograd_scheme,
)
from .aggregation import agg_pair_scheme, agg_triple_scheme, unpaired_families
from .apa import (
    ApaScheme,
    InterpolationError,
    Laurent,
    apa_from_terms,
    apa_pair_scheme,
    apa_to_bilinear,
    apa_to_trilinear,
    apa_verify,
    lift_exact,
)
from .exponent import KNOWN_POINTS, apa_exponent, exponent_of, aggregation_rank
from .io import SchemeFormatError, format_scheme, parse_scheme, read_scheme, shipped_scheme, write_scheme
