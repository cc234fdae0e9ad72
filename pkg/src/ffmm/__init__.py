"""Exact linear algebra over word-size prime fields built around fast matrix multiplication."""

from .field import (
    AccumulatorTooSmall,
    FieldElem,
    FieldError,
    NotInvertible,
    OpCounter,
    PrimeField,
    delayed_bound,
    delayed_dot,
    ff_arith,
    ff_inv,
    is_prime,
)
from .dense import DenseMatrix, DimensionError, block, mat_addsub
from .multiply import (
    CascadeConfig,
    Workspace,
    mm_classic,
    mm_fast,
    mm_fast_acc,
    mm_fast_batched,
    mm_parallel,
    mm_waksman,
    strassen_step,
    winograd_step,
)
from .factor import GenericRankProfileViolation, LuResult, det, inverse, lu, trsm_lower, trsm_upper
from .lift import (
    DixonStats,
    PadicSeries,
    RationalVector,
    ReconstructionFailure,
    SingularSystem,
    dixon_solve,
    hadamard_bound,
    rational_reconstruction,
)
from .binseg import PackedInt, SlotOverflow, binseg_inner, binseg_inner_signed, binseg_sum, binseg_sum_signed, pack, unpack
from .tiny import (
    PackedF2Matrix,
    SlicedF3Vector,
    f2_mm_four_russians,
    f2_mm_naive,
    f3_add,
    f3_mm,
    f3_neg,
    f3_slice,
    f3_sub,
    f3_unslice,
    kron_add,
    kron_pack,
    kron_unpack,
    simultaneous_reduce,
)

__version__ = "0.1.0"
