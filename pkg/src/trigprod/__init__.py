"""Extended-precision evaluation and numerical certification of
trigonometric product identities for sinc(z)."""

from .errors import (
    IndexOutOfRange,
    InsufficientSamples,
    PoleProximity,
    RangeCapExceeded,
    ToleranceUnreachable,
    TrigProdError,
    UnsupportedFormula,
)
from .numerics import PrecisionCfg, c_trig, log_gamma, log_sin, pole_distance, sinc_ref
from .product_core import (
    EvalResult,
    Flag,
    Formula,
    ProductRequest,
    TermValue,
    finite_rhs,
    oracle_partial,
    partial_product,
    term,
)

__version__ = "0.1.0"
