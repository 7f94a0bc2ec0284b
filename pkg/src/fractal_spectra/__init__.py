"""Multifractal analysis of self-similar measures on the line under the open set condition."""

from ._kernels import USE_JIT
from .divergence_builder import (
    alpha_grid,
    cylinder_quotient_trace,
    emit_digits,
    freq_for_alpha,
    schedule,
    schedule_trace,
    verify_accumulation,
)
from .errors import (
    DomainError,
    FractalSpectraError,
    InvalidModelError,
    MalformedIntervalError,
    MalformedWordError,
    ResourceError,
    UndefinedError,
)
from .ifs_core import (
    IFSModel,
    SimilarityMap,
    antichain_weight_sum,
    cylinder,
    stopping_words,
    validate,
    weighted_cantor,
)
from .lq_spectrum import compare_beta, tau_estimate, theta
from .measure_eval import accumulation_estimate, local_dim_trace, mu_interval
from .moran_dim import MoranLevel, MoranSpec, condition_26, from_schedule, packing_dim, s_k
from .spectrum import (
    alpha,
    alpha_range,
    beta,
    divergence_dimensions,
    legendre,
    spectrum_table,
)

__all__ = [
    "accumulation_estimate",
    "alpha",
    "alpha_grid",
    "alpha_range",
    "antichain_weight_sum",
    "beta",
    "compare_beta",
    "condition_26",
    "cylinder",
    "cylinder_quotient_trace",
    "divergence_dimensions",
    "DomainError",
    "emit_digits",
    "FractalSpectraError",
    "freq_for_alpha",
    "from_schedule",
    "IFSModel",
    "InvalidModelError",
    "legendre",
    "local_dim_trace",
    "MalformedIntervalError",
    "MalformedWordError",
    "MoranLevel",
    "MoranSpec",
    "mu_interval",
    "packing_dim",
    "ResourceError",
    "s_k",
    "schedule",
    "schedule_trace",
    "SimilarityMap",
    "spectrum_table",
    "stopping_words",
    "tau_estimate",
    "theta",
    "UndefinedError",
    "USE_JIT",
    "validate",
    "verify_accumulation",
    "weighted_cantor",
]

__version__ = "0.1.0"
