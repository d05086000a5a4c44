"""Quality functionals of point configurations."""

from .legendre import VOLUME, TruncationError, WceResult, wce_legendre
from .heat import HeatKernelEval, QuadratureError, g_of_t, wce_heat_kernel
from .discrepancy import (
    cap_discrepancy_l2,
    cap_discrepancy_linf,
    distance_comparability,
    generalized_sum,
    log_energy,
    stolarsky_l2,
    wce_distance_s32,
)

__all__ = [
    "VOLUME", "TruncationError", "WceResult", "wce_legendre", "HeatKernelEval", "QuadratureError",
    "g_of_t", "wce_heat_kernel", "cap_discrepancy_l2", "cap_discrepancy_linf", "distance_comparability", "generalized_sum",
    "log_energy", "stolarsky_l2", "wce_distance_s32",
]
