"""Spherical ensemble sampling, Sobolev worst-case errors and explicit QMC bounds on the two-sphere."""

import numba as _numba

# Prefer OpenMP over TBB: some TBB builds are too old for numba and only produce a warning.
# An explicit NUMBA_THREADING_LAYER still wins.
_numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from .sphere import (  # noqa: E402
    Configuration,
    RngStream,
    apply_rotation,
    inverse_stereographic,
    pairwise_cosines,
    stereographic,
)
from .samplers import KINDS, SamplerSpec, sample  # noqa: E402
from .metrics import (  # noqa: E402
    WceResult,
    cap_discrepancy_l2,
    cap_discrepancy_linf,
    g_of_t,
    generalized_sum,
    log_energy,
    wce_distance_s32,
    wce_heat_kernel,
    wce_legendre,
)

__version__ = "0.1.0"

__all__ = [
    "Configuration", "RngStream", "apply_rotation", "inverse_stereographic", "pairwise_cosines",
    "stereographic", "KINDS", "SamplerSpec", "sample", "WceResult", "cap_discrepancy_l2",
    "cap_discrepancy_linf", "g_of_t", "generalized_sum", "log_energy", "wce_distance_s32",
    "wce_heat_kernel", "wce_legendre",
]
