"""Stochastic engines: synchronous PCA updates, single-site heat bath,
reflected PCA and the shared-uniform monotone coupling."""

import os
import sys

# numba fixes its thread pool size at import; leave room for >1 worker even
# on single-core hosts so determinism across worker counts can be exercised.
# Once numba is loaded its settings are left alone: changing them later
# makes the next compilation fail.
if "numba" not in sys.modules:
    if "NUMBA_NUM_THREADS" not in os.environ:
        os.environ["NUMBA_NUM_THREADS"] = str(max(2, os.cpu_count() or 1))
    # the portable pool; the TBB layer on this class of host is often too old
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from .rng import RngPolicy  # noqa: E402
from .core import (  # noqa: E402
    ChainStats,
    CoalescenceReport,
    CoupledStepResult,
    StepResult,
    coupled_pca_step,
    estimate_coalescence,
    gibbs_step,
    max_threads,
    one_step_contraction,
    pca_flip_probability,
    pca_single_site_probability,
    pca_step,
    reflected_pca_step,
    run_chain,
    set_threads,
)

__all__ = [
    "RngPolicy",
    "ChainStats",
    "CoalescenceReport",
    "CoupledStepResult",
    "StepResult",
    "coupled_pca_step",
    "estimate_coalescence",
    "gibbs_step",
    "max_threads",
    "one_step_contraction",
    "pca_flip_probability",
    "pca_single_site_probability",
    "pca_step",
    "reflected_pca_step",
    "run_chain",
    "set_threads",
]
