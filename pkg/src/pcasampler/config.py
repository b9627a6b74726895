"""Size caps and numerical tolerances used across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Limits:
    # 2**20 states for vectors, 2**12 for full matrices: worst case stays under ~1 GB.
    max_vector_sites: int = 20
    max_matrix_sites: int = 12
    # sup over sigma is taken exhaustively for Dobrushin coefficients / oscillations
    max_sup_sites: int = 10
    # dense gamma matrices are only materialized up to this many sites
    max_dense_sites: int = 2048


@dataclass(frozen=True)
class Tolerances:
    normalization: float = 1e-12
    reversibility: float = 1e-10
    identity: float = 1e-10
    factorization: float = 1e-12
    psi_consistency: float = 1e-8


LIMITS = Limits()
TOL = Tolerances()

THREADS_ENV = "PCASAMPLER_THREADS"
