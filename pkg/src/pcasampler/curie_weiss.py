"""Mean-field (Curie-Weiss) analysis through the magnetization.

Every measure here is exchangeable, so a law over ``2**n`` configurations
collapses onto the ``n + 1`` magnetization values. Weights are built from
the exact finite-``n`` energies of :func:`pcasampler.model.curie_weiss`,
including the diagonal correction, and binomials go through ``gammaln``.

With the ``half`` convention the local field is close to ``J m / 2`` and the
free energy reads ``F(m) = (J/2) m**2 + I((1+m)/2)``. The ``full``
convention doubles every coupling; its ``F`` and ``m*`` therefore use the
effective strength ``2 J`` (see :attr:`CWSpec.effective_J`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln, logsumexp

from .errors import InvalidArgumentError, NotApplicableError
from .model import CouplingModel, curie_weiss

__all__ = [
    "CWSpec",
    "MagnetizationLaw",
    "DeltaRatio",
    "GaussianCheck",
    "entropy_I",
    "free_energy_F",
    "solve_mstar",
    "g_function",
    "solve_mbar",
    "magnetization_law",
    "delta_ratio_cw",
    "gaussian_approx_check",
    "contraction_prediction",
    "mixing_prediction",
]

CONVENTIONS = ("half", "full")


@dataclass(frozen=True)
class CWSpec:
    """Curie-Weiss instance: ``n`` sites, strength ``J``, flip density ``delta``."""

    n: int
    J: float
    convention: str = "half"
    delta: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgumentError(f"n must be an integer >= 2, got {self.n}")
        if not (self.J > 0 and math.isfinite(self.J)):
            raise InvalidArgumentError(f"J must be positive and finite, got {self.J}")
        if self.convention not in CONVENTIONS:
            raise InvalidArgumentError(f"convention must be one of {CONVENTIONS}")
        if not (0.0 <= self.delta <= 1.0):
            raise InvalidArgumentError(f"delta must lie in [0, 1], got {self.delta}")

    @classmethod
    def from_q(cls, n: int, J: float, q: float, convention: str = "half") -> "CWSpec":
        if not q >= 0:
            raise InvalidArgumentError(f"q must be >= 0, got {q}")
        return cls(n, J, convention, math.exp(-2.0 * q))

    @property
    def q(self) -> float:
        return math.inf if self.delta == 0.0 else -0.5 * math.log(self.delta)

    @property
    def pair_coupling(self) -> float:
        """``J_ij`` for ``i != j``."""
        return self.J / (2 * self.n) if self.convention == "half" else self.J / self.n

    @property
    def effective_J(self) -> float:
        """Strength entering ``F`` and ``g``: ``J`` (half) or ``2 J`` (full)."""
        return self.J if self.convention == "half" else 2.0 * self.J

    def model(self) -> CouplingModel:
        return curie_weiss(self.n, self.J, self.convention)


@dataclass(frozen=True)
class MagnetizationLaw:
    """Law of ``m`` on ``{-1, -1 + 2/n, ..., 1}``; ``ups[k] = k`` up spins."""

    support: np.ndarray
    ups: np.ndarray
    log_weights: np.ndarray
    probs: np.ndarray
    measure: str

    @property
    def n(self) -> int:
        return self.support.size - 1

    def mean(self, power: int = 1) -> float:
        return float(np.dot(self.probs, self.support**power))

    def variance(self) -> float:
        mu = self.mean()
        return float(np.dot(self.probs, (self.support - mu) ** 2))

    def conditioned_nonnegative(self) -> np.ndarray:
        """Probabilities restricted to ``m >= 0`` and renormalized."""
        p = np.where(self.support >= 0, self.probs, 0.0)
        return p / p.sum()


def _check_unit(x, name):
    x = np.asarray(x, dtype=np.float64)
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > 1):
        raise InvalidArgumentError(f"{name} must lie in [0, 1]")
    return x


def entropy_I(x):
    """``-x ln x - (1-x) ln(1-x)`` with ``0 ln 0 = 0``."""
    x = _check_unit(x, "x")
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(x > 0, -x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, -(1 - x) * np.log1p(-np.where(x < 1, x, 0.0)), 0.0)
    out = a + b
    return float(out) if out.ndim == 0 else out


def free_energy_F(m, J: float):
    """``F(m) = (J/2) m**2 + I((1+m)/2)``."""
    m = np.asarray(m, dtype=np.float64)
    if np.any(np.abs(m) > 1) or np.any(~np.isfinite(m)):
        raise InvalidArgumentError("m must lie in [-1, 1]")
    out = 0.5 * J * m**2 + entropy_I((1.0 + m) / 2.0)
    return float(out) if np.ndim(out) == 0 else out


def solve_mstar(J: float) -> float:
    """Nonnegative root of ``J m = artanh(m)``; zero for ``J <= 1``."""
    if not J > 0:
        raise InvalidArgumentError(f"J must be positive, got {J}")
    if J <= 1.0:
        return 0.0
    lo, hi = 1e-12, 1.0 - 1e-12
    return float(brentq(lambda m: J * m - math.atanh(m), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def g_function(m, delta: float, J: float):
    """Per-site tilt ``g`` with ``f = exp(n g(m))`` at large ``n``.

    ``a = ln(1 + delta e^{-J m})``, ``b = ln(1 + delta e^{J m})`` and
    ``g = (a + b)/2 + m (a - b)/2``.
    """
    if delta < 0:
        raise InvalidArgumentError("delta must be >= 0")
    m = np.asarray(m, dtype=np.float64)
    if np.any(np.abs(m) > 1):
        raise InvalidArgumentError("m must lie in [-1, 1]")
    a = np.log1p(delta * np.exp(-J * m))
    b = np.log1p(delta * np.exp(J * m))
    out = 0.5 * (a + b) + 0.5 * m * (a - b)
    return float(out) if out.ndim == 0 else out


def solve_mbar(J: float, delta: float) -> float:
    """``argmax_{m in [0, 1]} F(m) + g(m, delta)``, located to 1e-10."""
    if delta == 0.0:
        return solve_mstar(J)

    def neg(m):
        return -(free_energy_F(m, J) + g_function(m, delta, J))

    res = minimize_scalar(neg, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-11})
    best = float(res.x)
    # the bounded search never lands exactly on an endpoint
    for edge in (0.0, 1.0):
        if neg(edge) <= neg(best):
            best = edge
    return best


def _site_terms(spec: CWSpec):
    k = np.arange(spec.n + 1, dtype=np.float64)
    s = 2.0 * k - spec.n
    c = spec.pair_coupling
    log_binom = gammaln(spec.n + 1.0) - gammaln(k + 1.0) - gammaln(spec.n - k + 1.0)
    minus_h = c * (s * s - spec.n)
    return k, s, c, log_binom, minus_h


def _log_f(spec: CWSpec, k, s, c):
    if spec.delta == 0.0:
        return np.zeros_like(k)
    ld = math.log(spec.delta)
    # h_i sigma_i is -c (S - 1) on up spins and c (S + 1) on down spins
    up = np.logaddexp(0.0, ld - 2.0 * c * (s - 1.0))
    down = np.logaddexp(0.0, ld + 2.0 * c * (s + 1.0))
    return k * up + (spec.n - k) * down


def magnetization_law(spec: CWSpec, measure: str = "gibbs") -> MagnetizationLaw:
    """Exact law of the magnetization under gibbs, pca or tilde."""
    power = {"gibbs": 0, "pca": 1, "tilde": 2}.get(measure)
    if power is None:
        raise InvalidArgumentError(f"unknown measure {measure!r}")
    k, s, c, log_binom, minus_h = _site_terms(spec)
    logw = log_binom + minus_h
    if power:
        logw = logw + power * _log_f(spec, k, s, c)
    probs = np.exp(logw - logsumexp(logw))
    probs /= probs.sum()
    return MagnetizationLaw(s / spec.n, k.astype(np.int64), logw, probs, measure)


@dataclass(frozen=True)
class DeltaRatio:
    value: float
    prediction: float

    @property
    def relative_error(self) -> float:
        return abs(self.value - self.prediction) / self.prediction if self.prediction else math.inf


def delta_ratio_cw(spec: CWSpec) -> DeltaRatio:
    """``Delta = pi_G(f^2) / pi_G(f)^2 - 1`` by binomial sums, next to ``J delta / 2``."""
    pred = spec.J * spec.delta / 2.0
    if spec.delta == 0.0:
        return DeltaRatio(0.0, pred)
    k, s, c, log_binom, minus_h = _site_terms(spec)
    lg = log_binom + minus_h
    lg = lg - logsumexp(lg)
    lf = _log_f(spec, k, s, c)
    l1 = logsumexp(lg + lf)
    l2 = logsumexp(lg + 2.0 * lf)
    return DeltaRatio(float(max(np.expm1(l2 - 2.0 * l1), 0.0)), pred)


@dataclass(frozen=True)
class GaussianCheck:
    """Measured variances of ``m`` against Gaussian-width targets.

    ``pca_target`` is the width ``[n(1 - J - delta J (1 - J))]^-1``; the
    second-order expansion of ``g`` gives ``pca_target_corrected`` with
    curvature ``-delta J (2 - J)`` instead. ``J`` is the effective strength.
    """

    n: int
    J: float
    delta: float
    gibbs_variance: float
    pca_variance: float
    gibbs_target: float
    pca_target: float
    pca_target_corrected: float

    @property
    def gibbs_error(self) -> float:
        return abs(self.gibbs_variance / self.gibbs_target - 1.0)

    @property
    def pca_error(self) -> float:
        return abs(self.pca_variance / self.pca_target - 1.0)

    @property
    def pca_error_corrected(self) -> float:
        return abs(self.pca_variance / self.pca_target_corrected - 1.0)


def gaussian_approx_check(spec: CWSpec) -> GaussianCheck:
    J, d, n = spec.effective_J, spec.delta, spec.n
    if J >= 1.0:
        raise NotApplicableError("Gaussian widths need an effective J < 1")
    vg = magnetization_law(spec, "gibbs").variance()
    vp = magnetization_law(spec, "pca").variance()
    return GaussianCheck(
        n=n,
        J=J,
        delta=d,
        gibbs_variance=vg,
        pca_variance=vp,
        gibbs_target=1.0 / (n * (1.0 - J)),
        pca_target=1.0 / (n * (1.0 - J - d * J * (1.0 - J))),
        pca_target_corrected=1.0 / (n * (1.0 - J + d * J * (2.0 - J))),
    )


def contraction_prediction(J: float, delta: float) -> float:
    """Predicted one-step factor ``1 - 2 delta (1 - J)`` of the disagreement count."""
    if J >= 1.0:
        raise NotApplicableError("contraction prediction needs J < 1")
    return 1.0 - 2.0 * delta * (1.0 - J)


def mixing_prediction(n: int, J: float, delta: float) -> float:
    """``log(2n) / (2 delta (1 - J))``: where ``2n [1 - 2 delta (1 - J)]^t`` reaches 1."""
    if J >= 1.0:
        raise NotApplicableError("mixing prediction needs J < 1")
    if delta <= 0.0:
        return math.inf
    return math.log(2 * n) / (2.0 * delta * (1.0 - J))
