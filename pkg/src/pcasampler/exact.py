"""Brute-force enumeration over all ``2**n`` configurations.

This module is the ground truth the samplers and bounds are checked
against, so it only ever enumerates: no transfer matrices, no shortcuts.
Configuration ``k`` has ``sigma_i = +1`` iff bit ``i`` of ``k`` is set.
All normalizations go through max-shifted log-sum-exp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import expit, logsumexp

from .config import LIMITS
from .errors import InvalidArgumentError, ResourceCapError
from .model import CouplingModel

Observable = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]

__all__ = [
    "ExactDistribution",
    "JointDistribution",
    "spin_table",
    "enumerate_gibbs",
    "enumerate_pca",
    "enumerate_tilde",
    "enumerate_measure",
    "pca_transition_matrix",
    "joint_measure",
    "reflected_transition_matrix",
    "tv_distance",
    "delta_ratio",
    "expectation",
    "variance",
    "covariance",
    "phi_table",
    "damped_phi_table",
    "normalized_phi_variance",
    "conditional_plus",
    "exact_dobrushin_coefficients",
    "magnetization_marginal",
    "DerivativeCheck",
    "log_pg_f_derivative_check",
]


@dataclass(frozen=True)
class ExactDistribution:
    """Normalized probabilities over configurations, indexed by bitmask."""

    probs: np.ndarray
    log_partition: float
    log_probs: np.ndarray
    label: str = ""

    @property
    def n(self) -> int:
        return int(self.probs.size).bit_length() - 1

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class JointDistribution:
    """``probs[s, t]`` over configuration pairs."""

    probs: np.ndarray
    log_partition: float

    def marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)


def _delta(q: float) -> float:
    if not (q >= 0):
        raise InvalidArgumentError(f"q must be >= 0, got {q}")
    return math.exp(-2.0 * q)


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise ResourceCapError(f"exhaustive enumeration of n={n} sites exceeds cap {cap}")


def spin_table(n: int) -> np.ndarray:
    """``(2**n, n)`` int8 array; row ``k`` is configuration ``k``."""
    k = np.arange(1 << n, dtype=np.int64)[:, None]
    return (2 * ((k >> np.arange(n)) & 1) - 1).astype(np.int8)


def _fields_table(model: CouplingModel, spins: np.ndarray) -> np.ndarray:
    return -(spins.astype(np.float64) @ model.dense())


def _log_weights(model: CouplingModel, q: float, power: int, cap: int) -> np.ndarray:
    """``-H(sigma) + power * log f(sigma)`` for every configuration."""
    _check_cap(model.n, cap)
    spins = spin_table(model.n)
    h = _fields_table(model, spins)
    hs = h * spins
    logw = -hs.sum(axis=1)
    if power:
        # log(1 + delta*phi) = logaddexp(0, 2 h s - 2q); exact at q = inf
        logw = logw + power * np.logaddexp(0.0, 2.0 * hs - 2.0 * q).sum(axis=1)
    return logw


def _normalize(logw: np.ndarray, label: str) -> ExactDistribution:
    logz = float(logsumexp(logw))
    logp = logw - logz
    return ExactDistribution(np.exp(logp), logz, logp, label)


def enumerate_gibbs(model: CouplingModel, cap: int = LIMITS.max_vector_sites) -> ExactDistribution:
    """``pi_G(sigma) = exp(-H(sigma)) / Z_G``."""
    return _normalize(_log_weights(model, 0.0, 0, cap), "gibbs")


def enumerate_pca(model: CouplingModel, q: float, cap: int = LIMITS.max_vector_sites) -> ExactDistribution:
    """Stationary law of the PCA: ``pi_G(sigma) f(sigma)`` normalized."""
    _delta(q)
    return _normalize(_log_weights(model, q, 1, cap), "pca")


def enumerate_tilde(model: CouplingModel, q: float, cap: int = LIMITS.max_vector_sites) -> ExactDistribution:
    """``pi_G(sigma) f(sigma)**2`` normalized."""
    _delta(q)
    return _normalize(_log_weights(model, q, 2, cap), "tilde")


def enumerate_measure(model: CouplingModel, measure: str, q: float = math.inf, **kw) -> ExactDistribution:
    if measure == "gibbs":
        return enumerate_gibbs(model, **kw)
    if measure == "pca":
        return enumerate_pca(model, q, **kw)
    if measure == "tilde":
        return enumerate_tilde(model, q, **kw)
    raise InvalidArgumentError(f"unknown measure {measure!r}")


def _log_pair_weights(model: CouplingModel, q: float, cap: int) -> np.ndarray:
    """``-H(sigma, tau)`` from the pair Hamiltonian, by definition."""
    _delta(q)
    _check_cap(model.n, cap)
    spins = spin_table(model.n).astype(np.float64)
    h = _fields_table(model, spins)
    field_term = h @ spins.T
    if math.isinf(q):
        same = np.eye(spins.shape[0], dtype=bool)
        return np.where(same, -field_term, -np.inf)
    overlap = spins @ spins.T
    return -field_term - q * (model.n - overlap)


def pca_transition_matrix(model: CouplingModel, q: float, cap: int = LIMITS.max_matrix_sites) -> np.ndarray:
    """``P[s, t] = exp(-H(s, t)) / Z_s`` with ``Z_s = sum_t exp(-H(s, t))``."""
    logw = _log_pair_weights(model, q, cap)
    return np.exp(logw - logsumexp(logw, axis=1, keepdims=True))


def joint_measure(model: CouplingModel, q: float, cap: int = LIMITS.max_matrix_sites) -> JointDistribution:
    """``mu_2(s, t) = exp(-H(s, t)) / Z_PCA``; its row marginal is ``pi_PCA``."""
    logw = _log_pair_weights(model, q, cap)
    logz = float(logsumexp(logw))
    return JointDistribution(np.exp(logw - logz), logz)


def reflected_transition_matrix(
    model: CouplingModel, q: float, cap: int = LIMITS.max_matrix_sites
) -> tuple[np.ndarray, np.ndarray]:
    """Kernel of the reflected chain on ``X+ = {m >= 0}``.

    Returns ``(states, P_plus)`` where ``states`` are configuration indices
    and ``P_plus[a, b] = P(s_a, s_b) + P(s_a, -s_b)`` when ``m(s_b) > 0``;
    zero-magnetization targets are kept as drawn, not reflected.
    """
    p = pca_transition_matrix(model, q, cap)
    n = model.n
    full = (1 << n) - 1
    ups = np.array([bin(x).count("1") for x in range(p.shape[0])])
    states = np.flatnonzero(2 * ups >= n)
    out = p[np.ix_(states, states)].copy()
    pos = 2 * ups[states] > n
    out[:, pos] += p[np.ix_(states, full ^ states[pos])]
    return states, out


def _as_probs(p) -> np.ndarray:
    return p.probs if isinstance(p, ExactDistribution) else np.asarray(p, dtype=np.float64)


def tv_distance(p, r) -> float:
    """``1/2 sum |p - r|``; accepts distributions or plain vectors."""
    a, b = _as_probs(p), _as_probs(r)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"size mismatch: {a.shape} vs {b.shape}")
    return float(0.5 * np.abs(a - b).sum())


def delta_ratio(model: CouplingModel, q: float, cap: int = LIMITS.max_vector_sites) -> float:
    """``Delta(delta) = pi_G(f^2) / pi_G(f)^2 - 1``."""
    _delta(q)
    gibbs = enumerate_gibbs(model, cap)
    if math.isinf(q):
        return 0.0
    spins = spin_table(model.n)
    hs = _fields_table(model, spins) * spins
    logf = np.logaddexp(0.0, 2.0 * hs - 2.0 * q).sum(axis=1)
    l1 = logsumexp(gibbs.log_probs + logf)
    l2 = logsumexp(gibbs.log_probs + 2.0 * logf)
    return float(max(np.expm1(l2 - 2.0 * l1), 0.0))


# -- moments ---------------------------------------------------------------


def _values(dist: ExactDistribution, obs: Observable) -> np.ndarray:
    if callable(obs):
        vals = np.asarray(obs(spin_table(dist.n)), dtype=np.float64)
    else:
        vals = np.asarray(obs, dtype=np.float64)
    if vals.shape[0] != dist.probs.size:
        raise InvalidArgumentError("observable must be defined on every configuration")
    return vals


def expectation(dist: ExactDistribution, obs: Observable) -> float:
    return float(dist.probs @ _values(dist, obs))


def variance(dist: ExactDistribution, obs: Observable) -> float:
    v = _values(dist, obs)
    mean = dist.probs @ v
    return float(dist.probs @ (v - mean) ** 2)


def covariance(dist: ExactDistribution, a: Observable, b: Observable) -> float:
    va, vb = _values(dist, a), _values(dist, b)
    return float(dist.probs @ ((va - dist.probs @ va) * (vb - dist.probs @ vb)))


def phi_table(model: CouplingModel, cap: int = LIMITS.max_vector_sites) -> np.ndarray:
    """``phi_i(sigma)`` for every configuration (rows) and site (columns)."""
    _check_cap(model.n, cap)
    spins = spin_table(model.n)
    return np.exp(2.0 * _fields_table(model, spins) * spins)


def damped_phi_table(model: CouplingModel, q: float, cap: int = LIMITS.max_vector_sites) -> np.ndarray:
    """``phi_i / (1 + delta phi_i)`` for every configuration and site."""
    ph = phi_table(model, cap)
    return ph / (1.0 + _delta(q) * ph)


def normalized_phi_variance(model: CouplingModel, q: float, measure: str = "pca") -> float:
    """``Var_pi[sum_i phi_i/(1+delta phi_i)] / n`` under ``pi_PCA`` or ``pi_tilde``."""
    dist = enumerate_measure(model, measure, q)
    total = damped_phi_table(model, q).sum(axis=1)
    return variance(dist, total) / model.n


# -- conditionals and Dobrushin coefficients --------------------------------


def conditional_plus(dist: ExactDistribution, i: int) -> np.ndarray:
    """``pi(sigma_i = +1 | sigma_{-i})`` evaluated at every configuration."""
    idx = np.arange(dist.probs.size)
    bit = 1 << i
    up = dist.log_probs[idx | bit]
    down = dist.log_probs[idx & ~bit]
    return expit(up - down)


def exact_dobrushin_coefficients(dist: ExactDistribution, cap: int = LIMITS.max_sup_sites) -> np.ndarray:
    """``gamma_ij = sup_sigma |pi(s_i=1|sigma) - pi(s_i=1|sigma^j)|``, zero diagonal."""
    n = dist.n
    _check_cap(n, cap)
    idx = np.arange(dist.probs.size)
    gamma = np.zeros((n, n))
    for i in range(n):
        c = conditional_plus(dist, i)
        for j in range(n):
            if j != i:
                gamma[i, j] = np.abs(c - c[idx ^ (1 << j)]).max()
    return gamma


def magnetization_marginal(dist: ExactDistribution) -> np.ndarray:
    """Law of the number of up spins, ``k = 0..n``."""
    k = np.array([bin(x).count("1") for x in range(dist.probs.size)])
    return np.bincount(k, weights=dist.probs, minlength=dist.n + 1)


# -- derivative identities ---------------------------------------------------


@dataclass(frozen=True)
class DerivativeCheck:
    """Finite-difference residuals of the log-moment derivative identities.

    ``first_*`` compare d/ddelta of ``log pi_G[f]`` and ``log pi_G[f^2]`` with
    their expectation forms; ``second_*`` compare the second derivatives.
    """

    delta: float
    step: float
    first_f: float
    second_f: float
    first_f2: float
    second_f2: float

    def max_residual(self) -> float:
        return max(self.first_f, self.second_f, self.first_f2, self.second_f2)


def _log_pg_moment(gibbs_logp, ph, d, power) -> float:
    with np.errstate(invalid="raise"):
        logf = np.log1p(d * ph).sum(axis=1)
    return float(logsumexp(gibbs_logp + power * logf))


def log_pg_f_derivative_check(
    model: CouplingModel, q: float, step: float = 1e-4, cap: int = LIMITS.max_vector_sites
) -> DerivativeCheck:
    """Compare centered differences of ``log pi_G[f^k]`` in delta with

    * ``d/dd log pi_G[f]   = pi_PCA[S]``
    * ``d2/dd2 log pi_G[f] = -pi_PCA[S2] + Var_PCA[S]``
    * ``d/dd log pi_G[f^2] = 2 pi_tilde[S]``
    * ``d2/dd2 log pi_G[f^2] = -2 pi_tilde[S2] + 4 Var_tilde[S]``

    where ``S = sum_i phi_i/(1+delta phi_i)`` and ``S2`` sums the squares.
    Residuals shrink like ``step**2``.
    """
    if step <= 0:
        raise InvalidArgumentError("step must be positive")
    d = _delta(q)
    gibbs = enumerate_gibbs(model, cap)
    ph = phi_table(model, cap)
    if np.any(1.0 + (d - step) * ph <= 0):
        raise InvalidArgumentError("step too large: 1 + (delta - step) phi must stay positive")

    damped = ph / (1.0 + d * ph)
    s1 = damped.sum(axis=1)
    s2 = (damped**2).sum(axis=1)
    out = []
    for power, meas in ((1, "pca"), (2, "tilde")):
        lm = _log_pg_moment(gibbs.log_probs, ph, d - step, power)
        l0 = _log_pg_moment(gibbs.log_probs, ph, d, power)
        lp = _log_pg_moment(gibbs.log_probs, ph, d + step, power)
        fd1 = (lp - lm) / (2.0 * step)
        fd2 = (lp - 2.0 * l0 + lm) / step**2
        dist = enumerate_measure(model, meas, q, cap=cap)
        an1 = power * expectation(dist, s1)
        an2 = -power * expectation(dist, s2) + power**2 * variance(dist, s1)
        out += [abs(fd1 - an1), abs(fd2 - an2)]
    return DerivativeCheck(d, step, *out)
