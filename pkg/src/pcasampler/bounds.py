"""Computable certificates: Dobrushin coefficients, the Foellmer covariance
bound, the variance bound on ``sum_i phi_i / (1 + delta phi_i)`` and upper
bounds on ``||pi_PCA - pi_G||_TV``.

Wherever a sup over configurations appears there are two modes:
``exhaustive`` (enumerate all ``2**n`` states, small ``n`` only) and
``bounded`` (closed-form caps valid for any ``n``). Reports carry the mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import exact
from .config import LIMITS
from .errors import DivergenceError, InvalidArgumentError, NotApplicableError, ResourceCapError
from .model import CouplingModel, as_configuration, local_fields

__all__ = [
    "DobrushinReport",
    "VarianceCertificate",
    "dobrushin_condition",
    "psi",
    "psi_table",
    "pca_gamma_bound",
    "psi_oscillation_sup",
    "d_matrix",
    "follmer_bound",
    "oscillation",
    "oscillations",
    "phi_oscillation_bound",
    "damped_phi_oscillations",
    "variance_certificate",
    "variance_bound",
    "tv_upper_bound",
]

_MEASURE_SCALE = {"pca": 1.0, "tilde": 2.0}
# Var/|V| <= C J^2 e^{4J} / (1 - gamma); see variance_certificate
_VARIANCE_CONSTANT = 16.0


@dataclass(frozen=True)
class DobrushinReport:
    """Dobrushin matrix (or its row sums when ``n`` is too large to hold it)."""

    gamma_matrix: np.ndarray | None
    row_sums: np.ndarray
    mode: str
    measure: str = "gibbs"
    delta: float = 0.0

    @property
    def gamma(self) -> float:
        return float(self.row_sums.max()) if self.row_sums.size else 0.0

    @property
    def satisfied(self) -> bool:
        return self.gamma < 1.0

    @property
    def d_row_sum_bound(self) -> float:
        return 1.0 / (1.0 - self.gamma) if self.satisfied else math.inf

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "measure": self.measure,
            "delta": self.delta,
            "gamma": self.gamma,
            "satisfied": self.satisfied,
            "d_row_sum_bound": self.d_row_sum_bound,
            "row_sum_mean": float(self.row_sums.mean()) if self.row_sums.size else 0.0,
        }


def _delta(q: float) -> float:
    if not (q >= 0):
        raise InvalidArgumentError(f"q must be >= 0, got {q}")
    return math.exp(-2.0 * q)


def _row_reduce(model: CouplingModel, values: np.ndarray) -> np.ndarray:
    """Per-row sums of ``values`` aligned with the CSR data array."""
    out = np.zeros(model.n)
    rows = np.repeat(np.arange(model.n), np.diff(model.indptr))
    np.add.at(out, rows, values)
    return out


def dobrushin_condition(model: CouplingModel) -> DobrushinReport:
    """Coupling-only coefficients ``tanh(2 |J_ij|)`` for ``pi_G``."""
    sums = _row_reduce(model, np.tanh(2.0 * np.abs(model.data)))
    if model.uniform:
        sums = sums + (model.n - 1) * math.tanh(2.0 * abs(model.uniform))
    mat = None
    if model.n <= LIMITS.max_dense_sites:
        mat = np.tanh(2.0 * np.abs(model.dense()))
    return DobrushinReport(mat, sums, "coupling", "gibbs", 0.0)


# -- psi ---------------------------------------------------------------------


def _log1p_delta_exp(x: np.ndarray, q: float) -> np.ndarray:
    """``log(1 + delta e^x)`` with ``delta = e^{-2q}``."""
    return np.logaddexp(0.0, x - 2.0 * q)


def _psi_from_fields(i, J_row, spins, fields, q):
    """psi_i for rows of ``spins`` given their local fields.

    ``psi_i`` is the part of ``sum_l log(1 + delta phi_l)`` that is odd in
    ``sigma_i``; it does not depend on ``sigma_i`` itself.
    """
    h_i = fields[..., i]
    total = _log1p_delta_exp(2.0 * h_i, q) - _log1p_delta_exp(-2.0 * h_i, q)
    for l in np.flatnonzero(J_row):
        if l == i:
            continue
        s_l = spins[..., l]
        a = 2.0 * J_row[l] * s_l
        # field on l with the contribution of site i removed
        x = 2.0 * s_l * (fields[..., l] + J_row[l] * spins[..., i])
        total = total + _log1p_delta_exp(x - a, q) - _log1p_delta_exp(x + a, q)
    return 0.5 * total


def psi(model: CouplingModel, q: float, i: int, sigma, measure: str = "pca") -> float:
    """``psi_{i,delta}(sigma)``: with it the conditional law of ``pi_PCA`` reads
    ``pi(s_i = 1 | rest) = exp(-2 h_i + psi) / (2 cosh(2 h_i - psi))``.

    For ``measure="tilde"`` (weights ``f**2``) the value doubles.
    """
    _delta(q)
    if not 0 <= i < model.n:
        raise InvalidArgumentError(f"site {i} out of range")
    s = as_configuration(sigma, model.n)
    row = model.dense()[i] if model.n <= LIMITS.max_dense_sites else _sparse_row(model, i)
    val = _psi_from_fields(i, row, s.astype(np.float64), local_fields(model, s), q)
    return float(_MEASURE_SCALE[measure] * val)


def _sparse_row(model: CouplingModel, i: int) -> np.ndarray:
    row = np.zeros(model.n)
    lo, hi = model.indptr[i], model.indptr[i + 1]
    row[model.indices[lo:hi]] = model.data[lo:hi]
    if model.uniform:
        row += model.uniform
        row[i] = 0.0
    return row


def psi_table(model: CouplingModel, q: float, i: int, measure: str = "pca",
              cap: int = LIMITS.max_vector_sites) -> np.ndarray:
    """``psi_i`` at every configuration (bitmask order)."""
    _delta(q)
    if model.n > cap:
        raise ResourceCapError(f"n={model.n} exceeds cap {cap}")
    spins = exact.spin_table(model.n).astype(np.float64)
    fields = -(spins @ model.dense())
    return _MEASURE_SCALE[measure] * _psi_from_fields(i, model.dense()[i], spins, fields, q)


# -- oscillations ------------------------------------------------------------------


def oscillation(values: np.ndarray, j: int) -> float:
    """``rho_j(f) = sup_sigma |f(sigma) - f(sigma^j)|`` for ``f`` tabulated on
    all configurations."""
    values = np.asarray(values, dtype=np.float64)
    idx = np.arange(values.size)
    return float(np.abs(values - values[idx ^ (1 << j)]).max())


def oscillations(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    n = values.size.bit_length() - 1
    if values.size != 1 << n:
        raise InvalidArgumentError("values must be tabulated on all 2**n configurations")
    if n > LIMITS.max_vector_sites:
        raise ResourceCapError("too many sites for exhaustive oscillations")
    return np.array([oscillation(values, j) for j in range(n)])


def phi_oscillation_bound(model: CouplingModel, i: int) -> np.ndarray:
    """Closed-form caps on ``rho_h(phi_i)`` for every ``h``.

    Flipping ``h != i`` moves the exponent ``2 h_i s_i`` (which stays in
    ``[-2J, 2J]``) by ``4 |J_ih|``, so ``rho_h <= e^{2J} (1 - e^{-4|J_ih|})``;
    flipping ``i`` itself inverts ``phi_i``, so ``rho_i <= 2 sinh(2 J_i)`` with
    ``J_i = sum_j |J_ij|``. The same caps hold for ``phi_i/(1+delta phi_i)``,
    the map ``x -> x/(1+delta x)`` being 1-Lipschitz on ``x >= 0``.
    """
    J = model.sup_norm
    row = np.abs(model.dense()[i]) if model.n <= LIMITS.max_dense_sites else np.abs(_sparse_row(model, i))
    out = math.exp(2.0 * J) * -np.expm1(-4.0 * row)
    out[i] = 2.0 * math.sinh(2.0 * row.sum())
    return out


def damped_phi_oscillations(model: CouplingModel, q: float, mode: str = "exhaustive") -> np.ndarray:
    """Matrix ``R[i, h] = rho_h(phi_i / (1 + delta phi_i))``."""
    if mode == "bounded":
        return np.array([phi_oscillation_bound(model, i) for i in range(model.n)])
    if mode != "exhaustive":
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    if model.n > LIMITS.max_sup_sites:
        raise ResourceCapError(f"exhaustive oscillations need n <= {LIMITS.max_sup_sites}")
    table = exact.damped_phi_table(model, q)
    return np.array([oscillations(table[:, i]) for i in range(model.n)])


# -- Dobrushin coefficients of the PCA measures ---------------------------------------


def _abs_coupling_products(model: CouplingModel):
    """``(|J|, |J| @ |J|)`` as dense matrices."""
    A = np.abs(model.dense())
    return A, A @ A


def _bounded_psi_oscillation(model: CouplingModel, delta: float, scale: float):
    """Caps ``rho_j(psi_i) <= 8 delta e^{2J} (|J_ij| + sum_l |J_il||J_lj|)``."""
    pref = scale * 8.0 * delta * math.exp(2.0 * model.sup_norm)
    if model.n <= LIMITS.max_dense_sites:
        A, A2 = _abs_coupling_products(model)
        rho = pref * (A + A2)
        np.fill_diagonal(rho, 0.0)
        return rho, rho.sum(axis=1)
    if model.uniform:
        raise ResourceCapError("bounded mode for large mean-field models is not supported")
    A = model.abs_sparse()
    r = np.asarray(A.sum(axis=1)).ravel()
    diag = np.asarray(A.multiply(A).sum(axis=1)).ravel()
    return None, pref * (r + A @ r - diag)


def pca_gamma_bound(model: CouplingModel, q: float, measure: str = "pca",
                    mode: str = "auto") -> DobrushinReport:
    """Upper bounds on the Dobrushin coefficients of ``pi_PCA`` (or ``pi_tilde``):

    ``gamma_ij <= tanh(2 |J_ij|) + rho_j(psi_i) / 2``.

    ``mode="exhaustive"`` takes the oscillation of ``psi_i`` over all states
    (``n <= 10``); ``mode="bounded"`` uses closed-form caps. ``auto`` picks
    exhaustive whenever it is allowed.
    """
    if measure not in _MEASURE_SCALE:
        raise InvalidArgumentError(f"measure must be 'pca' or 'tilde', got {measure!r}")
    delta = _delta(q)
    if mode == "auto":
        mode = "exhaustive" if model.n <= LIMITS.max_sup_sites else "bounded"
    base = dobrushin_condition(model)
    if delta == 0.0:
        return DobrushinReport(base.gamma_matrix, base.row_sums, mode, measure, 0.0)
    if mode == "exhaustive":
        if model.n > LIMITS.max_sup_sites:
            raise ResourceCapError(f"exhaustive sup needs n <= {LIMITS.max_sup_sites}")
        rho = np.zeros((model.n, model.n))
        for i in range(model.n):
            rho[i] = oscillations(psi_table(model, q, i, measure))
        np.fill_diagonal(rho, 0.0)
        gamma = base.gamma_matrix + 0.5 * rho
        np.fill_diagonal(gamma, 0.0)
        return DobrushinReport(gamma, gamma.sum(axis=1), mode, measure, delta)
    if mode != "bounded":
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    rho, rho_sums = _bounded_psi_oscillation(model, delta, _MEASURE_SCALE[measure])
    gamma = None if rho is None else base.gamma_matrix + 0.5 * rho
    return DobrushinReport(gamma, base.row_sums + 0.5 * rho_sums, mode, measure, delta)


def psi_oscillation_sup(model: CouplingModel, q: float, measure: str = "pca") -> float:
    """``sup_i sum_{j != i} rho_j(psi_i)`` by exhaustive enumeration."""
    if model.n > LIMITS.max_sup_sites:
        raise ResourceCapError(f"exhaustive sup needs n <= {LIMITS.max_sup_sites}")
    best = 0.0
    for i in range(model.n):
        rho = oscillations(psi_table(model, q, i, measure))
        rho[i] = 0.0
        best = max(best, float(rho.sum()))
    return best


# -- Foellmer ------------------------------------------------------------------------


def d_matrix(gamma_matrix) -> np.ndarray:
    """``D = sum_k Gamma^k = (I - Gamma)^{-1}``; needs max row sum < 1."""
    G = np.asarray(gamma_matrix, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise InvalidArgumentError("gamma matrix must be square")
    if np.any(G < 0):
        raise InvalidArgumentError("gamma matrix must be nonnegative")
    gamma = G.sum(axis=1).max() if G.size else 0.0
    if gamma >= 1.0:
        raise DivergenceError(f"sup row sum {gamma:.6g} >= 1: Neumann series diverges")
    return np.linalg.solve(np.eye(G.shape[0]) - G, np.eye(G.shape[0]))


def follmer_bound(d: np.ndarray, rho_f, rho_g) -> float:
    """``|Cov(f, g)| <= 1/4 sum_ij D_ij rho_i(f) rho_j(g)``."""
    d = np.asarray(d, dtype=np.float64)
    rf = np.asarray(rho_f, dtype=np.float64)
    rg = np.asarray(rho_g, dtype=np.float64)
    if rf.shape != (d.shape[0],) or rg.shape != (d.shape[1],):
        raise InvalidArgumentError("oscillation vectors must match the D matrix")
    if np.any(rf < 0) or np.any(rg < 0):
        raise InvalidArgumentError("oscillations are nonnegative")
    return float(0.25 * rf @ d @ rg)


# -- variance and TV certificates ----------------------------------------------------


@dataclass(frozen=True)
class VarianceCertificate:
    """Upper bound on ``Var_pi[sum_i phi_i/(1+delta phi_i)] / n`` valid for
    both ``pi_PCA`` and ``pi_tilde``."""

    value: float
    gamma: float
    gamma_source: str
    J: float
    delta: float

    def summary(self) -> dict:
        return {"value": self.value, "gamma": self.gamma, "gamma_source": self.gamma_source,
                "J": self.J, "delta": self.delta}


def _certificate_gamma(model, q, mode, slack):
    if slack is not None:
        if slack < 0:
            raise InvalidArgumentError("slack must be nonnegative")
        return dobrushin_condition(model).gamma + slack, f"coupling+slack({slack:g})"
    if mode == "auto":
        mode = "exhaustive" if model.n <= LIMITS.max_sup_sites else "bounded"
    g = max(pca_gamma_bound(model, q, m, mode).gamma for m in ("pca", "tilde"))
    return g, f"pca_gamma_bound[{mode}]"


def variance_certificate(model: CouplingModel, q: float, mode: str = "auto",
                         slack: float | None = None) -> VarianceCertificate:
    """``16 J^2 e^{4J} / (1 - gamma)`` with ``J`` the coupling sup-norm.

    Derivation: ``Var[sum g_i] = sum_ij Cov(g_i, g_j)`` is bounded by
    Foellmer's estimate with ``R_h = sum_i rho_h(g_i) <= 8 J e^{2J}`` (see
    :func:`phi_oscillation_bound`) and ``sum_hk D_hk <= n / (1 - gamma)``,
    giving ``Var / n <= (1/4) * 64 J^2 e^{4J} / (1 - gamma)``. ``gamma`` is the
    larger of the PCA and tilde coefficients, or the coupling-only value
    plus a caller-supplied ``slack``.
    """
    delta = _delta(q)
    gamma, source = _certificate_gamma(model, q, mode, slack)
    if gamma >= 1.0:
        raise NotApplicableError(f"Dobrushin condition fails (gamma = {gamma:.6g})")
    J = model.sup_norm
    value = _VARIANCE_CONSTANT * J * J * math.exp(4.0 * J) / (1.0 - gamma)
    return VarianceCertificate(value, gamma, source, J, delta)


def variance_bound(model: CouplingModel, q: float, mode: str = "auto",
                   slack: float | None = None) -> float:
    return variance_certificate(model, q, mode, slack).value


def tv_upper_bound(model: CouplingModel, q: float, mode: str = "exact") -> float:
    """Upper bound on ``||pi_PCA - pi_G||_TV``.

    ``exact``: ``sqrt(Var_G(f)) / pi_G(f) = sqrt(Delta(delta))`` by enumeration.

    ``analytic``: with ``R(d) = log pi_G[f_d^2] - 2 log pi_G[f_d]``, ``R(0) =
    R'(0) = 0`` and ``R'' <= 4 n sinh(4J) + 4 n V`` on ``[0, delta]``, where
    ``V`` is the variance certificate (monotone in ``delta`` in bounded mode).
    Hence ``Delta <= exp(2 delta^2 n (sinh(4J) + V)) - 1``.
    """
    delta = _delta(q)
    if delta == 0.0:
        return 0.0
    if mode == "exact":
        return math.sqrt(exact.delta_ratio(model, q))
    if mode != "analytic":
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    V = variance_certificate(model, q, mode="bounded").value
    J = model.sup_norm
    r = 2.0 * delta * delta * model.n * (math.sinh(4.0 * J) + V)
    return math.sqrt(math.expm1(r)) if r < 700 else math.inf
