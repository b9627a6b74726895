"""Public sampler API on top of the numba kernels."""

from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numba
import numpy as np
from scipy.special import expit

from ..errors import InvalidArgumentError, InvalidStateError
from ..model import CouplingModel, all_down, all_up, as_configuration, local_field
from . import kernels
from .rng import RngPolicy

SAMPLERS = ("pca", "gibbs", "reflected-pca")
# below this size a parallel sweep costs more in scheduling than it saves
PARALLEL_MIN_SITES = 4096
_CHUNK_UNIFORMS = 1 << 22


def max_threads() -> int:
    return int(numba.config.NUMBA_NUM_THREADS)


def set_threads(threads: int) -> None:
    if not 1 <= threads <= max_threads():
        raise InvalidArgumentError(f"threads must be in [1, {max_threads()}], got {threads}")
    numba.set_num_threads(threads)


@contextlib.contextmanager
def _threads(threads: int):
    before = numba.get_num_threads()
    set_threads(threads)
    try:
        yield threads > 1
    finally:
        numba.set_num_threads(before)


def _check_q(q: float) -> None:
    if not (q >= 0):
        raise InvalidArgumentError(f"q must be >= 0, got {q}")


def _csr(model: CouplingModel):
    return model.indptr, model.indices, model.data, float(model.uniform)


# -- single-site kernel -------------------------------------------------------


def pca_single_site_probability(model: CouplingModel, sigma, i: int, q: float) -> float:
    """``P(sigma'_i = +1 | sigma) = exp(-h_i + q s_i) / (2 cosh(h_i - q s_i))``."""
    _check_q(q)
    s = as_configuration(sigma, model.n)
    h = local_field(model, s, i)
    with np.errstate(invalid="ignore"):
        x = 2.0 * (q * float(s[i]) - h)
    return float(expit(x))


def pca_flip_probability(model: CouplingModel, sigma, i: int, q: float) -> float:
    """``P(sigma'_i = -sigma_i | sigma) = delta phi_i / (1 + delta phi_i)``."""
    _check_q(q)
    s = as_configuration(sigma, model.n)
    h = local_field(model, s, i)
    return float(expit(2.0 * h * float(s[i]) - 2.0 * q))


# -- single steps ---------------------------------------------------------------


@dataclass(frozen=True)
class StepResult:
    config: np.ndarray
    flips: int


@dataclass(frozen=True)
class CoupledStepResult:
    upper: np.ndarray
    lower: np.ndarray
    n_diff: int


def _one_pca_step(model, q, sigma, rng, step_index, reflect, threads):
    _check_q(q)
    s = np.array(as_configuration(sigma, model.n), dtype=np.int8)
    u = rng.uniforms(step_index, model.n)
    flips = np.zeros(1, np.int64)
    total = np.zeros(1, np.int64)
    dummy_e = np.zeros(1)
    dummy_i = np.zeros(1, np.int64)
    with _threads(threads) as par:
        kernels.pca_block(s, u, float(q), *_csr(model), reflect,
                          par and model.n >= PARALLEL_MIN_SITES,
                          False, False, flips, total, dummy_e, dummy_i)
    return StepResult(s, int(flips[0]))


def pca_step(model: CouplingModel, q: float, sigma, rng: RngPolicy, step_index: int,
             threads: int = 1) -> StepResult:
    """One synchronous PCA update; every site reads the old configuration.

    Site ``i`` becomes ``-1`` iff its uniform for ``(step_index, i)`` is
    ``<= P(sigma'_i = -1 | sigma)``.
    """
    return _one_pca_step(model, q, sigma, rng, step_index, False, threads)


def reflected_pca_step(model: CouplingModel, q: float, sigma, rng: RngPolicy, step_index: int,
                       threads: int = 1) -> StepResult:
    """PCA candidate, replaced by its global flip when its magnetization is
    negative. Zero magnetization is kept as is."""
    s = as_configuration(sigma, model.n)
    if s.sum() < 0:
        raise InvalidStateError("reflected dynamics requires magnetization >= 0")
    return _one_pca_step(model, q, s, rng, step_index, True, threads)


def gibbs_step(model: CouplingModel, sigma, rng: RngPolicy, step_index: int) -> StepResult:
    """Resample one uniformly chosen site from the exact conditional of ``pi_G``."""
    s = np.array(as_configuration(sigma, model.n), dtype=np.int8)
    u = rng.uniforms(step_index, 2)
    flips = np.zeros(1, np.int64)
    total = np.zeros(1, np.int64)
    kernels.gibbs_block(s, u, *_csr(model), False, False, flips, total,
                        np.zeros(1), np.zeros(1, np.int64))
    return StepResult(s, int(flips[0]))


def coupled_pca_step(model: CouplingModel, q: float, sigma_plus, sigma_minus, rng: RngPolicy,
                     step_index: int, threads: int = 1) -> CoupledStepResult:
    """Advance two PCA chains with the same per-site uniforms.

    Requires ``sigma_plus >= sigma_minus`` componentwise. For ferromagnetic
    models the order is checked again after the step.
    """
    _check_q(q)
    up = np.array(as_configuration(sigma_plus, model.n), dtype=np.int8)
    lo = np.array(as_configuration(sigma_minus, model.n), dtype=np.int8)
    if np.any(up < lo):
        raise InvalidArgumentError("coupled step needs sigma_plus >= sigma_minus componentwise")
    u = rng.uniforms(step_index, model.n)
    diff = np.zeros(1, np.int64)
    with _threads(threads) as par:
        _, bad = kernels.coupled_block(up, lo, u, float(q), *_csr(model),
                                       par and model.n >= PARALLEL_MIN_SITES,
                                       model.is_ferromagnetic, diff)
    if bad:
        raise InvalidStateError("monotone coupling violated on a ferromagnetic model")
    return CoupledStepResult(up, lo, int(diff[0]))


# -- chains ----------------------------------------------------------------------


@dataclass
class ChainStats:
    """Per-step records of a chain after burn-in."""

    step: np.ndarray
    flips: np.ndarray
    magnetization: np.ndarray
    energy: np.ndarray | None
    seconds_per_step: np.ndarray
    final: np.ndarray
    n: int
    state_counts: np.ndarray | None = None

    COLUMNS = ("step", "flips", "magnetization", "energy")

    def __len__(self) -> int:
        return self.step.size

    @property
    def flip_rate(self) -> float:
        """Mean fraction of sites flipped per step."""
        return float(self.flips.mean() / self.n) if len(self) else math.nan

    def rows(self) -> Iterable[tuple]:
        energy = self.energy if self.energy is not None else np.full(len(self), math.nan)
        for t, f, m, e in zip(self.step, self.flips, self.magnetization, energy):
            yield int(t), int(f), float(m), float(e)

    def empirical_distribution(self) -> np.ndarray:
        if self.state_counts is None:
            raise InvalidArgumentError("chain was run without a state histogram")
        return self.state_counts / self.state_counts.sum()


def _chunk_steps(width: int) -> int:
    return max(1, _CHUNK_UNIFORMS // width)


def run_chain(
    model: CouplingModel,
    sampler: str,
    q: float,
    steps: int,
    burn_in: int,
    rng: RngPolicy,
    initial=None,
    threads: int = 1,
    record_energy: bool = True,
    histogram: bool = False,
    observers: Sequence[Callable[[ChainStats], None]] = (),
) -> ChainStats:
    """Run ``steps`` total steps and keep records for the last ``steps - burn_in``.

    ``sampler`` is one of ``pca``, ``gibbs``, ``reflected-pca``. Step ``t``
    always consumes the uniforms for ``(rng, t)``, so results do not depend on
    chunking or on ``threads``. ``histogram`` counts visited configurations
    (bitmask index, ``n <= 20``) after burn-in. Observers are called once per
    chunk with that chunk's records.
    """
    if sampler not in SAMPLERS:
        raise InvalidArgumentError(f"sampler must be one of {SAMPLERS}")
    if not 0 <= burn_in <= steps:
        raise InvalidArgumentError("need 0 <= burn_in <= steps")
    if histogram and model.n > 20:
        raise InvalidArgumentError("state histogram needs n <= 20")
    if sampler != "gibbs":
        _check_q(q)
    state = np.array(all_up(model.n) if initial is None else as_configuration(initial, model.n),
                     dtype=np.int8)
    if sampler == "reflected-pca" and state.sum() < 0:
        raise InvalidStateError("reflected dynamics requires magnetization >= 0")

    kept = steps - burn_in
    flips = np.zeros(kept, np.int64)
    totals = np.zeros(kept, np.int64)
    energy = np.zeros(kept) if record_energy else None
    wall = np.zeros(kept)
    counts = np.zeros(1 << model.n, np.int64) if histogram else None

    width = 2 if sampler == "gibbs" else model.n
    chunk = _chunk_steps(width)
    csr = _csr(model)
    with _threads(threads) as par:
        par = par and model.n >= PARALLEL_MIN_SITES
        t = 0
        while t < steps:
            count = min(chunk, steps - t)
            if t < burn_in:
                count = min(count, burn_in - t)
            u = rng.uniforms(t, width, count)
            f_buf = np.zeros(count, np.int64)
            m_buf = np.zeros(count, np.int64)
            e_buf = np.zeros(count)
            want_index = histogram and t >= burn_in
            i_buf = np.zeros(count if want_index else 1, np.int64)
            want_energy = record_energy and t >= burn_in
            start = time.perf_counter()
            if sampler == "gibbs":
                kernels.gibbs_block(state, u, *csr, want_energy, want_index,
                                    f_buf, m_buf, e_buf, i_buf)
            else:
                kernels.pca_block(state, u, float(q), *csr, sampler == "reflected-pca", par,
                                  want_energy, want_index, f_buf, m_buf, e_buf, i_buf)
            elapsed = time.perf_counter() - start
            if t >= burn_in:
                sl = slice(t - burn_in, t - burn_in + count)
                flips[sl] = f_buf
                totals[sl] = m_buf
                wall[sl] = elapsed / count
                if record_energy:
                    energy[sl] = e_buf
                if histogram:
                    counts += np.bincount(i_buf, minlength=counts.size)
                if observers:
                    part = ChainStats(np.arange(t, t + count), f_buf, m_buf / model.n,
                                      e_buf if record_energy else None, wall[sl], state.copy(), model.n)
                    for obs in observers:
                        obs(part)
            t += count

    return ChainStats(
        step=np.arange(burn_in, steps),
        flips=flips,
        magnetization=totals / model.n,
        energy=energy,
        seconds_per_step=wall,
        final=state,
        n=model.n,
        state_counts=counts,
    )


# -- coupling experiments -----------------------------------------------------------


@dataclass
class CoalescenceReport:
    """Coalescence times of chains started from all-up and all-down.

    ``taus[k]`` is the first step at which trial ``k`` had no disagreeing
    site, or ``-1`` if it had not coalesced after ``max_steps``.
    """

    taus: np.ndarray
    max_steps: int
    n: int
    delta: float
    bound_J: float
    ferromagnetic: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def censored(self) -> int:
        return int(np.count_nonzero(self.taus < 0))

    def _effective(self) -> np.ndarray:
        return np.where(self.taus < 0, np.inf, self.taus.astype(float))

    def quantiles(self, probs=(0.1, 0.25, 0.5, 0.75, 0.9)) -> dict[float, float]:
        eff = np.sort(self._effective())
        out = {}
        for p in probs:
            k = min(int(math.ceil(p * eff.size)) - 1, eff.size - 1)
            out[p] = float(eff[max(k, 0)])
        return out

    @property
    def median(self) -> float:
        return self.quantiles((0.5,))[0.5]

    def survival(self, ts: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Empirical ``P(tau_c > t)`` at every ``t`` up to the largest observed time."""
        eff = self._effective()
        if ts is None:
            finite = eff[np.isfinite(eff)]
            top = int(finite.max()) if finite.size else 0
            ts = np.arange(0, max(top, 0) + 1)
        return ts, np.array([(eff > t).mean() for t in ts])

    def tail_bound(self, ts) -> np.ndarray | None:
        """``2 n [1 - 2 delta (1 - J)]^t``; ``None`` when ``J >= 1``."""
        if self.bound_J >= 1:
            return None
        rate = 1.0 - 2.0 * self.delta * (1.0 - self.bound_J)
        return 2.0 * self.n * rate ** np.asarray(ts, dtype=float)

    def tail_violations(self) -> int:
        ts, emp = self.survival()
        bound = self.tail_bound(ts)
        if bound is None:
            return 0
        return int(np.count_nonzero(emp > bound))


def _bound_coupling(model: CouplingModel) -> float:
    """Strength ``J`` entering ``1 - 2 delta (1 - J)``.

    From maximal disagreement a site stays split with probability about
    ``1 - 2 delta exp(-2 J_i)``, ``J_i = sum_j |J_ij|``, so the linear rate
    uses ``J = 2 sup_i J_i``. For Curie-Weiss this is the ``J`` parameter in
    the ``half`` convention and ``2 J`` in the ``full`` one.
    """
    if model.params.get("kind") == "curie_weiss":
        J = float(model.params["J"])
        return J if model.params.get("convention") == "half" else 2.0 * J
    return 2.0 * model.sup_norm


def estimate_coalescence(
    model: CouplingModel,
    q: float,
    max_steps: int,
    trials: int,
    rng: RngPolicy,
    threads: int = 1,
    bound_J: float | None = None,
    upper=None,
    lower=None,
) -> CoalescenceReport:
    """Monotone-coupling coalescence times from all-up / all-down starts.

    Trial ``k`` uses the Philox stream ``(rng.stream << 32) + k``. ``bound_J``
    is the coupling strength entering the tail bound ``2 n [1 - 2 delta
    (1 - J)]^t``; see :func:`_bound_coupling` for the default.
    """
    _check_q(q)
    if max_steps < 0 or trials < 1:
        raise InvalidArgumentError("need max_steps >= 0 and trials >= 1")
    start_up = all_up(model.n) if upper is None else as_configuration(upper, model.n)
    start_lo = all_down(model.n) if lower is None else as_configuration(lower, model.n)
    if np.any(start_up < start_lo):
        raise InvalidArgumentError("upper start must dominate lower start")
    warnings = []
    ferro = model.is_ferromagnetic
    if not ferro:
        warnings.append("non-ferromagnetic couplings: monotonicity and the tail bound do not apply")
    taus = np.full(trials, -1, np.int64)
    csr = _csr(model)
    with _threads(threads) as par:
        par = par and model.n >= PARALLEL_MIN_SITES
        for k in range(trials):
            stream = RngPolicy(rng.seed, (rng.stream << 32) + k)
            up = start_up.astype(np.int8).copy()
            lo = start_lo.astype(np.int8).copy()
            if np.array_equal(up, lo):
                taus[k] = 0
                continue
            t = 0
            block = 64
            while t < max_steps:
                count = min(block, max_steps - t)
                u = stream.uniforms(t, model.n, count)
                diff = np.zeros(count, np.int64)
                taken, bad = kernels.coupled_block(up, lo, u, float(q), *csr, par, ferro, diff)
                if bad:
                    raise InvalidStateError("monotone coupling violated on a ferromagnetic model")
                if diff[taken - 1] == 0:
                    taus[k] = t + taken
                    break
                t += count
                block = min(block * 2, _chunk_steps(model.n))
    J = _bound_coupling(model) if bound_J is None else float(bound_J)
    if J >= 1:
        warnings.append(f"J = {J:g} >= 1: tail bound not applicable")
    return CoalescenceReport(taus, max_steps, model.n, math.exp(-2.0 * q), J, ferro, warnings)


def one_step_contraction(
    model: CouplingModel,
    q: float,
    trials: int,
    rng: RngPolicy,
    upper=None,
    lower=None,
    threads: int = 1,
) -> np.ndarray:
    """Ratios ``n'_diff / n_diff`` after one coupled step, one per trial.

    Defaults to maximal disagreement (all-up vs all-down).
    """
    up0 = all_up(model.n) if upper is None else as_configuration(upper, model.n)
    lo0 = all_down(model.n) if lower is None else as_configuration(lower, model.n)
    n_diff = int(np.count_nonzero(up0 != lo0))
    if n_diff == 0:
        raise InvalidArgumentError("starting pair already coalesced")
    out = np.empty(trials)
    for k in range(trials):
        stream = RngPolicy(rng.seed, (rng.stream << 32) + k)
        res = coupled_pca_step(model, q, up0, lo0, stream, 0, threads=threads)
        out[k] = res.n_diff / n_diff
    return out
