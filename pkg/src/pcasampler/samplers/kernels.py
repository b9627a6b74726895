"""Numba kernels for the chain updates.

Every kernel consumes pre-drawn uniforms, so the result of a step depends
only on (state, uniforms) and never on thread scheduling. Float reductions
(energy) are summed sequentially; the parallel kernels only reduce integers.
"""

import math

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def site_field(i, spins, total, indptr, indices, data, uniform):
    acc = 0.0
    for p in range(indptr[i], indptr[i + 1]):
        acc += data[p] * spins[indices[p]]
    # branch-free: with uniform == 0 the second term is an exact zero
    return -acc - uniform * (total - spins[i])


@njit(cache=True, inline="always")
def prob_minus(h, s, q):
    """P(new spin = -1 | field h, old spin s) = expit(2 (h - q s))."""
    x = 2.0 * (q * s - h)
    if x > 0.0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


@njit(cache=True)
def _sweep_serial(spins, new, u, q, indptr, indices, data, uniform, total):
    n = spins.size
    flips = 0
    new_total = 0
    for i in range(n):
        h = site_field(i, spins, total, indptr, indices, data, uniform)
        v = np.int8(-1) if u[i] <= prob_minus(h, spins[i], q) else np.int8(1)
        new[i] = v
        new_total += v
        if v != spins[i]:
            flips += 1
    return flips, new_total


@njit(cache=True, parallel=True)
def _sweep_parallel(spins, new, u, q, indptr, indices, data, uniform, total):
    n = spins.size
    flips = 0
    new_total = 0
    for i in prange(n):
        h = site_field(i, spins, total, indptr, indices, data, uniform)
        v = np.int8(-1) if u[i] <= prob_minus(h, spins[i], q) else np.int8(1)
        new[i] = v
        new_total += v
        if v != spins[i]:
            flips += 1
    return flips, new_total


@njit(cache=True, parallel=True)
def _site_energy_parallel(spins, buf, indptr, indices, data, uniform, total):
    for i in prange(spins.size):
        buf[i] = site_field(i, spins, total, indptr, indices, data, uniform) * spins[i]


@njit(cache=True)
def _total(spins):
    total = 0
    for i in range(spins.size):
        total += spins[i]
    return total


@njit(cache=True)
def _energy(spins, buf, indptr, indices, data, uniform, parallel, total):
    n = spins.size
    if parallel:
        _site_energy_parallel(spins, buf, indptr, indices, data, uniform, total)
    else:
        for i in range(n):
            buf[i] = site_field(i, spins, total, indptr, indices, data, uniform) * spins[i]
    e = 0.0
    for i in range(n):
        e += buf[i]
    return e


@njit(cache=True)
def config_index(spins):
    idx = 0
    for i in range(spins.size):
        if spins[i] > 0:
            idx |= 1 << i
    return idx


@njit(cache=True)
def pca_block(spins, u, q, indptr, indices, data, uniform, reflect, parallel,
              want_energy, want_index, flips_out, total_out, energy_out, index_out):
    """Advance ``spins`` in place by ``u.shape[0]`` synchronous steps.

    ``reflect`` maps a candidate with negative magnetization to its global
    flip. Per-step records are written into the ``*_out`` arrays.
    """
    n = spins.size
    new = np.empty_like(spins)
    buf = np.empty(n, dtype=np.float64)
    total = _total(spins)
    for t in range(u.shape[0]):
        if parallel:
            flips, new_total = _sweep_parallel(spins, new, u[t], q, indptr, indices, data, uniform, total)
        else:
            flips, new_total = _sweep_serial(spins, new, u[t], q, indptr, indices, data, uniform, total)
        if reflect and new_total < 0:
            flips = 0
            for i in range(n):
                new[i] = -new[i]
                if new[i] != spins[i]:
                    flips += 1
            new_total = -new_total
        spins[:] = new
        total = new_total
        flips_out[t] = flips
        total_out[t] = new_total
        if want_energy:
            energy_out[t] = _energy(spins, buf, indptr, indices, data, uniform, parallel, total)
        if want_index:
            index_out[t] = config_index(spins)


@njit(cache=True)
def gibbs_block(spins, u, indptr, indices, data, uniform, want_energy, want_index,
                flips_out, total_out, energy_out, index_out):
    """Single-site heat bath: ``u[t, 0]`` picks the site, ``u[t, 1]`` the spin.

    The new spin is drawn from the exact conditional of ``exp(-H)``, whose
    log-odds for ``+1`` are ``-4 h_i``.
    """
    n = spins.size
    buf = np.empty(n, dtype=np.float64)
    total = _total(spins)
    for t in range(u.shape[0]):
        i = min(int(u[t, 0] * n), n - 1)
        h = site_field(i, spins, total, indptr, indices, data, uniform)
        x = 4.0 * h
        if x > 0.0:
            pm = 1.0 / (1.0 + math.exp(-x))
        else:
            e = math.exp(x)
            pm = e / (1.0 + e)
        v = np.int8(-1) if u[t, 1] <= pm else np.int8(1)
        flips_out[t] = 1 if v != spins[i] else 0
        total += v - spins[i]
        spins[i] = v
        total_out[t] = total
        if want_energy:
            energy_out[t] = _energy(spins, buf, indptr, indices, data, uniform, False, total)
        if want_index:
            index_out[t] = config_index(spins)


@njit(cache=True)
def coupled_block(upper, lower, u, q, indptr, indices, data, uniform, parallel,
                  check_order, diff_out):
    """Run two chains on shared uniforms until they meet or ``u`` runs out.

    Returns ``(steps_taken, order_violated)``; ``diff_out[t]`` is the number
    of disagreeing sites after step ``t``.
    """
    n = upper.size
    new_u = np.empty_like(upper)
    new_l = np.empty_like(lower)
    tot_u = _total(upper)
    tot_l = _total(lower)
    for t in range(u.shape[0]):
        if parallel:
            _, tot_u2 = _sweep_parallel(upper, new_u, u[t], q, indptr, indices, data, uniform, tot_u)
            _, tot_l2 = _sweep_parallel(lower, new_l, u[t], q, indptr, indices, data, uniform, tot_l)
        else:
            _, tot_u2 = _sweep_serial(upper, new_u, u[t], q, indptr, indices, data, uniform, tot_u)
            _, tot_l2 = _sweep_serial(lower, new_l, u[t], q, indptr, indices, data, uniform, tot_l)
        tot_u = tot_u2
        tot_l = tot_l2
        diff = 0
        bad = False
        for i in range(n):
            if new_u[i] != new_l[i]:
                diff += 1
                if check_order and new_u[i] < new_l[i]:
                    bad = True
        upper[:] = new_u
        lower[:] = new_l
        diff_out[t] = diff
        if bad:
            return t + 1, True
        if diff == 0:
            return t + 1, False
    return u.shape[0], False
