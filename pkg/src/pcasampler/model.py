"""Coupling models, spin configurations and pointwise energy evaluations.

Spins live in int8 arrays with entries in {-1, +1}. Couplings are stored as a
symmetric CSR matrix with zero diagonal, plus an optional constant
``uniform`` coupling added between every pair of distinct sites, which lets
mean-field instances evaluate local fields in O(1) per site instead of O(n).

Conventions: ``H(sigma) = -sum_{i != j} J_ij s_i s_j`` counts both orderings of
every pair, and ``h_i(sigma) = -sum_j J_ij s_j`` so that
``H = sum_i h_i s_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError, ParseError

__all__ = [
    "CouplingModel",
    "InertiaParameter",
    "as_configuration",
    "all_up",
    "all_down",
    "config_to_index",
    "index_to_config",
    "hamiltonian",
    "local_field",
    "local_fields",
    "phi",
    "f_factor",
    "pair_hamiltonian",
    "magnetization",
    "build_model",
    "load_edge_list",
    "save_edge_list",
    "lattice2d",
    "power_law_1d",
    "curie_weiss",
    "random_model",
    "from_dense",
    "from_edges",
]


@dataclass(frozen=True, eq=False)
class CouplingModel:
    """Finite-volume pair interaction ``J_ij`` on ``n`` sites.

    Build instances with :func:`from_edges`, :func:`from_dense` or one of the
    generators; the constructor trusts its arguments.
    """

    n: int
    adjacency: sp.csr_matrix
    uniform: float = 0.0
    name: str = ""
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.adjacency.data, self.adjacency.indices, self.adjacency.indptr):
            arr.flags.writeable = False

    @property
    def indptr(self) -> np.ndarray:
        return self.adjacency.indptr

    @property
    def indices(self) -> np.ndarray:
        return self.adjacency.indices

    @property
    def data(self) -> np.ndarray:
        return self.adjacency.data

    @property
    def is_mean_field(self) -> bool:
        return self.uniform != 0.0

    def row_abs_sums(self) -> np.ndarray:
        """``sum_j |J_ij|`` for every site ``i``."""
        sums = np.asarray(abs(self.adjacency).sum(axis=1)).ravel()
        return sums + abs(self.uniform) * (self.n - 1)

    @property
    def sup_norm(self) -> float:
        """``J = sup_i sum_j |J_ij|``."""
        if self.n == 0:
            return 0.0
        return float(self.row_abs_sums().max())

    @property
    def is_ferromagnetic(self) -> bool:
        return bool(np.all(self.adjacency.data >= 0) and self.uniform >= 0)

    def dense(self) -> np.ndarray:
        """Full ``n x n`` coupling matrix (zero diagonal)."""
        mat = self.adjacency.toarray()
        if self.uniform:
            mat = mat + self.uniform * (1.0 - np.eye(self.n))
        return mat

    def abs_sparse(self) -> sp.csr_matrix:
        """``|J_ij|`` as a sparse matrix; refuses very large mean-field models."""
        if self.uniform:
            if self.n > 4096:
                raise InvalidArgumentError("mean-field model too large to materialize |J|")
            return sp.csr_matrix(np.abs(self.dense()))
        return abs(self.adjacency).tocsr()

    def coupling(self, i: int, j: int) -> float:
        _check_index(self, i)
        _check_index(self, j)
        if i == j:
            return 0.0
        return float(self.adjacency[i, j]) + self.uniform

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected sparse couplings ``(i, j, J_ij)`` with ``i < j``."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        return [(int(i), int(j), float(v)) for i, j, v in zip(coo.row, coo.col, coo.data)]

    def scaled(self, factor: float) -> "CouplingModel":
        return CouplingModel(
            self.n,
            (self.adjacency * factor).tocsr(),
            self.uniform * factor,
            name=f"{self.name}*{factor:g}",
            params={**self.params, "scale": factor},
        )

    def __repr__(self) -> str:
        return (
            f"CouplingModel(name={self.name!r}, n={self.n}, "
            f"nnz={self.adjacency.nnz}, uniform={self.uniform:g})"
        )


@dataclass(frozen=True)
class InertiaParameter:
    """Self-coupling ``q >= 0`` and the flip density ``delta = exp(-2q)``."""

    q: float

    def __post_init__(self):
        if not (self.q >= 0):
            raise InvalidArgumentError(f"q must be >= 0, got {self.q}")

    @property
    def delta(self) -> float:
        return math.exp(-2.0 * self.q)

    @classmethod
    def from_delta(cls, delta: float) -> "InertiaParameter":
        if not (0.0 <= delta <= 1.0):
            raise InvalidArgumentError(f"delta must lie in [0, 1], got {delta}")
        if delta == 0.0:
            return cls(math.inf)
        return cls(-0.5 * math.log(delta))


def _check_index(model: CouplingModel, i: int) -> None:
    if not (0 <= i < model.n):
        raise InvalidArgumentError(f"site index {i} out of range for n={model.n}")


def as_configuration(sigma, n: int | None = None) -> np.ndarray:
    """Validate and return ``sigma`` as an int8 vector of +-1 entries."""
    arr = np.asarray(sigma)
    if arr.ndim != 1:
        raise InvalidArgumentError("a spin configuration must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise InvalidArgumentError(f"configuration has {arr.shape[0]} sites, model has {n}")
    if not np.all((arr == 1) | (arr == -1)):
        raise InvalidArgumentError("spin entries must be exactly -1 or +1")
    return arr.astype(np.int8, copy=False)


def all_up(n: int) -> np.ndarray:
    return np.ones(n, dtype=np.int8)


def all_down(n: int) -> np.ndarray:
    return -np.ones(n, dtype=np.int8)


def config_to_index(sigma) -> int:
    """Bitmask index: bit ``i`` is set iff ``sigma_i = +1``."""
    sigma = as_configuration(sigma)
    idx = 0
    for i in np.flatnonzero(sigma > 0):
        idx |= 1 << int(i)
    return idx


def index_to_config(index: int, n: int) -> np.ndarray:
    bits = (index >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int8)


# -- pointwise evaluations -------------------------------------------------


def local_fields(model: CouplingModel, sigma) -> np.ndarray:
    """Vector of ``h_i(sigma) = -sum_j J_ij sigma_j`` for all sites."""
    s = as_configuration(sigma, model.n).astype(np.float64)
    h = -(model.adjacency @ s)
    if model.uniform:
        h -= model.uniform * (s.sum() - s)
    return h


def local_field(model: CouplingModel, sigma, i: int) -> float:
    _check_index(model, i)
    s = as_configuration(sigma, model.n)
    lo, hi = model.indptr[i], model.indptr[i + 1]
    h = -float(np.dot(model.data[lo:hi], s[model.indices[lo:hi]]))
    if model.uniform:
        h -= model.uniform * (float(s.sum()) - float(s[i]))
    return h


def hamiltonian(model: CouplingModel, sigma) -> float:
    s = as_configuration(sigma, model.n)
    return float(np.dot(local_fields(model, s), s))


def phi(model: CouplingModel, sigma, i: int) -> float:
    """``phi_i = exp(2 h_i(sigma) sigma_i)``."""
    s = as_configuration(sigma, model.n)
    return math.exp(2.0 * local_field(model, s, i) * s[i])


def f_factor(model: CouplingModel, sigma, delta: float) -> float:
    """``log f(sigma) = sum_i log(1 + delta * phi_i(sigma))``, computed without
    forming ``phi`` or ``f`` explicitly."""
    if delta < 0:
        raise InvalidArgumentError("delta must be nonnegative")
    s = as_configuration(sigma, model.n)
    if delta == 0.0:
        return 0.0
    x = 2.0 * local_fields(model, s) * s + math.log(delta)
    return float(np.logaddexp(0.0, x).sum())


def pair_hamiltonian(model: CouplingModel, sigma, sigma_prime, q: float) -> float:
    """``H(sigma, sigma') = sum_i [h_i(sigma) sigma'_i + q (1 - sigma_i sigma'_i)]``."""
    if not (q >= 0):
        raise InvalidArgumentError("q must be nonnegative")
    s = as_configuration(sigma, model.n)
    t = as_configuration(sigma_prime, model.n)
    disagree = int(np.count_nonzero(s != t))
    inertia = 2.0 * q * disagree if disagree else 0.0
    return float(np.dot(local_fields(model, s), t)) + inertia


def magnetization(sigma) -> float:
    s = as_configuration(sigma)
    return float(s.mean()) if s.size else 0.0


# -- construction ----------------------------------------------------------


def from_edges(
    n: int,
    edges: Iterable[tuple[int, int, float]],
    name: str = "",
    params: Mapping[str, Any] | None = None,
) -> CouplingModel:
    """Build a model from undirected couplings; each pair is mirrored.

    A pair may appear in either orientation more than once only if every
    occurrence carries the same value.
    """
    if n < 1:
        raise InvalidArgumentError("model needs at least one site")
    store: dict[tuple[int, int], float] = {}
    for i, j, v in edges:
        i, j, v = int(i), int(j), float(v)
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidArgumentError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise InvalidArgumentError(f"diagonal coupling at site {i}")
        if not math.isfinite(v):
            raise InvalidArgumentError(f"non-finite coupling on ({i}, {j})")
        key = (min(i, j), max(i, j))
        if key in store and store[key] != v:
            raise InvalidArgumentError(f"conflicting values for pair {key}")
        store[key] = v
    return _from_pairs(n, store, name, params)


def _from_pairs(n, store, name, params) -> CouplingModel:
    if store:
        ij = np.array(list(store.keys()), dtype=np.int64)
        vals = np.array(list(store.values()), dtype=np.float64)
        rows = np.concatenate([ij[:, 0], ij[:, 1]])
        cols = np.concatenate([ij[:, 1], ij[:, 0]])
        data = np.concatenate([vals, vals])
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    adj.sort_indices()
    adj.indices = adj.indices.astype(np.int64)
    adj.indptr = adj.indptr.astype(np.int64)
    return CouplingModel(n, adj, 0.0, name=name, params=dict(params or {}))


def from_dense(matrix, name: str = "", params: Mapping[str, Any] | None = None) -> CouplingModel:
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidArgumentError("coupling matrix must be square")
    if np.any(np.diag(mat) != 0):
        raise InvalidArgumentError("diagonal couplings are not allowed")
    if not np.array_equal(mat, mat.T):
        raise InvalidArgumentError("coupling matrix must be exactly symmetric")
    i, j = np.nonzero(np.triu(mat, k=1))
    return from_edges(mat.shape[0], zip(i, j, mat[i, j]), name=name, params=params)


def lattice2d(L: int, J0: float, periodic: bool = False, Ly: int | None = None) -> CouplingModel:
    """Nearest-neighbour ``L x Ly`` lattice (square by default); site
    ``(x, y)`` has index ``y * L + x``.

    ``periodic=True`` is a torus: every site carries one bond per direction,
    so each site has total coupling ``4 * J0`` at every size. On a side of
    length 2 the forward and wrap-around bonds join the same pair and add up.
    """
    Ly = L if Ly is None else Ly
    if L < 2 or Ly < 2:
        raise InvalidArgumentError("lattice sides must be >= 2")
    idx = np.arange(L * Ly).reshape(Ly, L)
    store: dict[tuple[int, int], float] = {}
    for axis in (0, 1):
        a, b = idx, np.roll(idx, -1, axis=axis)
        if not periodic:
            sl = (slice(None, -1), slice(None)) if axis == 0 else (slice(None), slice(None, -1))
            a, b = a[sl], b[sl]
        for i, j in zip(a.ravel().tolist(), b.ravel().tolist()):
            key = (min(i, j), max(i, j))
            store[key] = store.get(key, 0.0) + float(J0)
    params = {"kind": "lattice2d", "L": L, "Ly": Ly, "J0": J0, "periodic": periodic}
    tag = f"L{L}" if Ly == L else f"L{L}x{Ly}"
    return _from_pairs(L * Ly, store, f"lattice2d-{tag}{'-torus' if periodic else ''}", params)


def power_law_1d(n: int, J1: float) -> CouplingModel:
    """Open chain with ``J_ij = J1 / |i - j|**2`` for every pair."""
    if n < 2:
        raise InvalidArgumentError("need n >= 2")
    i, j = np.triu_indices(n, k=1)
    vals = J1 / (j - i).astype(np.float64) ** 2
    store = dict(zip(zip(i.tolist(), j.tolist()), vals.tolist()))
    params = {"kind": "power_law_1d", "n": n, "J1": J1}
    return _from_pairs(n, store, f"power-law-n{n}", params)


def curie_weiss(n: int, J: float, convention: str = "half") -> CouplingModel:
    """Complete graph with ``J_ij = J/(2n)`` (``half``) or ``J/n`` (``full``).

    ``half`` makes the single-site field ``~ J m / 2`` and reproduces the
    ``f(m) = exp(n g(m, delta))`` tilt; ``full`` gives field ``~ J m``.
    """
    if n < 2:
        raise InvalidArgumentError("need n >= 2")
    if convention == "half":
        c = J / (2.0 * n)
    elif convention == "full":
        c = J / float(n)
    else:
        raise InvalidArgumentError(f"unknown convention {convention!r}")
    adj = sp.csr_matrix((n, n), dtype=np.float64)
    adj.indices = adj.indices.astype(np.int64)
    adj.indptr = adj.indptr.astype(np.int64)
    params = {"kind": "curie_weiss", "n": n, "J": J, "convention": convention}
    return CouplingModel(n, adj, c, name=f"curie-weiss-{convention}-n{n}", params=params)


def random_model(
    n: int,
    scale: float = 0.1,
    density: float = 1.0,
    ferromagnetic: bool = False,
    seed: int = 0,
) -> CouplingModel:
    """Random couplings ``J_ij ~ U(-scale, scale)`` (or ``U(0, scale)``) on a
    random subset of pairs; used for tests and exploratory runs."""
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, k=1)
    keep = rng.random(i.size) < density
    lo = 0.0 if ferromagnetic else -scale
    vals = rng.uniform(lo, scale, size=i.size)
    store = {(int(a), int(b)): float(v) for a, b, v, k in zip(i, j, vals, keep) if k and v != 0.0}
    params = {"kind": "random", "n": n, "scale": scale, "density": density,
              "ferromagnetic": ferromagnetic, "seed": seed}
    return _from_pairs(n, store, f"random-n{n}-s{seed}", params)


def load_edge_list(path: str | Path, n: int | None = None) -> CouplingModel:
    """Read ``i j J_ij`` lines (0-based, ``#`` comments, one line per pair).

    ``n`` defaults to one more than the largest index mentioned; a header
    comment ``# n = <int>`` also sets it.
    """
    path = Path(path)
    store: dict[tuple[int, int], float] = {}
    declared_n = n
    max_idx = -1
    with path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line, _, comment = raw.partition("#")
            if not line.strip():
                head = comment.strip().replace(" ", "")
                if declared_n is None and head.startswith("n="):
                    try:
                        declared_n = int(head[2:])
                    except ValueError:
                        raise ParseError(f"bad size header {comment.strip()!r}", lineno, str(path))
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(f"expected 'i j J_ij', got {line.strip()!r}", lineno, str(path))
            try:
                i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ParseError(f"cannot parse {line.strip()!r}", lineno, str(path))
            if i < 0 or j < 0:
                raise ParseError("negative site index", lineno, str(path))
            if i == j:
                raise ParseError(f"diagonal coupling at site {i}", lineno, str(path))
            if not math.isfinite(v):
                raise ParseError("non-finite coupling", lineno, str(path))
            key = (min(i, j), max(i, j))
            if key in store and store[key] != v:
                raise ParseError(f"asymmetric duplicate entry for pair {key}", lineno, str(path))
            store[key] = v
            max_idx = max(max_idx, i, j)
    if declared_n is None:
        declared_n = max_idx + 1
    if declared_n < 1 or max_idx >= declared_n:
        raise ParseError(f"site index {max_idx} exceeds declared size {declared_n}", None, str(path))
    params = {"kind": "edge_list", "path": str(path), "n": declared_n}
    return _from_pairs(declared_n, store, path.stem, params)


def save_edge_list(model: CouplingModel, path: str | Path) -> None:
    if model.uniform:
        raise InvalidArgumentError("mean-field models have no sparse edge list")
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# n = {model.n}\n")
        for i, j, v in model.edges():
            fh.write(f"{i} {j} {v!r}\n")


_GENERATORS = {
    "lattice2d": lattice2d,
    "power_law_1d": power_law_1d,
    "curie_weiss": curie_weiss,
    "random": random_model,
}


def build_model(kind: str, **params) -> CouplingModel:
    """Dispatch to a generator by name; ``edge_list`` takes ``path``."""
    kind = kind.replace("-", "_")
    if kind == "edge_list":
        return load_edge_list(params.pop("path"), **params)
    try:
        gen = _GENERATORS[kind]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown model kind {kind!r}; choose from edge_list, {', '.join(_GENERATORS)}"
        )
    for key in ("J0", "J1", "J"):
        if key in params and not params[key] > 0:
            raise InvalidArgumentError(f"{key} must be positive")
    return gen(**params)
