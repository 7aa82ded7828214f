"""Undirected bank networks, Erdos-Renyi generation and seeded random streams.

Graphs are stored as ``lo < hi`` edge arrays so that neighbour counts over
a whole network are two ``np.bincount`` calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ParameterError

__all__ = [
    "Network",
    "SeedSpec",
    "from_edges",
    "generate_er",
    "regular_lattice",
    "complete_graph",
    "degree_pmf",
    "write_edgelist",
    "read_edgelist",
]


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a deterministic rule for per-run generators.

    Each ``(run_index, purpose)`` pair maps to its own ``SeedSequence``
    spawn key, so a run's draws never depend on which other runs were
    executed, in what order, or on how many workers.
    """

    master_seed: int = 0

    # purpose -> fixed slot in the spawn key; keep stable across versions
    PURPOSES = {"graph": 0, "dynamics": 1, "alloc": 2, "design": 3}

    def stream(self, run_index: int, purpose: str = "dynamics") -> np.random.Generator:
        try:
            slot = self.PURPOSES[purpose]
        except KeyError:
            raise ParameterError(f"unknown stream purpose {purpose!r}") from None
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed) & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(int(run_index), slot),
        )
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable undirected simple graph.

    Stored as an edge list with ``lo[e] < hi[e]``; a CSR view is built on
    first use of :attr:`adjacency` or :meth:`neighbors`.
    """

    n_nodes: int
    lo: np.ndarray
    hi: np.ndarray
    mean_degree_target: float = float("nan")

    def __post_init__(self):
        for arr in (self.lo, self.hi):
            arr.flags.writeable = False

    @cached_property
    def degrees(self) -> np.ndarray:
        return (np.bincount(self.lo, minlength=self.n_nodes)
                + np.bincount(self.hi, minlength=self.n_nodes))

    @property
    def n_edges(self) -> int:
        return len(self.lo)

    @property
    def mean_degree(self) -> float:
        return 2.0 * self.n_edges / self.n_nodes

    @cached_property
    def _csr(self):
        n = self.n_nodes
        keys = np.concatenate([self.lo * n + self.hi, self.hi * n + self.lo])
        keys.sort()
        src, dst = np.divmod(keys, n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst

    @property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(i) for i in range(self.n_nodes)]

    def neighbors(self, i: int) -> np.ndarray:
        """Neighbours of node ``i`` in ascending order."""
        indptr, dst = self._csr
        return dst[indptr[i]:indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """Return an ``(E, 2)`` array of ``i < j`` pairs sorted by ``i`` then ``j``."""
        order = np.lexsort((self.hi, self.lo))
        return np.column_stack([self.lo[order], self.hi[order]])

    def neighbor_sum(self, values: np.ndarray) -> np.ndarray:
        """Sum ``values`` over each node's neighbours."""
        n = self.n_nodes
        return (np.bincount(self.lo, weights=values[self.hi], minlength=n)
                + np.bincount(self.hi, weights=values[self.lo], minlength=n))

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (self.n_nodes == other.n_nodes
                and np.array_equal(self.edges(), other.edges()))

    __hash__ = None


def from_edges(n_nodes, edges, mean_degree_target=float("nan")) -> Network:
    """Build a network from undirected edges given as ``(i, j)`` pairs.

    Self-loops and duplicate edges are rejected.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if n_nodes < 1:
        raise ParameterError("n_nodes must be >= 1")
    if edges.size and (edges.min() < 0 or edges.max() >= n_nodes):
        raise ParameterError("edge endpoint out of range")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise ParameterError("self-loops are not allowed")
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    if len(np.unique(lo * n_nodes + hi)) != len(lo):
        raise ParameterError("duplicate edges are not allowed")
    return _from_ordered_pairs(int(n_nodes), lo, hi, mean_degree_target)


def _pair_from_index(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # strictly-lower-triangle enumeration: idx = i*(i-1)/2 + j, 0 <= j < i
    i = np.floor((1.0 + np.sqrt(1.0 + 8.0 * idx)) / 2.0).astype(np.int64)
    # guard against sqrt rounding at triangular numbers
    i -= (i * (i - 1) // 2) > idx
    i += ((i + 1) * i // 2) <= idx
    j = idx - i * (i - 1) // 2
    return j, i


def generate_er(n: int, k_mean: float, rng: np.random.Generator) -> Network:
    """Sample G(n, q) with ``q = k_mean / (n - 1)``.

    Each of the ``n(n-1)/2`` possible edges is present independently. The
    sampler walks the pair list with geometric gaps, so the cost is linear
    in the number of edges rather than in ``n**2``.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not (k_mean >= 0):
        raise ParameterError("k_mean must be non-negative")
    if k_mean > max(n - 1, 0):
        raise ParameterError(f"k_mean={k_mean} exceeds n-1={n - 1}")
    n_pairs = n * (n - 1) // 2
    q = 0.0 if n == 1 else k_mean / (n - 1)
    if q == 0.0 or n_pairs == 0:
        idx = np.empty(0, dtype=np.int64)
    elif q >= 1.0:
        idx = np.arange(n_pairs, dtype=np.int64)
    else:
        expected = n_pairs * q
        chunk = int(expected + 6.0 * np.sqrt(expected) + 16)
        log_miss = np.log1p(-q)
        parts = []
        pos = -1
        while True:
            # inverse-CDF geometric gaps on {1, 2, ...}; faster than rng.geometric
            gaps = np.floor(np.log1p(-rng.random(chunk)) / log_miss)
            # tiny q gives gaps beyond int64; anything past the pair list is equivalent
            gaps = np.minimum(gaps, n_pairs).astype(np.int64) + 1
            steps = pos + np.cumsum(gaps)
            parts.append(steps)
            pos = int(steps[-1])
            if pos >= n_pairs:
                break
        idx = np.concatenate(parts)
        idx = idx[idx < n_pairs]
    j, i = _pair_from_index(idx)
    return _from_ordered_pairs(n, j, i, k_mean)


def _from_ordered_pairs(n, lo, hi, k_mean):
    # caller guarantees lo < hi and no duplicates
    return Network(int(n), np.ascontiguousarray(lo, dtype=np.int64),
                   np.ascontiguousarray(hi, dtype=np.int64), float(k_mean))


def regular_lattice(n: int, k: int) -> Network:
    """Ring lattice where each node links to its ``k/2`` nearest neighbours per side."""
    if k % 2 or k < 0 or k >= n:
        raise ParameterError("k must be even and 0 <= k < n")
    base = np.arange(n)
    lo, hi = [], []
    for off in range(1, k // 2 + 1):
        a, b = base, (base + off) % n
        lo.append(np.minimum(a, b))
        hi.append(np.maximum(a, b))
    if not lo:
        return from_edges(n, np.empty((0, 2)), float(k))
    return from_edges(n, np.column_stack([np.concatenate(lo), np.concatenate(hi)]), float(k))


def complete_graph(n: int) -> Network:
    j, i = np.tril_indices(n, -1)
    return from_edges(n, np.column_stack([j, i]), float(n - 1))


def degree_pmf(net: Network) -> dict[int, float]:
    """Empirical degree distribution ``{k: fraction of nodes with degree k}``."""
    counts = np.bincount(net.degrees)
    return {int(k): c / net.n_nodes for k, c in enumerate(counts) if c}


def write_edgelist(net: Network, path) -> None:
    """Write ``"i j"`` lines, 0-based, ``i < j``, ascending ``i`` then ``j``."""
    edges = net.edges()
    with open(path, "w") as fh:
        fh.write(f"# n_nodes {net.n_nodes}\n")
        for i, j in edges:
            fh.write(f"{i} {j}\n")


def read_edgelist(path, n_nodes=None) -> Network:
    text = Path(path).read_text().splitlines()
    pairs = []
    for line in text:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if n_nodes is None and len(parts) == 2 and parts[0] == "n_nodes":
                n_nodes = int(parts[1])
            continue
        i, j = line.split()
        pairs.append((int(i), int(j)))
    if n_nodes is None:
        n_nodes = 1 + max((max(p) for p in pairs), default=0)
    return from_edges(n_nodes, np.array(pairs, dtype=np.int64).reshape(-1, 2))
