"""Network substrate: regular, Erdős–Rényi and power-law graph builders.

Graphs are undirected, simple (no self-loops, no parallel edges) and
immutable once built.  Node ids are 0..n-1.  All downstream modules only
ever look at the adjacency lists, so extending to directed graphs would
amount to feeding in-neighbor lists instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, InvalidParameterError

__all__ = [
    "Graph",
    "make_regular",
    "make_random",
    "degree_stats",
    "read_edge_list",
    "write_edge_list",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph as per-node neighbor tuples."""

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        if n <= 0:
            raise InvalidParameterError("node count must be positive")
        neigh: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise DataError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise DataError(f"edge ({u},{v}) outside 0..{n - 1}")
            if v in neigh[u]:
                raise DataError(f"duplicate edge ({u},{v})")
            neigh[u].add(v)
            neigh[v].add(u)
        return cls(n=n, adjacency=tuple(tuple(sorted(s)) for s in neigh))

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self):
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield (u, v)

    def to_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Flatten adjacency to (indptr, indices) for the simulation engine."""
        degs = np.fromiter((len(a) for a in self.adjacency), np.int64, self.n)
        indptr = np.zeros(self.n + 1, np.int64)
        np.cumsum(degs, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), np.int32)
        for u, nbrs in enumerate(self.adjacency):
            indices[indptr[u] : indptr[u + 1]] = nbrs
        return indptr, indices


def make_regular(n: int, mu: int, seed: int = 0) -> Graph:
    """Build a mu-regular circulant graph: node i links to its mu/2
    nearest ring neighbors on each side.

    mu must be even and < n.  The construction is deterministic; the seed
    is accepted only so every generator shares one signature.
    """
    if n <= 0:
        raise InvalidParameterError("n must be positive")
    if mu < 0 or mu % 2 != 0:
        raise InvalidParameterError(f"mu must be even and nonnegative, got {mu}")
    if mu >= n:
        raise InvalidParameterError(f"mu={mu} must be smaller than n={n}")
    half = mu // 2
    edges = []
    for i in range(n):
        for d in range(1, half + 1):
            edges.append((i, (i + d) % n))
    return Graph.from_edges(n, edges)


def make_random(kind: str, n: int, seed: int, *, p: float | None = None,
                tau: float | None = None, min_degree: int = 1) -> Graph:
    """Build a random simple graph, reproducible per seed.

    kind="erdos_renyi" needs an edge probability p in [0,1];
    kind="power_law" needs an exponent tau > 2 and a minimum degree >= 1
    (configuration model, self-loops and parallel edges dropped).
    """
    if n <= 0:
        raise InvalidParameterError("n must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if kind == "erdos_renyi":
        if p is None or not (0.0 <= p <= 1.0):
            raise InvalidParameterError(f"erdos_renyi needs p in [0,1], got {p}")
        iu, ju = np.triu_indices(n, k=1)
        mask = rng.random(iu.shape[0]) < p
        return Graph.from_edges(n, zip(iu[mask].tolist(), ju[mask].tolist()))
    if kind == "power_law":
        if tau is None or tau <= 2.0:
            raise InvalidParameterError(f"power_law needs tau > 2, got {tau}")
        if min_degree < 1:
            raise InvalidParameterError("min_degree must be >= 1")
        return _configuration_model(n, tau, min_degree, rng)
    raise InvalidParameterError(f"unknown random-graph kind: {kind!r}")


def _configuration_model(n: int, tau: float, min_degree: int,
                         rng: np.random.Generator) -> Graph:
    # Degrees drawn from P(d) ∝ d^{-tau} on [min_degree, n-1] by inverse
    # transform on the discrete cdf; one stub added if the sum is odd.
    support = np.arange(min_degree, n, dtype=np.float64)
    weights = support ** (-tau)
    cdf = np.cumsum(weights / weights.sum())
    draws = np.searchsorted(cdf, rng.random(n))
    degrees = (draws + min_degree).astype(np.int64)
    if degrees.sum() % 2 == 1:
        degrees[rng.integers(0, n)] += 1
    stubs = np.repeat(np.arange(n, dtype=np.int64), degrees)
    rng.shuffle(stubs)
    seen = set()
    edges = []
    for i in range(0, len(stubs) - 1, 2):
        u, v = int(stubs[i]), int(stubs[i + 1])
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
    return Graph.from_edges(n, edges)


def degree_stats(g: Graph) -> tuple[float, list[int]]:
    """Average degree and the per-node degree list."""
    degs = list(g.degrees)
    return (sum(degs) / g.n if g.n else 0.0), degs


def write_edge_list(g: Graph, path) -> None:
    """Serialize as a header line ``n=<count>`` plus one ``u v`` per edge."""
    with open(path, "w") as fh:
        fh.write(f"n={g.n}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("n="):
            raise DataError(f"{path}: expected header 'n=<count>', got {header!r}")
        try:
            n = int(header[2:])
        except ValueError as exc:
            raise DataError(f"{path}: bad node count in header {header!r}") from exc
        edges = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-integer node id") from exc
    return Graph.from_edges(n, edges)
