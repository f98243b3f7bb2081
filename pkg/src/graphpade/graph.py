"""Undirected unweighted graphs, synthetic block graphs and edge-list I/O."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EdgeListError, InvalidParameterError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``edges`` is stored canonically: an ``(E, 2)`` int array with ``u < v``
    in each row and rows sorted lexicographically, so two graphs with the same
    edge set compare equal field-by-field.
    """

    n: int
    edges: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.n) <= 0:
            raise InvalidParameterError(f"vertex count must be positive, got {self.n}")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise InvalidParameterError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= self.n:
                raise InvalidParameterError(f"edge endpoint outside [0, {self.n})")
            e = np.sort(e, axis=1)
            uniq = np.unique(e, axis=0)
            if len(uniq) != len(e):
                raise InvalidParameterError("duplicate edges are not allowed")
            e = uniq
        e.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", e)

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "Graph":
        """Build a graph from possibly redundant pairs, collapsing duplicates."""
        e = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        if e.size:
            e = np.unique(np.sort(e, axis=1), axis=0)
        return cls(n, e)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.edges.ravel(), 1)
        return deg

    def adjacency(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        if self.num_edges:
            u, v = self.edges[:, 0], self.edges[:, 1]
            W[u, v] = 1.0
            W[v, u] = 1.0
        return W

    def num_components(self) -> int:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        u, v = self.edges[:, 0], self.edges[:, 1]
        A = coo_matrix((np.ones(len(u)), (u, v)), shape=(self.n, self.n))
        k, _ = connected_components(A, directed=False)
        return int(k)

    def to_text(self) -> str:
        lines = [f"# vertices: {self.n}", f"# edges: {self.num_edges}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def build_laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``D - W`` as a dense float matrix."""
    W = g.adjacency()
    return np.diag(W.sum(axis=1)) - W


def generate_block_graph(
    num_groups: int,
    group_size: int,
    intra_max: int = 8,
    inter_max: int = 3,
    seed: int = 0,
) -> Graph:
    """Random graph made of ``num_groups`` blocks of ``group_size`` vertices.

    Every vertex draws an intra-group degree uniformly from ``[0, intra_max]``
    and picks that many distinct partners in its own block, then draws an
    inter-group count from ``[0, inter_max]`` and picks partners among the
    other blocks. Draws are capped at the number of available partners and
    repeated pairs collapse into one edge.
    """
    if num_groups < 1 or group_size < 1:
        raise InvalidParameterError("num_groups and group_size must be positive")
    if intra_max < 0 or inter_max < 0:
        raise InvalidParameterError("edge budgets must be non-negative")
    if group_size < 2 and intra_max > 0:
        raise InvalidParameterError("intra-group edges need group_size >= 2")

    n = num_groups * group_size
    rng = np.random.default_rng(seed)
    vertices = np.arange(n)
    pairs = []
    for v in range(n):
        g0 = (v // group_size) * group_size
        own = np.concatenate([vertices[g0:v], vertices[v + 1 : g0 + group_size]])
        k = int(rng.integers(0, intra_max + 1))
        k = min(k, len(own))
        if k:
            for u in rng.choice(own, size=k, replace=False):
                pairs.append((v, int(u)))

        others = np.concatenate([vertices[:g0], vertices[g0 + group_size :]])
        k = int(rng.integers(0, inter_max + 1))
        k = min(k, len(others))
        if k:
            for u in rng.choice(others, size=k, replace=False):
                pairs.append((v, int(u)))
    return Graph.from_pairs(n, pairs)


def read_edge_list(path) -> tuple[Graph, int]:
    """Parse a two-column whitespace edge list.

    Lines that are blank or start with ``#`` are skipped, except for an
    optional ``# vertices: N`` header that pins the vertex count (so trailing
    isolated vertices survive a round trip). Self-loops and repeated edges are
    dropped.

    Returns:
        The graph and the number of dropped lines.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise EdgeListError(f"cannot read edge list {path}: {exc}") from exc

    declared_n = 0
    seen: set[tuple[int, int]] = set()
    dropped = 0
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip().lower()
            if body.startswith("vertices:"):
                try:
                    declared_n = int(body.split(":", 1)[1])
                except ValueError as exc:
                    raise EdgeListError(f"{path}:{lineno}: bad vertex header") from exc
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"{path}:{lineno}: expected two integers, got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise EdgeListError(f"{path}:{lineno}: expected two integers, got {raw!r}") from exc
        if u < 0 or v < 0:
            raise EdgeListError(f"{path}:{lineno}: negative vertex id")
        max_id = max(max_id, u, v)
        key = (min(u, v), max(u, v))
        if u == v or key in seen:
            dropped += 1
            continue
        seen.add(key)

    n = max(max_id + 1, declared_n)
    if n <= 0:
        raise EdgeListError(f"{path}: empty graph")
    if dropped:
        log.warning("%s: dropped %d self-loop/duplicate edge(s)", path, dropped)
    return Graph(n, np.array(sorted(seen), dtype=np.int64).reshape(-1, 2)), dropped


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(g.to_text())
