"""Fill-reducing elimination orders for the clique graph.

The built-in algorithm is a weighted minimum-degree elimination: at each step
the vertex whose neighbors carry the smallest total block size is eliminated
and its remaining neighbors are merged into a clique (quotient-graph update).
Ties break toward the smaller vertex index, which makes the order fully
deterministic.  An externally computed permutation can be loaded from a text
file with one index per line instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockmat import CliqueGraph


class OrderingError(Exception):
    pass


@dataclass
class Ordering:
    perm: np.ndarray  # perm[new_position] = old_index
    source: str = "builtin"

    def __post_init__(self):
        self.perm = np.asarray(self.perm, dtype=np.int64)
        check_permutation(self.perm)

    @property
    def n(self) -> int:
        return int(self.perm.size)

    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv


def check_permutation(perm: np.ndarray) -> None:
    n = perm.size
    seen = np.zeros(n, dtype=bool)
    for v in perm:
        if v < 0 or v >= n or seen[v]:
            raise OrderingError("ordering is not a bijection on 0..n-1")
        seen[v] = True


def _min_degree_order(g: CliqueGraph, weights: np.ndarray) -> np.ndarray:
    n = g.n
    adj = [set(s) for s in g.adj]
    alive = [True] * n
    order = []
    for _ in range(n):
        best = -1
        best_key = None
        for v in range(n):
            if not alive[v]:
                continue
            deg = int(sum(weights[u] for u in adj[v]))
            nbrs = sorted(adj[v])
            simplicial = all(w in adj[u] for a_i, u in enumerate(nbrs)
                             for w in nbrs[a_i + 1:])
            key = (0 if simplicial else 1, deg, v)
            if best_key is None or key < best_key:
                best, best_key = v, key
        order.append(best)
        alive[best] = False
        nbrs = sorted(adj[best])
        for u in nbrs:
            adj[u].discard(best)
        for a_i, u in enumerate(nbrs):
            for w in nbrs[a_i + 1:]:
                adj[u].add(w)
                adj[w].add(u)
    return np.array(order, dtype=np.int64)


def _factor_entries(g: CliqueGraph, perm: np.ndarray, weights: np.ndarray) -> int:
    """Predicted factor entries of an elimination order (local symbolic pass,
    duplicated from the symbolic module to keep this module import-free)."""
    n = g.n
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in g.adj[i]:
            adj[inv[i]].add(int(inv[j]))
    total = 0
    for j in range(n):
        rows = sorted(r for r in adj[j] if r > j)
        nj = int(weights[perm[j]])
        total += nj * (nj + 1) // 2
        total += nj * int(sum(weights[perm[r]] for r in rows))
        for a_i, u in enumerate(rows):
            for w in rows[a_i + 1:]:
                adj[u].add(w)
                adj[w].add(u)
    return total


def reorder(g: CliqueGraph, weights) -> Ordering:
    """Fill-reducing order of ``g``; ``weights`` are block sizes.

    Runs weighted minimum degree with a simplicial-vertex preference
    (vertices of zero deficiency go first, so chordal graphs, trees and
    paths come out fill-free), ties broken by weighted degree then vertex
    index.  The produced order is kept only if its predicted factor size is
    no worse than the natural order, the usual ordering-portfolio guard of
    sparse direct solvers; minimum degree alone is a heuristic and can lose
    to the natural order on small graphs.
    """
    n = g.n
    weights = np.asarray(weights, dtype=np.int64)
    if weights.size != n:
        raise OrderingError("weights length does not match graph size")
    perm_md = _min_degree_order(g, weights)
    identity = np.arange(n, dtype=np.int64)
    if np.array_equal(perm_md, identity):
        return Ordering(perm_md, source="builtin")
    if _factor_entries(g, perm_md, weights) <= _factor_entries(g, identity, weights):
        return Ordering(perm_md, source="builtin")
    return Ordering(identity, source="builtin")


def identity_ordering(n: int) -> Ordering:
    return Ordering(np.arange(n, dtype=np.int64), source="builtin")


def load_ordering_file(path, n: int) -> Ordering:
    """Read one supernode index per line; blank lines and # comments skipped."""
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                values.append(int(line))
    if len(values) != n:
        raise OrderingError(
            f"ordering file has {len(values)} entries, expected {n}")
    return Ordering(np.array(values, dtype=np.int64), source="external-file")
