"""Symbolic block factorization of the reordered clique graph.

Standard elimination-graph analysis: processing block columns in order, the
still-uneliminated neighbors of column ``j`` become pairwise adjacent, and
``pattern[j]`` records the rows below ``j`` (original plus fill) that the
numeric factorization will populate.  The elimination-tree parent of ``j`` is
the smallest row in its pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockmat import CliqueGraph
from .ordering import Ordering


@dataclass
class EliminationPlan:
    order: Ordering
    etree_parent: np.ndarray          # parent per block column, -1 for roots
    pattern: list[np.ndarray]         # per column: sorted rows > j
    sizes_perm: np.ndarray            # block sizes in elimination order
    total_factor_entries: int

    @property
    def nblocks(self) -> int:
        return int(self.sizes_perm.size)

    def pattern_sets(self) -> list[set[int]]:
        return [set(int(i) for i in rows) for rows in self.pattern]


def symbolic_factor(g: CliqueGraph, order: Ordering, sizes) -> EliminationPlan:
    n = g.n
    sizes = np.asarray(sizes, dtype=np.int64)
    if order.n != n or sizes.size != n:
        raise ValueError("graph, ordering and sizes disagree on block count")
    inv = order.inverse()
    # adjacency relabeled into elimination positions
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in g.adj[i]:
            adj[inv[i]].add(int(inv[j]))
    pattern: list[np.ndarray] = []
    parent = np.full(n, -1, dtype=np.int64)
    for j in range(n):
        rows = sorted(r for r in adj[j] if r > j)
        pattern.append(np.array(rows, dtype=np.int64))
        if rows:
            parent[j] = rows[0]
        for a_i, u in enumerate(rows):
            for w in rows[a_i + 1:]:
                adj[u].add(w)
                adj[w].add(u)
    sizes_perm = sizes[order.perm]
    total = 0
    for j in range(n):
        nj = int(sizes_perm[j])
        total += nj * (nj + 1) // 2
        total += nj * int(sizes_perm[pattern[j]].sum())
    return EliminationPlan(order, parent, pattern, sizes_perm, total)


def fill_blocks(plan: EliminationPlan, g: CliqueGraph) -> list[tuple[int, int]]:
    """Pattern positions that are fill, i.e. not original graph edges."""
    inv = plan.order.inverse()
    orig = set()
    for i in range(g.n):
        for j in g.adj[i]:
            a, b = int(inv[i]), int(inv[j])
            if a > b:
                orig.add((a, b))
    fills = []
    for j, rows in enumerate(plan.pattern):
        for i in rows:
            if (int(i), j) not in orig:
                fills.append((int(i), j))
    return sorted(fills)


def format_plan(plan: EliminationPlan) -> str:
    """Human-readable symbolic summary (used by --print-symbolic)."""
    lines = []
    lines.append(f"block columns: {plan.nblocks}")
    for j, rows in enumerate(plan.pattern):
        row_s = " ".join(str(int(r)) for r in rows) if rows.size else "-"
        lines.append(f"col {j:4d} (size {int(plan.sizes_perm[j]):4d})"
                     f" parent {int(plan.etree_parent[j]):4d} pattern: {row_s}")
    lines.append(f"factor entries: {plan.total_factor_entries}")
    lines.append(f"predicted factor bytes: {16 * plan.total_factor_entries}")
    return "\n".join(lines)
