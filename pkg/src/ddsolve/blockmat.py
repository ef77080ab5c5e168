"""Block-wise sparse symmetric matrices over a supernode partition.

Only the lower block triangle is stored; the block at ``(i, j)`` with
``i > j`` implicitly defines the ``(j, i)`` block as its transpose.  Blocks
are dense complex arrays so the factorization downstream runs on level-3
kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BLK_MAGIC = "D3M-BLK v1"

_DIAG_SYM_RTOL = 1e-14


class BlockMatrixError(Exception):
    """Construction or I/O problem with a block-sparse matrix."""


@dataclass
class CliqueGraph:
    """Undirected graph with one vertex per supernode and an edge for every
    stored off-diagonal block."""

    n: int
    adj: list[set[int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.adj:
            self.adj = [set() for _ in range(self.n)]

    def add_edge(self, i: int, j: int) -> None:
        if i == j:
            return
        self.adj[i].add(j)
        self.adj[j].add(i)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((j, i) for i in range(self.n) for j in self.adj[i] if j < i)

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def copy(self) -> "CliqueGraph":
        return CliqueGraph(self.n, [set(s) for s in self.adj])


class BlockSparseSym:
    """Lower-triangle block storage with implicit transposed upper blocks."""

    def __init__(self, sizes):
        self.sizes = np.asarray(sizes, dtype=np.int64)
        if self.sizes.ndim != 1 or (self.sizes < 0).any():
            raise BlockMatrixError("block sizes must be a 1-D nonnegative array")
        self.blocks: dict[tuple[int, int], np.ndarray] = {}

    @property
    def nblocks(self) -> int:
        return int(self.sizes.size)

    @property
    def order(self) -> int:
        return int(self.sizes.sum())

    def add_block(self, i: int, j: int, block) -> None:
        if not (0 <= j <= i < self.nblocks):
            raise BlockMatrixError(f"block index ({i}, {j}) outside lower triangle")
        block = np.asarray(block, dtype=np.complex128)
        want = (self.sizes[i], self.sizes[j])
        if block.shape != want:
            raise BlockMatrixError(
                f"block ({i}, {j}) has shape {block.shape}, expected {want}")
        key = (i, j)
        if key in self.blocks:
            self.blocks[key] = self.blocks[key] + block
        else:
            self.blocks[key] = block.copy()

    def items(self):
        """Stored blocks in deterministic (column, row) order."""
        for i, j in sorted(self.blocks, key=lambda ij: (ij[1], ij[0])):
            yield (i, j), self.blocks[(i, j)]

    def offsets(self) -> np.ndarray:
        out = np.zeros(self.nblocks + 1, dtype=np.int64)
        np.cumsum(self.sizes, out=out[1:])
        return out

    def scatter(self) -> np.ndarray:
        """Expand to a full dense symmetric matrix."""
        off = self.offsets()
        S = np.zeros((self.order, self.order), dtype=np.complex128)
        for (i, j), blk in self.blocks.items():
            S[off[i]:off[i + 1], off[j]:off[j + 1]] = blk
            if i != j:
                S[off[j]:off[j + 1], off[i]:off[i + 1]] = blk.T
        return S

    def validate(self) -> None:
        for (i, j), blk in self.blocks.items():
            if i == j:
                scale = np.abs(blk).max() if blk.size else 0.0
                if scale > 0.0:
                    asym = np.abs(blk - blk.T).max()
                    if asym > _DIAG_SYM_RTOL * scale:
                        raise BlockMatrixError(
                            f"diagonal block {i} asymmetric: {asym:.3e}")


def from_blocks(sizes, block_list) -> BlockSparseSym:
    """Build a block matrix from ``(i, j, array)`` triples; duplicates sum."""
    K = BlockSparseSym(sizes)
    for i, j, blk in block_list:
        K.add_block(int(i), int(j), blk)
    K.validate()
    return K


def clique_graph(K: BlockSparseSym) -> CliqueGraph:
    """One vertex per supernode, an edge per stored off-diagonal block."""
    g = CliqueGraph(K.nblocks)
    for (i, j) in K.blocks:
        if i != j:
            g.add_edge(i, j)
    return g


def save_blk(path, K: BlockSparseSym) -> None:
    """Write the "D3M-BLK v1" text dump: a magic line, a header line with the
    block count and sizes, then per stored lower-triangle block its indices
    and row-major re/im interleaved entries."""
    with open(path, "w") as fh:
        fh.write(BLK_MAGIC + "\n")
        fh.write(" ".join([str(K.nblocks)] + [str(int(s)) for s in K.sizes]) + "\n")
        for (i, j), blk in K.items():
            fh.write(f"{i} {j}\n")
            for row in blk:
                parts = []
                for z in row:
                    parts.append("%.17g" % z.real)
                    parts.append("%.17g" % z.imag)
                fh.write(" ".join(parts) + "\n")


def load_blk(path) -> BlockSparseSym:
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        if magic != BLK_MAGIC:
            raise BlockMatrixError(f"bad magic line {magic!r}, expected {BLK_MAGIC!r}")
        header = fh.readline().split()
        if not header:
            raise BlockMatrixError("missing header line")
        nb = int(header[0])
        sizes = [int(s) for s in header[1:]]
        if len(sizes) != nb:
            raise BlockMatrixError("header size list does not match block count")
        tokens = fh.read().split()
    K = BlockSparseSym(sizes)
    pos = 0
    while pos < len(tokens):
        i = int(tokens[pos])
        j = int(tokens[pos + 1])
        pos += 2
        ni, nj = int(K.sizes[i]), int(K.sizes[j])
        count = 2 * ni * nj
        vals = np.array([float(t) for t in tokens[pos:pos + count]])
        if vals.size != count:
            raise BlockMatrixError(f"truncated data for block ({i}, {j})")
        pos += count
        blk = (vals[0::2] + 1j * vals[1::2]).reshape(ni, nj)
        K.add_block(i, j, blk)
    K.validate()
    return K
