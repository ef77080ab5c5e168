"""Numeric factorization: dense Bunch-Kaufman LDL^T and the right-looking
block LDL^T over an elimination plan, plus forward/backward substitution.

Pivoting is restricted: each diagonal block is factored with pivot searches
confined to itself, so no pivot is ever deferred into another supernode and
the numeric factor occupies exactly the entries predicted symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .blockmat import BlockSparseSym
from .symbolic import EliminationPlan

DEFAULT_PIVOT_TOL = 1e-12


class SingularBlockError(Exception):
    """Both 1x1 and 2x2 pivot candidates fell below the pivot threshold."""


class FactorConsistencyError(Exception):
    """Numeric factorization touched a block outside the symbolic pattern."""


@dataclass
class DenseFactor:
    """P M P^T = L D L^T with unit lower L and 1x1/2x2 block diagonal D.

    ``d`` holds the diagonal of D, ``e[k]`` the subdiagonal of a 2x2 pivot
    starting at ``k``; ``tags`` is the pivot-structure list (1 = 1x1,
    2 = 2x2 start, 0 = 2x2 partner) and ``perm[i]`` is the original index at
    permuted position ``i``.
    """

    L: np.ndarray
    d: np.ndarray
    e: np.ndarray
    tags: np.ndarray
    perm: np.ndarray
    growth: float
    n_2x2: int

    @property
    def n(self) -> int:
        return int(self.d.size)

    def solve(self, B: np.ndarray) -> np.ndarray:
        """Solve M X = B; accepts a vector or a multi-column RHS."""
        one_d = B.ndim == 1
        Z = np.array(B, dtype=np.complex128, ndmin=2)
        if one_d:
            Z = Z.T
        if Z.shape[0] != self.n:
            raise ValueError(f"rhs has {Z.shape[0]} rows, factor has {self.n}")
        Z = np.ascontiguousarray(Z[self.perm, :])
        kernels.solve_unit_lower(self.L, Z)
        kernels.apply_dinv_left(self.d, self.e, self.tags, Z)
        kernels.solve_unit_lower_t(self.L, Z)
        X = np.empty_like(Z)
        X[self.perm, :] = Z
        return X[:, 0] if one_d else X

    def dense_d(self) -> np.ndarray:
        D = np.zeros((self.n, self.n), dtype=np.complex128)
        k = 0
        while k < self.n:
            if self.tags[k] == 1:
                D[k, k] = self.d[k]
                k += 1
            else:
                D[k, k] = self.d[k]
                D[k + 1, k + 1] = self.d[k + 1]
                D[k + 1, k] = D[k, k + 1] = self.e[k]
                k += 2
        return D


def dense_ldlt_bk(M: np.ndarray, pivot_tol: float = DEFAULT_PIVOT_TOL) -> DenseFactor:
    """Factor a complex symmetric matrix with Bunch-Kaufman partial pivoting.

    Raises :class:`SingularBlockError` when a column offers neither an
    acceptable 1x1 nor 2x2 pivot relative to ``pivot_tol * max|M|``.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    n = M.shape[0]
    W = np.array(M, dtype=np.complex128, order="C")
    scale = np.abs(W).max() if n else 0.0
    if n and scale > 0.0:
        asym = np.abs(W - W.T).max()
        if asym > 1e-12 * scale:
            raise ValueError(f"matrix is not symmetric: max|M - M^T| = {asym:.3e}")
    perm, tags, n2x2, growth, info = kernels.bk_factor(W, pivot_tol * scale)
    if info >= 0:
        raise SingularBlockError(
            f"no acceptable pivot at elimination step {info} "
            f"(threshold {pivot_tol * scale:.3e})")
    L = np.tril(W, -1)
    d = np.diagonal(W).copy()
    e = np.zeros(n, dtype=np.complex128)
    k = 0
    while k < n:
        if tags[k] == 2:
            e[k] = W[k + 1, k]
            L[k + 1, k] = 0.0
            k += 2
        else:
            k += 1
    np.fill_diagonal(L, 1.0)
    return DenseFactor(L, d, e, tags, perm, float(growth), int(n2x2))


@dataclass
class FactorStats:
    factor_entries: int = 0
    flops: int = 0
    peak_bytes: int = 0
    growth_factor: float = 1.0
    n_2x2_pivots: int = 0


@dataclass
class BlockFactor:
    """Output of :func:`block_ldlt`: per-supernode dense factors in
    elimination order plus the off-diagonal factor blocks of the pattern."""

    plan: EliminationPlan
    diag: list[DenseFactor]
    offdiag: dict[tuple[int, int], np.ndarray]
    stats: FactorStats = field(default_factory=FactorStats)


def _permute_blocks(K: BlockSparseSym, inv: np.ndarray) -> dict:
    W: dict[tuple[int, int], np.ndarray] = {}
    for (i, j), blk in K.blocks.items():
        a, b = int(inv[i]), int(inv[j])
        if a >= b:
            key, val = (a, b), blk
        else:
            key, val = (b, a), blk.T
        if key in W:
            W[key] = W[key] + val
        else:
            W[key] = np.array(val, dtype=np.complex128, order="C")
    return W


def block_ldlt(K: BlockSparseSym, plan: EliminationPlan,
               pivot_tol: float = DEFAULT_PIVOT_TOL) -> BlockFactor:
    """Right-looking block LDL^T of ``K`` following ``plan``.

    Per block column j: factor the diagonal block, form X_ij = L_ij D_jj by a
    triangular solve against every pattern row i, recover L_ij = X_ij D_jj^-1,
    then update the trailing blocks K_ik -= X_ij L_kj^T for pattern pairs
    i >= k.  The permutation of ``plan`` is applied internally.
    """
    nb = K.nblocks
    if plan.nblocks != nb:
        raise ValueError("plan and matrix disagree on block count")
    inv = plan.order.inverse()
    sizes = plan.sizes_perm
    W = _permute_blocks(K, inv)
    pattern_sets = plan.pattern_sets()
    diag: list[DenseFactor] = []
    offdiag: dict[tuple[int, int], np.ndarray] = {}
    stats = FactorStats()

    live_entries = sum(b.size for b in W.values())
    stored_entries = 0
    flops = 0
    peak = live_entries

    for j in range(nb):
        nj = int(sizes[j])
        Kjj = W.pop((j, j), None)
        if Kjj is None:
            Kjj = np.zeros((nj, nj), dtype=np.complex128)
        else:
            live_entries -= Kjj.size
        try:
            fac = dense_ldlt_bk(Kjj, pivot_tol)
        except SingularBlockError as err:
            raise SingularBlockError(f"block column {j}: {err}") from err
        diag.append(fac)
        stored_entries += nj * (nj + 1) // 2
        flops += nj ** 3 // 3 + nj ** 2
        rows = [int(r) for r in plan.pattern[j]]
        X: dict[int, np.ndarray] = {}
        for i in rows:
            ni = int(sizes[i])
            Kij = W.pop((i, j), None)
            if Kij is None:
                Kij = np.zeros((ni, nj), dtype=np.complex128)
            else:
                live_entries -= Kij.size
            Y = np.ascontiguousarray(Kij[:, fac.perm].T)
            kernels.solve_unit_lower(fac.L, Y)          # Y = L_jj^-1 (K_ij P^T)^T
            Xij = np.ascontiguousarray(Y.T)             # X_ij = L_ij D_jj
            Lij = Xij.copy()
            kernels.apply_dinv_right(fac.d, fac.e, fac.tags, Lij)
            offdiag[(i, j)] = Lij
            X[i] = Xij
            stored_entries += ni * nj
            flops += ni * nj * nj + ni * nj
        transient = sum(x.size for x in X.values())
        peak = max(peak, live_entries + stored_entries + transient)
        for a_i, i in enumerate(rows):
            for kk in rows[:a_i + 1]:
                upd = X[i] @ offdiag[(kk, j)].T
                flops += int(sizes[i]) * nj * int(sizes[kk])
                if i == kk:
                    # SYRK-style symmetrization keeps diagonal blocks exactly
                    # symmetric for the next diagonal factorization.
                    upd = np.tril(upd) + np.tril(upd, -1).T
                key = (i, kk)
                tgt = W.get(key)
                if tgt is None:
                    if i != kk and i not in pattern_sets[kk]:
                        raise FactorConsistencyError(
                            f"update targets block {key} outside pattern")
                    W[key] = -upd
                    live_entries += upd.size
                else:
                    W[key] = tgt - upd
        peak = max(peak, live_entries + stored_entries + transient)

    if W:
        raise FactorConsistencyError(f"unconsumed blocks remain: {sorted(W)}")
    stats.factor_entries = stored_entries
    stats.flops = flops
    stats.peak_bytes = 16 * peak
    stats.growth_factor = max((f.growth for f in diag), default=1.0)
    stats.n_2x2_pivots = sum(f.n_2x2 for f in diag)
    return BlockFactor(plan, diag, offdiag, stats)


def _solve_one(F: BlockFactor, b: list[np.ndarray]) -> list[np.ndarray]:
    """Single-column block forward/backward substitution in plan order."""
    nb = F.plan.nblocks
    pattern = F.plan.pattern
    u: list[np.ndarray] = []
    for j in range(nb):
        fac = F.diag[j]
        zj = np.ascontiguousarray(b[j][fac.perm, :])
        kernels.solve_unit_lower(fac.L, zj)
        for i in pattern[j]:
            b[int(i)] = b[int(i)] - F.offdiag[(int(i), j)] @ zj
        u.append(zj)
    for j in range(nb):
        kernels.apply_dinv_left(F.diag[j].d, F.diag[j].e, F.diag[j].tags, u[j])
    x: list[np.ndarray] = [None] * nb  # type: ignore[list-item]
    for j in range(nb - 1, -1, -1):
        fac = F.diag[j]
        w = u[j]
        for i in pattern[j]:
            w = w - F.offdiag[(int(i), j)].T @ x[int(i)]
        w = np.ascontiguousarray(w)
        kernels.solve_unit_lower_t(fac.L, w)
        xj = np.empty_like(w)
        xj[fac.perm, :] = w
        x[j] = xj
    return x


def block_solve(F: BlockFactor, g: list[np.ndarray]) -> list[np.ndarray]:
    """Solve K x = g through the block factor.

    ``g`` is a block vector: one array per supernode in the original block
    numbering, each either 1-D or a matrix of right-hand-side columns.
    Multiple columns are processed strictly one at a time through the same
    code path, so a multi-RHS solve reproduces column-by-column calls
    exactly.
    """
    nb = F.plan.nblocks
    if len(g) != nb:
        raise ValueError(f"block vector has {len(g)} blocks, expected {nb}")
    if nb == 0:
        return []
    perm = F.plan.order.perm
    sizes = F.plan.sizes_perm
    one_d = all(b.ndim == 1 for b in g)
    cols = None
    blocks = []
    for b in g:
        arr = np.array(b, dtype=np.complex128, ndmin=2)
        if b.ndim == 1:
            arr = arr.T
        if cols is None:
            cols = arr.shape[1]
        elif arr.shape[1] != cols:
            raise ValueError("inconsistent RHS column counts across blocks")
        blocks.append(arr)
    for j in range(nb):
        if blocks[int(perm[j])].shape[0] != int(sizes[j]):
            raise ValueError(f"block {int(perm[j])} has wrong length")
    out = [np.empty((b.shape[0], cols), dtype=np.complex128) for b in blocks]
    for c in range(cols):
        bcol = [blocks[int(perm[j])][:, c:c + 1].copy() for j in range(nb)]
        xcol = _solve_one(F, bcol)
        for j in range(nb):
            out[int(perm[j])][:, c:c + 1] = xcol[j]
    if one_d:
        return [o[:, 0] for o in out]
    return out


def scatter_factor(F: BlockFactor) -> tuple[np.ndarray, np.ndarray]:
    """Dense (L, D) of the permuted matrix, for verification.

    Returns block-lower L with diagonal blocks P_jj^T L_jj and the block
    diagonal D, satisfying K_perm = L D L^T.
    """
    sizes = F.plan.sizes_perm
    off = np.zeros(sizes.size + 1, dtype=np.int64)
    np.cumsum(sizes, out=off[1:])
    n = int(off[-1])
    L = np.zeros((n, n), dtype=np.complex128)
    D = np.zeros((n, n), dtype=np.complex128)
    for j in range(F.plan.nblocks):
        fac = F.diag[j]
        lb = np.zeros_like(fac.L)
        lb[fac.perm, :] = fac.L
        L[off[j]:off[j + 1], off[j]:off[j + 1]] = lb
        D[off[j]:off[j + 1], off[j]:off[j + 1]] = fac.dense_d()
        for i in F.plan.pattern[j]:
            i = int(i)
            L[off[i]:off[i + 1], off[j]:off[j + 1]] = F.offdiag[(i, j)]
    return L, D
