"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from ddsolve import blockmat, factor


def rand_complex_symmetric(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (G + G.T) / 2.0


def reconstruct_dense(fac: factor.DenseFactor) -> np.ndarray:
    """L D L^T of a dense factor (equals P M P^T when correct)."""
    return fac.L @ fac.dense_d() @ fac.L.T


def permuted(M: np.ndarray, perm: np.ndarray) -> np.ndarray:
    return M[np.ix_(perm, perm)]


def rand_block_system(seed, max_blocks=8, max_size=8, density=0.4,
                      shift=None):
    """Random well-conditioned block-sparse symmetric system.

    Returns ``(K, S)`` where ``S`` is the dense scatter reference.  A
    diagonal shift keeps the condition number moderate so dense-vs-block
    comparisons are meaningful at 1e-11 tolerances.
    """
    rng = np.random.default_rng(seed)
    nb = int(rng.integers(1, max_blocks + 1))
    sizes = rng.integers(1, max_size + 1, size=nb)
    n = int(sizes.sum())
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    S = (G + G.T) / 2.0
    if shift is None:
        shift = 2.0 * n
    S = S + shift * np.eye(n)
    off = np.zeros(nb + 1, dtype=int)
    np.cumsum(sizes, out=off[1:])
    keep = np.eye(nb, dtype=bool)
    for i in range(nb):
        for j in range(i):
            if rng.random() < density:
                keep[i, j] = keep[j, i] = True
    Sref = np.zeros_like(S)
    triples = []
    for i in range(nb):
        for j in range(nb):
            if keep[i, j]:
                Sref[off[i]:off[i + 1], off[j]:off[j + 1]] = \
                    S[off[i]:off[i + 1], off[j]:off[j + 1]]
                if i >= j:
                    triples.append((i, j, S[off[i]:off[i + 1], off[j]:off[j + 1]]))
    K = blockmat.from_blocks(sizes, triples)
    return K, Sref


def rand_clique_graph(rng, n, p) -> blockmat.CliqueGraph:
    g = blockmat.CliqueGraph(n)
    for i in range(n):
        for j in range(i):
            if rng.random() < p:
                g.add_edge(i, j)
    return g


def scalar_permutation(sizes, perm) -> np.ndarray:
    """Scalar index permutation induced by a block permutation."""
    sizes = np.asarray(sizes)
    off = np.zeros(sizes.size + 1, dtype=int)
    np.cumsum(sizes, out=off[1:])
    if sizes.size == 0:
        return np.array([], dtype=int)
    return np.concatenate([np.arange(off[p], off[p + 1]) for p in perm])


@pytest.fixture(scope="session")
def warm_kernels():
    """Trigger jit compilation once so timed tests measure steady state."""
    M = rand_complex_symmetric(8, 0) + 8 * np.eye(8)
    fac = factor.dense_ldlt_bk(M)
    fac.solve(np.ones((8, 2), dtype=complex))
    return True
