import numpy as np
import pytest

from conftest import rand_block_system, rand_complex_symmetric, scalar_permutation
from ddsolve import blockmat, factor, ordering, symbolic
from ddsolve.factor import SingularBlockError, block_ldlt, block_solve, \
    dense_ldlt_bk, scatter_factor
from ddsolve.ordering import identity_ordering


def plan_for(K, order=None):
    g = blockmat.clique_graph(K)
    if order is None:
        order = ordering.reorder(g, K.sizes)
    return symbolic.symbolic_factor(g, order, K.sizes)


def split_blocks(x, sizes):
    off = np.zeros(len(sizes) + 1, dtype=int)
    np.cumsum(sizes, out=off[1:])
    return [x[off[i]:off[i + 1]] for i in range(len(sizes))]


def test_single_block_equals_dense_kernel():
    M = rand_complex_symmetric(9, 0)
    K = blockmat.from_blocks([9], [(0, 0, M)])
    F = block_ldlt(K, plan_for(K))
    ref = dense_ldlt_bk(M)
    assert np.array_equal(F.diag[0].L, ref.L)
    assert np.array_equal(F.diag[0].d, ref.d)
    assert np.array_equal(F.diag[0].perm, ref.perm)
    assert F.offdiag == {}


def test_arrow_matrix_vs_dense_oracle():
    # 3 blocks (2, 3, 4): first column coupled to both others
    rng = np.random.default_rng(5)
    sizes = [2, 3, 4]
    n = 9
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    S = (G + G.T) / 2 + 2 * n * np.eye(n)
    S[2:5, 5:9] = 0.0
    S[5:9, 2:5] = 0.0
    K = blockmat.from_blocks(sizes, [
        (0, 0, S[0:2, 0:2]), (1, 1, S[2:5, 2:5]), (2, 2, S[5:9, 5:9]),
        (1, 0, S[2:5, 0:2]), (2, 0, S[5:9, 0:2])])
    F = block_ldlt(K, plan_for(K, identity_ordering(3)))
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = np.concatenate(block_solve(F, split_blocks(b, sizes)))
    x_ref = np.linalg.solve(S, b)
    assert np.linalg.norm(x - x_ref) <= 1e-11 * np.linalg.norm(x_ref)


def test_four_cycle_creates_single_fill_block():
    rng = np.random.default_rng(6)
    sizes = [2, 3, 2, 4]

    def sym(n):
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return (G + G.T) / 2 + 3 * n * np.eye(n)

    tri = [(i, i, sym(sizes[i])) for i in range(4)]
    for (i, j) in [(1, 0), (2, 1), (3, 2), (3, 0)]:
        tri.append((i, j, rng.standard_normal((sizes[i], sizes[j])) + 0j))
    K = blockmat.from_blocks(sizes, tri)
    g = blockmat.clique_graph(K)
    plan = plan_for(K, identity_ordering(4))
    fills = symbolic.fill_blocks(plan, g)
    assert fills == [(3, 1)]
    F = block_ldlt(K, plan)
    created = set(F.offdiag) - {(i, j) for (i, j) in K.blocks if i != j}
    assert created == {(3, 1)}


def test_identity_blocks_solve_is_identity():
    sizes = [3, 2]
    K = blockmat.from_blocks(sizes, [(0, 0, np.eye(3, dtype=complex)),
                                     (1, 1, np.eye(2, dtype=complex))])
    F = block_ldlt(K, plan_for(K))
    g = [np.arange(3) + 0j, np.array([5.0, 6.0]) + 1j]
    x = block_solve(F, g)
    assert np.array_equal(x[0], g[0])
    assert np.array_equal(x[1], g[1])


@pytest.mark.parametrize("seed", range(10))
def test_random_systems_residual(seed):
    K, S = rand_block_system(seed, max_blocks=8, max_size=8)
    F = block_ldlt(K, plan_for(K))
    rng = np.random.default_rng(900 + seed)
    n = S.shape[0]
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = np.concatenate(block_solve(F, split_blocks(b, K.sizes)))
    assert np.linalg.norm(S @ x - b) <= 1e-12 * np.linalg.norm(b)


@pytest.mark.parametrize("seed", range(6))
def test_reconstruction_of_permuted_matrix(seed):
    K, S = rand_block_system(seed + 20, max_blocks=6, max_size=6)
    plan = plan_for(K)
    F = block_ldlt(K, plan)
    L, D = scatter_factor(F)
    sp = scalar_permutation(K.sizes, plan.order.perm)
    Kperm = S[np.ix_(sp, sp)]
    err = np.linalg.norm(Kperm - L @ D @ L.T, "fro")
    assert err <= 1e-11 * np.linalg.norm(S, "fro")


def test_two_rhs_identical_to_two_single_rhs():
    K, _ = rand_block_system(77, max_blocks=5, max_size=6)
    F = block_ldlt(K, plan_for(K))
    rng = np.random.default_rng(78)
    B = [rng.standard_normal((int(s), 2)) + 1j * rng.standard_normal((int(s), 2))
         for s in K.sizes]
    X = block_solve(F, B)
    Xa = block_solve(F, [b[:, :1] for b in B])
    Xb = block_solve(F, [b[:, 1:] for b in B])
    for i in range(K.nblocks):
        assert np.array_equal(X[i][:, :1], Xa[i])
        assert np.array_equal(X[i][:, 1:], Xb[i])


def test_factor_entries_match_symbolic_exactly():
    for seed in range(8):
        K, _ = rand_block_system(seed + 40)
        plan = plan_for(K)
        F = block_ldlt(K, plan)
        assert F.stats.factor_entries == plan.total_factor_entries
        assert F.stats.peak_bytes >= 16 * F.stats.factor_entries


def test_determinism_bit_identical():
    K, _ = rand_block_system(55)
    plan = plan_for(K)
    F1 = block_ldlt(K, plan)
    F2 = block_ldlt(K, plan)
    for j in range(K.nblocks):
        assert np.array_equal(F1.diag[j].L, F2.diag[j].L)
        assert np.array_equal(F1.diag[j].d, F2.diag[j].d)
    for key in F1.offdiag:
        assert np.array_equal(F1.offdiag[key], F2.offdiag[key])


def test_singular_block_reports_column():
    sizes = [2, 2]
    K = blockmat.from_blocks(sizes, [(0, 0, np.zeros((2, 2), dtype=complex)),
                                     (1, 1, np.eye(2, dtype=complex))])
    with pytest.raises(SingularBlockError, match="block column 0"):
        block_ldlt(K, plan_for(K, identity_ordering(2)))


def test_growth_and_pivot_stats_propagate():
    K, _ = rand_block_system(60)
    F = block_ldlt(K, plan_for(K))
    assert F.stats.growth_factor >= 1.0
    assert F.stats.n_2x2_pivots == sum(f.n_2x2 for f in F.diag)


def test_empty_system():
    K = blockmat.BlockSparseSym([])
    plan = plan_for(K, identity_ordering(0))
    F = block_ldlt(K, plan)
    assert block_solve(F, []) == []
    assert F.stats.factor_entries == 0


def test_rhs_block_count_checked():
    K, _ = rand_block_system(61)
    F = block_ldlt(K, plan_for(K))
    with pytest.raises(ValueError):
        block_solve(F, [np.ones(2, dtype=complex)] * (K.nblocks + 1))


def test_indefinite_block_system():
    # mixed-sign spectrum across the scattered matrix
    rng = np.random.default_rng(62)
    n = 12
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    vals = np.concatenate([np.linspace(1, 4, 6), -np.linspace(1, 4, 6)])
    S = (Q * vals) @ Q.T
    S = (S + S.T) / 2
    sizes = [4, 4, 4]
    K = blockmat.from_blocks(sizes, [
        (0, 0, S[0:4, 0:4]), (1, 1, S[4:8, 4:8]), (2, 2, S[8:12, 8:12]),
        (1, 0, S[4:8, 0:4]), (2, 1, S[8:12, 4:8]), (2, 0, S[8:12, 0:4])])
    F = block_ldlt(K, plan_for(K))
    b = rng.standard_normal(n) + 0j
    x = np.concatenate(block_solve(F, split_blocks(b, sizes)))
    assert np.linalg.norm(K.scatter() @ x - b) <= 1e-11 * np.linalg.norm(b)
