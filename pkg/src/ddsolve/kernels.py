"""Dense inner kernels: complex-symmetric Bunch-Kaufman LDL^T and solves.

All functions operate on plain numpy arrays and are written so the same
source compiles under numba ``@njit`` and runs as vectorized numpy (see
:mod:`ddsolve.accel`).

Packed storage produced by :func:`bk_factor` (LAPACK-like, lower triangle):

* strict lower triangle of ``W`` holds the unit-L columns,
* the diagonal holds the 1x1 entries of D,
* ``W[k+1, k]`` holds the subdiagonal of a 2x2 D pivot; the L entry at that
  position is implicitly zero,
* ``tags[k]``: 1 = 1x1 pivot, 2 = first column of a 2x2 pivot, 0 = second
  column of a 2x2 pivot,
* ``perm[i]`` is the original index sitting at position ``i``, i.e. the
  packed data factorizes ``M[perm][:, perm]``.

Only the lower triangle is read or written; interchanges permute the already
computed L rows as well, so one final permutation describes the whole
factorization (no interleaved row swaps needed at solve time).  Trailing
updates run column by column over the lower triangle, which keeps the flop
count at the symmetric minimum and vectorizes on both backends.
"""

from __future__ import annotations

import numpy as np

from .accel import maybe_jit

# Pivot threshold constant from the 1977 Bunch-Kaufman analysis; bounds the
# per-column element growth by 1 + 1/alpha < 2.57.
BK_ALPHA = (1.0 + np.sqrt(17.0)) / 8.0


def _bk_factor(W, tol_abs):
    n = W.shape[0]
    perm = np.arange(n)
    tags = np.zeros(n, dtype=np.int8)
    n2x2 = 0
    growth = 1.0
    info = -1
    if n == 0:
        return perm, tags, n2x2, growth, info
    tl = np.tril(W)
    trail_max = np.sqrt((tl.real * tl.real + tl.imag * tl.imag).max())
    k = 0
    while k < n:
        kstep = 1
        absakk = abs(W[k, k])
        colmax = 0.0
        imax = k
        if k + 1 < n:
            col = np.abs(W[k + 1:, k])
            t = int(np.argmax(col))
            imax = k + 1 + t
            colmax = col[t]
        if max(absakk, colmax) <= tol_abs:
            # Neither a 1x1 nor a 2x2 candidate clears the threshold: the
            # remaining column is numerically zero.
            info = k
            break
        if absakk >= BK_ALPHA * colmax:
            kp = k
        else:
            rowmax = np.abs(W[imax, k:imax]).max()
            if imax + 1 < n:
                v = np.abs(W[imax + 1:, imax]).max()
                if v > rowmax:
                    rowmax = v
            if absakk * rowmax >= BK_ALPHA * colmax * colmax:
                kp = k
            elif abs(W[imax, imax]) >= BK_ALPHA * rowmax:
                kp = imax
            else:
                kp = imax
                kstep = 2
        kk = k + kstep - 1
        if kp != kk:
            # Lower-triangle interchange of kk and kp, including the already
            # computed L rows left of column k, so one final P describes the
            # factorization.
            tmp = W[kp + 1:, kk].copy()
            W[kp + 1:, kk] = W[kp + 1:, kp]
            W[kp + 1:, kp] = tmp
            tmp = W[kk + 1:kp, kk].copy()
            W[kk + 1:kp, kk] = W[kp, kk + 1:kp]
            W[kp, kk + 1:kp] = tmp
            t1 = W[kk, kk]
            W[kk, kk] = W[kp, kp]
            W[kp, kp] = t1
            if kstep == 2:
                t1 = W[kk, k]
                W[kk, k] = W[kp, k]
                W[kp, k] = t1
            tmp = W[kk, :k].copy()
            W[kk, :k] = W[kp, :k]
            W[kp, :k] = tmp
            p = perm[kk]
            perm[kk] = perm[kp]
            perm[kp] = p
        step_sq = 0.0
        if kstep == 1:
            tags[k] = 1
            piv = W[k, k]
            for j in range(k + 1, n):
                lj = W[j, k] / piv
                W[j:, j] -= W[j:, k] * lj
                col = W[j:, j]
                v = (col.real * col.real + col.imag * col.imag).max()
                if v > step_sq:
                    step_sq = v
            W[k + 1:, k] /= piv
        else:
            tags[k] = 2
            tags[k + 1] = 0
            n2x2 += 1
            # |W[k+1, k]| equals the column maximum here, so the 2x2 pivot is
            # safely invertible: |det| >= (1 - alpha^2) colmax^2.
            d21 = W[k + 1, k]
            d11 = W[k + 1, k + 1] / d21
            d22 = W[k, k] / d21
            t2 = 1.0 / (d11 * d22 - 1.0)
            d21s = t2 / d21
            for j in range(k + 2, n):
                wk = d21s * (d11 * W[j, k] - W[j, k + 1])
                wkp = d21s * (d22 * W[j, k + 1] - W[j, k])
                W[j:, j] -= W[j:, k] * wk + W[j:, k + 1] * wkp
                col = W[j:, j]
                v = (col.real * col.real + col.imag * col.imag).max()
                if v > step_sq:
                    step_sq = v
                W[j, k] = wk
                W[j, k + 1] = wkp
        kn = k + kstep
        if kn < n:
            step_max = np.sqrt(step_sq)
            if trail_max > 0.0:
                r = step_max / trail_max
                if kstep == 2:
                    r = np.sqrt(r)
                if r > growth:
                    growth = r
            trail_max = step_max
        k = kn
    return perm, tags, n2x2, growth, info


def _solve_unit_lower(L, B):
    n = L.shape[0]
    for k in range(n - 1):
        B[k + 1:, :] -= L[k + 1:, k:k + 1] * B[k:k + 1, :]


def _solve_unit_lower_t(L, B):
    n = L.shape[0]
    for k in range(n - 2, -1, -1):
        B[k, :] -= (L[k + 1:, k:k + 1] * B[k + 1:, :]).sum(0)


def _apply_dinv_left(d, e, tags, B):
    n = d.shape[0]
    k = 0
    while k < n:
        if tags[k] == 1:
            B[k, :] /= d[k]
            k += 1
        else:
            # 2x2 pivot solved by elimination on the dominant off-diagonal
            # entry b (guaranteed largest in its column by the pivot tests).
            a = d[k]
            b = e[k]
            c = d[k + 1]
            akm1 = a / b
            ak = c / b
            denom = akm1 * ak - 1.0
            t1 = B[k, :] / b
            t2 = B[k + 1, :] / b
            B[k, :] = (ak * t1 - t2) / denom
            B[k + 1, :] = (akm1 * t2 - t1) / denom
            k += 2


def _apply_dinv_right(d, e, tags, B):
    n = d.shape[0]
    k = 0
    while k < n:
        if tags[k] == 1:
            B[:, k] /= d[k]
            k += 1
        else:
            a = d[k]
            b = e[k]
            c = d[k + 1]
            akm1 = a / b
            ak = c / b
            denom = akm1 * ak - 1.0
            t1 = B[:, k] / b
            t2 = B[:, k + 1] / b
            B[:, k] = (ak * t1 - t2) / denom
            B[:, k + 1] = (akm1 * t2 - t1) / denom
            k += 2


# Undecorated implementations, kept importable for the backend benchmark.
PY_FUNCS = {
    "bk_factor": _bk_factor,
    "solve_unit_lower": _solve_unit_lower,
    "solve_unit_lower_t": _solve_unit_lower_t,
    "apply_dinv_left": _apply_dinv_left,
    "apply_dinv_right": _apply_dinv_right,
}

bk_factor = maybe_jit(_bk_factor)
solve_unit_lower = maybe_jit(_solve_unit_lower)
solve_unit_lower_t = maybe_jit(_solve_unit_lower_t)
apply_dinv_left = maybe_jit(_apply_dinv_left)
apply_dinv_right = maybe_jit(_apply_dinv_right)
