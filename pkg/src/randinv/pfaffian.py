"""Pfaffians and quaternion determinants of self-dual kernel assemblies.

A correlation kernel enters as a k x k array of 2 x 2 blocks f(x_i, x_j).
Self-duality means f11(x,y) = f22(y,x) with f12, f21 antisymmetric; the
quaternion determinant of such an assembly A is Pf(A Z^{-1}) with
Z = 1_k (x) [[0,-1],[1,0]].
"""

from itertools import permutations

import numpy as np

_DUALITY_SOFT = 1e-8
_DUALITY_HARD = 1e-5


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Parlett-Reid elimination with partial pivoting; the trailing update
    is a congruence, so only the tridiagonal pivots contribute.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    n = a.shape[0]
    if n % 2:
        raise ValueError("Pfaffian requires even dimension")
    if n == 0:
        return 1.0
    scale = float(np.max(np.abs(a)))
    if float(np.max(np.abs(a + a.T))) > 1e-12 * max(1.0, scale):
        raise ValueError("matrix is not antisymmetric")
    a = 0.5 * (a - a.T)
    pf = 1.0
    for k in range(0, n - 1, 2):
        piv = k + 1 + int(np.argmax(np.abs(a[k, k + 1 :])))
        if piv != k + 1:
            a[[k + 1, piv], :] = a[[piv, k + 1], :]
            a[:, [k + 1, piv]] = a[:, [piv, k + 1]]
            pf = -pf
        pivot = a[k, k + 1]
        if pivot == 0.0:
            return 0.0
        pf *= pivot
        if k + 2 < n:
            tau = a[k, k + 2 :] / pivot
            w = a[k + 1, k + 2 :]
            a[k + 2 :, k + 2 :] += np.outer(w, tau) - np.outer(tau, w)
    return pf


def z_inverse(k: int) -> np.ndarray:
    """Inverse of Z_{2k} = 1_k (x) [[0,-1],[1,0]]."""
    out = np.zeros((2 * k, 2 * k))
    for i in range(k):
        out[2 * i, 2 * i + 1] = 1.0
        out[2 * i + 1, 2 * i] = -1.0
    return out


def assemble_blocks(blocks: np.ndarray) -> np.ndarray:
    """(k, k, 2, 2) block array -> dense 2k x 2k matrix."""
    blocks = np.asarray(blocks, dtype=float)
    if blocks.ndim != 4 or blocks.shape[2:] != (2, 2):
        raise ValueError("blocks must have shape (k, k, 2, 2)")
    k = blocks.shape[0]
    if blocks.shape[1] != k:
        raise ValueError("blocks must have shape (k, k, 2, 2)")
    return blocks.transpose(0, 2, 1, 3).reshape(2 * k, 2 * k)


def _duality_defect(a: np.ndarray) -> float:
    k = a.shape[0] // 2
    zi = z_inverse(k)
    dual = zi @ a.T @ (-zi)  # Z^{-1} A^T Z with Z = -Z^{-1}
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - dual))) / scale


def qdet(blocks: np.ndarray) -> float:
    """Quaternion determinant Pf(A Z^{-1}) of a self-dual block assembly."""
    a = assemble_blocks(blocks)
    k = a.shape[0] // 2
    defect = _duality_defect(a)
    if defect > _DUALITY_HARD:
        raise ValueError(f"assembly violates self-duality (defect {defect:.2e})")
    if defect > _DUALITY_SOFT:
        zi = z_inverse(k)
        a = 0.5 * (a + zi @ a.T @ (-zi))
    return pfaffian(a @ z_inverse(k))


def qdet_cycle_expansion(blocks: np.ndarray) -> float:
    """Sum over disjoint-cycle decompositions; test oracle for qdet.

    Each permutation contributes (-1)^(k-l) times the product over its l
    cycles of half the trace of the chained 2x2 blocks.
    """
    blocks = np.asarray(blocks, dtype=float)
    k = blocks.shape[0]
    if k > 4:
        raise ValueError("cycle expansion guarded to k <= 4")
    total = 0.0
    for sigma in permutations(range(k)):
        seen = [False] * k
        prod = 1.0
        n_cycles = 0
        for start in range(k):
            if seen[start]:
                continue
            n_cycles += 1
            mat = np.eye(2)
            j = start
            while True:
                seen[j] = True
                nxt = sigma[j]
                mat = mat @ blocks[j, nxt]
                j = nxt
                if j == start:
                    break
            prod *= 0.5 * np.trace(mat)
        total += (-1.0) ** (k - n_cycles) * prod
    return total


def self_dual_from_parts(s: np.ndarray, i_upper: np.ndarray, d_upper: np.ndarray) -> np.ndarray:
    """Build (k,k,2,2) blocks from S (full) and antisymmetric I, D parts."""
    s = np.asarray(s, dtype=float)
    k = s.shape[0]
    i_mat = np.asarray(i_upper, dtype=float)
    d_mat = np.asarray(d_upper, dtype=float)
    i_mat = np.triu(i_mat, 1) - np.triu(i_mat, 1).T
    d_mat = np.triu(d_mat, 1) - np.triu(d_mat, 1).T
    blocks = np.empty((k, k, 2, 2))
    blocks[:, :, 0, 0] = s
    blocks[:, :, 0, 1] = i_mat
    blocks[:, :, 1, 0] = d_mat
    blocks[:, :, 1, 1] = s.T
    return blocks
