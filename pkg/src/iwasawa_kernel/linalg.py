"""Echelon linear algebra over the chain ring Z/p^N.

Submodules of (Z/p^N)^m are represented by Howell canonical forms:
valuation-pivoted echelon rows, pivots normalized to powers of p, entries
above a pivot reduced modulo the pivot, plus the closure rows that make
membership decidable by reduction.  The Howell form of a span is unique,
so equality of submodules is array equality.

Kernels and saturations go through a local Smith normal form with tracked
row transform and inverse column transform.
"""

from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

import numpy as np


def vp_int(a: int, p: int, N: int) -> int:
    """Valuation of a residue mod p^N, capped at N for zero."""
    a %= p**N
    if a == 0:
        return N
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def _unit_inv(a: int, p: int, N: int) -> Tuple[int, int]:
    """Split a nonzero residue as p^e * u and return (e, u^-1 mod p^N)."""
    q = p**N
    a %= q
    e = vp_int(a, p, N)
    u = a // p**e
    return e, pow(u, -1, q)


def as_matrix(rows: Iterable[Sequence[int]], width: int, q: int) -> np.ndarray:
    mat = np.array([list(r) for r in rows], dtype=np.int64).reshape(-1, width)
    return np.mod(mat, q)


def _col_vals(col: np.ndarray, p: int, N: int) -> np.ndarray:
    """Vectorized valuations of a residue column (N for zeros)."""
    v = np.full(col.shape, N, dtype=np.int64)
    cur = col.copy()
    alive = cur != 0
    v[alive] = 0
    while True:
        alive = alive & (cur % p == 0) & (cur != 0)
        if not alive.any():
            break
        cur = np.where(alive, cur // p, cur)
        v[alive] += 1
    return v


def howell(mat: np.ndarray, p: int, N: int) -> np.ndarray:
    """Howell canonical form of the row span of ``mat`` over Z/p^N."""
    q = p**N
    m = mat.shape[1]
    A = np.mod(np.asarray(mat, dtype=np.int64), q)
    A = A[np.any(A, axis=1)]
    result: List[Tuple[int, int, np.ndarray]] = []  # (pivot col, pivot val, row)

    for col in range(m):
        if A.shape[0] == 0:
            break
        colv = A[:, col] % q
        nz = np.nonzero(colv)[0]
        if nz.size == 0:
            continue
        vals = _col_vals(colv[nz], p, N)
        best = int(nz[int(np.argmin(vals))])
        e = int(vals[int(np.argmin(vals))])
        pivot = A[best].copy()
        A[best] = A[-1]
        A = A[:-1]
        _, uinv = _unit_inv(int(pivot[col]), p, N)
        pivot = (pivot * uinv) % q
        pe = p**e
        if A.shape[0]:
            factors = (A[:, col] % q) // pe
            if factors.any():
                A = (A - factors[:, None] * pivot[None, :]) % q
            # Dropping exhausted rows is O(rows * m); do it sparingly.
            if col % 8 == 7:
                A = A[np.any(A, axis=1)]
        result.append((col, e, pivot))
        if e > 0:
            extra = (pivot * (q // pe)) % q
            if extra.any():
                A = np.vstack([A, extra[None, :]]) if A.shape[0] else extra[None, :]

    if not result:
        return np.zeros((0, m), dtype=np.int64)
    rows = np.array([row for _, _, row in result], dtype=np.int64)
    # Reduce entries above each pivot modulo the pivot value.
    for j in range(1, len(result)):
        col, e, _ = result[j]
        pe = p**e
        factors = rows[:j, col] // pe
        if factors.any():
            rows[:j] = (rows[:j] - factors[:, None] * rows[j][None, :]) % q
    return rows


def pivots(rows: np.ndarray, p: int, N: int) -> List[Tuple[int, int]]:
    """(column, valuation) of each Howell row's pivot."""
    out = []
    for r in rows:
        nz = np.nonzero(r)[0]
        col = int(nz[0])
        out.append((col, vp_int(int(r[col]), p, N)))
    return out


def reduce_vector(rows: np.ndarray, vec: np.ndarray, p: int, N: int) -> np.ndarray:
    """Remainder of ``vec`` after reduction against Howell ``rows``."""
    q = p**N
    v = np.mod(np.asarray(vec, dtype=np.int64), q)
    for (col, e), row in zip(pivots(rows, p, N), rows):
        c = int(v[col])
        if c:
            v = (v - (c // p**e) * row) % q
    return v


def member(rows: np.ndarray, vec: np.ndarray, p: int, N: int) -> bool:
    return not reduce_vector(rows, vec, p, N).any()


def span_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and bool(np.array_equal(a, b))


def rank_log(rows: np.ndarray, p: int, N: int) -> int:
    """log_p of the cardinality of the spanned module."""
    return sum(N - e for _, e in pivots(rows, p, N))


def smith_diagonalize(
    mat: np.ndarray, p: int, N: int
) -> Tuple[List[int], np.ndarray, np.ndarray]:
    """Local Smith form D = R * mat * F over Z/p^N.

    Returns (diag, R, Finv) where diag lists the pivot valuations, R is the
    accumulated row transform and Finv the inverse of the column transform,
    both invertible mod p^N.
    """
    q = p**N
    A = np.mod(np.asarray(mat, dtype=np.int64), q).copy()
    k, m = A.shape
    R = np.eye(k, dtype=np.int64)
    Finv = np.eye(m, dtype=np.int64)
    diag: List[int] = []

    t = 0
    while t < min(k, m):
        sub = A[t:, t:]
        nz = np.nonzero(sub)
        if len(nz[0]) == 0:
            break
        best = None
        for i, j in zip(nz[0], nz[1]):
            v = vp_int(int(sub[i, j]), p, N)
            if best is None or v < best[0]:
                best = (v, int(i) + t, int(j) + t)
        e, bi, bj = best
        A[[t, bi]] = A[[bi, t]]
        R[[t, bi]] = R[[bi, t]]
        A[:, [t, bj]] = A[:, [bj, t]]
        Finv[[t, bj]] = Finv[[bj, t]]

        _, uinv = _unit_inv(int(A[t, t]), p, N)
        A[t] = (A[t] * uinv) % q
        R[t] = (R[t] * uinv) % q
        pe = p**e
        for i in range(t + 1, k):
            c = int(A[i, t])
            if c:
                f = c // pe
                A[i] = (A[i] - f * A[t]) % q
                R[i] = (R[i] - f * R[t]) % q
        for j in range(t + 1, m):
            c = int(A[t, j])
            if c:
                f = c // pe
                A[:, j] = (A[:, j] - f * A[:, t]) % q
                Finv[t] = (Finv[t] + f * Finv[j]) % q
        diag.append(e)
        t += 1
    return diag, R, Finv


def kernel(mat: np.ndarray, p: int, N: int) -> np.ndarray:
    """Howell basis of the left kernel {x : x @ mat == 0 mod p^N}."""
    q = p**N
    k = mat.shape[0]
    if k == 0:
        return np.zeros((0, 0), dtype=np.int64)
    diag, R, _ = smith_diagonalize(mat, p, N)
    gens = []
    for t, e in enumerate(diag):
        if e > 0:
            gens.append((R[t] * p ** (N - e)) % q)
    for t in range(len(diag), k):
        gens.append(R[t])
    if not gens:
        return np.zeros((0, k), dtype=np.int64)
    return howell(np.array(gens, dtype=np.int64), p, N)


def saturate(rows: np.ndarray, p: int, N: int) -> np.ndarray:
    """Isolator of the row span: adjoin x whenever p*x lies in the span.

    Trustworthy only when the pivot valuations are well below N; callers
    enforce their own precision margins.
    """
    m = rows.shape[1]
    if rows.shape[0] == 0:
        return np.zeros((0, m), dtype=np.int64)
    diag, _, Finv = smith_diagonalize(rows, p, N)
    gens = [Finv[t] for t, e in enumerate(diag) if e < N]
    if not gens:
        return np.zeros((0, m), dtype=np.int64)
    return howell(np.array(gens, dtype=np.int64), p, N)


def intersect(a: np.ndarray, b: np.ndarray, p: int, N: int) -> np.ndarray:
    """Howell basis of (row span of a) intersect (row span of b)."""
    m = a.shape[1]
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((0, m), dtype=np.int64)
    stacked = np.vstack([a, b])
    K = kernel(stacked, p, N)
    q = p**N
    gens = [(c[: a.shape[0]] @ a) % q for c in K]
    gens = [g for g in gens if g.any()]
    if not gens:
        return np.zeros((0, m), dtype=np.int64)
    return howell(np.array(gens, dtype=np.int64), p, N)
