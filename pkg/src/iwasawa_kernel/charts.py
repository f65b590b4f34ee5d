"""Unipotent matrix charts for finitely generated uniform pro-p groups.

A chart fixes d nilpotent integer matrices x_1..x_d with entries in p·Z
(p odd) and realizes the group on generators g_i = exp(x_i).  All matrix
arithmetic is exact big-integer arithmetic modulo p^work_prec; exp and log
divide by factorials via exact p-power division plus a unit inverse, so no
floating point and no hidden rounding appear anywhere.

Coordinates of a group element in the ordered-product normal form
g = g_1^{b_1} ... g_d^{b_d} are recovered by successive elimination on the
logarithm, using a precomputed echelon solver for the chart lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from .errors import PrecisionError, ValidationError
from .linalg import vp_int

Matrix = Tuple[Tuple[int, ...], ...]


def _mat(rows: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in r) for r in rows)


def _identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def _zero(n: int) -> Matrix:
    return tuple((0,) * n for _ in range(n))


def _add(a: Matrix, b: Matrix, q: int) -> Matrix:
    return tuple(tuple((x + y) % q for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _scale(a: Matrix, c: int, q: int) -> Matrix:
    return tuple(tuple((c * x) % q for x in r) for r in a)


def _mul(a: Matrix, b: Matrix, q: int) -> Matrix:
    n = len(a)
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(ra, cb)) % q for cb in bt) for ra in a
    )


def _is_strictly_upper(a: Matrix) -> bool:
    return all(a[i][j] == 0 for i in range(len(a)) for j in range(i + 1))


@lru_cache(maxsize=4096)
def _unit_part_inverse(k: int, p: int, q: int) -> Tuple[int, int]:
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return p**v, pow(k, -1, q)


def _div_exact(a: Matrix, k: int, p: int, q: int) -> Matrix:
    """Divide a matrix by an integer k, exactly in Z_p: strip v_p(k), then
    multiply by the inverse of the remaining unit."""
    pv, uinv = _unit_part_inverse(k, p, q)
    out = []
    for r in a:
        row = []
        for x in r:
            x %= q
            if x % pv:
                raise PrecisionError("inexact division by a power of p")
            row.append((x // pv) * uinv % q)
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True)
class GroupChart:
    """d nilpotent basis matrices over Z_p, worked modulo p^work_prec."""

    p: int
    work_prec: int
    basis: Tuple[Matrix, ...]
    name: str = "custom"

    def __post_init__(self):
        if self.p == 2 or self.p < 2 or any(self.p % k == 0 for k in range(2, int(self.p**0.5) + 1)):
            raise ValidationError("p must be an odd prime")
        if not self.basis:
            raise ValidationError("chart needs at least one basis matrix")
        u = len(self.basis[0])
        for x in self.basis:
            if len(x) != u or any(len(r) != u for r in x):
                raise ValidationError("basis matrices must be square of equal size")
            if not _is_strictly_upper(x):
                raise ValidationError("basis matrices must be strictly upper triangular")
            if any(v % self.p for r in x for v in r):
                raise ValidationError("basis matrix entries must lie in p*Z")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def mat_size(self) -> int:
        return len(self.basis[0])

    @property
    def modulus(self) -> int:
        return self.p**self.work_prec

    # -- exp / log -----------------------------------------------------

    def exp(self, x: Matrix) -> Matrix:
        q = self.modulus
        n = len(x)
        out = _identity(n)
        term = _identity(n)
        for k in range(1, n):
            term = _mul(term, x, q * self.p**self.work_prec)
            out = _add(out, _div_exact(term, _factorial(k), self.p, q), q)
        return out

    def log(self, g: Matrix) -> Matrix:
        q = self.modulus
        n = len(g)
        m = _add(g, _scale(_identity(n), -1, q), q)
        if not _is_strictly_upper(m):
            raise ValidationError("log expects a unipotent upper-triangular matrix")
        out = _zero(n)
        term = _identity(n)
        for k in range(1, n):
            term = _mul(term, m, q)
            signed = term if k % 2 == 1 else _scale(term, -1, q)
            out = _add(out, _div_exact(signed, k, self.p, q), q)
        return out

    def omega(self, g: Matrix) -> Optional[int]:
        """Filtration weight: min valuation over the entries of log g.

        Returns None when log g vanishes at working precision.
        """
        x = self.log(g)
        vals = [
            vp_int(v, self.p, self.work_prec) for r in x for v in r if v % self.modulus
        ]
        return min(vals) if vals else None

    # -- generators and words ------------------------------------------

    @property
    def generators(self) -> Tuple[Matrix, ...]:
        return tuple(self.exp(x) for x in self.basis)

    @property
    def omega_weights(self) -> Tuple[int, ...]:
        out = []
        for x in self.basis:
            vals = [vp_int(v, self.p, self.work_prec) for r in x for v in r if v]
            out.append(min(vals))
        return tuple(out)

    def generator_power(self, i: int, k: int) -> Matrix:
        """g_i^k for any integer k, via exp(k * x_i)."""
        q = self.modulus
        k %= q
        cache = self.__dict__.setdefault("_power_cache", {})
        out = cache.get((i, k))
        if out is None:
            out = self.exp(_scale(self.basis[i], k, q))
            if len(cache) < 200_000:
                cache[(i, k)] = out
        return out

    def word(self, beta: Sequence[int]) -> Matrix:
        if len(beta) != self.dim:
            raise ValidationError("exponent vector length mismatch")
        g = _identity(self.mat_size)
        for i, b in enumerate(beta):
            if b % self.modulus:
                g = _mul(g, self.generator_power(i, b), self.modulus)
        return g

    def inverse(self, g: Matrix) -> Matrix:
        q = self.modulus
        n = len(g)
        m = _add(g, _scale(_identity(n), -1, q), q)
        out = _identity(n)
        term = _identity(n)
        for _ in range(1, n):
            term = _scale(_mul(term, m, q), -1, q)
            out = _add(out, term, q)
        return out

    def root(self, g: Matrix, m: int) -> Matrix:
        """The p^m-th root of g, when log g is divisible by p^m."""
        x = self.log(g)
        pm = self.p**m
        if any(v % self.modulus and v % pm for r in x for v in r):
            raise PrecisionError(f"log g not divisible by p^{m}: no root at precision")
        y = tuple(tuple((v % self.modulus) // pm for v in r) for r in x)
        # the quotient must itself lie in the chart lattice (the top m
        # digits of y are junk after the division, hence the tolerance)
        self.solve_lattice(y, tol=m + 3)
        return self.exp(y)

    # -- coordinate recovery -------------------------------------------

    def _flatten(self, x: Matrix) -> List[int]:
        return [v for r in x for v in r]

    @property
    def _solver(self):
        return _chart_solver(self)

    def solve_lattice(self, target: Matrix, tol: int = 0) -> List[int]:
        """Solve sum lambda_i x_i = target in the chart lattice mod p^work.

        The remainder must vanish modulo p^(work_prec - tol).
        """
        echelon, transform, _ = self._solver
        p, q = self.p, self.modulus
        t = [v % q for v in self._flatten(target)]
        lam = [0] * self.dim
        for (col, e), row, tr in echelon:
            c = t[col]
            if c == 0:
                continue
            if vp_int(c, p, self.work_prec) < e:
                raise PrecisionError("target outside chart lattice")
            f = c // p**e
            for j in range(len(t)):
                t[j] = (t[j] - f * row[j]) % q
            for j in range(self.dim):
                lam[j] = (lam[j] + f * tr[j]) % q
        cutoff = p ** max(self.work_prec - tol, 1)
        if any(v % cutoff for v in t):
            raise PrecisionError("target outside chart lattice")
        return lam

    def coordinates(self, g: Matrix, prec: Optional[int] = None) -> Tuple[int, ...]:
        """Exponents (b_1..b_d) with g = g_1^{b_1} ... g_d^{b_d} mod p^prec."""
        p = self.p
        echelon, _, max_e = self._solver
        noise = 3  # headroom for the factorial divisions inside exp/log
        if prec is None:
            prec = self.work_prec - max_e - noise - 2
        if prec < 1:
            raise PrecisionError("working precision too small for coordinates")
        stop_val = prec + max_e + 1
        if stop_val + noise > self.work_prec:
            raise PrecisionError("working precision too small for coordinates")
        beta = [0] * self.dim
        last_wt = -1
        for _ in range(stop_val + self.mat_size + 2):
            r = _mul(self.inverse(self.word(beta)), g, self.modulus)
            x = self.log(r)
            vals = [
                vp_int(v, p, self.work_prec)
                for row in x
                for v in row
                if v % self.modulus
            ]
            wt = min(vals) if vals else self.work_prec
            if wt >= stop_val:
                break
            if wt <= last_wt:
                raise PrecisionError("coordinate iteration failed to converge")
            last_wt = wt
            lam = self.solve_lattice(x, tol=noise)
            for i in range(self.dim):
                beta[i] += lam[i]
        else:
            raise PrecisionError("coordinate iteration failed to converge")
        out = tuple(b % p**prec for b in beta)
        check = self.word(out)
        target_mod = p**prec
        if any((a - b) % target_mod for ra, rb in zip(check, g) for a, b in zip(ra, rb)):
            raise PrecisionError("coordinate verification failed at precision")
        return out

    def structure_presentation(self, prec: int):
        """Lie structure constants of the chart lattice, when it is closed
        under the bracket; raises otherwise."""
        from .nilpotent import LiePresentation

        q = self.modulus
        triples = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                comm = _add(
                    _mul(self.basis[i], self.basis[j], q),
                    _scale(_mul(self.basis[j], self.basis[i], q), -1, q),
                    q,
                )
                lam = self.solve_lattice(comm)
                half = self.modulus // 2
                for k, c in enumerate(lam):
                    if c:
                        signed = c - self.modulus if c > half else c
                        triples.append((i + 1, j + 1, k + 1, signed))
        return LiePresentation.from_triples(self.p, self.dim, prec, triples)


@lru_cache(maxsize=None)
def _factorial(k: int) -> int:
    import math

    return math.factorial(k)


@lru_cache(maxsize=64)
def _chart_solver(chart: GroupChart):
    """Echelon rows of the flattened basis with a transform back to
    basis coefficients: row = sum_j tr[j] * basis[j] (flattened)."""
    p, q, work = chart.p, chart.modulus, chart.work_prec
    rows = [[v % q for v in chart._flatten(x)] for x in chart.basis]
    trans = [[1 if j == i else 0 for j in range(chart.dim)] for i in range(chart.dim)]
    ncols = chart.mat_size**2
    echelon = []
    live = list(range(chart.dim))
    for col in range(ncols):
        cand = [i for i in live if rows[i][col] % q]
        if not cand:
            continue
        best = min(cand, key=lambda i: vp_int(rows[i][col], p, work))
        live.remove(best)
        e = vp_int(rows[best][col], p, work)
        u = rows[best][col] // p**e
        uinv = pow(u, -1, q)
        rows[best] = [(x * uinv) % q for x in rows[best]]
        trans[best] = [(x * uinv) % q for x in trans[best]]
        for i in live:
            c = rows[i][col]
            if c:
                if vp_int(c, p, work) < e:
                    raise ValidationError("chart basis is not echelon-compatible")
                f = c // p**e
                rows[i] = [(a - f * b) % q for a, b in zip(rows[i], rows[best])]
                trans[i] = [(a - f * b) % q for a, b in zip(trans[i], trans[best])]
        echelon.append(((col, e), tuple(rows[best]), tuple(trans[best])))
    if live and any(any(rows[i]) for i in live):
        raise ValidationError("chart basis matrices are linearly dependent")
    max_e = max(e for (_, e), _, _ in echelon)
    return echelon, trans, max_e


# ---------------------------------------------------------------------------
# builtin charts


def _unit_entry(size: int, i: int, j: int, val: int) -> Matrix:
    return tuple(
        tuple(val if (a, b) == (i, j) else 0 for b in range(size)) for a in range(size)
    )


def cyclic_chart(p: int, work_prec: int = 12) -> GroupChart:
    """Z_p itself: one generator, x_1 = p E_{12}."""
    return GroupChart(p, work_prec, (_unit_entry(2, 0, 1, p),), name="cyclic")


def abelian_chart(p: int, dim: int, work_prec: int = 12) -> GroupChart:
    """Z_p^d as commuting 2x2 blocks on the diagonal."""
    size = 2 * dim
    basis = tuple(_unit_entry(size, 2 * i, 2 * i + 1, p) for i in range(dim))
    return GroupChart(p, work_prec, basis, name="abelian")


def heisenberg_chart(p: int, work_prec: int = 14) -> GroupChart:
    """Heisenberg group: x1 = p E12, x2 = p E23, x3 = p^2 E13.

    The commutator (g1, g2) has coordinates (0, 0, 1) and the filtration
    weights are (1, 1, 2).
    """
    basis = (
        _unit_entry(3, 0, 1, p),
        _unit_entry(3, 1, 2, p),
        _unit_entry(3, 0, 2, p * p),
    )
    return GroupChart(p, work_prec, basis, name="heisenberg")


def unipotent_chart(p: int, size: int, work_prec: int = 14) -> GroupChart:
    """Full upper unitriangular group scaled into the uniform range:
    basis p E_{ij} for i < j in lexicographic (i, j) order."""
    basis = tuple(
        _unit_entry(size, i, j, p) for i in range(size) for j in range(i + 1, size)
    )
    return GroupChart(p, work_prec, basis, name=f"unipotent{size}")


def builtin_chart(name: str, p: int, work_prec: Optional[int] = None) -> GroupChart:
    kw = {} if work_prec is None else {"work_prec": work_prec}
    if name == "cyclic":
        return cyclic_chart(p, **kw)
    if name == "heisenberg":
        return heisenberg_chart(p, **kw)
    if name.startswith("abelian"):
        return abelian_chart(p, int(name[len("abelian"):] or 1), **kw)
    if name.startswith("unipotent"):
        return unipotent_chart(p, int(name[len("unipotent"):] or 4), **kw)
    raise ValidationError(f"unknown builtin chart {name!r}")


def chart_from_matrices(
    p: int, matrices: Sequence[Sequence[Sequence[int]]], work_prec: int = 14
) -> GroupChart:
    return GroupChart(p, work_prec, tuple(_mat(m) for m in matrices))
