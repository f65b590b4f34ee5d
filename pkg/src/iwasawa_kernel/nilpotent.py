"""Nilpotent Z_p-Lie algebras given by structure constants.

Structure constants arrive as exact integers (or rationals, for rescaled
sublattices), so the upper central series and centralizers are computed by
exact rational kernels and returned as primitive integer bases.  These are
automatically saturated, which sidesteps the junk vectors that plain
mod-p^N kernels accumulate near the precision floor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import ValidationError

Vector = Tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# exact rational linear algebra (tiny dimensions)


def _rref(rows: List[List[Fraction]]) -> Tuple[List[List[Fraction]], List[int]]:
    mat = [list(r) for r in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivcols: List[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = Fraction(1, 1) / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivcols.append(c)
        r += 1
        if r == len(mat):
            break
    return [row for row in mat[:r]], pivcols


def _nullspace(rows: List[List[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of {x : x_1..x_ncols with M x = 0} for M given by ``rows``."""
    red, pivcols = _rref(rows)
    free = [c for c in range(ncols) if c not in pivcols]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in zip(red, pivcols):
            v[c] = -r[f]
        basis.append(v)
    return basis


def _primitive(vec: Sequence[Fraction]) -> Tuple[int, ...]:
    den = lcm(*[x.denominator for x in vec]) if vec else 1
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g:
        ints = [x // g for x in ints]
    lead = next((x for x in ints if x != 0), 1)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def _canonical_rows(vectors: Iterable[Sequence[Fraction]]) -> Tuple[Tuple[int, ...], ...]:
    rows = [[Fraction(x) for x in v] for v in vectors]
    rows = [r for r in rows if any(r)]
    if not rows:
        return ()
    red, _ = _rref(rows)
    return tuple(_primitive(r) for r in red)


# ---------------------------------------------------------------------------
# presentations and submodules


@dataclass(frozen=True)
class Submodule:
    """Saturated submodule of the coefficient lattice, by primitive rows."""

    ambient: int
    rows: Tuple[Tuple[int, ...], ...]
    saturated: bool = True

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains_vector(self, vec: Sequence) -> bool:
        stacked = [[Fraction(x) for x in r] for r in self.rows]
        before, _ = _rref(stacked)
        stacked.append([Fraction(x) for x in vec])
        after, _ = _rref(stacked)
        return len(after) == len(before)

    def contains(self, other: "Submodule") -> bool:
        return all(self.contains_vector(r) for r in other.rows)

    def __eq__(self, other):
        return isinstance(other, Submodule) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def describe(self, names: Optional[Sequence[str]] = None) -> str:
        """Pretty form, e.g. ``span{x2, x3, x5}`` when rows are unit vectors."""
        if names is None:
            names = [f"x{i + 1}" for i in range(self.ambient)]
        if not self.rows:
            return "0"
        labels = []
        for r in self.rows:
            support = [i for i, x in enumerate(r) if x != 0]
            if len(support) == 1 and r[support[0]] == 1:
                labels.append(names[support[0]])
            else:
                labels.append("(" + " ".join(str(x) for x in r) + ")")
        return "span{" + ", ".join(labels) + "}"


def full_module(dim: int) -> Submodule:
    rows = tuple(tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim))
    return Submodule(dim, rows)


def zero_module(dim: int) -> Submodule:
    return Submodule(dim, ())


@dataclass(frozen=True)
class LiePresentation:
    """Lie lattice on basis x_1..x_d with exact structure constants.

    bracket[i][j] is the coefficient vector of [x_i, x_j]; entries may be
    Fractions for rescaled sublattices, plain ints otherwise.
    """

    p: int
    dim: int
    prec: int
    bracket: Tuple[Tuple[Vector, ...], ...]

    @staticmethod
    def from_triples(
        p: int, dim: int, prec: int, triples: Iterable[Tuple[int, int, int, int]]
    ) -> "LiePresentation":
        """Build from 1-based triples (i, j, k, c) meaning [x_i,x_j] ∋ c·x_k.

        The antisymmetric completion is automatic; unlisted pairs are zero.
        """
        table = [[[Fraction(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for i, j, k, c in triples:
            if not (1 <= i <= dim and 1 <= j <= dim and 1 <= k <= dim):
                raise ValidationError(f"bracket index out of range: {(i, j, k)}")
            if i == j and c != 0:
                raise ValidationError(f"nonzero bracket [x{i},x{i}]")
            table[i - 1][j - 1][k - 1] += Fraction(c)
            table[j - 1][i - 1][k - 1] -= Fraction(c)
        rows = tuple(tuple(tuple(v) for v in row) for row in table)
        return LiePresentation(p, dim, prec, rows)

    def bracket_vec(self, u: Sequence, v: Sequence) -> List[Fraction]:
        out = [Fraction(0)] * self.dim
        for i, ui in enumerate(u):
            if ui == 0:
                continue
            for j, vj in enumerate(v):
                if vj == 0:
                    continue
                coeffs = self.bracket[i][j]
                if any(coeffs):
                    f = Fraction(ui) * Fraction(vj)
                    for k in range(self.dim):
                        out[k] += f * coeffs[k]
        return out

    def basis_vector(self, i: int) -> List[Fraction]:
        return [Fraction(1) if j == i else Fraction(0) for j in range(self.dim)]

    def rescaled(self, exponents: Sequence[int]) -> "LiePresentation":
        """Presentation of the sublattice with basis u_i = p^{e_i} x_i."""
        if len(exponents) != self.dim:
            raise ValidationError("exponent vector length mismatch")
        pw = [self.p ** e for e in exponents]
        table = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                row.append(
                    tuple(
                        Fraction(self.bracket[i][j][k]) * pw[i] * pw[j] / pw[k]
                        for k in range(self.dim)
                    )
                )
            table.append(tuple(row))
        return LiePresentation(self.p, self.dim, self.prec, tuple(table))


@dataclass
class ValidationReport:
    ok: bool
    violations: List[str] = field(default_factory=list)

    def __str__(self):
        if self.ok:
            return "valid"
        return "invalid:\n" + "\n".join("  - " + v for v in self.violations)


def validate(L: LiePresentation) -> ValidationReport:
    """Check antisymmetry, Jacobi (mod p^prec), nilpotency and powerfulness."""
    bad: List[str] = []
    q = L.p**L.prec
    for i in range(L.dim):
        for j in range(L.dim):
            for k in range(L.dim):
                if L.bracket[i][j][k] != -L.bracket[j][i][k]:
                    bad.append(f"antisymmetry fails at [x{i+1},x{j+1}] vs [x{j+1},x{i+1}]")
                if i == j and L.bracket[i][j][k] != 0:
                    bad.append(f"[x{i+1},x{i+1}] nonzero")
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            for k in range(j + 1, L.dim):
                ei, ej, ek = (L.basis_vector(t) for t in (i, j, k))
                acc = [
                    a + b + c
                    for a, b, c in zip(
                        L.bracket_vec(L.bracket_vec(ei, ej), ek),
                        L.bracket_vec(L.bracket_vec(ej, ek), ei),
                        L.bracket_vec(L.bracket_vec(ek, ei), ej),
                    )
                ]
                for t, val in enumerate(acc):
                    if val.denominator != 1 or int(val) % q != 0:
                        bad.append(
                            f"Jacobi fails on (x{i+1},x{j+1},x{k+1}) in x{t+1}-coordinate"
                        )
                        break
    for i in range(L.dim):
        for j in range(L.dim):
            for k in range(L.dim):
                c = L.bracket[i][j][k]
                if c != 0 and (Fraction(c) / L.p).denominator != 1:
                    bad.append(f"bracket [x{i+1},x{j+1}] not in p·lattice (x{k+1}-part {c})")
    if not any(v.startswith("antisymmetry") or v.startswith("Jacobi") for v in bad):
        if not _is_nilpotent(L):
            bad.append("lower central series does not reach 0 (not nilpotent)")
    return ValidationReport(not bad, bad)


def _lcs_step(L: LiePresentation, current: Submodule) -> Submodule:
    gens = []
    for r in current.rows:
        for j in range(L.dim):
            gens.append(L.bracket_vec(r, L.basis_vector(j)))
    return Submodule(L.dim, _canonical_rows(gens))


def _is_nilpotent(L: LiePresentation) -> bool:
    term = full_module(L.dim)
    for _ in range(L.dim + 1):
        nxt = _lcs_step(L, term)
        if nxt.dim == 0:
            return True
        if nxt.rows == term.rows:
            return False
        term = nxt
    return False


def upper_central_series(L: LiePresentation) -> List[Submodule]:
    """Ascending chain 0 = Z_0 < Z_1 < ... terminating at L (saturated)."""
    chain = [zero_module(L.dim)]
    while True:
        prev = chain[-1]
        # x in Z_k  iff  [x, e_j] lies in span(Z_{k-1}) for every j.
        prev_rows = [[Fraction(x) for x in r] for r in prev.rows]
        red, pivcols = _rref(prev_rows) if prev_rows else ([], [])
        conditions: List[List[Fraction]] = []
        for i in range(L.dim):
            row: List[Fraction] = []
            for j in range(L.dim):
                vec = L.bracket_vec(L.basis_vector(i), L.basis_vector(j))
                for r, c in zip(red, pivcols):
                    f = vec[c]
                    if f != 0:
                        vec = [a - f * b for a, b in zip(vec, r)]
                row.extend(vec)
            conditions.append(row)
        # kernel of x -> x · conditions  (x runs over rows)
        transposed = [[conditions[i][c] for i in range(L.dim)] for c in range(len(conditions[0]))]
        basis = _nullspace(transposed, L.dim)
        nxt = Submodule(L.dim, _canonical_rows(basis))
        if nxt.rows == prev.rows:
            if nxt.dim < L.dim:
                raise ValidationError("upper central series stalls: not nilpotent")
            break
        chain.append(nxt)
        if nxt.dim == L.dim:
            break
    return chain


def nilpotency_class(L: LiePresentation) -> int:
    return len(upper_central_series(L)) - 1


def centralizer(L: LiePresentation, S: Submodule) -> Submodule:
    """Saturated kernel of x -> [x, S]."""
    if S.ambient != L.dim:
        raise ValidationError("ambient dimension mismatch")
    conditions: List[List[Fraction]] = []
    for i in range(L.dim):
        row: List[Fraction] = []
        for s in S.rows:
            row.extend(L.bracket_vec(L.basis_vector(i), s))
        conditions.append(row)
    if not S.rows:
        return full_module(L.dim)
    transposed = [[conditions[i][c] for i in range(L.dim)] for c in range(len(conditions[0]))]
    basis = _nullspace(transposed, L.dim)
    return Submodule(L.dim, _canonical_rows(basis))


def second_centre_centralizer(L: LiePresentation) -> Submodule:
    chain = upper_central_series(L)
    z2 = chain[min(2, len(chain) - 1)]
    return centralizer(L, z2)


def centraliser_compat(L: LiePresentation, exponents: Sequence[int]) -> bool:
    """Does C_U(Z_2(U)) equal C(Z_2(L)) ∩ U for U with basis p^{e_i} x_i?

    Both sides are compared as saturated-in-U submodules, i.e. as rational
    subspaces in the ambient coordinates.
    """
    U = L.rescaled(exponents)
    inner = second_centre_centralizer(U)
    # transform u-coordinates back to ambient x-coordinates
    pw = [Fraction(L.p) ** e for e in exponents]
    inner_ambient = _canonical_rows(
        [[Fraction(r[i]) * pw[i] for i in range(L.dim)] for r in inner.rows]
    )
    outer = second_centre_centralizer(L)
    return inner_ambient == outer.rows
