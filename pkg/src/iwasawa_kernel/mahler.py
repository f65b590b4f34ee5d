"""Mahler expansions of continuous functions and of automorphisms.

Scalar side: the coefficients m_alpha(f) of a function on (Z/p^n)^d in the
binomial basis, by exact finite differencing, with a per-shell decay log
and partial-sum reconstruction.

Automorphism side: an automorphism given by generator images acts on a
quotient stage; the function beta -> phi(g^beta) g^{-beta} has algebra-
valued Mahler coefficients.  For Mahler automorphisms these factor as
ordered products of (psi(g_i))^{alpha_i} terms with psi(g) = phi(g)g^{-1};
both the factorization and the commutation criterion are checked
independently and must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .algebra import (
    AlgebraElement,
    FiltValue,
    QuotientGroup,
    lazard_value,
)
from .charts import GroupChart, Matrix, _identity, _mul
from .errors import BudgetError, PrecisionError, ValidationError
from .linalg import vp_int
from .padic import legendre_factorial_val


# ---------------------------------------------------------------------------
# scalar Mahler tables


@dataclass
class MahlerTable:
    """Coefficients m_alpha for |alpha| <= degree, with a decay log.

    decay_log[s] is the minimal valuation over the shell |alpha| = s
    (None when the shell vanishes identically).
    """

    dim: int
    degree: int
    entries: Dict[Tuple[int, ...], object]
    decay_log: List[Optional[int]]

    def coeff(self, alpha: Tuple[int, ...]):
        return self.entries.get(alpha, 0)

    def support_shell(self) -> int:
        """Largest shell carrying a nonzero coefficient (-1 if empty)."""
        last = -1
        for alpha in self.entries:
            last = max(last, sum(alpha))
        return last


def _shell_val(value, p: int, N: int) -> Optional[int]:
    if isinstance(value, AlgebraElement):
        if value.is_zero():
            return None
        return min(vp_int(c, p, N) for c in value.coeffs.values())
    value = int(value) % p**N
    if value == 0:
        return None
    return vp_int(value, p, N)


def mahler_coeffs(
    f: Callable,
    dim: int,
    degree: int,
    p: int,
    N: int,
    zero=0,
) -> MahlerTable:
    """Mahler coefficients of f on integer points of [0, degree]^dim.

    Computed by axis-wise forward differencing, which evaluates the
    alternating sum m_alpha = sum_{beta<=alpha} (-1)^{|alpha-beta|}
    binom(alpha,beta) f(beta) for every alpha at once.
    """
    if degree < 0:
        raise ValidationError("degree must be >= 0")
    grid: Dict[Tuple[int, ...], object] = {}

    def fill(prefix: Tuple[int, ...]):
        if len(prefix) == dim:
            grid[prefix] = f(prefix if dim > 1 else prefix[0])
            return
        for b in range(degree + 1):
            fill(prefix + (b,))

    fill(())
    # difference along each axis in turn
    for axis in range(dim):
        new_grid: Dict[Tuple[int, ...], object] = {}
        # iteratively: Delta^k along this axis stored at coordinate k
        # process each line independently
        lines: Dict[Tuple[int, ...], List[object]] = {}
        for point, val in grid.items():
            key = point[:axis] + point[axis + 1:]
            lines.setdefault(key, [None] * (degree + 1))[point[axis]] = val
        for key, line in lines.items():
            vals = list(line)
            out = [vals[0]]
            for _ in range(degree):
                vals = [b - a for a, b in zip(vals, vals[1:])]
                if not vals:
                    break
                out.append(vals[0])
            for k, v in enumerate(out):
                new_grid[key[:axis] + (k,) + key[axis:]] = v
        grid = new_grid

    entries = {}
    for alpha, v in grid.items():
        if sum(alpha) > degree:
            continue
        if isinstance(v, AlgebraElement):
            if not v.is_zero():
                entries[alpha] = v
        elif int(v) % p**N:
            entries[alpha] = int(v) % p**N
    decay = []
    for s in range(degree + 1):
        vals = [
            _shell_val(v, p, N) for a, v in entries.items() if sum(a) == s
        ]
        vals = [v for v in vals if v is not None]
        decay.append(min(vals) if vals else None)
    return MahlerTable(dim, degree, entries, decay)


def mahler_coeff_direct(f: Callable, alpha: Tuple[int, ...], zero=0):
    """One coefficient by the alternating-sum formula (cross-check route)."""
    dim = len(alpha)
    acc = zero

    def rec(i: int, beta: Tuple[int, ...], sign: int, binom: int):
        nonlocal acc
        if i == dim:
            val = f(beta if dim > 1 else beta[0])
            if isinstance(val, AlgebraElement):
                acc = acc + val.scale(sign * binom)
            else:
                acc = acc + sign * binom * val
            return
        for b in range(alpha[i] + 1):
            rec(
                i + 1,
                beta + (b,),
                sign * (-1) ** (alpha[i] - b),
                binom * math.comb(alpha[i], b),
            )

    rec(0, (), 1, 1)
    return acc


def tail_bound(T: MahlerTable) -> Optional[int]:
    """Observed lower valuation bound for shells beyond the cap.

    This is the decay-log value at the last populated shells; it is a
    witnessed bound, exact whenever the function is a finite binomial
    polynomial whose support lies within the cap.
    """
    vals = [v for v in T.decay_log[max(0, T.degree - 1):] if v is not None]
    return min(vals) if vals else None


def reconstruct(T: MahlerTable, gamma: Sequence[int], zero=0):
    """Partial Mahler sum f(gamma) ~= sum_alpha m_alpha binom(gamma, alpha)."""
    if isinstance(gamma, int):
        gamma = (gamma,)
    if len(gamma) != T.dim:
        raise ValidationError("evaluation point has wrong dimension")
    acc = zero
    for alpha, v in T.entries.items():
        c = 1
        for g, a in zip(gamma, alpha):
            c *= math.comb(g, a)
        if c == 0:
            continue
        if isinstance(v, AlgebraElement):
            acc = acc + v.scale(c)
        else:
            acc = acc + c * v
    return acc


# ---------------------------------------------------------------------------
# divided powers


def divided_power(alpha: Sequence[int], x: AlgebraElement) -> AlgebraElement:
    """The operator scaling the g^beta component by binom(beta, alpha).

    beta is lifted from Z/p^n to [0, p^n) and the binomial is an exact
    integer, so no precision is lost at the stage.
    """
    Q = x.quotient
    if len(alpha) != Q.dim:
        raise ValidationError("multi-index length mismatch")
    out: Dict[int, int] = {}
    for k, s in x.coeffs.items():
        beta = Q.coords(k)
        c = 1
        for b, a in zip(beta, alpha):
            c *= math.comb(b, a)
            if c == 0:
                break
        if c:
            out[k] = s * c
    return AlgebraElement(Q, out)


# ---------------------------------------------------------------------------
# automorphisms


@dataclass
class AutomorphismSpec:
    """An automorphism of the chart group, given by generator images."""

    chart: GroupChart
    images: Tuple[Matrix, ...]
    name: str = "aut"

    def __post_init__(self):
        if len(self.images) != self.chart.dim:
            raise ValidationError("need one image per generator")

    @staticmethod
    def from_words(chart: GroupChart, words: Sequence[Sequence[int]], name: str = "aut"):
        return AutomorphismSpec(
            chart, tuple(chart.word(w) for w in words), name=name
        )

    @staticmethod
    def identity(chart: GroupChart) -> "AutomorphismSpec":
        return AutomorphismSpec(chart, chart.generators, name="identity")

    @staticmethod
    def conjugation(chart: GroupChart, g: Matrix, name: str = "conj") -> "AutomorphismSpec":
        q = chart.modulus
        ginv = chart.inverse(g)
        return AutomorphismSpec(
            chart,
            tuple(_mul(_mul(g, h, q), ginv, q) for h in chart.generators),
            name=name,
        )

    # -- action ---------------------------------------------------------

    def _image_logs(self) -> Tuple[Matrix, ...]:
        logs = self.__dict__.get("_img_logs")
        if logs is None:
            logs = tuple(self.chart.log(img) for img in self.images)
            self.__dict__["_img_logs"] = logs
        return logs

    def apply_matrix(self, beta: Sequence[int]) -> Matrix:
        """phi(g^beta) as a matrix, via the generator images."""
        q = self.chart.modulus
        out = _identity(self.chart.mat_size)
        for x, b in zip(self._image_logs(), beta):
            if b % q:
                out = _mul(out, self.chart.exp(
                    tuple(tuple(v * (b % q) % q for v in row) for row in x)
                ), q)
        return out

    def apply_index(self, Q: QuotientGroup, idx: int) -> int:
        return Q.index_of_matrix(self.apply_matrix(Q.coords(idx)))

    def apply_element(self, x: AlgebraElement) -> AlgebraElement:
        Q = x.quotient
        out: Dict[int, int] = {}
        for k, s in x.coeffs.items():
            j = self.apply_index(Q, k)
            out[j] = out.get(j, 0) + s
        return AlgebraElement(Q, out)

    def compose(self, other: "AutomorphismSpec") -> "AutomorphismSpec":
        """self after other."""
        imgs = []
        for img in other.images:
            beta = self.chart.coordinates(img)
            imgs.append(self.apply_matrix(beta))
        return AutomorphismSpec(self.chart, tuple(imgs), name=f"{self.name}*{other.name}")

    def power(self, k: int) -> "AutomorphismSpec":
        out = AutomorphismSpec.identity(self.chart)
        base = self
        while k:
            if k & 1:
                out = base.compose(out)
            k >>= 1
            if k:
                base = base.compose(base)
        return out

    # -- verification and flags -----------------------------------------

    def psi_matrix(self, i: int) -> Matrix:
        """psi(g_i) = phi(g_i) g_i^{-1}."""
        q = self.chart.modulus
        return _mul(self.images[i], self.chart.inverse(self.chart.generators[i]), q)

    def verify_homomorphism(self, Q: QuotientGroup, samples: int = 20) -> bool:
        import random

        rng = random.Random(23)
        for _ in range(samples):
            a = rng.randrange(Q.size)
            b = rng.randrange(Q.size)
            lhs = self.apply_index(Q, Q.mult(a, b))
            rhs = Q.mult(self.apply_index(Q, a), self.apply_index(Q, b))
            if lhs != rhs:
                return False
        return True

    def is_trivial_mod_centre(self, Q: QuotientGroup) -> bool:
        for i in range(self.chart.dim):
            psi = Q.index_of_matrix(self.psi_matrix(i))
            for j in range(self.chart.dim):
                g = Q.generator(j)
                if Q.mult(psi, g) != Q.mult(g, psi):
                    return False
        return True

    def is_omega_compatible(self) -> bool:
        """omega(phi(g_i) g_i^{-1}) - omega(g_i) > 1/(p-1) on generators."""
        for i in range(self.chart.dim):
            w = self.chart.omega(self.psi_matrix(i))
            if w is not None and w - self.chart.omega_weights[i] < 1:
                return False
        return True


# ---------------------------------------------------------------------------
# automorphism Mahler machinery


def aut_periodic_f(phi: AutomorphismSpec, Q: QuotientGroup) -> Callable:
    """Memoized beta -> phi(g^beta) g^{-beta}, p^n-periodic per coordinate."""
    r = Q.radix
    memo: Dict[Tuple[int, ...], int] = {}

    def f(beta):
        if isinstance(beta, int):
            beta = (beta,)
        key = tuple(b % r for b in beta)
        idx = memo.get(key)
        if idx is None:
            gidx = Q.index(key)
            idx = Q.mult(Q.index_of_matrix(phi.apply_matrix(key)), Q.inv(gidx))
            memo[key] = idx
        return AlgebraElement.group_element(Q, idx)

    return f


def aut_mahler_coeffs(
    phi: AutomorphismSpec, Q: QuotientGroup, degree: int
) -> MahlerTable:
    """Mahler table of beta -> phi(g^beta) g^{-beta}, with values in the
    stage algebra."""
    f = aut_periodic_f(phi, Q)
    return mahler_coeffs(f, Q.dim, degree, Q.p, Q.N, zero=AlgebraElement.zero(Q))


def mahler_product_coeff(
    phi: AutomorphismSpec, Q: QuotientGroup, alpha: Sequence[int]
) -> AlgebraElement:
    """The ordered product (psi(g_1)-1)^{alpha_1} ... (psi(g_d)-1)^{alpha_d}."""
    out = AlgebraElement.one(Q)
    one = AlgebraElement.one(Q)
    for i, a in enumerate(alpha):
        if a == 0:
            continue
        psi = AlgebraElement.group_element(Q, Q.index_of_matrix(phi.psi_matrix(i)))
        out = out * (psi - one) ** a
    return out


def is_mahler_aut(
    phi: AutomorphismSpec, Q: QuotientGroup, degree: int
) -> Tuple[bool, bool]:
    """(by_formula, by_commutation) for the factorization criterion.

    by_formula compares the Mahler table with the ordered-product formula
    up to the cap; by_commutation checks that psi(g_i) commutes with g_j
    for all j <= i.  The two are equivalent; callers treat disagreement as
    an internal invariant violation.
    """
    table = aut_mahler_coeffs(phi, Q, degree)
    by_formula = True
    checked = set(table.entries)
    # also check multi-indices that vanish in the table but not necessarily
    # in the product formula, up to the cap
    def all_alphas(i, rem, prefix):
        if i == Q.dim:
            yield prefix
            return
        for a in range(rem + 1):
            yield from all_alphas(i + 1, rem - a, prefix + (a,))

    for alpha in all_alphas(0, degree, ()):
        want = mahler_product_coeff(phi, Q, alpha)
        got = table.entries.get(alpha, AlgebraElement.zero(Q))
        if not isinstance(got, AlgebraElement):
            got = AlgebraElement(Q, {0: got})
        if got != want:
            by_formula = False
            break

    by_commutation = True
    for i in range(Q.dim):
        psi = Q.index_of_matrix(phi.psi_matrix(i))
        for j in range(i + 1):
            g = Q.generator(j)
            if Q.mult(psi, g) != Q.mult(g, psi):
                by_commutation = False
                break
        if not by_commutation:
            break
    return by_formula, by_commutation


def expand_aut(
    phi: AutomorphismSpec,
    x: AlgebraElement,
    degree: int,
    table: Optional[MahlerTable] = None,
) -> Tuple[AlgebraElement, FiltValue]:
    """Truncated expansion phi(x) ~= sum_{|alpha|<=D} m_alpha ∂^{(alpha)} x
    and the filtration weight of the residual."""
    Q = x.quotient
    if table is None:
        table = aut_mahler_coeffs(phi, Q, degree)
    approx = AlgebraElement.zero(Q)
    for alpha, m in table.entries.items():
        if sum(alpha) > degree:
            continue
        term = divided_power(alpha, x)
        if term.is_zero():
            continue
        if isinstance(m, AlgebraElement):
            approx = approx + m * term
        else:
            approx = approx + term.scale(int(m))
    residual = phi.apply_element(x) - approx
    return approx, lazard_value(residual)


# ---------------------------------------------------------------------------
# the z-map and growth data


def z_approximants(
    phi: AutomorphismSpec, g: Matrix, m_range: Sequence[int]
) -> List[Matrix]:
    """(phi^{p^m}(g) g^{-1})^{p^{-m}} for m in m_range."""
    chart = phi.chart
    q = chart.modulus
    out = []
    beta = chart.coordinates(g)
    for m in m_range:
        pm = chart.p**m
        phim = phi.power(pm)
        h = _mul(phim.apply_matrix(beta), chart.inverse(g), q)
        out.append(chart.root(h, m))
    return out


def z_stable(
    phi: AutomorphismSpec, g: Matrix, m_max: int, Q: QuotientGroup
) -> Tuple[Matrix, bool]:
    """Last approximant, plus whether consecutive approximants agreed in Q."""
    approx = z_approximants(phi, g, range(m_max + 1))
    idxs = [Q.index_of_matrix(a) for a in approx]
    stable = len(idxs) < 2 or idxs[-1] == idxs[-2]
    return approx[-1], stable


def find_m1(phi: AutomorphismSpec, Q: QuotientGroup, m_max: int = 6) -> Optional[int]:
    """Least m with w(z(g_i)^{p^m} - 1) > 1 for every basis index i."""
    zs = []
    for i in range(Q.dim):
        z, _ = z_stable(phi, phi.chart.generators[i], min(2, m_max), Q)
        zs.append(AlgebraElement.group_element(Q, Q.index_of_matrix(z)))
    one = AlgebraElement.one(Q)
    for m in range(m_max + 1):
        ok = True
        for z in zs:
            v = lazard_value(z ** (Q.p**m) - one)
            if v.exact and v.value <= 1:
                ok = False
                break
        if ok:
            return m
    return None


def q_growth(
    phi: AutomorphismSpec,
    i: int,
    m_range: Sequence[int],
    regime: str,
    Q: QuotientGroup,
) -> List[FiltValue]:
    """Weights of q_{i,m} = z(g_i)^{p^m} - 1 over the m-range.

    regime 'char0' keeps the stage's N > 1; 'charp' reduces coefficients
    to Z/p.  The caller fits the affine / p-power growth law.
    """
    from .algebra import build_quotient

    if regime not in ("char0", "charp"):
        raise ValidationError(f"unknown regime {regime!r}")
    if regime == "charp" and Q.N != 1:
        Q = build_quotient(Q.chart, Q.n, 1, verify=False)
    if regime == "char0" and Q.N == 1:
        raise ValidationError("char0 regime needs coefficient precision N > 1")
    z, stable = z_stable(phi, phi.chart.generators[i], max(2, *m_range) if m_range else 2, Q)
    if not stable:
        raise PrecisionError("z-map approximants did not stabilize")
    zel = AlgebraElement.group_element(Q, Q.index_of_matrix(z))
    one = AlgebraElement.one(Q)
    return [lazard_value(zel ** (Q.p**m) - one) for m in m_range]
