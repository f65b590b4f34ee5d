"""Exact p-adic scalar arithmetic at fixed precision.

Scalars are residues mod p^N with a tracked valuation.  A residue of zero
means the value is indistinguishable from 0 at this precision; its
valuation is reported as ``None`` ("bottom", i.e. >= N).

The number-theoretic helpers (digit sums, Legendre's formula, valuations
of binomials of prime-power order) are exact big-integer computations with
no precision cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import PrecisionError, ValidationError


def vp(k: int, p: int) -> int:
    """Exact p-adic valuation of a nonzero integer."""
    if k == 0:
        raise ValidationError("valuation of zero is undefined")
    k = abs(k)
    v = 0
    while k % p == 0:
        k //= p
        v += 1
    return v


def digit_sum(k: int, p: int) -> int:
    """Sum of all base-p digits of k >= 0."""
    if k < 0:
        raise ValidationError("digit_sum needs k >= 0")
    s = 0
    while k:
        k, r = divmod(k, p)
        s += r
    return s


def legendre_factorial_val(k: int, p: int) -> int:
    """v_p(k!) via (k - s(k)) / (p - 1)."""
    if k < 0:
        raise ValidationError("legendre_factorial_val needs k >= 0")
    return (k - digit_sum(k, p)) // (p - 1)


def vp_binom_prime_power(m: int, k: int, p: int) -> int:
    """v_p of binom(p^m, k) for 1 <= k < p^m, by the digit closed form.

    Writing k = sum a_j p^j, the value is the largest i in [1, m] with
    a_{m-i} != 0, i.e. m minus the index of the lowest nonzero digit.
    """
    if not 1 <= k < p**m:
        raise ValidationError(f"k={k} out of range [1, p^m)")
    return m - vp(k, p)


@dataclass(frozen=True)
class PadicScalar:
    """Residue mod p^prec with tracked valuation."""

    p: int
    prec: int
    residue: int

    def __post_init__(self):
        if self.prec <= 0:
            raise ValidationError("precision must be positive")
        object.__setattr__(self, "residue", self.residue % self.p**self.prec)

    @property
    def val(self) -> Optional[int]:
        """Valuation in [0, prec), or None ("bottom") for the zero residue."""
        if self.residue == 0:
            return None
        return vp(self.residue, self.p)

    def is_zero(self) -> bool:
        return self.residue == 0

    def is_unit(self) -> bool:
        return self.residue % self.p != 0

    def _join(self, other: "PadicScalar") -> int:
        if not isinstance(other, PadicScalar):
            raise TypeError("expected PadicScalar")
        if other.p != self.p:
            raise ValidationError("mixed primes")
        return min(self.prec, other.prec)

    def __add__(self, other):
        if isinstance(other, int):
            other = PadicScalar(self.p, self.prec, other)
        n = self._join(other)
        return PadicScalar(self.p, n, self.residue + other.residue)

    def __sub__(self, other):
        if isinstance(other, int):
            other = PadicScalar(self.p, self.prec, other)
        n = self._join(other)
        return PadicScalar(self.p, n, self.residue - other.residue)

    def __neg__(self):
        return PadicScalar(self.p, self.prec, -self.residue)

    def __mul__(self, other):
        if isinstance(other, int):
            return PadicScalar(self.p, self.prec, self.residue * other)
        n = self._join(other)
        return PadicScalar(self.p, n, self.residue * other.residue)

    __rmul__ = __mul__

    def unit_inverse(self) -> "PadicScalar":
        if not self.is_unit():
            raise PrecisionError("cannot invert a non-unit")
        q = self.p**self.prec
        return PadicScalar(self.p, self.prec, pow(self.residue, -1, q))

    def reduce(self, prec: int) -> "PadicScalar":
        if prec > self.prec:
            raise PrecisionError("cannot raise precision")
        return PadicScalar(self.p, prec, self.residue)

    def __str__(self):
        return f"{self.residue} mod {self.p}^{self.prec}"


def binom_padic(beta: PadicScalar, alpha: int) -> PadicScalar:
    """Generalized binomial binom(beta, alpha), evaluated p-adically.

    The lift of beta to [0, p^prec) is fed to an exact integer binomial;
    continuity of the binomial polynomial makes the result well defined at
    precision prec - v_p(alpha!), which is the output precision.
    """
    if alpha < 0:
        raise ValidationError("alpha must be >= 0")
    if alpha == 0:
        return PadicScalar(beta.p, beta.prec, 1)
    loss = legendre_factorial_val(alpha, beta.p)
    if beta.prec <= loss:
        raise PrecisionError(
            f"dividing by {alpha}! loses {loss} digits; only {beta.prec} available"
        )
    value = math.comb(beta.residue, alpha)
    return PadicScalar(beta.p, beta.prec - loss, value)


def idempotent_power(beta: PadicScalar, n: int, f: int = 1) -> PadicScalar:
    """beta^(p^n (p^f - 1)) mod p^(n+1): the 0/1 idempotent dichotomy.

    Returns 1 when beta is a unit and 0 when v(beta) > 0.
    """
    if beta.prec < n + 1:
        raise PrecisionError("need precision >= n+1")
    p = beta.p
    q = p ** (n + 1)
    exponent = p**n * (p**f - 1)
    return PadicScalar(p, n + 1, pow(beta.residue % q, exponent, q))
