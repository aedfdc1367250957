"""Exact coefficient arithmetic.

Scalars are finite sums  sum_m c_m * (2*pi*i)^m  with Gaussian-rational
coefficients c_m and integer grades m.  The constant 2*pi*i stays formal:
identities that must hold exactly are checked without ever substituting a
float for it.  ``numeric()`` substitutes the numeric value at the very end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import GradeMismatch, NotInvertible

TWO_PI_I = complex(0.0, 2.0 * math.pi)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


@dataclass(frozen=True)
class GaussianRational:
    """Element of Q(i): a pair of exact rationals."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, re, im=0) -> "GaussianRational":
        if isinstance(re, GaussianRational):
            return re
        return cls(_frac(re), _frac(im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def inv(self) -> "GaussianRational":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise NotInvertible("division by zero in Q(i)")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        return self * other.inv()

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


QI_ZERO = GaussianRational()
QI_ONE = GaussianRational(Fraction(1))
QI_I = GaussianRational(Fraction(0), Fraction(1))


class GradedScalar:
    """Finite Laurent polynomial in the formal constant 2*pi*i over Q(i).

    Stored in canonical form: no zero coefficients.  Multiplication adds
    grades; single-grade elements are units.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for grade, coeff in terms.items():
                c = GaussianRational.of(coeff)
                if not c.is_zero():
                    clean[int(grade)] = c
        object.__setattr__(self, "terms", clean)

    # -- constructors ------------------------------------------------
    @classmethod
    def zero(cls) -> "GradedScalar":
        return cls()

    @classmethod
    def one(cls) -> "GradedScalar":
        return cls({0: QI_ONE})

    @classmethod
    def of(cls, value, grade: int = 0) -> "GradedScalar":
        """Scalar value*(2*pi*i)^grade from an int/Fraction/GaussianRational."""
        if isinstance(value, GradedScalar):
            if grade == 0:
                return value
            return value * cls({grade: QI_ONE})
        return cls({grade: GaussianRational.of(value)})

    @classmethod
    def two_pi_i(cls, power: int = 1) -> "GradedScalar":
        return cls({power: QI_ONE})

    # -- structure ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def grades(self):
        return sorted(self.terms)

    def is_single_grade(self) -> bool:
        return len(self.terms) <= 1

    def coefficient(self, grade: int) -> GaussianRational:
        return self.terms.get(grade, QI_ZERO)

    def grade_zero_part(self) -> GaussianRational:
        return self.coefficient(0)

    def require_grade_zero(self) -> GaussianRational:
        if self.is_zero():
            return QI_ZERO
        if self.grades() != [0]:
            raise GradeMismatch(f"expected a grade-0 scalar, got {self}")
        return self.terms[0]

    # -- arithmetic --------------------------------------------------
    def __add__(self, other):
        other = GradedScalar.of(other)
        terms = dict(self.terms)
        for g, c in other.terms.items():
            terms[g] = terms.get(g, QI_ZERO) + c
        return GradedScalar(terms)

    __radd__ = __add__

    def __neg__(self):
        return GradedScalar({g: -c for g, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-GradedScalar.of(other))

    def __rsub__(self, other):
        return GradedScalar.of(other) - self

    def __mul__(self, other):
        other = GradedScalar.of(other)
        terms = {}
        for g1, c1 in self.terms.items():
            for g2, c2 in other.terms.items():
                g = g1 + g2
                acc = terms.get(g, QI_ZERO) + c1 * c2
                terms[g] = acc
        return GradedScalar(terms)

    __rmul__ = __mul__

    def inv(self) -> "GradedScalar":
        """Inverse of a single-term scalar; multi-grade sums have none here."""
        if self.is_zero():
            raise NotInvertible("zero has no inverse")
        if len(self.terms) != 1:
            raise NotInvertible(f"{self} is not a single-grade unit")
        ((g, c),) = self.terms.items()
        return GradedScalar({-g: c.inv()})

    def divexact(self, other: "GradedScalar") -> "GradedScalar":
        """Exact Laurent division; raises if ``other`` does not divide self."""
        if other.is_zero():
            raise NotInvertible("division by zero")
        if len(other.terms) == 1:
            return self * other.inv()
        rem = dict(self.terms)
        quot = {}
        dg = max(other.terms)
        dc = other.terms[dg]
        while rem:
            g = max(rem)
            q = rem[g] / dc
            qg = g - dg
            quot[qg] = quot.get(qg, QI_ZERO) + q
            for og, oc in other.terms.items():
                t = og + qg
                acc = rem.get(t, QI_ZERO) - q * oc
                if acc.is_zero():
                    rem.pop(t, None)
                else:
                    rem[t] = acc
            if rem and max(rem) >= g:
                raise GradeMismatch(f"{other} does not divide exactly")
        return GradedScalar(quot)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedScalar):
            try:
                other = GradedScalar.of(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def numeric(self) -> complex:
        """Substitute the numeric value of 2*pi*i grade by grade."""
        total = 0j
        for g, c in self.terms.items():
            total += c.to_complex() * TWO_PI_I**g
        return total

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for g in self.grades():
            c = self.terms[g]
            if g == 0:
                parts.append(str(c))
            elif g == 1:
                parts.append(f"{c}*(2pii)")
            else:
                parts.append(f"{c}*(2pii)^{g}")
        return " + ".join(parts)


def scalar_arith(x: GradedScalar, y: GradedScalar, op: str) -> GradedScalar:
    """Dispatch helper: op in {'add', 'mul', 'inv'} ('inv' ignores y)."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "inv":
        return x.inv()
    raise ValueError(f"unknown op {op!r}")


def numeric_eval(x: GradedScalar) -> complex:
    return x.numeric()
