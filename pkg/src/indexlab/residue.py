"""Residue construction over a pluggable unital algebra.

From an element A and an approximate inverse B with defects S0 = 1-BA and
S1 = 1-AB inside a designated ideal, one assembles an invertible 2x2 block
element L, the idempotent P = L diag(1,0) L^{-1}, the constant idempotent
e = diag(0,1), and the residue R = P - e.  R is not an idempotent; it
satisfies R^2 = R - (eR + Re).  The same formulas are reused verbatim for
exact matrices, half-line Toeplitz elements, grid kernels, and symbol
fibers; only the context changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import AlgebraViolation, BadParameter, NotInvertible, SymbolNotElliptic
from .grids import GridKernel, kernel_support
from .linalg import ExactMatrix
from .scalars import GaussianRational, GradedScalar
from .toeplitz import LaurentMatrixPoly, ToeplitzElement, parametrix, trace_smoothing


@dataclass(frozen=True)
class AlgebraContext:
    """Operation table for a unital algebra whose elements we never subclass."""

    name: str
    add: Callable
    mul: Callable
    neg: Callable
    unit: object
    zero: object
    is_zero: Callable
    trace: Optional[Callable] = None
    in_ideal: Optional[Callable] = None
    support: Optional[Callable] = None

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def eq(self, x, y) -> bool:
        return self.is_zero(self.sub(x, y))


def matrix_context(n: int) -> AlgebraContext:
    return AlgebraContext(
        name=f"matrix({n})",
        add=lambda x, y: x + y,
        mul=lambda x, y: x * y,
        neg=lambda x: -x,
        unit=ExactMatrix.identity(n),
        zero=ExactMatrix.zeros(n, n),
        is_zero=lambda x: x.is_zero(),
        trace=lambda x: x.trace(),
    )


def toeplitz_context(n: int) -> AlgebraContext:
    return AlgebraContext(
        name=f"toeplitz({n})",
        add=lambda x, y: x + y,
        mul=lambda x, y: x * y,
        neg=lambda x: -x,
        unit=ToeplitzElement.identity(n),
        zero=ToeplitzElement.zero(n),
        is_zero=lambda x: x.is_zero(),
        trace=trace_smoothing,
        in_ideal=lambda x: x.is_smoothing(),
    )


def grid_context(grid, n: int = 1) -> AlgebraContext:
    return AlgebraContext(
        name=f"grid({grid.kind},{grid.N},n={n})",
        add=lambda x, y: x + y,
        mul=lambda x, y: x * y,
        neg=lambda x: -x,
        unit=GridKernel.identity(grid, n),
        zero=GridKernel.zero(grid, n),
        is_zero=lambda x: x.is_zero(),
        trace=lambda x: x.trace(),
        support=kernel_support,
    )


class Block2:
    """2x2 block element over an AlgebraContext."""

    __slots__ = ("ctx", "a", "b", "c", "d")

    def __init__(self, ctx: AlgebraContext, a, b, c, d):
        self.ctx = ctx
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def diag(cls, ctx: AlgebraContext, x, y) -> "Block2":
        return cls(ctx, x, ctx.zero, ctx.zero, y)

    @classmethod
    def unit(cls, ctx: AlgebraContext) -> "Block2":
        return cls.diag(ctx, ctx.unit, ctx.unit)

    @classmethod
    def zero(cls, ctx: AlgebraContext) -> "Block2":
        return cls.diag(ctx, ctx.zero, ctx.zero)

    def blocks(self):
        return (self.a, self.b, self.c, self.d)

    def __add__(self, other: "Block2") -> "Block2":
        add = self.ctx.add
        return Block2(
            self.ctx,
            add(self.a, other.a),
            add(self.b, other.b),
            add(self.c, other.c),
            add(self.d, other.d),
        )

    def __neg__(self) -> "Block2":
        neg = self.ctx.neg
        return Block2(self.ctx, neg(self.a), neg(self.b), neg(self.c), neg(self.d))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "Block2") -> "Block2":
        add, mul = self.ctx.add, self.ctx.mul
        return Block2(
            self.ctx,
            add(mul(self.a, other.a), mul(self.b, other.c)),
            add(mul(self.a, other.b), mul(self.b, other.d)),
            add(mul(self.c, other.a), mul(self.d, other.c)),
            add(mul(self.c, other.b), mul(self.d, other.d)),
        )

    def is_zero(self) -> bool:
        z = self.ctx.is_zero
        return z(self.a) and z(self.b) and z(self.c) and z(self.d)

    def __eq__(self, other):
        if not isinstance(other, Block2):
            return NotImplemented
        return (self - other).is_zero()

    def block_trace(self):
        """Sum of the traces of the two diagonal blocks."""
        if self.ctx.trace is None:
            raise AlgebraViolation(f"context {self.ctx.name} declares no trace")
        return self.ctx.trace(self.a) + self.ctx.trace(self.d)

    def __repr__(self):
        return f"Block2({self.ctx.name})"


@dataclass(frozen=True)
class ResidueSet:
    ctx: AlgebraContext
    L: Block2
    Linv: Block2
    P: Block2
    e: Block2
    R: Block2
    S0: object
    S1: object


IDENTITY_NAMES = ("L*Linv=1", "Linv*L=1", "P^2=P", "R=P-e", "R^2=R-(eR+Re)")


def verify_residue_identities(rs: ResidueSet) -> dict:
    """Exact check report for the five defining identities."""
    one = Block2.unit(rs.ctx)
    eR = rs.e * rs.R
    Re = rs.R * rs.e
    checks = {
        "L*Linv=1": (rs.L * rs.Linv) == one,
        "Linv*L=1": (rs.Linv * rs.L) == one,
        "P^2=P": (rs.P * rs.P) == rs.P,
        "R=P-e": rs.R == (rs.P - rs.e),
        "R^2=R-(eR+Re)": (rs.R * rs.R) == (rs.R - (eR + Re)),
    }
    return checks


def build_residue(A, B, ctx: AlgebraContext) -> ResidueSet:
    """Assemble L, L^{-1}, P, e, R from (A, B) and certify the identities."""
    one = ctx.unit
    S0 = ctx.sub(one, ctx.mul(B, A))
    S1 = ctx.sub(one, ctx.mul(A, B))
    if ctx.in_ideal is not None:
        if not (ctx.in_ideal(S0) and ctx.in_ideal(S1)):
            raise AlgebraViolation("defects 1-BA, 1-AB do not land in the ideal")

    one_plus_S0 = ctx.add(one, S0)
    upper_right = ctx.mul(one_plus_S0, B)
    L = Block2(ctx, S0, ctx.neg(upper_right), A, S1)
    Linv = Block2(ctx, S0, upper_right, ctx.neg(A), S1)
    P = L * Block2.diag(ctx, one, ctx.zero) * Linv
    e = Block2.diag(ctx, ctx.zero, one)
    R = P - e

    closed_form = Block2(
        ctx,
        ctx.mul(S0, S0),
        ctx.mul(S0, upper_right),
        ctx.mul(S1, A),
        ctx.neg(ctx.mul(S1, S1)),
    )
    if R != closed_form:
        raise AlgebraViolation("residue block formula mismatch; context wiring is wrong")

    rs = ResidueSet(ctx, L, Linv, P, e, R, S0, S1)
    report = verify_residue_identities(rs)
    if not all(report.values()):
        bad = [k for k, v in report.items() if not v]
        raise AlgebraViolation(f"residue identities failed: {bad}")
    return rs


def connecting_class(a: LaurentMatrixPoly):
    """Representative-level class pair (P, e) for an invertible symbol.

    No homotopy quotient is taken: the pair comes from one parametrix choice.
    The traceable difference P - e recovers the integer index.
    """
    A, B = parametrix(a)
    rs = build_residue(A, B, toeplitz_context(a.n))
    return rs.P, rs.e


def class_trace_difference(P: Block2, e: Block2) -> GradedScalar:
    return (P - e).block_trace()


# -- fiberwise residue on the cotangent grid --------------------------------


@dataclass(frozen=True)
class CotangentGrid:
    """Finite grid on the cotangent space of the circle: angle index x fiber
    coordinate.  Fiber coordinates are exact rationals; 0 is the zero section."""

    n_theta: int
    xi_levels: tuple

    def points(self):
        return [(j, xi) for j in range(self.n_theta) for xi in self.xi_levels]

    @property
    def npoints(self) -> int:
        return self.n_theta * len(self.xi_levels)


def cotangent_circle_grid(n_theta: int, xi_levels) -> CotangentGrid:
    if n_theta < 1 or not xi_levels:
        raise BadParameter("empty cotangent grid")
    return CotangentGrid(n_theta, tuple(Fraction(x) for x in xi_levels))


def rational_circle_loop(n_theta: int):
    """Unit-modulus Gaussian rationals c_j tracing the circle once (exactly)."""
    out = {}
    for j in range(n_theta):
        u = Fraction(j, n_theta)
        den = 1 + u * u
        out[j] = GaussianRational((1 - u * u) / den, 2 * u / den)
    return out


def sign_loop_symbol_field(grid: CotangentGrid):
    """Demo field a(theta, xi) = c_theta^{sign(xi)}: winds once around each
    fiber half, constant along the zero section."""
    loop = rational_circle_loop(grid.n_theta)
    field = {}
    for j, xi in grid.points():
        c = loop[j]
        if xi < 0:
            c = c.conj()  # |c| = 1, so the conjugate is the exact inverse
        field[(j, xi)] = ExactMatrix(1, 1, {(0, 0): c})
    return field


def ramp_cutoff(grid: CotangentGrid, inner, outer):
    """Rational cutoff: 0 for |xi| <= inner, 1 for |xi| >= outer, linear between."""
    inner, outer = Fraction(inner), Fraction(outer)
    if not 0 <= inner < outer:
        raise BadParameter("need 0 <= inner < outer")
    lam = {}
    for j, xi in grid.points():
        r = abs(xi)
        if r <= inner:
            lam[(j, xi)] = Fraction(0)
        elif r >= outer:
            lam[(j, xi)] = Fraction(1)
        else:
            lam[(j, xi)] = (r - inner) / (outer - inner)
    return lam


@dataclass(frozen=True)
class FiberResidue:
    lam: Fraction
    l: ExactMatrix
    linv: ExactMatrix
    p: ExactMatrix
    r: ExactMatrix


def _embed_blocks(n, a, b, c, d) -> ExactMatrix:
    entries = {}
    for (i, j), v in a.entries.items():
        entries[(i, j)] = v
    for (i, j), v in b.entries.items():
        entries[(i, j + n)] = v
    for (i, j), v in c.entries.items():
        entries[(i + n, j)] = v
    for (i, j), v in d.entries.items():
        entries[(i + n, j + n)] = v
    return ExactMatrix(2 * n, 2 * n, entries)


def fiber_residue(symbol_field: dict, cutoff: dict) -> dict:
    """Per-point residue data (l, l^{-1}, p, r) on a cotangent grid.

    cutoff must take values in [0,1].  Wherever the cutoff equals 1 the fiber
    symbol must be invertible; there p is conjugate to diag(1,0) by l and
    equals diag(0,1) exactly, so r vanishes exactly.
    """
    out = {}
    for point, a in symbol_field.items():
        lam = Fraction(cutoff[point])
        if not 0 <= lam <= 1:
            raise BadParameter(f"cutoff {lam} at {point} outside [0,1]")
        n = a.rows
        eye = ExactMatrix.identity(n)
        zero = ExactMatrix.zeros(n, n)
        if lam == 0:
            a_t = b_t = zero
        else:
            try:
                ainv = a.inverse()
            except NotInvertible:
                raise SymbolNotElliptic(
                    f"fiber symbol not invertible at {point} where cutoff={lam}"
                )
            a_t = a.scale(Fraction(lam))
            b_t = ainv.scale(Fraction(lam))
        lam2 = lam * lam
        s = eye.scale(Fraction(1) - lam2)  # s0 = s1 = (1 - lam^2) * 1
        one_plus_s = eye.scale(Fraction(2) - lam2)
        l = _embed_blocks(n, s, -(one_plus_s * b_t), a_t, s)
        linv = _embed_blocks(n, s, one_plus_s * b_t, -a_t, s)
        if l * linv != ExactMatrix.identity(2 * n):
            raise AlgebraViolation(f"fiber block inverse failed at {point}")
        p1 = _embed_blocks(n, eye, zero, zero, zero)
        p2 = _embed_blocks(n, zero, zero, zero, eye)
        p = l * p1 * linv
        r = p - p2
        if lam == 1 and p != p2:
            raise SymbolNotElliptic(f"regularized fiber not flat at {point}")
        out[point] = FiberResidue(lam, l, linv, p, r)
    return out
