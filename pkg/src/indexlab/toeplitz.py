"""Half-line Toeplitz realization of an exact operator-algebra extension.

Elements are semi-infinite block matrices  T[i,j] = a_{i-j} + C[i,j]  with a
a Laurent matrix polynomial (the symbol) and C a finite-support correction.
The symbol map is the quotient onto Laurent polynomials; its kernel (zero
symbol) is the smoothing ideal, which carries the trace.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .errors import (
    NotTraceClass,
    ShapeError,
    SymbolNotElliptic,
    UnsupportedSymbol,
)
from .linalg import ExactMatrix
from .scalars import GaussianRational, GradedScalar, QI_ONE, QI_ZERO

# -- scalar Laurent polynomials (dict degree -> GaussianRational) --------


def _poly_add(p, q):
    out = dict(p)
    for d, c in q.items():
        acc = out.get(d, QI_ZERO) + c
        if acc.is_zero():
            out.pop(d, None)
        else:
            out[d] = acc
    return out


def _poly_mul(p, q):
    out = {}
    for d1, c1 in p.items():
        for d2, c2 in q.items():
            d = d1 + d2
            acc = out.get(d, QI_ZERO) + c1 * c2
            if acc.is_zero():
                out.pop(d, None)
            else:
                out[d] = acc
    return out


def _poly_neg(p):
    return {d: -c for d, c in p.items()}


class LaurentMatrixPoly:
    """n x n matrix with Laurent-polynomial entries, stored degree by degree."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        self.n = int(n)
        clean = {}
        if coeffs:
            for d, m in coeffs.items():
                if m.shape() != (self.n, self.n):
                    raise ShapeError("coefficient block has wrong fiber dimension")
                if not m.is_zero():
                    clean[int(d)] = m
        self.coeffs = clean

    @classmethod
    def zero(cls, n: int) -> "LaurentMatrixPoly":
        return cls(n)

    @classmethod
    def one(cls, n: int) -> "LaurentMatrixPoly":
        return cls(n, {0: ExactMatrix.identity(n)})

    @classmethod
    def monomial(cls, degree: int, matrix: ExactMatrix) -> "LaurentMatrixPoly":
        return cls(matrix.rows, {degree: matrix})

    @classmethod
    def scalar(cls, poly) -> "LaurentMatrixPoly":
        """1x1 symbol from a dict degree -> coefficient."""
        return cls(1, {d: ExactMatrix(1, 1, {(0, 0): c}) for d, c in poly.items()})

    @classmethod
    def block_diag(cls, entries) -> "LaurentMatrixPoly":
        """Diagonal symbol from scalar Laurent polynomials."""
        n = len(entries)
        coeffs = {}
        for i, poly in enumerate(entries):
            for d, c in poly.items():
                m = coeffs.setdefault(d, {})
                m[(i, i)] = c
        return cls(n, {d: ExactMatrix(n, n, m) for d, m in coeffs.items()})

    def coefficient(self, degree: int) -> ExactMatrix:
        return self.coeffs.get(degree, ExactMatrix.zeros(self.n, self.n))

    def degrees(self):
        return sorted(self.coeffs)

    def band(self) -> int:
        return max((abs(d) for d in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentMatrixPoly):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs)))

    def __add__(self, other: "LaurentMatrixPoly") -> "LaurentMatrixPoly":
        if self.n != other.n:
            raise ShapeError("fiber dimension mismatch")
        coeffs = dict(self.coeffs)
        for d, m in other.coeffs.items():
            coeffs[d] = coeffs.get(d, ExactMatrix.zeros(self.n, self.n)) + m
        return LaurentMatrixPoly(self.n, coeffs)

    def __neg__(self) -> "LaurentMatrixPoly":
        return LaurentMatrixPoly(self.n, {d: -m for d, m in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "LaurentMatrixPoly") -> "LaurentMatrixPoly":
        if self.n != other.n:
            raise ShapeError("fiber dimension mismatch")
        coeffs = {}
        for d1, m1 in self.coeffs.items():
            for d2, m2 in other.coeffs.items():
                d = d1 + d2
                prod = m1 * m2
                coeffs[d] = coeffs.get(d, ExactMatrix.zeros(self.n, self.n)) + prod
        return LaurentMatrixPoly(self.n, coeffs)

    def entry_poly(self, i: int, j: int):
        out = {}
        for d, m in self.coeffs.items():
            v = m.get(i, j)
            if not v.is_zero():
                out[d] = v.require_grade_zero()
        return out

    def determinant(self):
        """Scalar Laurent polynomial det, by permutation expansion."""
        n = self.n
        rows = [[self.entry_poly(i, j) for j in range(n)] for i in range(n)]
        det = {}
        for perm in itertools.permutations(range(n)):
            sign = QI_ONE
            inversions = sum(
                1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b]
            )
            if inversions % 2:
                sign = -sign
            term = {0: sign}
            for i in range(n):
                term = _poly_mul(term, rows[i][perm[i]])
                if not term:
                    break
            det = _poly_add(det, term)
        return det

    def adjugate(self) -> "LaurentMatrixPoly":
        n = self.n
        if n == 1:
            return LaurentMatrixPoly.one(1)
        out = {}
        for i in range(n):
            for j in range(n):
                sub = LaurentMatrixPoly(
                    n - 1,
                    {
                        d: ExactMatrix(
                            n - 1,
                            n - 1,
                            {
                                (r - (r > i), c - (c > j)): v
                                for (r, c), v in m.entries.items()
                                if r != i and c != j
                            },
                        )
                        for d, m in self.coeffs.items()
                    },
                )
                minor = sub.determinant()
                if (i + j) % 2:
                    minor = _poly_neg(minor)
                # adjugate transposes the cofactor matrix
                for d, c in minor.items():
                    blk = out.setdefault(d, {})
                    blk[(j, i)] = c
        return LaurentMatrixPoly(n, {d: ExactMatrix(n, n, blk) for d, blk in out.items()})

    def eval_at(self, z: np.ndarray) -> np.ndarray:
        """Numeric evaluation on an array of unit-circle points: (..., n, n)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (self.n, self.n), dtype=complex)
        for d, m in self.coeffs.items():
            out += (z**d)[..., None, None] * m.to_complex()
        return out

    def __repr__(self):
        return f"LaurentMatrixPoly(n={self.n}, degrees={self.degrees()})"


# -- symbol mini-language -------------------------------------------------


def _split_top_level(text: str, seps: str):
    parts = []
    depth = 0
    cur = ""
    for idx, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch in seps and depth == 0 and idx > 0 and text[idx - 1] not in "^*/+-(":
            parts.append(cur)
            cur = ch if ch == "-" else ""
            if ch == "-":
                cur = "-"
            else:
                cur = ""
            continue
        cur += ch
    parts.append(cur)
    return [p for p in parts if p not in ("", "+")]


def _parse_coefficient(text: str) -> GaussianRational:
    t = text.strip()
    if t.startswith("(") and t.endswith(")"):
        t = t[1:-1]
    sign = 1
    while t and t[0] in "+-":
        if t[0] == "-":
            sign = -sign
        t = t[1:]
    imaginary = False
    if t.endswith("i"):
        imaginary = True
        t = t[:-1]
        if t.endswith("*"):
            t = t[:-1]
    if t.startswith("(") and t.endswith(")"):
        t = t[1:-1]
    value = Fraction(t) if t else Fraction(1)
    value *= sign
    if imaginary:
        return GaussianRational(Fraction(0), value)
    return GaussianRational(value)


def _parse_scalar_poly(text: str):
    s = text.replace(" ", "")
    if not s:
        raise UnsupportedSymbol("empty symbol expression")
    # insert explicit leading + so splitting is uniform
    terms = _split_top_level(s, "+-")
    poly = {}
    for term in terms:
        t = term
        sign = 1
        while t and t[0] in "+-":
            if t[0] == "-":
                sign = -sign
            t = t[1:]
        degree = 0
        coeff_text = t
        if "z" in t:
            zpos = t.index("z")
            coeff_text = t[:zpos].rstrip("*")
            rest = t[zpos + 1 :]
            if rest.startswith("^"):
                degree = int(rest[1:])
            elif rest:
                raise UnsupportedSymbol(f"cannot parse term {term!r}")
            else:
                degree = 1
        coeff = _parse_coefficient(coeff_text) if coeff_text else GaussianRational(Fraction(1))
        if sign < 0:
            coeff = -coeff
        acc = poly.get(degree, QI_ZERO) + coeff
        if acc.is_zero():
            poly.pop(degree, None)
        else:
            poly[degree] = acc
    return poly


def parse_symbol(text: str) -> LaurentMatrixPoly:
    """Parse CLI symbol syntax: scalar terms c*z^k, [[...]] matrices, diag(...)."""
    s = text.strip().replace(" ", "")
    if s.startswith("diag(") and s.endswith(")"):
        inner = s[5:-1]
        entries = [_parse_scalar_poly(p) for p in _split_top_level(inner, ",")]
        return LaurentMatrixPoly.block_diag(entries)
    if s.startswith("[["):
        if not s.endswith("]]"):
            raise UnsupportedSymbol(f"unbalanced matrix brackets in {text!r}")
        body = s[1:-1]
        rows = []
        depth = 0
        cur = ""
        for ch in body:
            if ch == "[":
                depth += 1
                if depth == 1:
                    cur = ""
                    continue
            elif ch == "]":
                depth -= 1
                if depth == 0:
                    rows.append(cur)
                    continue
            if depth >= 1:
                cur += ch
        parsed = [[_parse_scalar_poly(e) for e in _split_top_level(r, ",")] for r in rows]
        n = len(parsed)
        if any(len(r) != n for r in parsed):
            raise UnsupportedSymbol("matrix symbol must be square")
        coeffs = {}
        for i, row in enumerate(parsed):
            for j, poly in enumerate(row):
                for d, c in poly.items():
                    coeffs.setdefault(d, {})[(i, j)] = c
        return LaurentMatrixPoly(n, {d: ExactMatrix(n, n, blk) for d, blk in coeffs.items()})
    return LaurentMatrixPoly.scalar(_parse_scalar_poly(s))


# -- Toeplitz elements ----------------------------------------------------


class ToeplitzElement:
    """Symbol part plus finite-support correction on the half line."""

    __slots__ = ("n", "symbol", "correction")

    def __init__(self, symbol: LaurentMatrixPoly, correction=None):
        self.symbol = symbol
        self.n = symbol.n
        clean = {}
        if correction:
            for (i, j), m in correction.items():
                if i < 0 or j < 0:
                    raise ShapeError("correction indices must be nonnegative")
                if m.shape() != (self.n, self.n):
                    raise ShapeError("correction block has wrong fiber dimension")
                if not m.is_zero():
                    clean[(int(i), int(j))] = m
        self.correction = clean

    @classmethod
    def from_symbol(cls, symbol: LaurentMatrixPoly) -> "ToeplitzElement":
        return cls(symbol)

    @classmethod
    def identity(cls, n: int) -> "ToeplitzElement":
        return cls(LaurentMatrixPoly.one(n))

    @classmethod
    def zero(cls, n: int) -> "ToeplitzElement":
        return cls(LaurentMatrixPoly.zero(n))

    @classmethod
    def smoothing(cls, n: int, correction) -> "ToeplitzElement":
        return cls(LaurentMatrixPoly.zero(n), correction)

    def block(self, i: int, j: int) -> ExactMatrix:
        blk = self.symbol.coefficient(i - j)
        c = self.correction.get((i, j))
        return blk + c if c is not None else blk

    def correction_extent(self) -> int:
        return max((max(i, j) + 1 for i, j in self.correction), default=0)

    def band(self) -> int:
        return self.symbol.band()

    def is_smoothing(self) -> bool:
        return self.symbol.is_zero()

    def is_zero(self) -> bool:
        return self.symbol.is_zero() and not self.correction

    def __eq__(self, other) -> bool:
        if not isinstance(other, ToeplitzElement):
            return NotImplemented
        return self.symbol == other.symbol and self.correction == other.correction

    def __hash__(self):
        return hash((self.symbol, frozenset(self.correction)))

    def __add__(self, other: "ToeplitzElement") -> "ToeplitzElement":
        if self.n != other.n:
            raise ShapeError("fiber dimension mismatch")
        corr = dict(self.correction)
        for k, m in other.correction.items():
            corr[k] = corr.get(k, ExactMatrix.zeros(self.n, self.n)) + m
        return ToeplitzElement(self.symbol + other.symbol, corr)

    def __neg__(self) -> "ToeplitzElement":
        return ToeplitzElement(-self.symbol, {k: -m for k, m in self.correction.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "ToeplitzElement") -> "ToeplitzElement":
        return toeplitz_mul(self, other)

    def scale(self, s) -> "ToeplitzElement":
        sym = LaurentMatrixPoly(self.n, {d: m.scale(s) for d, m in self.symbol.coeffs.items()})
        return ToeplitzElement(sym, {k: m.scale(s) for k, m in self.correction.items()})

    def truncate(self, sites: int) -> ExactMatrix:
        """Top-left window of the semi-infinite matrix, as (sites*n) square."""
        n = self.n
        entries = {}
        for i in range(sites):
            for d, m in self.symbol.coeffs.items():
                j = i - d
                if 0 <= j < sites:
                    for (r, c), v in m.entries.items():
                        entries[(i * n + r, j * n + c)] = v
        for (i, j), m in self.correction.items():
            if i < sites and j < sites:
                for (r, c), v in m.entries.items():
                    key = (i * n + r, j * n + c)
                    entries[key] = entries.get(key, GradedScalar.zero()) + v
        return ExactMatrix(sites * n, sites * n, entries)

    def __repr__(self):
        return (
            f"ToeplitzElement(n={self.n}, degrees={self.symbol.degrees()}, "
            f"corrections={len(self.correction)})"
        )


def toeplitz_mul(x: ToeplitzElement, y: ToeplitzElement) -> ToeplitzElement:
    """Exact product; the half-line convolution defect lands in the correction."""
    if x.n != y.n:
        raise ShapeError("fiber dimension mismatch")
    n = x.n
    zero = ExactMatrix.zeros(n, n)
    corr = {}

    def bump(i, j, m):
        if m.is_zero():
            return
        key = (i, j)
        corr[key] = corr.get(key, zero) + m

    a, b = x.symbol, y.symbol
    a_degs, b_degs = a.degrees(), b.degrees()

    # Toeplitz(a)*Toeplitz(b) = Toeplitz(a*b) - sum_{k<0} a_{i-k} b_{k-j}
    if a_degs and b_degs:
        ahi = a_degs[-1]
        blo = b_degs[0]
        for i in range(max(ahi, 0)):
            for j in range(max(-blo, 0)):
                acc = None
                for k in range(max(i - ahi, j + b_degs[0]), min(-1, i - a_degs[0], j + b_degs[-1]) + 1):
                    ak = a.coeffs.get(i - k)
                    bk = b.coeffs.get(k - j)
                    if ak is None or bk is None:
                        continue
                    term = ak * bk
                    acc = term if acc is None else acc + term
                if acc is not None:
                    bump(i, j, -acc)

    # Toeplitz(a) * correction(y)
    for (k, j), g in y.correction.items():
        for d, ad in a.coeffs.items():
            i = d + k
            if i >= 0:
                bump(i, j, ad * g)

    # correction(x) * Toeplitz(b)
    for (i, k), f in x.correction.items():
        for d, bd in b.coeffs.items():
            j = k - d
            if j >= 0:
                bump(i, j, f * bd)

    # correction(x) * correction(y)
    g_by_row = {}
    for (k, j), g in y.correction.items():
        g_by_row.setdefault(k, []).append((j, g))
    for (i, k), f in x.correction.items():
        for j, g in g_by_row.get(k, ()):
            bump(i, j, f * g)

    return ToeplitzElement(a * b, corr)


def symbol_map(x: ToeplitzElement) -> LaurentMatrixPoly:
    return x.symbol


def trace_smoothing(x: ToeplitzElement) -> GradedScalar:
    """Trace over the smoothing ideal: sum of diagonal correction block traces."""
    if not x.is_smoothing():
        raise NotTraceClass("element has a nonzero symbol")
    total = GradedScalar.zero()
    for (i, j), m in x.correction.items():
        if i == j:
            total = total + m.trace()
    return total


def winding(p: LaurentMatrixPoly, tol: float = 0.01, margin: float = 1e-8) -> int:
    """Winding number of t -> det p(e^{it}).

    Sampled argument accumulation starting at 256 points, doubling until the
    accumulated total is within ``tol`` of an integer (then snapped), with a
    hard cap of 2**20 samples.  Raises if |det| dips below ``margin``.
    """
    det = p.determinant()
    if not det:
        raise SymbolNotElliptic("determinant is identically zero")
    degs = np.array(sorted(det), dtype=int)
    coefs = np.array([det[int(d)].to_complex() for d in degs])

    samples = 256
    while samples <= 2**20:
        t = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        z = np.exp(1j * t)
        vals = (z[:, None] ** degs[None, :]) @ coefs
        if np.min(np.abs(vals)) < margin:
            raise SymbolNotElliptic("determinant nearly vanishes on the unit circle")
        angles = np.angle(np.roll(vals, -1) / vals)
        total = float(np.sum(angles)) / (2.0 * np.pi)
        nearest = round(total)
        if abs(total - nearest) <= tol and np.max(np.abs(angles)) < np.pi / 2:
            return int(nearest)
        samples *= 2
    raise SymbolNotElliptic("winding did not stabilize within the sample budget")


def parametrix(a: LaurentMatrixPoly):
    """Exact parametrix pair (A, B) for a symbol with monomial determinant.

    The supported class is exactly the symbols whose Laurent inverse is again
    a Laurent matrix polynomial, i.e. det a = c*z^k with c != 0.  Then
    B = Toeplitz(a^{-1}) and both 1-BA, 1-AB have zero symbol.
    """
    det = a.determinant()
    if len(det) != 1:
        raise UnsupportedSymbol(
            "determinant is not a single Laurent monomial; no exact inverse"
        )
    ((k, c),) = det.items()
    inv_det = {-k: c.inv()}
    adj = a.adjugate()
    b_sym = LaurentMatrixPoly(
        a.n,
        {
            d + dd: m.scale(GradedScalar.of(cc))
            for d, m in adj.coeffs.items()
            for dd, cc in inv_det.items()
        },
    )
    if (b_sym * a) != LaurentMatrixPoly.one(a.n):
        raise UnsupportedSymbol("adjugate inverse failed; symbol outside class")
    return ToeplitzElement.from_symbol(a), ToeplitzElement.from_symbol(b_sym)
