"""Sparse exact matrices over graded scalars, with fraction-free rank/kernel.

Elimination is Bareiss-style (exact divisions by previous pivots only), so
single-grade entries never force rational-function arithmetic: intermediate
values stay finite Laurent polynomials in the formal constant.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import GradeMismatch, NotInvertible, ShapeError
from .scalars import GaussianRational, GradedScalar, QI_ZERO


def _coerce_scalar(v) -> GradedScalar:
    if isinstance(v, GradedScalar):
        return v
    if isinstance(v, GaussianRational):
        return GradedScalar({0: v})
    return GradedScalar.of(v)


class ExactMatrix:
    """Immutable-by-convention sparse matrix with GradedScalar entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = int(rows)
        self.cols = int(cols)
        clean = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < self.rows and 0 <= j < self.cols):
                    raise ShapeError(f"entry ({i},{j}) outside {rows}x{cols}")
                s = _coerce_scalar(v)
                if not s.is_zero():
                    clean[(i, j)] = s
        self.entries = clean

    # -- constructors ------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        one = GradedScalar.one()
        return cls(n, n, {(i, i): one for i in range(n)})

    @classmethod
    def from_rows(cls, data) -> "ExactMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        entries = {}
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ShapeError("ragged rows")
            for j, v in enumerate(row):
                entries[(i, j)] = v
        return cls(rows, cols, entries)

    @classmethod
    def diag(cls, values) -> "ExactMatrix":
        n = len(values)
        return cls(n, n, {(i, i): v for i, v in enumerate(values)})

    @classmethod
    def unit(cls, rows: int, cols: int, i: int, j: int, value=1) -> "ExactMatrix":
        return cls(rows, cols, {(i, j): value})

    # -- access ------------------------------------------------------
    def get(self, i: int, j: int) -> GradedScalar:
        return self.entries.get((i, j), GradedScalar.zero())

    def is_zero(self) -> bool:
        return not self.entries

    def is_square(self) -> bool:
        return self.rows == self.cols

    def shape(self):
        return (self.rows, self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries)))

    # -- arithmetic --------------------------------------------------
    def _check_same_shape(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ShapeError(f"{self.shape()} vs {other.shape()}")

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_shape(other)
        entries = dict(self.entries)
        for k, v in other.entries.items():
            entries[k] = entries.get(k, GradedScalar.zero()) + v
        return ExactMatrix(self.rows, self.cols, entries)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, {k: -v for k, v in self.entries.items()})

    def scale(self, s) -> "ExactMatrix":
        s = _coerce_scalar(s)
        return ExactMatrix(self.rows, self.cols, {k: v * s for k, v in self.entries.items()})

    def __mul__(self, other):
        if not isinstance(other, ExactMatrix):
            return self.scale(other)
        if self.cols != other.rows:
            raise ShapeError(f"{self.shape()} cannot multiply {other.shape()}")
        by_row = {}
        for (i, k), v in self.entries.items():
            by_row.setdefault(i, []).append((k, v))
        by_col = {}
        for (k, j), v in other.entries.items():
            by_col.setdefault(k, []).append((j, v))
        acc = {}
        for i, row in by_row.items():
            for k, v in row:
                for j, w in by_col.get(k, ()):
                    key = (i, j)
                    cur = acc.get(key)
                    acc[key] = v * w if cur is None else cur + v * w
        return ExactMatrix(self.rows, other.cols, acc)

    __rmul__ = scale

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def trace(self) -> GradedScalar:
        if not self.is_square():
            raise ShapeError("trace of a non-square matrix")
        t = GradedScalar.zero()
        for (i, j), v in self.entries.items():
            if i == j:
                t = t + v
        return t

    def to_complex(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=complex)
        for (i, j), v in self.entries.items():
            out[i, j] = v.numeric()
        return out

    def inverse(self) -> "ExactMatrix":
        """Exact inverse via Gauss-Jordan; entries must all be grade 0."""
        if not self.is_square():
            raise ShapeError("inverse of a non-square matrix")
        n = self.rows
        a = [[self.get(i, j).require_grade_zero() for j in range(n)] for i in range(n)]
        b = [[GaussianRational.of(1 if i == j else 0) for j in range(n)] for i in range(n)]
        for col in range(n):
            piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
            if piv is None:
                raise NotInvertible("singular matrix")
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
            inv_p = a[col][col].inv()
            a[col] = [x * inv_p for x in a[col]]
            b[col] = [x * inv_p for x in b[col]]
            for r in range(n):
                if r == col or a[r][col].is_zero():
                    continue
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                b[r] = [x - f * y for x, y in zip(b[r], b[col])]
        return ExactMatrix(n, n, {(i, j): b[i][j] for i in range(n) for j in range(n)})

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols}, {len(self.entries)} entries)"


def rank_kernel(matrix: ExactMatrix):
    """Exact rank and kernel basis of a matrix with single-grade entries.

    Fraction-free forward elimination with column pivoting, then
    division-free back substitution; every returned vector v satisfies
    M*v == 0 exactly.  Entries mixing several grades are rejected.
    """
    for key, v in matrix.entries.items():
        if not v.is_single_grade():
            raise GradeMismatch(f"mixed-grade entry at {key}: {v}")
    nrows, ncols = matrix.rows, matrix.cols
    rows = [dict() for _ in range(nrows)]
    for (i, j), v in matrix.entries.items():
        rows[i][j] = v

    pivots = []  # (row, col) in elimination order
    prev_pivot = GradedScalar.one()
    used_rows = set()
    for col in range(ncols):
        pivot_row = None
        for r in range(nrows):
            if r in used_rows or col not in rows[r]:
                continue
            if pivot_row is None or len(rows[r]) < len(rows[pivot_row]):
                pivot_row = r
        if pivot_row is None:
            continue
        used_rows.add(pivot_row)
        pv = rows[pivot_row][col]
        for r in range(nrows):
            if r in used_rows or col not in rows[r]:
                continue
            rv = rows[r].pop(col)
            new_row = {}
            prow = rows[pivot_row]
            keys = set(rows[r]) | set(prow)
            keys.discard(col)
            for j in keys:
                a = rows[r].get(j)
                b = prow.get(j)
                term = (pv * a if a is not None else GradedScalar.zero()) - (
                    rv * b if b is not None else GradedScalar.zero()
                )
                if not term.is_zero():
                    new_row[j] = term.divexact(prev_pivot)
            rows[r] = new_row
        pivots.append((pivot_row, col))
        prev_pivot = pv

    rank = len(pivots)
    pivot_cols = {c for _, c in pivots}
    free_cols = [c for c in range(ncols) if c not in pivot_cols]

    kernel = []
    for free in free_cols:
        vec = [GradedScalar.zero()] * ncols
        vec[free] = GradedScalar.one()
        # Walk pivots in reverse order of elimination; scaling the already
        # resolved part by the pivot keeps every step division-free.
        for prow, pcol in reversed(pivots):
            if pcol > free:
                continue
            row = rows[prow]
            s = GradedScalar.zero()
            for j, v in row.items():
                if j != pcol and not vec[j].is_zero():
                    s = s + v * vec[j]
            pv = row[pcol]
            vec = [x * pv for x in vec]
            vec[pcol] = -s
        kernel.append(_content_normalize(vec, free))
    return rank, kernel


def _content_normalize(vec, free_col):
    """Divide a kernel vector by any common single-grade content (cosmetic)."""
    units = [v for v in vec if not v.is_zero()]
    if not units:
        return vec
    if all(len(v.terms) == 1 for v in units):
        grades = [v.grades()[0] for v in units]
        g = min(grades)
        nums, dens = [], []
        for v in units:
            c = v.terms[v.grades()[0]]
            if c.im != 0:
                return vec
            nums.append(c.re.numerator)
            dens.append(c.re.denominator)
        from math import gcd

        ng = 0
        for x in nums:
            ng = gcd(ng, abs(x))
        dl = 1
        for d in dens:
            dl = dl * d // gcd(dl, d)
        if ng:
            factor = GradedScalar.of(Fraction(dl, ng), -g)
            vec = [v * factor for v in vec]
            anchor = vec[free_col]
            if not anchor.is_zero():
                c = anchor.terms[anchor.grades()[0]]
                if c.re < 0:
                    vec = [-v for v in vec]
    return vec


def matrix_rank(matrix: ExactMatrix) -> int:
    return rank_kernel(matrix)[0]


def sparse_rank(columns, nrows=None) -> int:
    """Exact rank of a sparse matrix given as columns: dict row -> GaussianRational.

    Splits into connected components of the row/column incidence graph and
    eliminates each independently, preferring unit pivots with small fill.
    Intended for the large, very sparse boundary matrices of chain complexes.
    """
    cols = []
    for col in columns:
        c = {r: v for r, v in col.items() if not v.is_zero()}
        if c:
            cols.append(c)
    if not cols:
        return 0

    # connected components over column indices
    row_to_cols = {}
    for ci, col in enumerate(cols):
        for r in col:
            row_to_cols.setdefault(r, []).append(ci)
    seen = [False] * len(cols)
    rank = 0
    for start in range(len(cols)):
        if seen[start]:
            continue
        comp = []
        stack = [start]
        seen[start] = True
        while stack:
            ci = stack.pop()
            comp.append(ci)
            for r in cols[ci]:
                for cj in row_to_cols[r]:
                    if not seen[cj]:
                        seen[cj] = True
                        stack.append(cj)
        rank += _eliminate_component([cols[ci] for ci in comp])
    return rank


def _eliminate_component(cols) -> int:
    live = {i: c for i, c in enumerate(cols)}
    row_index = {}
    for ci, col in live.items():
        for r in col:
            row_index.setdefault(r, set()).add(ci)
    rank = 0
    while live:
        best = None
        for ci, col in live.items():
            for r, v in col.items():
                fill = (len(col) - 1) * (len(row_index[r]) - 1)
                unit = v.im == 0 and abs(v.re) == 1
                key = (not unit, fill)
                if best is None or key < best[0]:
                    best = (key, ci, r)
            if best and best[0] == (False, 0):
                break
        _, pci, prow = best
        pivot_col = live.pop(pci)
        for r in pivot_col:
            row_index[r].discard(pci)
        pv = pivot_col[prow]
        rank += 1
        for ci in list(row_index.get(prow, ())):
            col = live[ci]
            f = col.pop(prow) / pv
            row_index[prow].discard(ci)
            for r, v in pivot_col.items():
                if r == prow:
                    continue
                acc = col.get(r, QI_ZERO) - f * v
                if acc.is_zero():
                    if r in col:
                        del col[r]
                        row_index[r].discard(ci)
                else:
                    if r not in col:
                        row_index.setdefault(r, set()).add(ci)
                    col[r] = acc
            if not col:
                del live[ci]
    return rank
