"""Exact Hochschild and cyclic chain complexes of finite-dimensional algebras.

Chains of degree k are elements of the (k+1)-fold circular tensor power.
Two ground rings are supported: the base field, and the two-idempotent ring
spanned by 1 and an idempotent e of the algebra.  Tensor products over the
latter are modeled concretely on the Peirce decomposition A = sum e_i A e_j
(e_1 = e, e_0 = 1-e): a basis tensor is a circular path of sector elements,
consecutive sectors matched, so relations like x.e (x) y = x (x) e.y hold by
construction instead of by quotienting.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .errors import (
    BadIdempotent,
    BadParameter,
    DegreeError,
    GradeMismatch,
    ShapeError,
    TooLarge,
)
from .grids import Grid, SupportRelation, make_grid
from .linalg import ExactMatrix, sparse_rank
from .scalars import GaussianRational, GradedScalar, QI_ONE, QI_ZERO

DEFAULT_BUDGET = 200_000


def dimension_budget() -> int:
    raw = os.environ.get("INDEXLAB_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


# -- vectors over Q(i) -------------------------------------------------------


def vec_zero(d):
    return (QI_ZERO,) * d


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(u, c):
    return tuple(a * c for a in u)


def vec_is_zero(u) -> bool:
    return all(a.is_zero() for a in u)


def _coerce_coeff(c) -> GaussianRational:
    if isinstance(c, GaussianRational):
        return c
    if isinstance(c, (list, tuple)) and len(c) == 2:
        return GaussianRational(Fraction(c[0]), Fraction(c[1]))
    return GaussianRational(Fraction(c))


# -- finite-dimensional algebras ---------------------------------------------


class FinDimAlgebra:
    """Unital associative algebra given by structure constants over Q(i)."""

    def __init__(self, labels, mul_table, unit, idempotent=None, grid=None, basis_band=None):
        self.labels = tuple(labels)
        self.dim = len(self.labels)
        self.mul_table = mul_table  # (i, j) -> tuple of (k, coeff)
        self.unit = tuple(unit)
        self.idempotent = tuple(idempotent) if idempotent is not None else None
        self.grid = grid
        self.basis_band = tuple(basis_band) if basis_band is not None else None
        self._validate()

    def _validate(self):
        d = self.dim
        if len(self.unit) != d:
            raise ShapeError("unit vector has wrong length")
        basis = [tuple(QI_ONE if i == j else QI_ZERO for j in range(d)) for i in range(d)]
        for i in range(d):
            if self.mul(self.unit, basis[i]) != basis[i] or self.mul(basis[i], self.unit) != basis[i]:
                raise BadParameter("unit vector is not two-sided neutral")
        for i in range(d):
            for j in range(d):
                ij = self.mul(basis[i], basis[j])
                for k in range(d):
                    left = self.mul(ij, basis[k])
                    right = self.mul(basis[i], self.mul(basis[j], basis[k]))
                    if left != right:
                        raise BadParameter(
                            f"structure constants not associative at ({i},{j},{k})"
                        )
        if self.idempotent is not None and not self.is_idempotent(self.idempotent):
            raise BadIdempotent("distinguished element is not idempotent")

    def mul(self, u, v):
        out = [QI_ZERO] * self.dim
        for i, a in enumerate(u):
            if a.is_zero():
                continue
            for j, b in enumerate(v):
                if b.is_zero():
                    continue
                for k, c in self.mul_table.get((i, j), ()):
                    out[k] = out[k] + a * b * c
        return tuple(out)

    def is_idempotent(self, p) -> bool:
        return self.mul(p, p) == tuple(p)

    def basis_vector(self, t):
        return tuple(QI_ONE if i == t else QI_ZERO for i in range(self.dim))

    def __repr__(self):
        return f"FinDimAlgebra(dim={self.dim})"


def field_algebra() -> FinDimAlgebra:
    return FinDimAlgebra(
        labels=("1",),
        mul_table={(0, 0): ((0, QI_ONE),)},
        unit=(QI_ONE,),
    )


def matrix_algebra(n: int, idempotent_corner: bool = True) -> FinDimAlgebra:
    """Full matrix algebra with matrix-unit basis E_{ab} at index a*n+b."""
    labels = tuple(f"E{a + 1}{b + 1}" for a in range(n) for b in range(n))
    table = {}
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if b == c:
                        table[(a * n + b, c * n + d)] = ((a * n + d, QI_ONE),)
    unit = [QI_ZERO] * (n * n)
    for a in range(n):
        unit[a * n + a] = QI_ONE
    idem = None
    if idempotent_corner:
        idem = [QI_ZERO] * (n * n)
        idem[0] = QI_ONE  # E_11
    return FinDimAlgebra(labels, table, unit, idempotent=idem)


def ground_ring_algebra() -> FinDimAlgebra:
    """The two-dimensional ring spanned by 1 and an idempotent e."""
    table = {
        (0, 0): ((0, QI_ONE),),
        (0, 1): ((1, QI_ONE),),
        (1, 0): ((1, QI_ONE),),
        (1, 1): ((1, QI_ONE),),
    }
    return FinDimAlgebra(("1", "e"), table, unit=(QI_ONE, QI_ZERO), idempotent=(QI_ZERO, QI_ONE))


def circle_matrix_algebra(N: int) -> FinDimAlgebra:
    """Matrix algebra of kernels on the circle grid, with band metadata."""
    grid = make_grid("circle", N)
    alg = matrix_algebra(N, idempotent_corner=False)
    band = []
    for a in range(N):
        for b in range(N):
            band.append(grid.step_distance(a, b))
    return FinDimAlgebra(
        alg.labels, alg.mul_table, alg.unit, idempotent=None, grid=grid, basis_band=band
    )


def matrix_coords(algebra: FinDimAlgebra, m: ExactMatrix):
    """Coordinates of an ExactMatrix in a matrix-unit-basis algebra."""
    n = m.rows
    if n * n != algebra.dim:
        raise ShapeError("matrix size does not match the algebra")
    out = [QI_ZERO] * algebra.dim
    for (i, j), v in m.entries.items():
        out[i * n + j] = v.require_grade_zero()
    return tuple(out)


def algebra_from_json(source) -> FinDimAlgebra:
    """Load an algebra description from a JSON file path, text, or dict."""
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, str) and source.strip().startswith("{"):
        doc = json.loads(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    labels = doc["labels"]
    d = len(labels)
    table = {}
    for i, j, k, c in doc["structure"]:
        key = (int(i), int(j))
        table.setdefault(key, [])
        table[key] = tuple(list(table[key]) + [(int(k), _coerce_coeff(c))])
    unit = tuple(_coerce_coeff(c) for c in doc["unit"])
    idem = None
    if doc.get("idempotent") is not None:
        idem = tuple(_coerce_coeff(c) for c in doc["idempotent"])
    if len(unit) != d or (idem is not None and len(idem) != d):
        raise ShapeError("unit/idempotent length does not match basis")
    return FinDimAlgebra(labels, table, unit, idempotent=idem)


# -- Peirce sector structure --------------------------------------------------


class _SectorBasis:
    __slots__ = ("vectors", "pivot_rows", "solve_rows")

    def __init__(self, vectors, pivot_rows, solve_rows):
        self.vectors = vectors
        self.pivot_rows = pivot_rows
        self.solve_rows = solve_rows  # m x m inverse over the pivot rows

    @property
    def dim(self):
        return len(self.vectors)

    def coords(self, v):
        rhs = [v[r] for r in self.pivot_rows]
        return [
            sum((row[t] * rhs[t] for t in range(len(rhs))), QI_ZERO)
            for row in self.solve_rows
        ]


class SectorStructure:
    """Peirce decomposition data for a ground ring, or the trivial one sector.

    Factor ids are triples (i, j, t): sector e_i A e_j, basis slot t.
    """

    def __init__(self, algebra: FinDimAlgebra, idempotent=None):
        self.algebra = algebra
        self.trivial = idempotent is None
        self._products = {}
        d = algebra.dim
        if self.trivial:
            eye = _SectorBasis(
                [algebra.basis_vector(t) for t in range(d)],
                list(range(d)),
                [[QI_ONE if a == b else QI_ZERO for b in range(d)] for a in range(d)],
            )
            self.sectors = {(0, 0): eye}
            return
        e1 = tuple(idempotent)
        if not algebra.is_idempotent(e1):
            raise BadIdempotent("sector decomposition needs e*e == e")
        e0 = vec_sub(algebra.unit, e1)
        self.units = {0: e0, 1: e1}
        self.sectors = {}
        total = 0
        for i in (0, 1):
            for j in (0, 1):
                vectors = []
                echelon = []  # (pivot_row, reduced vector)
                for t in range(d):
                    v = algebra.mul(self.units[i], algebra.mul(algebra.basis_vector(t), self.units[j]))
                    red = list(v)
                    for prow, pvec in echelon:
                        c = red[prow]
                        if not c.is_zero():
                            red = [x - c * y for x, y in zip(red, pvec)]
                    piv = next((r for r, x in enumerate(red) if not x.is_zero()), None)
                    if piv is None:
                        continue
                    inv = red[piv].inv()
                    red = [x * inv for x in red]
                    echelon.append((piv, red))
                    vectors.append(v)
                self.sectors[(i, j)] = self._make_basis(vectors)
                total += len(vectors)
        if total != d:
            raise BadIdempotent("Peirce sectors do not sum to the algebra")

    def _make_basis(self, vectors):
        d = self.algebra.dim
        m = len(vectors)
        if m == 0:
            return _SectorBasis([], [], [])
        # pick pivot rows making the m x m system invertible, then invert it
        cols = [list(v) for v in vectors]
        pivot_rows = []
        work = []
        for r in range(d):
            cand = work + [[cols[c][r] for c in range(m)]]
            if _rows_independent(cand):
                work = cand
                pivot_rows.append(r)
                if len(pivot_rows) == m:
                    break
        inv = _invert_small([[cols[c][r] for c in range(m)] for r in pivot_rows])
        return _SectorBasis(vectors, pivot_rows, inv)

    def sector_ids(self):
        return [key for key, basis in self.sectors.items() if basis.dim]

    def factor_ids(self):
        out = []
        for (i, j), basis in self.sectors.items():
            out.extend((i, j, t) for t in range(basis.dim))
        return out

    def factor_vector(self, fid):
        i, j, t = fid
        return self.sectors[(i, j)].vectors[t]

    def decompose(self, v):
        """Sector components of v as {(i, j): [(t, coeff), ...]}."""
        out = {}
        if self.trivial:
            comps = [(t, c) for t, c in enumerate(v) if not c.is_zero()]
            if comps:
                out[(0, 0)] = comps
            return out
        for (i, j), basis in self.sectors.items():
            if basis.dim == 0:
                continue
            piece = self.algebra.mul(self.units[i], self.algebra.mul(v, self.units[j]))
            if vec_is_zero(piece):
                continue
            coords = basis.coords(piece)
            comps = [(t, c) for t, c in enumerate(coords) if not c.is_zero()]
            if comps:
                out[(i, j)] = comps
        return out

    def product(self, fid1, fid2):
        """Expansion of factor_vector(fid1) * factor_vector(fid2)."""
        key = (fid1, fid2)
        cached = self._products.get(key)
        if cached is not None:
            return cached
        i1, j1, t1 = fid1
        i2, j2, t2 = fid2
        if j1 != i2:
            raise ShapeError(f"sector mismatch: {fid1} then {fid2}")
        prod = self.algebra.mul(self.factor_vector(fid1), self.factor_vector(fid2))
        if self.trivial:
            result = tuple(((0, 0, t), c) for t, c in enumerate(prod) if not c.is_zero())
        else:
            basis = self.sectors[(i1, j2)]
            result = ()
            if basis.dim and not vec_is_zero(prod):
                coords = basis.coords(prod)
                result = tuple(
                    ((i1, j2, t), c) for t, c in enumerate(coords) if not c.is_zero()
                )
        self._products[key] = result
        return result


def _rows_independent(rows) -> bool:
    work = [list(r) for r in rows]
    m = len(work)
    cols = len(work[0]) if m else 0
    rank = 0
    for c in range(cols):
        piv = next((r for r in range(rank, m) if not work[r][c].is_zero()), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = work[rank][c].inv()
        work[rank] = [x * inv for x in work[rank]]
        for r in range(m):
            if r != rank and not work[r][c].is_zero():
                f = work[r][c]
                work[r] = [x - f * y for x, y in zip(work[r], work[rank])]
        rank += 1
    return rank == m


def _invert_small(matrix):
    m = len(matrix)
    a = [list(row) for row in matrix]
    b = [[QI_ONE if i == j else QI_ZERO for j in range(m)] for i in range(m)]
    for c in range(m):
        piv = next(r for r in range(c, m) if not a[r][c].is_zero())
        a[c], a[piv] = a[piv], a[c]
        b[c], b[piv] = b[piv], b[c]
        inv = a[c][c].inv()
        a[c] = [x * inv for x in a[c]]
        b[c] = [x * inv for x in b[c]]
        for r in range(m):
            if r != c and not a[r][c].is_zero():
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
                b[r] = [x - f * y for x, y in zip(b[r], b[c])]
    return b


def peirce_basis(algebra: FinDimAlgebra, e) -> dict:
    """Sector bases {(i, j): [vectors]} for the decomposition induced by e."""
    sectors = SectorStructure(algebra, idempotent=e)
    return {key: list(basis.vectors) for key, basis in sectors.sectors.items()}


# -- chains -------------------------------------------------------------------


def _key_is_circular(key) -> bool:
    k = len(key)
    return all(key[r][1] == key[(r + 1) % k][0] for r in range(k))


class LambdaChain:
    """Finite combination of circular basis tensors with graded coefficients."""

    __slots__ = ("sectors", "degree", "coeffs")

    def __init__(self, sectors: SectorStructure, degree: int, coeffs=None):
        self.sectors = sectors
        self.degree = int(degree)
        clean = {}
        if coeffs:
            for key, c in coeffs.items():
                s = c if isinstance(c, GradedScalar) else GradedScalar.of(c)
                if not s.is_zero():
                    clean[key] = s
        self.coeffs = clean

    @property
    def ground(self) -> str:
        return "field" if self.sectors.trivial else "lambda"

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LambdaChain") -> "LambdaChain":
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise DegreeError("cannot add chains of different degrees")
        coeffs = dict(self.coeffs)
        for key, c in other.coeffs.items():
            coeffs[key] = coeffs.get(key, GradedScalar.zero()) + c
        return LambdaChain(self.sectors, max(self.degree, other.degree), coeffs)

    def __neg__(self):
        return LambdaChain(self.sectors, self.degree, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "LambdaChain":
        s = s if isinstance(s, GradedScalar) else GradedScalar.of(s)
        return LambdaChain(self.sectors, self.degree, {k: c * s for k, c in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, LambdaChain):
            return NotImplemented
        return self.degree == other.degree and self.coeffs == other.coeffs

    def __repr__(self):
        return f"LambdaChain(degree={self.degree}, terms={len(self.coeffs)}, ground={self.ground})"


def chain_from_factors(sectors: SectorStructure, factors, coefficient=1) -> LambdaChain:
    """Canonical chain for f_0 (x) ... (x) f_k, elements given by coordinates."""
    k = len(factors) - 1
    if k < 0:
        raise DegreeError("need at least one factor")
    decomps = [sectors.decompose(tuple(f)) for f in factors]
    coeff0 = coefficient if isinstance(coefficient, GradedScalar) else GradedScalar.of(coefficient)
    coeffs = {}

    def extend(slot, first_in, prev_out, partial, weight):
        if slot == len(factors):
            if prev_out == first_in:
                key = tuple(partial)
                coeffs[key] = coeffs.get(key, GradedScalar.zero()) + coeff0 * weight
            return
        for (i, j), comps in decomps[slot].items():
            if prev_out is not None and i != prev_out:
                continue
            for t, c in comps:
                extend(slot + 1, first_in if first_in is not None else i, j, partial + [(i, j, t)], weight * c)

    extend(0, None, None, [], GradedScalar.one())
    return LambdaChain(sectors, k, coeffs)


def tensor_power_chain(sectors: SectorStructure, element, factors: int, coefficient=1) -> LambdaChain:
    return chain_from_factors(sectors, [element] * factors, coefficient)


def _merge_key(sectors, key, r, coeff, acc, sign):
    """Accumulate key with factors r, r+1 merged (r+1 may wrap to 0)."""
    k = len(key) - 1
    if r < k:
        fid1, fid2 = key[r], key[r + 1]
        rest_before, rest_after = key[:r], key[r + 2 :]
        for fid, c in sectors.product(fid1, fid2):
            new_key = rest_before + (fid,) + rest_after
            val = acc.get(new_key, GradedScalar.zero()) + coeff * GradedScalar.of(c * sign)
            acc[new_key] = val
    else:  # wrap: last factor multiplies the first from the left
        fid1, fid2 = key[k], key[0]
        middle = key[1:k]
        for fid, c in sectors.product(fid1, fid2):
            new_key = (fid,) + middle
            val = acc.get(new_key, GradedScalar.zero()) + coeff * GradedScalar.of(c * sign)
            acc[new_key] = val


def b_prime(chain: LambdaChain) -> LambdaChain:
    """Bar boundary: alternating adjacent merges, no wrap-around term."""
    k = chain.degree
    if k <= 0:
        return LambdaChain(chain.sectors, max(k - 1, -1), {})
    acc = {}
    for key, coeff in chain.coeffs.items():
        for r in range(k):
            _merge_key(chain.sectors, key, r, coeff, acc, QI_ONE if r % 2 == 0 else -QI_ONE)
    return LambdaChain(chain.sectors, k - 1, acc)


def hochschild_b(chain: LambdaChain) -> LambdaChain:
    """Bar boundary plus the signed wrap-around merge."""
    k = chain.degree
    if k <= 0:
        return LambdaChain(chain.sectors, max(k - 1, -1), {})
    out = b_prime(chain)
    acc = dict(out.coeffs)
    wrap_sign = QI_ONE if k % 2 == 0 else -QI_ONE
    for key, coeff in chain.coeffs.items():
        _merge_key(chain.sectors, key, k, coeff, acc, wrap_sign)
    return LambdaChain(chain.sectors, k - 1, acc)


def cyclic_T(chain: LambdaChain) -> LambdaChain:
    """Signed rotation: f_0 (x) ... (x) f_k -> (-1)^k f_1 (x) ... (x) f_0."""
    k = chain.degree
    sign = QI_ONE if k % 2 == 0 else -QI_ONE
    acc = {}
    for key, coeff in chain.coeffs.items():
        new_key = key[1:] + key[:1]
        acc[new_key] = acc.get(new_key, GradedScalar.zero()) + coeff * GradedScalar.of(sign)
    return LambdaChain(chain.sectors, k, acc)


def project_cyclic(chain: LambdaChain) -> LambdaChain:
    """Averaging projector onto rotation-invariant chains (characteristic 0)."""
    k = chain.degree
    total = chain
    current = chain
    for _ in range(k):
        current = cyclic_T(current)
        total = total + current
    return total.scale(Fraction(1, k + 1))


def is_cyclic(chain: LambdaChain) -> bool:
    return cyclic_T(chain) == chain


# -- Chern chains -------------------------------------------------------------


def chern_idempotent(algebra: FinDimAlgebra, p, q: int) -> LambdaChain:
    """Even chain (2*pi*i)^q q!/(q/2)! p^(x)(q+1) over the ground field."""
    if q % 2 != 0 or q < 0:
        raise DegreeError("the idempotent chain exists in even degrees only")
    if not algebra.is_idempotent(tuple(p)):
        raise BadIdempotent("p*p != p")
    coeff = GradedScalar.of(Fraction(factorial(q), factorial(q // 2)), q)
    sectors = SectorStructure(algebra)
    return tensor_power_chain(sectors, tuple(p), q + 1, coeff)


def chern_residue(algebra: FinDimAlgebra, P, e, q: int) -> LambdaChain:
    """Residue chain (2*pi*i)^q (2q)!/q! (P-e)^(x)(2q+1) over the ring K+Ke."""
    if q < 0:
        raise DegreeError("negative chain index")
    P, e = tuple(P), tuple(e)
    if not algebra.is_idempotent(P) or not algebra.is_idempotent(e):
        raise BadIdempotent("both inputs must be idempotents")
    R = vec_sub(P, e)
    coeff = GradedScalar.of(Fraction(factorial(2 * q), factorial(q)), q)
    sectors = SectorStructure(algebra, idempotent=e)
    return tensor_power_chain(sectors, R, 2 * q + 1, coeff)


def separability_check() -> dict:
    """Verify the splitting s of the multiplication of the ring K + Ke.

    s(1) = e(x)e + (1-e)(x)(1-e), s(e) = e(x)e; the report records that
    mu . s = id and that s commutes with both module actions of 1 and e.
    """
    lam = ground_ring_algebra()
    one, e = lam.unit, lam.idempotent
    one_minus_e = vec_sub(one, e)

    def tensor(u, v):
        return tuple(a * b for a in u for b in v)

    def mu(t):
        d = lam.dim
        out = vec_zero(d)
        for a in range(d):
            for b in range(d):
                c = t[a * d + b]
                if not c.is_zero():
                    out = vec_add(out, vec_scale(lam.mul(lam.basis_vector(a), lam.basis_vector(b)), c))
        return out

    def act_left(x, t):
        d = lam.dim
        out = [QI_ZERO] * (d * d)
        for a in range(d):
            for b in range(d):
                c = t[a * d + b]
                if c.is_zero():
                    continue
                xa = lam.mul(x, lam.basis_vector(a))
                for k, ck in enumerate(xa):
                    out[k * d + b] = out[k * d + b] + c * ck
        return tuple(out)

    def act_right(t, x):
        d = lam.dim
        out = [QI_ZERO] * (d * d)
        for a in range(d):
            for b in range(d):
                c = t[a * d + b]
                if c.is_zero():
                    continue
                bx = lam.mul(lam.basis_vector(b), x)
                for k, ck in enumerate(bx):
                    out[a * d + k] = out[a * d + k] + c * ck
        return tuple(out)

    s_one = vec_add(tensor(e, e), tensor(one_minus_e, one_minus_e))
    s_e = tensor(e, e)

    def s(x):
        # x = alpha*1 + beta*e in coordinates over the basis {1, e}
        alpha, beta = x
        return vec_add(vec_scale(s_one, alpha), vec_scale(s_e, beta))

    report = {
        "mu(s(1))=1": mu(s_one) == one,
        "mu(s(e))=e": mu(s_e) == e,
        "e.s(1)=s(e)": act_left(e, s_one) == s_e,
        "s(1).e=s(e)": act_right(s_one, e) == s_e,
        "bimodule": all(
            act_left(x, s(y)) == s(lam.mul(x, y)) and act_right(s(y), x) == s(lam.mul(y, x))
            for x in (one, e)
            for y in (one, e)
        ),
    }
    return report


# -- homology ranks -----------------------------------------------------------


def _enumerate_keys(sectors: SectorStructure, degree: int, allowed=None):
    """All circular keys of the given degree (factors from ``allowed`` if set)."""
    fids = sectors.factor_ids() if allowed is None else list(allowed)
    if sectors.trivial:
        return [tuple(key) for key in itertools.product(fids, repeat=degree + 1)]
    by_in = {}
    for fid in fids:
        by_in.setdefault(fid[0], []).append(fid)
    keys = []

    def extend(partial):
        if len(partial) == degree + 1:
            if partial[-1][1] == partial[0][0]:
                keys.append(tuple(partial))
            return
        for fid in by_in.get(partial[-1][1], ()):
            extend(partial + [fid])

    for fid in fids:
        extend([fid])
    return keys


def _boundary_columns(sectors, keys, lower_index, use_wrap: bool):
    """Sparse columns of b (or b' when use_wrap is False) on basis keys."""
    columns = []
    for key in keys:
        k = len(key) - 1
        acc = {}
        if k >= 1:
            chain = LambdaChain(sectors, k, {key: GradedScalar.one()})
            image = hochschild_b(chain) if use_wrap else b_prime(chain)
            for ikey, c in image.coeffs.items():
                acc[lower_index[ikey]] = c.require_grade_zero()
        columns.append(acc)
    return columns


def _signed_orbits(keys, degree: int):
    """Rotation orbits with signs; returns lists of [(key, +-1), ...].

    Orbits whose period carries an inconsistent sign contribute no invariant
    and are dropped.
    """
    sign_step = 1 if degree % 2 == 0 else -1
    seen = set()
    orbits = []
    for key in keys:
        if key in seen:
            continue
        members = []
        cur = key
        sign = 1
        closed = True
        for _ in range(degree + 1):
            if cur == key and members:
                break
            members.append((cur, sign))
            seen.add(cur)
            cur = cur[1:] + cur[:1]
            sign *= sign_step
        if cur == key and sign != 1:
            closed = False  # sign obstruction: signed sum cancels
        if closed:
            orbits.append(members)
    return orbits


def _invariant_boundary_columns(sectors, orbits, lower_index):
    columns = []
    for members in orbits:
        acc = {}
        degree = len(members[0][0]) - 1
        if degree >= 1:
            coeffs = {}
            for key, sign in members:
                coeffs[key] = coeffs.get(key, GradedScalar.zero()) + GradedScalar.of(sign)
            image = b_prime(LambdaChain(sectors, degree, coeffs))
            for ikey, c in image.coeffs.items():
                acc[lower_index[ikey]] = c.require_grade_zero()
        columns.append(acc)
    return columns


def homology_ranks(algebra: FinDimAlgebra, ground: str, k_max: int, budget=None) -> dict:
    """Exact Hochschild and cyclic homology ranks for degrees 0..k_max.

    Hochschild homology is computed from the full complex with the wrapped
    boundary; cyclic homology from the rotation-invariant subcomplex with the
    bar boundary (the characteristic-zero model of the quotient complex).
    """
    if ground not in ("field", "lambda"):
        raise BadParameter("ground must be 'field' or 'lambda'")
    if ground == "lambda":
        if algebra.idempotent is None:
            raise BadIdempotent("algebra carries no distinguished idempotent")
        sectors = SectorStructure(algebra, idempotent=algebra.idempotent)
    else:
        sectors = SectorStructure(algebra)
    budget = budget if budget is not None else dimension_budget()

    keys = {}
    total = 0
    for k in range(k_max + 2):
        keys[k] = _enumerate_keys(sectors, k)
        total += len(keys[k])
        if total > budget:
            raise TooLarge(f"chain spaces exceed budget {budget}")
    index = {k: {key: i for i, key in enumerate(keys[k])} for k in keys}

    hochschild = []
    b_rank = {0: 0}
    for k in range(1, k_max + 2):
        cols = _boundary_columns(sectors, keys[k], index[k - 1], use_wrap=True)
        b_rank[k] = sparse_rank(cols)
    for k in range(k_max + 1):
        hochschild.append(len(keys[k]) - b_rank[k] - b_rank[k + 1])

    cyclic = []
    orbits = {k: _signed_orbits(keys[k], k) for k in range(k_max + 2)}
    bp_rank = {0: 0}
    for k in range(1, k_max + 2):
        cols = _invariant_boundary_columns(sectors, orbits[k], index[k - 1])
        bp_rank[k] = sparse_rank(cols)
    for k in range(k_max + 1):
        cyclic.append(len(orbits[k]) - bp_rank[k] - bp_rank[k + 1])

    return {"hochschild": hochschild, "cyclic": cyclic}


# -- support filtration --------------------------------------------------------


def chain_support(chain: LambdaChain) -> SupportRelation:
    """Smallest diagonal band containing the support of every factor."""
    algebra = chain.sectors.algebra
    if algebra.grid is None or algebra.basis_band is None:
        raise BadParameter("algebra elements carry no supports")
    radius = 0
    for key in chain.coeffs:
        for (_, _, t) in key:
            radius = max(radius, algebra.basis_band[t])
    return SupportRelation.band(algebra.grid, radius)


def _band_composition(grid: Grid, w: int) -> int:
    return min(2 * w, grid.diameter)


def local_homology(N: int, widths, max_degree: int = 2, budget=None) -> dict:
    """Support-filtered cyclic homology table on the circle grid Z_N.

    For each band width w the degree-k entry is
        dim ker(b'|_{C^{lam,w}_k}) - rank(b'|_{C^{lam,w'}_{k+1}})
    with w' the largest width whose self-composition stays inside band w.
    The boundary of a width-w' chain lives in band 2w', so the denominator
    image is already inside the width-w subcomplex.  A stabilization flag per
    degree marks agreement between consecutive widths.
    """
    algebra = circle_matrix_algebra(N)
    grid = algebra.grid
    sectors = SectorStructure(algebra)
    budget = budget if budget is not None else dimension_budget()
    widths = sorted(set(int(w) for w in widths))
    if any(w < 0 for w in widths):
        raise BadParameter("widths must be nonnegative")

    def allowed_ids(w):
        return [
            (0, 0, t)
            for t in range(algebra.dim)
            if algebra.basis_band[t] <= min(w, grid.diameter)
        ]

    def inner_width(w):
        w = min(w, grid.diameter)
        if _band_composition(grid, w) <= w:
            return w
        best = 0
        for cand in range(w + 1):
            if _band_composition(grid, cand) <= w:
                best = cand
        return best

    table = {}
    total = 0
    rank_cache = {}
    for w in widths:
        ids_w = allowed_ids(w)
        wp = inner_width(w)
        ids_wp = allowed_ids(wp)
        rows = []
        for k in range(max_degree + 1):
            keys_k = _enumerate_keys(sectors, k, allowed=ids_w)
            index_k = {key: i for i, key in enumerate(keys_k)}
            total += len(keys_k)
            orbits_k = _signed_orbits(keys_k, k)
            if k == 0:
                ker_dim = len(orbits_k)
            else:
                lower = _enumerate_keys(sectors, k - 1)
                lower_index = {key: i for i, key in enumerate(lower)}
                cols = _invariant_boundary_columns(sectors, orbits_k, lower_index)
                ker_dim = len(orbits_k) - sparse_rank(cols)

            cache_key = (wp, k + 1)
            if cache_key not in rank_cache:
                keys_up = _enumerate_keys(sectors, k + 1, allowed=ids_wp)
                total += len(keys_up)
                if total > budget:
                    raise TooLarge(f"chain spaces exceed budget {budget}")
                orbits_up = _signed_orbits(keys_up, k + 1)
                cols_up = _invariant_boundary_columns(sectors, orbits_up, index_k)
                rank_cache[cache_key] = sparse_rank(cols_up)
            rows.append(ker_dim - rank_cache[cache_key])
            if total > budget:
                raise TooLarge(f"chain spaces exceed budget {budget}")
        table[w] = rows

    flags = {}
    for k in range(max_degree + 1):
        per_degree = []
        for prev, cur in zip(widths, widths[1:]):
            per_degree.append(table[prev][k] == table[cur][k])
        flags[k] = per_degree
    return {
        "widths": widths,
        "ranks": table,
        "stabilized": flags,
        "inner_widths": {w: inner_width(w) for w in widths},
    }
