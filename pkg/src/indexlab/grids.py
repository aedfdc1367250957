"""Discretized circle and torus grids carrying operator kernels.

Kernels store the operator matrix directly, under the convention
M[x,y] = K(x,y) * spacing^dim, so composition of kernels is plain matrix
multiplication and pairing sums reduce to entry products.  Exact kernels
(rational banded matrices) and float kernels (spectral projectors) are
separate flavors; nothing coerces silently between them.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import BadParameter, GapClosed, ShapeError
from .linalg import ExactMatrix
from .scalars import GradedScalar


class Grid:
    """Periodic point lattice: circle Z_N or torus Z_N x Z_N."""

    __slots__ = ("kind", "N", "_dist")

    def __init__(self, kind: str, N: int):
        if kind not in ("circle", "torus"):
            raise BadParameter(f"unknown grid kind {kind!r}")
        if N < 2:
            raise BadParameter("need at least two points per direction")
        self.kind = kind
        self.N = int(N)
        self._dist = None

    @property
    def dim(self) -> int:
        return 1 if self.kind == "circle" else 2

    @property
    def npoints(self) -> int:
        return self.N**self.dim

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.N

    @property
    def diameter(self) -> int:
        return self.N // 2

    def points(self):
        return range(self.npoints)

    def coords(self, p: int):
        if self.kind == "circle":
            return p
        return divmod(p, self.N)

    def index(self, coords) -> int:
        if self.kind == "circle":
            return coords % self.N
        x, y = coords
        return (x % self.N) * self.N + (y % self.N)

    def _wrap(self, d: int) -> int:
        d %= self.N
        if d > self.N // 2:
            d -= self.N
        return d

    def wrap_disp(self, frm: int, to: int):
        """Shortest-wrap displacement from ``frm`` to ``to`` in step units."""
        if self.kind == "circle":
            return self._wrap(to - frm)
        fx, fy = self.coords(frm)
        tx, ty = self.coords(to)
        return (self._wrap(tx - fx), self._wrap(ty - fy))

    def step_distance(self, p: int, q: int) -> int:
        if self.kind == "circle":
            return abs(self._wrap(q - p))
        dx, dy = self.wrap_disp(p, q)
        return max(abs(dx), abs(dy))

    def distance(self, p: int, q: int) -> float:
        return self.step_distance(p, q) * self.spacing

    def step_distance_matrix(self) -> np.ndarray:
        if self._dist is None:
            P = self.npoints
            if self.kind == "circle":
                idx = np.arange(P)
                d = np.abs((idx[:, None] - idx[None, :] + P) % P)
                d = np.minimum(d, P - d)
            else:
                ix, iy = np.divmod(np.arange(P), self.N)
                dx = np.abs((ix[:, None] - ix[None, :]) % self.N)
                dx = np.minimum(dx, self.N - dx)
                dy = np.abs((iy[:, None] - iy[None, :]) % self.N)
                dy = np.minimum(dy, self.N - dy)
                d = np.maximum(dx, dy)
            self._dist = d
        return self._dist

    def __repr__(self):
        return f"Grid({self.kind}, N={self.N})"


def make_grid(kind: str, N: int) -> Grid:
    return Grid(kind, N)


class SupportRelation:
    """Set of grid-point pairs; the band radius summarizes the spread."""

    __slots__ = ("grid", "pairs")

    def __init__(self, grid: Grid, pairs):
        self.grid = grid
        self.pairs = frozenset(pairs)

    @classmethod
    def band(cls, grid: Grid, radius: int) -> "SupportRelation":
        pts = list(grid.points())
        return cls(
            grid,
            {
                (p, q)
                for p in pts
                for q in pts
                if grid.step_distance(p, q) <= radius
            },
        )

    @property
    def radius(self) -> int:
        return max((self.grid.step_distance(p, q) for p, q in self.pairs), default=0)

    def compose(self, other: "SupportRelation") -> "SupportRelation":
        by_first = {}
        for y, z in other.pairs:
            by_first.setdefault(y, []).append(z)
        out = set()
        for x, y in self.pairs:
            for z in by_first.get(y, ()):
                out.add((x, z))
        return SupportRelation(self.grid, out)

    def union(self, other: "SupportRelation") -> "SupportRelation":
        return SupportRelation(self.grid, self.pairs | other.pairs)

    def issubset(self, other: "SupportRelation") -> bool:
        return self.pairs <= other.pairs

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __eq__(self, other):
        if not isinstance(other, SupportRelation):
            return NotImplemented
        return self.pairs == other.pairs

    def __len__(self):
        return len(self.pairs)

    def __repr__(self):
        return f"SupportRelation({len(self.pairs)} pairs, radius={self.radius})"


class GridKernel:
    """Operator kernel on a grid; exact (sparse rational blocks) or float."""

    __slots__ = ("grid", "n", "exact", "blocks", "data")

    def __init__(self, grid: Grid, n: int, exact: bool, blocks=None, data=None):
        self.grid = grid
        self.n = int(n)
        self.exact = bool(exact)
        if exact:
            clean = {}
            if blocks:
                for (p, q), m in blocks.items():
                    if m.shape() != (self.n, self.n):
                        raise ShapeError("kernel block has wrong fiber dimension")
                    if not m.is_zero():
                        clean[(p, q)] = m
            self.blocks = clean
            self.data = None
        else:
            P = grid.npoints
            if data is None:
                data = np.zeros((P, P, self.n, self.n), dtype=complex)
            if data.shape != (P, P, self.n, self.n):
                raise ShapeError("float kernel has wrong shape")
            self.blocks = None
            self.data = data

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, grid: Grid, n: int = 1, exact: bool = True) -> "GridKernel":
        if exact:
            return cls(grid, n, True, {})
        return cls(grid, n, False, data=None)

    @classmethod
    def identity(cls, grid: Grid, n: int = 1, exact: bool = True) -> "GridKernel":
        if exact:
            eye = ExactMatrix.identity(n)
            return cls(grid, n, True, {(p, p): eye for p in grid.points()})
        P = grid.npoints
        data = np.zeros((P, P, n, n), dtype=complex)
        for p in range(P):
            data[p, p] = np.eye(n)
        return cls(grid, n, False, data=data)

    @classmethod
    def from_blocks(cls, grid: Grid, n: int, blocks) -> "GridKernel":
        return cls(grid, n, True, blocks)

    @classmethod
    def from_dense(cls, grid: Grid, n: int, data: np.ndarray) -> "GridKernel":
        return cls(grid, n, False, data=np.asarray(data, dtype=complex))

    # -- access ---------------------------------------------------------
    def block(self, p: int, q: int):
        if self.exact:
            return self.blocks.get((p, q), ExactMatrix.zeros(self.n, self.n))
        return self.data[p, q]

    def is_zero(self) -> bool:
        if self.exact:
            return not self.blocks
        return not np.any(self.data)

    def __eq__(self, other):
        if not isinstance(other, GridKernel) or not (self.exact and other.exact):
            return NotImplemented
        return self.n == other.n and self.blocks == other.blocks

    def to_array(self) -> np.ndarray:
        """Dense (P*n, P*n) complex matrix."""
        P = self.grid.npoints
        if self.exact:
            out = np.zeros((P, P, self.n, self.n), dtype=complex)
            for (p, q), m in self.blocks.items():
                out[p, q] = m.to_complex()
        else:
            out = self.data
        return out.transpose(0, 2, 1, 3).reshape(P * self.n, P * self.n)

    # -- arithmetic -------------------------------------------------------
    def _check(self, other):
        if self.grid is not other.grid and (
            self.grid.kind != other.grid.kind or self.grid.N != other.grid.N
        ):
            raise ShapeError("kernels live on different grids")
        if self.n != other.n:
            raise ShapeError("fiber dimension mismatch")
        if self.exact != other.exact:
            raise ShapeError("cannot mix exact and float kernels")

    def __add__(self, other: "GridKernel") -> "GridKernel":
        self._check(other)
        if self.exact:
            blocks = dict(self.blocks)
            for k, m in other.blocks.items():
                blocks[k] = blocks.get(k, ExactMatrix.zeros(self.n, self.n)) + m
            return GridKernel(self.grid, self.n, True, blocks)
        return GridKernel(self.grid, self.n, False, data=self.data + other.data)

    def __neg__(self) -> "GridKernel":
        if self.exact:
            return GridKernel(self.grid, self.n, True, {k: -m for k, m in self.blocks.items()})
        return GridKernel(self.grid, self.n, False, data=-self.data)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "GridKernel") -> "GridKernel":
        self._check(other)
        if self.exact:
            by_row = {}
            for (q, r), m in other.blocks.items():
                by_row.setdefault(q, []).append((r, m))
            acc = {}
            for (p, q), m in self.blocks.items():
                for r, w in by_row.get(q, ()):
                    key = (p, r)
                    prod = m * w
                    cur = acc.get(key)
                    acc[key] = prod if cur is None else cur + prod
            return GridKernel(self.grid, self.n, True, acc)
        P = self.grid.npoints
        a = self.to_array()
        b = other.to_array()
        c = (a @ b).reshape(P, self.n, P, self.n).transpose(0, 2, 1, 3)
        return GridKernel(self.grid, self.n, False, data=np.ascontiguousarray(c))

    def scale(self, s) -> "GridKernel":
        if self.exact:
            return GridKernel(
                self.grid, self.n, True, {k: m.scale(s) for k, m in self.blocks.items()}
            )
        return GridKernel(self.grid, self.n, False, data=self.data * complex(s))

    def mul_function(self, values) -> "GridKernel":
        """Right multiplication by the diagonal operator of a grid function."""
        if self.exact:
            return GridKernel(
                self.grid,
                self.n,
                True,
                {(p, q): m.scale(values[q]) for (p, q), m in self.blocks.items()},
            )
        vals = np.asarray([complex(v) for v in values])
        return GridKernel(
            self.grid, self.n, False, data=self.data * vals[None, :, None, None]
        )

    def trace(self):
        if self.exact:
            t = GradedScalar.zero()
            for (p, q), m in self.blocks.items():
                if p == q:
                    t = t + m.trace()
            return t
        return complex(np.trace(self.to_array()))

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.to_array()))

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"GridKernel({self.grid!r}, n={self.n}, {mode})"


def kernel_support(kernel: GridKernel, threshold: float = 0.0) -> SupportRelation:
    """Pairs carrying a block above threshold (exact mode: any nonzero block)."""
    if kernel.exact:
        return SupportRelation(kernel.grid, set(kernel.blocks))
    norms = np.sqrt(np.sum(np.abs(kernel.data) ** 2, axis=(2, 3)))
    pairs = {(int(p), int(q)) for p, q in zip(*np.nonzero(norms > threshold))}
    return SupportRelation(kernel.grid, pairs)


def truncate_support(kernel: GridKernel, radius: int) -> GridKernel:
    """Zero all blocks farther than ``radius`` steps from the diagonal."""
    if radius < 0:
        raise BadParameter("radius must be nonnegative")
    g = kernel.grid
    if kernel.exact:
        return GridKernel(
            g,
            kernel.n,
            True,
            {k: m for k, m in kernel.blocks.items() if g.step_distance(*k) <= radius},
        )
    mask = (g.step_distance_matrix() <= radius).astype(float)
    return GridKernel(g, kernel.n, False, data=kernel.data * mask[:, :, None, None])


def random_smoothing(grid: Grid, band: int, seed: int, n: int = 1) -> GridKernel:
    """Reproducible exact kernel with rational entries inside the given band."""
    if band < 0:
        raise BadParameter("band must be nonnegative")
    import random as _random

    rng = _random.Random(seed)
    blocks = {}
    for p in grid.points():
        for q in grid.points():
            if grid.step_distance(p, q) > band:
                continue
            m = ExactMatrix(
                n,
                n,
                {
                    (i, j): Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                    for i in range(n)
                    for j in range(n)
                },
            )
            if not m.is_zero():
                blocks[(p, q)] = m
    return GridKernel(grid, n, True, blocks)


# -- two-band lattice model -------------------------------------------------


def _qwz_momentum_data(N: int, m: float):
    k = 2.0 * np.pi * np.arange(N) / N
    kx, ky = np.meshgrid(k, k, indexing="ij")
    hx = np.sin(kx)
    hy = np.sin(ky)
    hz = float(m) + np.cos(kx) + np.cos(ky)
    r = np.sqrt(hx**2 + hy**2 + hz**2)
    return hx, hy, hz, r


def _check_gap(N: int, m) -> None:
    m_exact = Fraction(m) if not isinstance(m, float) else None
    if m_exact is not None and abs(m_exact) in (0, 2, 4):
        raise GapClosed(f"gap closes at |mass| = {abs(m_exact)}")
    _, _, _, r = _qwz_momentum_data(N, float(m))
    if float(np.min(r)) < 1e-12:
        raise GapClosed("two-band spectrum touches zero on the momentum grid")


def qwz_projector(N: int, m) -> GridKernel:
    """Spectral projector below the gap of the two-band model on the torus.

    Built momentum by momentum and Fourier-transformed to real space, so the
    result is exactly translation invariant, Hermitian, and idempotent to
    rounding error.  Fiber dimension is 2.
    """
    grid = make_grid("torus", N)
    _check_gap(N, m)
    hx, hy, hz, r = _qwz_momentum_data(N, float(m))
    p_k = np.zeros((N, N, 2, 2), dtype=complex)
    p_k[:, :, 0, 0] = 0.5 * (1.0 - hz / r)
    p_k[:, :, 1, 1] = 0.5 * (1.0 + hz / r)
    p_k[:, :, 0, 1] = -0.5 * (hx - 1j * hy) / r
    p_k[:, :, 1, 0] = -0.5 * (hx + 1j * hy) / r
    block_of_disp = np.fft.ifft2(p_k, axes=(0, 1))

    P = grid.npoints
    ix, iy = np.divmod(np.arange(P), N)
    dx = (ix[:, None] - ix[None, :]) % N
    dy = (iy[:, None] - iy[None, :]) % N
    data = block_of_disp[dx, dy]
    return GridKernel(grid, 2, False, data=data)


def qwz_chern_momentum(N: int, m) -> float:
    """Independent topological-number oracle: plaquette field strength of the
    occupied band over the momentum grid (integer-valued when gapped)."""
    _check_gap(N, m)
    hx, hy, hz, r = _qwz_momentum_data(N, float(m))
    # occupied eigenvector, branch chosen away from the degenerate pole
    u = np.zeros((N, N, 2), dtype=complex)
    main = np.abs(hz + r) > 1e-8
    u[main, 0] = hx[main] - 1j * hy[main]
    u[main, 1] = -(hz[main] + r[main])
    alt = ~main
    u[alt, 0] = hz[alt] - r[alt]
    u[alt, 1] = hx[alt] + 1j * hy[alt]
    u /= np.linalg.norm(u, axis=2)[:, :, None]

    ux = np.einsum("ijc,ijc->ij", u.conj(), np.roll(u, -1, axis=0))
    uy = np.einsum("ijc,ijc->ij", u.conj(), np.roll(u, -1, axis=1))
    plaq = ux * np.roll(uy, -1, axis=0) * np.conj(np.roll(ux, -1, axis=1)) * np.conj(uy)
    return float(np.sum(np.angle(plaq)) / (2.0 * np.pi))
