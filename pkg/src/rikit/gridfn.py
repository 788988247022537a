"""Piecewise-constant functions on geometric grids over (0, 1).

A grid is an increasing list of breakpoints ending at 1; the implicit left
end is 0, so the first cell (0, x0) acts as a sentinel that absorbs
everything below the finest resolved scale.  Functions are stored as one
value per cell, with ``numpy.inf`` allowed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridError",
    "ParameterError",
    "Grid",
    "GridFunction",
    "QuadRule",
    "make_grid",
    "rearrange",
    "decreasing_step",
    "double_star",
    "dilate",
    "pairing",
    "running_integral",
    "common_refinement",
    "quad_rule",
    "gauss_legendre_pieces",
    "power_log_integrals",
]

SNAP = 1e-12


class ParameterError(ValueError):
    """Invalid numeric parameters."""


class GridError(ValueError):
    """Grid mismatch between operands."""


class Grid:
    """Breakpoints x0 < x1 < ... < 1 with implicit left end 0."""

    __slots__ = ("breakpoints", "edges", "lengths", "K", "t_min", "_key")

    def __init__(self, breakpoints, K=None, t_min=None):
        b = np.array(breakpoints, dtype=float).ravel()
        if b.size == 0:
            raise ParameterError("grid needs at least one breakpoint")
        if not (b[0] > 0 and np.all(np.diff(b) > 0)):
            raise ParameterError("breakpoints must be positive and strictly increasing")
        if b[-1] != 1.0:
            raise ParameterError("last breakpoint must equal 1")
        b.setflags(write=False)
        self.breakpoints = b
        e = np.concatenate(([0.0], b))
        e.setflags(write=False)
        self.edges = e
        ln = np.diff(e)
        ln.setflags(write=False)
        self.lengths = ln
        self.K = K
        self.t_min = float(b[0]) if t_min is None else float(t_min)
        self._key = b.tobytes()

    @property
    def n_cells(self):
        return self.breakpoints.size

    def __len__(self):
        return self.n_cells

    def __eq__(self, other):
        return isinstance(other, Grid) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Grid(n_cells={self.n_cells}, t_min={self.breakpoints[0]:.3g}, K={self.K})"

    def cell_index(self, t):
        """Index of the cell (a, b] containing each t in (0, 1]."""
        t = np.asarray(t, dtype=float)
        return np.clip(np.searchsorted(self.breakpoints, t, side="left"), 0, self.n_cells - 1)

    def union(self, points):
        """Grid whose breakpoints are ours plus ``points`` (near-duplicates snapped)."""
        pts = np.asarray(points, dtype=float).ravel()
        pts = pts[(pts > 0) & (pts < 1)]
        if pts.size == 0:
            return self
        b = self.breakpoints
        pos = np.clip(np.searchsorted(b, pts), 0, b.size - 1)
        near = np.abs(b[pos] - pts) <= SNAP * b[pos]
        pos0 = np.clip(pos - 1, 0, b.size - 1)
        near |= np.abs(b[pos0] - pts) <= SNAP * b[pos0]
        pts = np.unique(pts[~near])
        if pts.size == 0:
            return self
        keep = np.concatenate(([True], np.diff(pts) > SNAP * pts[1:]))
        merged = np.union1d(b, pts[keep])
        return Grid(merged, K=self.K, t_min=min(self.t_min, float(merged[0])))

    def contains(self, other):
        """True when every breakpoint of ``other`` is (up to snapping) one of ours."""
        b = self.breakpoints
        pos = np.clip(np.searchsorted(b, other.breakpoints), 0, b.size - 1)
        ok = np.abs(b[pos] - other.breakpoints) <= SNAP * other.breakpoints
        pos0 = np.clip(pos - 1, 0, b.size - 1)
        ok |= np.abs(b[pos0] - other.breakpoints) <= SNAP * other.breakpoints
        return bool(np.all(ok))

    def refine(self):
        """Grid with doubled density; a superset of this one."""
        if self.K is not None:
            fine = make_grid(2 * self.K, self.t_min, _check=False)
            return fine.union(self.breakpoints)
        e = self.edges
        mids = np.sqrt(e[1:-1] * e[2:])
        return self.union(mids)


def make_grid(K=16, t_min=2.0 ** -40, _check=True):
    """Geometric grid with K points per dyadic octave down to ``t_min``.

    >>> make_grid(1, 1 / 8).breakpoints.tolist()
    [0.125, 0.25, 0.5, 1.0]
    """
    if _check:
        if int(K) != K or K < 1:
            raise ParameterError("K must be a positive integer")
        if not (0 < t_min < 0.5):
            raise ParameterError("t_min must lie in (0, 1/2)")
    K = int(K)
    n = int(math.ceil(K * math.log2(1.0 / t_min) - 1e-9))
    pts = 2.0 ** (-np.arange(n + 1) / K)
    pts = pts[pts > t_min * (1 + SNAP)]
    b = np.unique(np.concatenate((pts, [t_min])))
    return Grid(b, K=K, t_min=t_min)


class GridFunction:
    """Nonnegative extended-real function, constant on each grid cell."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        v = np.array(values, dtype=float).ravel()
        if v.size != grid.n_cells:
            raise GridError(f"{v.size} values for {grid.n_cells} cells")
        if np.any(np.isnan(v)):
            raise ParameterError("NaN value")
        if np.any(v < 0):
            raise ParameterError("values must be nonnegative")
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    def __repr__(self):
        return f"GridFunction({self.grid!r})"

    def __eq__(self, other):
        return (
            isinstance(other, GridFunction)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @classmethod
    def constant(cls, grid, c=1.0):
        return cls(grid, np.full(grid.n_cells, float(c)))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n_cells))

    @classmethod
    def indicator(cls, grid, a, b):
        """chi_(a, b); a and b are inserted as breakpoints so the result is exact."""
        if not (0 <= a < b <= 1):
            raise ParameterError("need 0 <= a < b <= 1")
        g = grid.union([x for x in (a, b) if 0 < x < 1])
        mid = 0.5 * (g.edges[:-1] + g.edges[1:])
        return cls(g, ((mid > a) & (mid < b)).astype(float))

    @classmethod
    def from_cell_integrals(cls, grid, integrals):
        return cls(grid, np.asarray(integrals, dtype=float) / grid.lengths)

    @property
    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def integral(self):
        return _dot(self.values, self.grid.lengths)

    def sup(self):
        return float(self.values.max())

    def is_nonincreasing(self):
        return bool(np.all(np.diff(self.values) <= 0))

    def on(self, grid: Grid):
        """The same function re-expressed on a refinement ``grid``."""
        if grid == self.grid:
            return self
        if not grid.contains(self.grid):
            raise GridError("target grid is not a refinement")
        mid = 0.5 * (grid.edges[:-1] + grid.edges[1:])
        return GridFunction(grid, self.values[self.grid.cell_index(mid)])

    def __add__(self, other):
        f, g = common_refinement(self, other)
        return GridFunction(f.grid, f.values + g.values)

    def scale(self, c):
        if c < 0:
            raise ParameterError("scale must be nonnegative")
        v = self.values * c if c > 0 else np.zeros_like(self.values)
        return GridFunction(self.grid, v)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            f, g = common_refinement(self, other)
            a, b = f.values, g.values
            with np.errstate(invalid="ignore"):
                v = np.where((a == 0) | (b == 0), 0.0, a * b)
            return GridFunction(f.grid, v)
        return self.scale(float(other))

    __rmul__ = __mul__

    def maximum(self, other):
        f, g = common_refinement(self, other)
        return GridFunction(f.grid, np.maximum(f.values, g.values))

    def to_json(self):
        cells = []
        e = self.grid.edges
        for i, v in enumerate(self.values):
            cells.append(
                {"left": float(e[i]), "right": float(e[i + 1]), "value": "inf" if np.isinf(v) else float(v)}
            )
        return cells

    def dumps(self):
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, cells):
        if isinstance(cells, str):
            cells = json.loads(cells)
        if not cells:
            raise ParameterError("empty cell list")
        rights = [float(c["right"]) for c in cells]
        lefts = [float(c["left"]) for c in cells]
        if lefts[0] != 0.0 or any(l != r for l, r in zip(lefts[1:], rights[:-1])):
            raise ParameterError("cells must tile (0, 1) from the left")
        vals = [math.inf if c["value"] in ("inf", "Infinity", math.inf) else float(c["value"]) for c in cells]
        return cls(Grid(rights), vals)


def _dot(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        prod = np.where((a == 0) | (b == 0), 0.0, a * b)
    return float(prod.sum())


def common_refinement(f: GridFunction, g: GridFunction):
    """Lift two functions onto the union of their grids."""
    if f.grid == g.grid:
        return f, g
    grid = f.grid.union(g.grid.breakpoints)
    return f.on(grid), g.on(grid)


def pairing(f: GridFunction, g: GridFunction) -> float:
    """Exact integral of f*g over (0, 1); both must live on the same grid."""
    if f.grid != g.grid:
        raise GridError("pairing needs functions on the same grid")
    return _dot(f.values * 1.0, g.values * f.grid.lengths)


def running_integral(f: GridFunction):
    """Values of int_0^x f at every grid edge (length n_cells + 1)."""
    return np.concatenate(([0.0], np.cumsum(np.where(f.values == 0, 0.0, f.values * f.grid.lengths))))


def decreasing_step(f: GridFunction):
    """Sorted representation of f*: descending values and segment right ends.

    Equal neighbouring values are merged; the last right end is exactly 1.
    """
    v = f.values
    order = np.argsort(-v, kind="stable")
    vals = v[order]
    ends = np.cumsum(f.grid.lengths[order])
    keep = np.concatenate((vals[1:] != vals[:-1], [True]))
    vals = vals[keep]
    ends = ends[keep]
    ends[-1] = 1.0
    return vals, ends


def rearrange(f: GridFunction) -> GridFunction:
    """Decreasing rearrangement f*.

    Sorted cells are laid out from 0; where a segment end falls strictly
    inside a cell that end becomes a new breakpoint, so the result is the
    exact rearrangement on a (possibly) refined grid.
    """
    if f.is_nonincreasing():
        return f
    vals, ends = decreasing_step(f)
    grid = f.grid.union(ends[:-1])
    mid = 0.5 * (grid.edges[:-1] + grid.edges[1:])
    idx = np.searchsorted(ends, mid)
    return GridFunction(grid, vals[np.clip(idx, 0, vals.size - 1)])


def double_star(f: GridFunction) -> GridFunction:
    """Cell averages of f**(s) = (1/s) int_0^s f*."""
    fs = rearrange(f)
    v = fs.values
    e = fs.grid.edges
    F = running_integral(fs)
    a, b = e[:-1], e[1:]
    out = np.empty_like(v)
    out[0] = v[0]
    with np.errstate(invalid="ignore"):
        extra = (F[1:-1] - v[1:] * a[1:]) * np.log(b[1:] / a[1:]) / (b[1:] - a[1:])
    extra = np.where(np.isnan(extra), np.inf, np.maximum(extra, 0.0))
    out[1:] = v[1:] + extra
    if np.isinf(v[0]):
        out[:] = np.inf
    return GridFunction(fs.grid, out)


def dilate(f: GridFunction, lam: float) -> GridFunction:
    """E_lambda f(s) = f(s / lambda) for s <= lambda, 0 beyond; cell averages on f's grid."""
    if not lam > 0:
        raise ParameterError("lambda must be positive")
    if lam == 1:
        return f
    grid = f.grid
    e = grid.edges
    lo = np.minimum(e[:-1], lam) / lam
    hi = np.minimum(e[1:], lam) / lam
    fin = np.where(np.isinf(f.values), 0.0, f.values)
    F = np.concatenate(([0.0], np.cumsum(fin * grid.lengths)))
    mass = lam * (np.interp(hi, e, F) - np.interp(lo, e, F))
    out = np.maximum(mass, 0.0) / grid.lengths
    inf_cells = np.isinf(f.values)
    if inf_cells.any():
        a_inf, b_inf = e[:-1][inf_cells], e[1:][inf_cells]
        hit = (lo[:, None] < b_inf[None, :]) & (hi[:, None] > a_inf[None, :])
        out = np.where(hit.any(axis=1), np.inf, out)
    return GridFunction(grid, out)


# ---------------------------------------------------------------- quadrature

@lru_cache(maxsize=None)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=None)
def _glag(n):
    x, w = np.polynomial.laguerre.laggauss(n)
    return x, w


@dataclass(frozen=True)
class QuadRule:
    """Per-cell nodes and weights for integrals over the cells of a grid.

    Regular cells use Gauss-Legendre in log t; the first cell (0, x0) uses
    Gauss-Laguerre in u = log(x0 / t), which integrates the logarithmic
    singularities produced by the kernels exactly or to high order.
    ``cell`` maps each node to its cell and ``starts`` gives the first node
    of every cell, so ``numpy.add.reduceat`` sums per cell.
    """

    grid: Grid
    t: np.ndarray
    w: np.ndarray
    cell: np.ndarray
    starts: np.ndarray
    q: int
    q0: int
    eps: float = 1e-10

    def integrate(self, values):
        """Per-cell integrals from values sampled at the nodes (last axis)."""
        vals = np.asarray(values, dtype=float)
        with np.errstate(invalid="ignore"):
            prod = np.where(self.w == 0, 0.0, vals * self.w)
        return np.add.reduceat(prod, self.starts, axis=-1)

    def average(self, values):
        return self.integrate(values) / self.grid.lengths

    def refined(self):
        return quad_rule(self.grid, 2 * self.q, 2 * self.q0)


@lru_cache(maxsize=64)
def quad_rule(grid: Grid, q: int = 12, q0: int = 40) -> QuadRule:
    e = grid.edges
    xl, wl = _glag(q0)
    x0 = e[1]
    t_first = x0 * np.exp(-xl)
    w_first = x0 * wl
    x, w = _gl(q)
    la, lb = np.log(e[1:-1]), np.log(e[2:])
    half = 0.5 * (lb - la)
    logt = (0.5 * (la + lb))[:, None] + half[:, None] * x[None, :]
    t_reg = np.exp(logt)
    w_reg = half[:, None] * w[None, :] * t_reg
    t = np.concatenate((t_first, t_reg.ravel()))
    wt = np.concatenate((w_first, w_reg.ravel()))
    cell = np.concatenate((np.zeros(q0, dtype=int), np.repeat(np.arange(1, grid.n_cells), q)))
    starts = np.concatenate(([0], q0 + q * np.arange(grid.n_cells - 1))).astype(int)
    for arr in (t, wt, cell, starts):
        arr.setflags(write=False)
    return QuadRule(grid, t, wt, cell, starts, q, q0)


def gauss_legendre_pieces(lo, hi, n=10, h_max=math.log(2) / 8):
    """Nodes/weights in log s on subintervals of (lo, hi), lo > 0.

    Each interval is split into pieces of log-length at most ``h_max``.
    Returns (s, w, owner) with ``owner`` the index of the source interval.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    L = np.log(hi) - np.log(lo)
    npieces = np.maximum(1, np.ceil(L / h_max).astype(int))
    owner = np.repeat(np.arange(lo.size), npieces)
    first = np.cumsum(npieces) - npieces
    k = np.arange(owner.size) - first[owner]
    step = L[owner] / npieces[owner]
    a = np.log(lo[owner]) + k * step
    x, w = _gl(n)
    logs = (a + 0.5 * step)[:, None] + 0.5 * step[:, None] * x[None, :]
    s = np.exp(logs)
    ws = 0.5 * step[:, None] * w[None, :] * s
    return s.ravel(), ws.ravel(), np.repeat(owner, n)


def _ell(u):
    return np.log1p(u)


def _tail_integral(x, a, b, c):
    """int_0^x s^a log^b(2/s) log^c(1 + log(2/s)) ds for small x (vectorized)."""
    x = np.asarray(x, dtype=float)
    U = np.log(2.0 / x)
    r = a + 1.0
    if r > 0:
        v, w = _glag(48)
        u = U[:, None] + v[None, :] / r
        g = u ** b * (_ell(u) ** c if c else 1.0)
        return (2.0 ** r / r) * np.exp(-r * U) * (g * w).sum(axis=1)
    if r < 0:
        return np.full(x.shape, np.inf)
    # r == 0: int_U^inf u^b ell(u)^c du
    if b < -1:
        rate = -(b + 1.0)
        v, w = _glag(48)
        y = v[None, :] / rate
        g = _ell(U[:, None] * np.exp(y)) ** c if c else np.ones_like(y)
        return U ** (b + 1.0) / rate * (g * w).sum(axis=1)
    if b == -1 and c < -1:
        # int_U^inf ell(u)^c / u du; with z = log u this is int log(1+e^z)^c dz
        from scipy.integrate import quad

        out = []
        for Ui in U:
            val, _ = quad(lambda z: math.log1p(math.exp(z)) ** c, math.log(Ui), math.inf, epsrel=1e-12, limit=200)
            out.append(val)
        return np.array(out)
    return np.full(x.shape, np.inf)


TAIL_SPLIT = 2.0 ** -30


def power_log_integrals(edges, a, b=0.0, c=0.0):
    """Integrals of s^a log^b(2/s) log^c(1 + log(2/s)) over consecutive edges.

    ``edges`` is increasing; if it starts at 0 the first interval is
    evaluated through an analytic change of variables and reported as inf
    when the weight is not integrable at 0.
    """
    e = np.asarray(edges, dtype=float)
    lo, hi = e[:-1], e[1:]
    out = np.zeros(lo.size)
    if a == 0 and b == 0 and c == 0:
        return hi - lo
    zero = lo == 0
    if zero.any():
        # split (0, hi) at TAIL_SPLIT so the tail formula only sees small x
        hz = hi[zero]
        cut = np.minimum(hz, TAIL_SPLIT)
        tail = _tail_integral(cut, a, b, c)
        rest = np.zeros_like(hz)
        more = hz > cut
        if more.any():
            rest[more] = _smooth_integrals(cut[more], hz[more], a, b, c)
        out[zero] = tail + rest
    nz = ~zero
    if nz.any():
        out[nz] = _smooth_integrals(lo[nz], hi[nz], a, b, c)
    return out


def _smooth_integrals(lo, hi, a, b, c):
    s, w, owner = gauss_legendre_pieces(lo, hi)
    L = np.log(2.0 / s)
    g = s ** a
    if b:
        g = g * L ** b
    if c:
        g = g * _ell(L) ** c
    return np.bincount(owner, weights=g * w, minlength=lo.size)
