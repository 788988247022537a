"""Hardy-type operators driven by a profile I.

    H_I^m f(t) = 1/(m-1)! int_t^1 f(s)/I(s) J(t,s)^{m-1} ds
    R_I^m f(t) = 1/(m-1)! 1/I(t) int_0^t f(s) J(s,t)^{m-1} ds
    G_I^m f(t) = sup_{t<=s<=1} R_I^m f*(s)
    P_Phi^m f(t) = (Phi^{-1}(log 2/t)/log(2/t))^m int_t^1 f(s)/s log(s/t)^{m-1} ds

Since J(t,s)^{m-1}/I(s) is the s-derivative of J(t,s)^m/m, the H kernel is
integrated in closed form on every cell of a step function.  The R kernel
uses a binomial split J(s,t) = J(s,b) + J(b,t) against per-cell moments of
J(., b).  Operator outputs are exact cell averages (computed from the exact
pointwise values on a per-cell quadrature rule), so pairings of outputs with
step functions are integrals of the true continuous result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gridfn import Grid, GridFunction, ParameterError, gauss_legendre_pieces, quad_rule, rearrange, _glag, _gl
from .profiles import LPhiProfile, PhiFunction, Profile, linear_profile

__all__ = [
    "KernelOp",
    "LevelDecomposition",
    "PointFunction",
    "apply_H",
    "apply_R",
    "apply_H_m",
    "apply_R_m",
    "apply_G_m",
    "G_rows",
    "apply_P_phi",
    "apply_op",
    "H_m_at",
    "R_m_at",
    "P_phi_at",
    "H_m_indicator_closed_form",
    "compose_H",
    "operator_matrix",
]

CHUNK = 3000


@dataclass(frozen=True)
class KernelOp:
    """An operator kind ('H', 'R', 'G' or 'P') with its profile and order."""

    kind: str
    profile: Profile | None
    m: int = 1
    phi: PhiFunction | None = None

    def __post_init__(self):
        if self.kind not in ("H", "R", "G", "P"):
            raise ParameterError(f"unknown operator kind {self.kind!r}")
        if self.m < 0 or int(self.m) != self.m:
            raise ParameterError("order must be a nonnegative integer")
        if self.kind == "P" and self.phi is None:
            raise ParameterError("P operator needs a Phi function")
        if self.kind != "P" and self.profile is None:
            raise ParameterError("operator needs a profile")

    def __call__(self, f: GridFunction) -> GridFunction:
        return apply_op(self, f)

    def to_json(self):
        prof = self.profile.to_json() if self.profile is not None else {"type": "boltzmann", "beta": self.phi.beta}
        return {"op": self.kind, "profile": prof, "m": self.m}


def apply_op(T: KernelOp, f: GridFunction) -> GridFunction:
    if T.m == 0:
        return f
    if T.kind == "H":
        return apply_H_m(T.profile, T.m, f)
    if T.kind == "R":
        return apply_R_m(T.profile, T.m, f)
    if T.kind == "G":
        return apply_G_m(T.profile, T.m, f)[0]
    return apply_P_phi(T.phi, T.m, f)


# ------------------------------------------------------------ kernel rows

def _cells(grid):
    e = grid.edges
    return e[:-1], e[1:]


def H_kernel(I: Profile, m: int, grid: Grid, t):
    """Matrix K[t, j] with H^m f(t) = sum_j K[t, j] f_j for step functions f."""
    t = np.asarray(t, dtype=float)
    a, b = _cells(grid)
    right = b[None, :] > t[:, None]
    tt = np.broadcast_to(t[:, None], right.shape)
    jb = I.J(tt, np.broadcast_to(b[None, :], right.shape))
    ja = I.J(tt, np.maximum(a[None, :], t[:, None]))
    k = (jb ** m - ja ** m) / math.factorial(m)
    return np.where(right, k, 0.0)


def P_kernel(phi: PhiFunction, m: int, grid: Grid, t):
    t = np.asarray(t, dtype=float)
    a, b = _cells(grid)
    right = b[None, :] > t[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        lb = np.log(b[None, :] / t[:, None])
        la = np.log(np.maximum(a[None, :], t[:, None]) / t[:, None])
    k = np.where(right, (lb ** m - la ** m) / m, 0.0)
    L = np.log(2.0 / t)
    pref = (phi.phi_inv(L) / L) ** m
    return k * pref[:, None]


def _moments(I: Profile, lo, hi, kmax, q=12, q0=48):
    """int_lo^hi J(s, hi)^k ds for k = 0..kmax (rows follow lo/hi)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    out = np.zeros((lo.size, kmax + 1))
    z = lo == 0
    if (~z).any():
        l, h = lo[~z], hi[~z]
        s, w, owner = gauss_legendre_pieces(l, h, n=q, h_max=math.log(2) / 16)
        jv = I.J(s, h[owner])
        for k in range(kmax + 1):
            out[~z, k] = np.bincount(owner, weights=w * jv ** k, minlength=l.size)
    if z.any():
        v, wl = _glag(q0)
        h = hi[z]
        s = h[:, None] * np.exp(-v)[None, :]
        jv = I.J(s, np.broadcast_to(h[:, None], s.shape))
        for k in range(kmax + 1):
            out[z, k] = (wl[None, :] * jv ** k).sum(axis=1) * h
    return out


@lru_cache(maxsize=64)
def _cell_moments(I: Profile, grid: Grid, kmax: int):
    a, b = _cells(grid)
    return _moments(I, a, b, kmax)


def R_kernel(I: Profile, m: int, grid: Grid, t):
    """Matrix K[t, j] with R^m f(t) = sum_j K[t, j] f_j for step functions f."""
    t = np.asarray(t, dtype=float)
    a, b = _cells(grid)
    idx = grid.cell_index(t)
    j = np.arange(grid.n_cells)
    full = j[None, :] < idx[:, None]
    part = j[None, :] == idx[:, None]
    if m == 1:
        k = np.where(full, grid.lengths[None, :], 0.0)
        k = k + np.where(part, (t - a[idx])[:, None], 0.0)
    else:
        mom = _cell_moments(I, grid, m - 1)
        jbt = I.J(np.broadcast_to(b[None, :], full.shape), np.broadcast_to(t[:, None], full.shape))
        jbt = np.where(full, jbt, 0.0)
        acc = np.zeros(full.shape)
        for kk in range(m):
            acc += math.comb(m - 1, kk) * mom[None, :, kk] * jbt ** (m - 1 - kk)
        k = np.where(full, acc, 0.0)
        pm = _moments(I, a[idx], t, m - 1)[:, m - 1]
        k = k + np.where(part, pm[:, None], 0.0)
        k = k / math.factorial(m - 1)
    return k / I.I(t)[:, None]


def _cell_average_matrix(row_fn, grid: Grid):
    """N x N matrix of cell averages of row_fn(t) (a T x N kernel) over each cell."""
    qr = quad_rule(grid)
    n = grid.n_cells
    out = np.empty((n, n))
    starts = np.append(qr.starts, qr.t.size)
    c0 = 0
    while c0 < n:
        c1 = c0
        while c1 < n and starts[c1 + 1] - starts[c0] <= CHUNK:
            c1 += 1
        c1 = max(c1, c0 + 1)
        lo, hi = starts[c0], starts[c1]
        K = row_fn(qr.t[lo:hi]) * qr.w[lo:hi, None]
        out[c0:c1] = np.add.reduceat(K, starts[c0:c1] - lo, axis=0) / grid.lengths[c0:c1, None]
        c0 = c1
    return out


@lru_cache(maxsize=32)
def operator_matrix(kind: str, profile, m: int, grid: Grid):
    """Cell-average matrix of H^m, R^m or P^m on ``grid`` (cached)."""
    if kind == "H":
        return _cell_average_matrix(lambda t: H_kernel(profile, m, grid, t), grid)
    if kind == "R":
        return _cell_average_matrix(lambda t: R_kernel(profile, m, grid, t), grid)
    if kind == "P":
        return _cell_average_matrix(lambda t: P_kernel(profile, m, grid, t), grid)
    raise ParameterError(kind)


def _apply_matrix(M, f: GridFunction):
    v = f.values
    inf = np.isinf(v)
    out = M @ np.where(inf, 0.0, v)
    if inf.any():
        out = np.where((M[:, inf] > 0).any(axis=1), np.inf, out)
    return GridFunction(f.grid, np.maximum(out, 0.0))


def _check_m(m):
    if int(m) != m or m < 1:
        raise ParameterError("order must be an integer >= 1")
    return int(m)


def apply_H(I: Profile, f, lazy=False):
    """H_I f(t) = int_t^1 f/I.  With ``lazy`` (or a PointFunction input) returns a PointFunction."""
    if lazy or isinstance(f, PointFunction):
        return _LazyH(I, f)
    return apply_H_m(I, 1, f)


def apply_R(I: Profile, f: GridFunction) -> GridFunction:
    """R_I f(t) = (1/I(t)) int_0^t f."""
    return apply_R_m(I, 1, f)


def apply_H_m(I: Profile, m: int, f: GridFunction) -> GridFunction:
    m = _check_m(m)
    return _apply_matrix(operator_matrix("H", I, m, f.grid), f)


def apply_R_m(I: Profile, m: int, f: GridFunction) -> GridFunction:
    m = _check_m(m)
    return _apply_matrix(operator_matrix("R", I, m, f.grid), f)


def apply_P_phi(phi: PhiFunction, m: int, f: GridFunction) -> GridFunction:
    m = _check_m(m)
    return _apply_matrix(operator_matrix("P", phi, m, f.grid), f)


def _pointwise(kernel, f, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.size)
    v = f.values
    inf = np.isinf(v)
    fin = np.where(inf, 0.0, v)
    for lo in range(0, t.size, CHUNK):
        K = kernel(t[lo : lo + CHUNK])
        r = K @ fin
        if inf.any():
            r = np.where((K[:, inf] > 0).any(axis=1), np.inf, r)
        out[lo : lo + CHUNK] = r
    return out


def H_m_at(I: Profile, m: int, f: GridFunction, t):
    """Exact values of H_I^m f at the points t."""
    return _pointwise(lambda s: H_kernel(I, m, f.grid, s), f, t)


def R_m_at(I: Profile, m: int, f: GridFunction, t):
    """Values of R_I^m f at the points t."""
    return _pointwise(lambda s: R_kernel(I, m, f.grid, s), f, t)


def P_phi_at(phi: PhiFunction, m: int, f: GridFunction, t):
    return _pointwise(lambda s: P_kernel(phi, m, f.grid, s), f, t)


def H_m_indicator_closed_form(phi: PhiFunction, m: int, b: float, t: float) -> float:
    """H^m_{L_Phi} chi_(0,b) (t) = (Phi^{-1}(log 2/t) - Phi^{-1}(log 2/b))^m / m!, zero for t >= b."""
    if t >= b:
        return 0.0
    d = float(phi.phi_inv_diff(math.log(2.0 / t), math.log(2.0 / b)))
    return d ** m / math.factorial(m)


# ------------------------------------------------------------ composition

class PointFunction:
    """A function on (0, 1) known through a pointwise evaluator on a grid."""

    def __init__(self, grid: Grid, fn):
        self.grid = grid
        self._fn = fn

    def __call__(self, t):
        return self._fn(np.asarray(t, dtype=float))

    def to_grid(self) -> GridFunction:
        qr = quad_rule(self.grid)
        return GridFunction(self.grid, np.maximum(qr.average(self(qr.t)), 0.0))


def _values_at(g, t):
    if isinstance(g, GridFunction):
        return g.values[g.grid.cell_index(t)]
    return g(t)


class _LazyH(PointFunction):
    """H_I g for g a step function or another PointFunction.

    Integrals of g/I are taken in the variable u = J(s, b) on each cell,
    where iterated H-images of step functions are polynomials.
    """

    def __init__(self, I: Profile, g, q=12):
        grid = g.grid
        self.I = I
        self.g = g
        self.q = q
        a, b = _cells(grid)
        x, w = _gl(q)
        if isinstance(g, GridFunction):
            S = np.where(g.values == 0, 0.0, g.values * I.J(a, b))
            S[0] = 0.0
        else:
            jc = I.J(a[1:], b[1:])
            u = 0.5 * jc[:, None] * (x[None, :] + 1.0)
            with np.errstate(divide="ignore"):
                y = np.maximum(I.psi(b[1:])[:, None] - u, I.psi(a[1:])[:, None])
            s = np.clip(I.psi_inv(y), a[1:, None], b[1:, None])
            S = np.concatenate(([0.0], (g(s.ravel()).reshape(s.shape) * w[None, :]).sum(axis=1) * 0.5 * jc))
        self.tail = np.concatenate((np.cumsum(S[::-1])[::-1], [0.0]))
        super().__init__(grid, self._eval)

    def _eval(self, t):
        t = np.atleast_1d(t)
        grid = self.grid
        i = grid.cell_index(t)
        b = grid.edges[1:][i]
        ju = self.I.J(t, b)
        if isinstance(self.g, GridFunction):
            v = self.g.values[i]
            part = np.where(v == 0, 0.0, v * ju)
        else:
            x, w = _gl(self.q)
            u = 0.5 * ju[:, None] * (x[None, :] + 1.0)
            a = grid.edges[:-1][i]
            with np.errstate(divide="ignore"):
                y = np.maximum(self.I.psi(b)[:, None] - u, self.I.psi(a)[:, None])
            s = np.clip(self.I.psi_inv(y), a[:, None], b[:, None])
            part = (self.g(s.ravel()).reshape(s.shape) * w[None, :]).sum(axis=1) * 0.5 * ju
        return self.tail[i + 1] + part


def compose_H(I: Profile, m: int, f: GridFunction) -> PointFunction:
    """m-fold composition H_I(H_I(...f)) evaluated by nested quadrature."""
    g = f
    for _ in range(_check_m(m)):
        g = apply_H(I, g, lazy=True)
    return g


# ------------------------------------------------------------------ G

@dataclass
class LevelDecomposition:
    """Open set E = {R^m f* < G^m f} as intervals with plateau values."""

    intervals: list
    plateaus: list
    points: np.ndarray
    r_values: np.ndarray
    g_values: np.ndarray

    def reconstruct(self):
        """G at the sample points rebuilt from R and the plateaus."""
        out = self.r_values.copy()
        for (c, d), val in zip(self.intervals, self.plateaus):
            sel = (self.points > c) & (self.points < d)
            out[sel] = val
        return out


def apply_G_m(I: Profile, m: int, f: GridFunction, rtol=1e-13):
    """G_I^m f as a step function plus its level decomposition.

    R^m f* is sampled at every quadrature node and breakpoint; G is the
    running maximum from the right over those samples, and each cell takes
    the largest value of G on it.
    """
    m = _check_m(m)
    fs = rearrange(f)
    grid = fs.grid
    qr = quad_rule(grid)
    pts = np.concatenate((qr.t, grid.breakpoints))
    order = np.argsort(pts, kind="stable")
    pts = pts[order]
    r = R_m_at(I, m, fs, pts)
    g = np.maximum.accumulate(r[::-1])[::-1]
    cell = grid.cell_index(pts)
    vals = np.zeros(grid.n_cells)
    np.maximum.at(vals, cell, g)
    below = r < g * (1 - rtol)
    intervals, plateaus = [], []
    k = 0
    n = pts.size
    while k < n:
        if below[k]:
            j = k
            while j < n and below[j]:
                j += 1
            c = pts[k - 1] if k > 0 else 0.0
            d = pts[j] if j < n else 1.0
            intervals.append((float(c), float(d)))
            plateaus.append(float(g[k]))
            k = j
        else:
            k += 1
    dec = LevelDecomposition(intervals, plateaus, pts, r, g)
    return GridFunction(grid, vals), dec


def G_rows(I: Profile, m: int, U, grid: Grid):
    """Cell values of G_I^m for every nonincreasing row of U, sampled as in apply_G_m."""
    m = _check_m(m)
    U = np.atleast_2d(np.asarray(U, dtype=float))
    qr = quad_rule(grid)
    pts = np.sort(np.concatenate((qr.t, grid.breakpoints)), kind="stable")
    bad = ~np.isfinite(U).all(axis=1)
    fin = np.where(np.isfinite(U), U, 0.0)
    r = np.empty((pts.size, U.shape[0]))
    for lo in range(0, pts.size, CHUNK):
        r[lo : lo + CHUNK] = R_kernel(I, m, grid, pts[lo : lo + CHUNK]) @ fin.T
    g = np.maximum.accumulate(r[::-1], axis=0)[::-1]
    vals = np.zeros((grid.n_cells, U.shape[0]))
    np.maximum.at(vals, grid.cell_index(pts), g)
    out = vals.T
    out[bad] = np.inf
    return out
