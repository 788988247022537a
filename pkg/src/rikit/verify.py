"""Verification harness: test families, operator-norm estimates, ratio reports
and a registry of named checks.

A check evaluates a list of ratios (or gaps) on a grid and, for band checks,
again on the refined grid; the report keeps the extremes, the members that
attain them, the relative drift of the extremes and a verdict that follows
from those fields alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .gridfn import Grid, GridFunction, ParameterError, make_grid, pairing, power_log_integrals, quad_rule
from .norms import (
    INF,
    NormSpec,
    YoungFunction,
    associate_spec,
    down_dual_norm,
    eval_norm,
    eval_step,
    lebesgue,
    linf,
    lorentz,
    lorentz_zygmund,
    norm_from_spec,
    orlicz,
    render,
)
from .operators import (
    G_rows,
    H_kernel,
    KernelOp,
    P_kernel,
    R_kernel,
    _cell_average_matrix,
    apply_G_m,
    apply_H_m,
    apply_op,
    compose_H,
    operator_matrix,
)
from .profiles import (
    F_phi,
    L_phi_profile,
    PowerProfile,
    boltzmann_phi,
    gauss_phi,
    gauss_profile,
    linear_profile,
    model_domain_M,
    power_profile,
    profile_from_spec,
)
from .targets import (
    TargetNorm,
    UnsupportedBase,
    iterate_target,
    linf_criterion,
    resolve_target,
    star_rows,
    target_assoc_rows,
    target_norm_eval,
)

__all__ = [
    "Member",
    "TestFamily",
    "RatioReport",
    "SuiteConfig",
    "RegistryError",
    "SUITE",
    "op_norm_lower",
    "op_norm_dual",
    "op_norm_estimate",
    "nonincreasing_reduction_check",
    "ratio_report",
    "theorem_suite",
    "run_suite",
    "reports_jsonl",
    "reports_csv",
]

DRIFT_TOL = 0.05
DEFAULT_BAND = (1.0 / 64.0, 64.0)


class RegistryError(LookupError):
    """Unknown check id."""


# ------------------------------------------------------------- test family

@dataclass(frozen=True)
class Member:
    id: str
    values: np.ndarray = field(repr=False, compare=False)
    nonincreasing: bool = True

    def f(self, grid):
        return GridFunction(grid, self.values)


def _avg(grid, a, b=0.0):
    """Cell averages of s^a log^b(2/s)."""
    return power_log_integrals(grid.edges, a, b) / grid.lengths


def _octave_index(grid):
    # cell (x, y] lies in octave j when 2^-(j+1) < y <= 2^-j
    b = grid.edges[1:]
    return np.floor(-np.log2(b) + 1e-9).astype(int)


def _octave_step(grid, vals):
    j = np.minimum(_octave_index(grid), len(vals) - 1)
    return np.asarray(vals, dtype=float)[j]


class TestFamily:
    """Deterministic nonnegative test functions on a grid.

    Members are defined independently of the grid density (cell averages of
    explicit functions, or step functions on dyadic octaves), so the family
    on ``grid.refine()`` contains the same functions under the same ids.

    theta_max      powers s^-theta use theta < theta_max
    critical       extra (theta, gamma) pairs for s^-theta log^gamma(2/s)
    caps           extra (theta, j) pairs for min(s, 2^-j)^-theta
    nonmonotone    include non-monotone members (flagged)
    """

    __test__ = False  # not a pytest class

    def __init__(self, grid: Grid, seed=0, size=64, theta_max=0.9, critical=(), caps=(), nonmonotone=True):
        if size < 1:
            raise ParameterError("family size must be positive")
        self.grid = grid
        self.seed = int(seed)
        self.size = int(size)
        self.theta_max = float(theta_max)
        self.critical = tuple(critical)
        self.caps = tuple(caps)
        self.nonmonotone = bool(nonmonotone)
        self.members = self._build()

    def with_grid(self, grid):
        return TestFamily(grid, self.seed, self.size, self.theta_max, self.critical, self.caps, self.nonmonotone)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def subfamily(self, nonincreasing=True):
        out = TestFamily.__new__(TestFamily)
        out.__dict__.update(self.__dict__)
        out.members = [m for m in self.members if m.nonincreasing == nonincreasing]
        return out

    def matrix(self):
        return np.vstack([m.values for m in self.members])

    @property
    def ids(self):
        return [m.id for m in self.members]

    def _build(self):
        grid = self.grid
        n_oct = int(_octave_index(grid).max()) + 1
        ss = np.random.SeedSequence(self.seed)
        r_mono, r_perm, r_osc = (np.random.default_rng(s) for s in ss.spawn(3))
        out = []

        def add(mid, vals, mono=True):
            vals = np.asarray(vals, dtype=float)
            out.append(Member(mid, vals, mono and bool(np.all(np.diff(vals) <= 0))))

        add("one", np.ones(grid.n_cells))
        j = 1
        while 2.0 ** -j > grid.t_min and j <= 64:
            add(f"chi(0,2^-{j})", np.clip((np.minimum(grid.edges[1:], 2.0 ** -j) - np.minimum(grid.edges[:-1], 2.0 ** -j)) / grid.lengths, 0, 1))
            j = j * 2 if j < 4 else j + 8
        tm = self.theta_max
        for c in (0.25, 0.5, 0.75, 0.9):
            if tm > 0:
                add(f"s^-{c * tm:.4g}", _avg(grid, -c * tm))
        for th in (0.0, 0.5 * tm):
            for gm in (-1.0, 1.0, 2.0):
                add(f"s^-{th:.4g}*log^{gm:g}", _avg(grid, -th, gm))
        for th, gm in self.critical:
            add(f"s^-{th:.4g}*log^{gm:.4g}", _avg(grid, -th, gm))
        for th, jj in self.caps:
            add(f"min(s,2^-{jj})^-{th:.4g}", _cap(grid, th, jj))
        rng_slots = max(self.size - len(out), 0)
        k = 0
        while len(out) < self.size and k < 4 * rng_slots + 8:
            kind = k % 4 if self.nonmonotone else 0
            if kind in (0, 2):
                th = r_mono.uniform(0.0, 0.9 * tm) if tm > 0 else 0.0
                v = np.sort(r_mono.exponential(size=n_oct)) * 2.0 ** (th * np.arange(n_oct))
                add(f"rand-decr#{k}", _octave_step(grid, v))
            elif kind == 1:
                v = r_perm.permutation(np.sort(r_perm.exponential(size=n_oct)))
                add(f"rand-perm#{k}", _octave_step(grid, v), False)
            else:
                th = r_osc.uniform(0.0, 0.5 * tm) if tm > 0 else 0.0
                amp = r_osc.uniform(0.3, 0.95)
                jj = np.arange(n_oct)
                v = (1.0 + amp * (-1.0) ** jj) * 2.0 ** (th * jj)
                add(f"oscillating#{k}", _octave_step(grid, v), False)
            k += 1
        return out[: self.size]

    @classmethod
    def for_space(cls, grid, X: NormSpec, seed=0, size=64, nonmonotone=True):
        """Family adapted to X: powers below the critical exponent, near-extremal log powers."""
        Z = X
        if X.family == "orlicz":
            from .norms import orlicz_as_lz

            Z = orlicz_as_lz(X) or X
        if Z.is_lz_type:
            p, q, al = Z.p, Z.q, Z.alpha
            th = 0.0 if math.isinf(p) else 1.0 / p
            gc = -al - (0.0 if math.isinf(q) else 1.0 / q)
            crit = [(th, gc - d) for d in (0.25, 1.0)]
            if th == 0.0:
                crit = [(0.0, g) for _, g in crit if g >= 0] or crit
            return cls(grid, seed, size, theta_max=th, critical=crit, nonmonotone=nonmonotone)
        return cls(grid, seed, size, theta_max=0.0, nonmonotone=nonmonotone)


def _cap(grid, th, j):
    c = 2.0 ** -j
    e = grid.edges
    a, b = e[:-1], e[1:]
    lo = np.minimum(b, c) - np.minimum(a, c)
    hi_a, hi_b = np.maximum(a, c), np.maximum(b, c)
    if th == 1:
        up = np.log(hi_b / hi_a)
    else:
        up = (hi_b ** (1 - th) - hi_a ** (1 - th)) / (1 - th)
    return (lo * c ** -th + up) / grid.lengths


# ------------------------------------------------------------- ratio report

@dataclass
class RatioReport:
    """Extremes of a ratio (mode 'band') or of a gap/inequality ratio (mode 'bound').

    The verdict is a function of the fields: ``fail`` when [min, max] leaves
    the band, ``unstable`` when the band drifts by 5% or more under grid
    doubling, ``pass`` otherwise.  Bound checks carry no drift.
    """

    check: str
    params: dict
    min: float
    max: float
    argmin: str
    argmax: str
    N: int
    drift: float | None
    band: tuple
    mode: str = "band"
    count: int = 0
    detail: dict = field(default_factory=dict)

    @property
    def verdict(self):
        lo, hi = self.band
        if self.mode == "growth":
            # the largest growth factor must reach the lower band edge
            if not self.max >= lo:
                return "fail"
        elif not (self.min >= lo and self.max <= hi):
            return "fail"
        if self.drift is not None and not self.drift < DRIFT_TOL:
            return "unstable"
        return "pass"

    @property
    def id(self):
        return self.check + _param_suffix(self.params)

    def to_json(self):
        d = {
            "id": self.id,
            "check": self.check,
            "params": self.params,
            "mode": self.mode,
            "min": self.min,
            "max": self.max,
            "argmin": self.argmin,
            "argmax": self.argmax,
            "N": self.N,
            "drift": self.drift,
            "band": list(self.band),
            "count": self.count,
            "verdict": self.verdict,
        }
        if self.detail:
            d["detail"] = self.detail
        return _clean(d)


def _param_suffix(params):
    if not params:
        return ""
    return "[" + ",".join(f"{k}={params[k]}" for k in sorted(params)) + "]"


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _extremes(pairs):
    if not pairs:
        raise ParameterError("no ratios to report (empty family?)")
    ids = [p[0] for p in pairs]
    r = np.array([p[1] for p in pairs], dtype=float)
    i, k = int(np.argmin(r)), int(np.argmax(r))
    return float(r[i]), float(r[k]), ids[i], ids[k]


def _rel(a, b):
    if a == b:
        return 0.0
    if not (np.isfinite(a) and np.isfinite(b)):
        return INF
    den = max(abs(a), abs(b))
    return abs(a - b) / den if den > 0 else 0.0


def ratio_report(check, params, fn, grid: Grid, band=DEFAULT_BAND, mode="band", refine=True, detail=None):
    """Build a report from ``fn(grid) -> [(member id, ratio), ...]``.

    With ``refine`` the ratios are recomputed on ``grid.refine()`` and the
    drift is the larger relative change of the two extremes.
    """
    pairs = fn(grid)
    lo, hi, amin, amax = _extremes(pairs)
    drift = None
    det = dict(detail or {})
    if refine:
        g2 = grid.refine()
        lo2, hi2, _, _ = _extremes(fn(g2))
        drift = max(_rel(lo, lo2), _rel(hi, hi2))
        det.update(min_2N=lo2, max_2N=hi2, N_2N=g2.n_cells)
    return RatioReport(check, dict(params), lo, hi, amin, amax, grid.n_cells, drift, tuple(band), mode, len(pairs), det)


# -------------------------------------------------------- operator norms

def _row_norms(X: NormSpec, U, grid: Grid):
    ends = grid.edges[1:]
    out = np.empty(U.shape[0])
    for i, u in enumerate(U):
        if np.all(np.diff(u) <= 0):
            out[i] = eval_step(X, u, ends)
        else:
            out[i] = eval_norm(X, GridFunction(grid, u))
    return out


def _op_ratios(T: KernelOp, X: NormSpec, Y: NormSpec, F: TestFamily):
    if len(F) == 0:
        raise ParameterError("empty test family")
    grid = F.grid
    out = []
    for mem in F:
        f = mem.f(grid)
        nx = eval_norm(X, f)
        if not (nx > 0 and np.isfinite(nx)):
            continue
        out.append((mem.id, float(eval_norm(Y, apply_op(T, f)) / nx)))
    return out


def op_norm_lower(T: KernelOp, X: NormSpec, Y: NormSpec, F: TestFamily, return_arg=False):
    """max over F of ||T f||_Y / ||f||_X."""
    pairs = _op_ratios(T, X, Y, F)
    if not pairs:
        val, arg = 0.0, ""
    else:
        k = int(np.argmax([p[1] for p in pairs]))
        val, arg = pairs[k][1], pairs[k][0]
    return (val, arg) if return_arg else val


def op_norm_dual(T: KernelOp, X: NormSpec, Y: NormSpec, G: TestFamily, return_arg=False):
    """max over G of ||R_I^m g*||_{X'} / ||g||_{Y'}, the same operator norm seen from the dual side."""
    if T.kind != "H":
        raise ParameterError("the dual estimator is defined for H operators")
    if len(G) == 0:
        raise ParameterError("empty test family")
    Xa, Ya = associate_spec(X), associate_spec(Y)
    if Xa is None or Ya is None:
        raise UnsupportedBase("closed-form associates are needed for both spaces")
    grid = G.grid
    U = star_rows(G.matrix(), grid)
    W = U if T.m == 0 else np.maximum(U @ operator_matrix("R", T.profile, T.m, grid).T, 0.0)
    num = _row_norms(Xa, W, grid)
    den = _row_norms(Ya, U, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where((den > 0) & np.isfinite(den), num / den, 0.0)
    k = int(np.argmax(r))
    val, arg = float(r[k]), G.members[k].id
    return (val, arg) if return_arg else val


def op_norm_estimate(T: KernelOp, X: NormSpec, Y: NormSpec, F: TestFamily):
    """Both estimators, their maximum, and whether they agree within a factor 2."""
    lo = op_norm_lower(T, X, Y, F)
    du = op_norm_dual(T, X, Y, F)
    agree = max(lo, du) <= 2 * min(lo, du) if min(lo, du) > 0 else lo == du
    return {"lower": lo, "dual": du, "best": max(lo, du), "agree": bool(agree)}


def nonincreasing_reduction_check(I, m, X, Y, F: TestFamily, band=DEFAULT_BAND, refine=True):
    """Operator norm over the whole family against the nonincreasing subfamily."""
    T = KernelOp("H", I, m)

    def fn(grid):
        Fg = F.with_grid(grid)
        whole = op_norm_lower(T, X, Y, Fg)
        mono = op_norm_lower(T, X, Y, Fg.subfamily(True))
        return [("whole/nonincreasing", whole / mono)]

    params = {"I": _pname(I), "m": m, "X": render(X), "Y": render(Y)}
    return ratio_report("reduction-nonincreasing", params, fn, F.grid, band, refine=refine)


# ------------------------------------------------------------------ config

@dataclass(frozen=True)
class SuiteConfig:
    K: int = 16
    t_min: float = 2.0 ** -40
    seed: int = 0
    band: tuple = DEFAULT_BAND
    family_size: int = 64

    def grid(self):
        return make_grid(self.K, self.t_min)

    def to_json(self):
        return {"K": self.K, "t_min": self.t_min, "seed": self.seed, "band": list(self.band), "family_size": self.family_size}


def _pname(I):
    if I is None:
        return "none"
    j = I.to_json()
    t = j.get("type")
    if t == "power":
        return f"s^{_short(j['alpha'])}"
    if t == "linear":
        return "s"
    if t == "gauss":
        return "gauss"
    if t == "boltzmann":
        return f"boltzmann:{_short(j['beta'])}"
    return t or "profile"


def _short(x):
    return str(Fraction(x).limit_denominator(1000))


PROFILES = {
    "s^1/2": lambda: power_profile(0.5),
    "s^3/4": lambda: power_profile(0.75),
    "s": linear_profile,
    "gauss": gauss_profile,
}


def _phis():
    return {"gauss": gauss_phi(), "boltzmann:1": boltzmann_phi(1.0), "boltzmann:3/2": boltzmann_phi(1.5), "boltzmann:2": boltzmann_phi(2.0)}


def _interior_points(grid):
    b = grid.breakpoints
    mids = np.sqrt(b[:-1] * b[1:])
    return np.sort(np.concatenate((b[:-1], mids)))


# ------------------------------------------------------------------ checks

def _check_kernel_composition(cfg: SuiteConfig):
    """m-fold composition of H against the closed kernel of H^m, cellwise relative gap."""
    grid = cfg.grid()
    F = TestFamily(grid, cfg.seed, size=20, theta_max=0.9)
    reports = []
    for pn in ("s^1/2", "s^3/4", "s", "gauss"):
        I = PROFILES[pn]()
        for m in (1, 2, 3):
            pairs = []
            for mem in F:
                f = mem.f(grid)
                a = apply_H_m(I, m, f).values
                b = compose_H(I, m, f).to_grid().values
                with np.errstate(divide="ignore", invalid="ignore"):
                    gap = np.where(b > 0, np.abs(a - b) / b, np.abs(a - b))
                pairs.append((mem.id, float(gap.max())))
            reports.append(_bound_report("kernel-composition", {"I": pn, "m": m}, pairs, grid, 1e-6))
    return reports


def _bound_report(check, params, pairs, grid, hi, lo=0.0, detail=None):
    a, b, i, k = _extremes(pairs)
    return RatioReport(check, params, a, b, i, k, grid.n_cells, None, (lo, hi), "bound", len(pairs), dict(detail or {}))


def _check_associativity(cfg: SuiteConfig):
    """<H^m f, g> against <f, R^m g>."""
    grid = cfg.grid()
    F = TestFamily(grid, cfg.seed, size=20, theta_max=0.9)
    G = TestFamily(grid, cfg.seed + 1, size=20, theta_max=0.9)
    reports = []
    for pn in ("s^1/2", "s^3/4", "s", "gauss"):
        I = PROFILES[pn]()
        for m in (1, 2, 3):
            Hm = operator_matrix("H", I, m, grid)
            Rm = operator_matrix("R", I, m, grid)
            pairs = []
            L = grid.lengths
            for fm, gm in zip(F, G):
                left = float(np.dot(Hm @ fm.values, gm.values * L))
                right = float(np.dot(fm.values, (Rm @ gm.values) * L))
                pairs.append((f"{fm.id}|{gm.id}", abs(left - right) / left))
            reports.append(_bound_report("associativity", {"I": pn, "m": m}, pairs, grid, 1e-9))
    return reports


def _check_indicator_closed_form(cfg: SuiteConfig):
    """H^m of chi_(0,b) for L_Phi profiles against the closed form."""
    from .operators import H_m_indicator_closed_form

    grid0 = cfg.grid()
    reports = []
    for name in ("gauss", "boltzmann:1", "boltzmann:3/2"):
        phi = _phis()[name]
        I = L_phi_profile(phi)
        for m in (1, 2, 3):
            pairs = []
            for b in (0.1, 0.5, 0.9):
                f = GridFunction.indicator(grid0, 0.0, b)
                grid = f.grid
                a = apply_H_m(I, m, f).values
                qr = quad_rule(grid)
                exact = qr.average(np.array([H_m_indicator_closed_form(phi, m, b, t) for t in qr.t]))
                sel = exact > 0
                pairs.append((f"b={b}", float(np.max(np.abs(a[sel] - exact[sel]) / exact[sel]))))
            reports.append(_bound_report("indicator-closed-form", {"Phi": name, "m": m}, pairs, grid0, 1e-6))
    return reports


def _check_sandwich(cfg: SuiteConfig):
    """P^m/(2^m (m-1)!) <= H^m_{L_Phi} for every f, and H^m <= P^m/(m-1)! for nonincreasing f.

    Reported ratio: (m-1)! H^m f / P^m f, which must lie in [2^-m, 1] for
    nonincreasing f (checked up to 1e-12 relative rounding).
    """
    grid = cfg.grid()
    full = TestFamily(grid, cfg.seed, size=96, theta_max=0.9)
    mono = [m for m in full if m.nonincreasing][:50]
    others = [m for m in full if not m.nonincreasing]
    t = _interior_points(grid)
    reports = []
    for name, phi in _phis().items():
        I = L_phi_profile(phi)
        for m in (1, 2, 3):
            Hk = H_kernel(I, m, grid, t)
            Pk = P_kernel(phi, m, grid, t)
            c = math.factorial(m - 1)
            pairs = []
            for mem in mono + others:
                h = Hk @ mem.values
                p = Pk @ mem.values
                sel = p > 0
                r = c * h[sel] / p[sel]
                if mem.nonincreasing:
                    pairs.append((mem.id + ":min", float(r.min())))
                    pairs.append((mem.id + ":max", float(r.max())))
                else:
                    pairs.append((mem.id + ":min", float(r.min())))
            rep = _bound_report("sandwich-P", {"Phi": name, "m": m}, pairs, grid, 1.0 + 1e-12, 2.0 ** -m * (1 - 1e-12))
            rep.detail.update(points=int(t.size), nonincreasing=len(mono), other=len(others))
            reports.append(rep)
    return reports


def _check_doubling_bound(cfg: SuiteConfig):
    """R^m f*(t) <= 2^m R^m f*(s) for grid points t/2 <= s <= t; reports max R(t)/(2^m R(s))."""
    grid = cfg.grid()
    F = TestFamily(grid, cfg.seed, size=cfg.family_size, theta_max=0.9)
    U = star_rows(F.matrix(), grid)
    b = grid.breakpoints
    reports = []
    for pn in ("s^1/2", "s^3/4", "s", "gauss"):
        I = PROFILES[pn]()
        for m in (1, 2, 3):
            R = R_kernel(I, m, grid, b) @ U.T  # points x members
            worst = np.zeros(U.shape[0])
            violations = 0
            for d in range(0, b.size):
                ok = b[: b.size - d] >= 0.5 * b[d:] * (1 - 1e-12)
                if not ok.any():
                    break
                rt, rs = R[d:][ok], R[: b.size - d][ok]
                with np.errstate(divide="ignore", invalid="ignore"):
                    q = np.where(rs > 0, rt / (2.0 ** m * rs), 0.0)
                worst = np.maximum(worst, q.max(axis=0))
                violations += int((rt > 2.0 ** m * rs * (1 + 1e-12)).sum())
            pairs = [(mem.id, float(w)) for mem, w in zip(F, worst)]
            rep = _bound_report("doubling-bound", {"I": pn, "m": m}, pairs, grid, 1.0 + 1e-12, detail={"violations": violations})
            reports.append(rep)
    return reports


FOUR_WAY_SPACES = ("lebesgue:1", "lebesgue:2", "lorentz:2,1", "lz:inf,2,-1")


def _four_way_values(I, m, spaces, F: TestFamily, grid):
    """The four functionals for every member and every space: {space: members x 4}."""
    U = star_rows(F.with_grid(grid).matrix(), grid)
    R1 = operator_matrix("R", I, 1, grid)
    Rm1 = operator_matrix("R", I, m + 1, grid)
    A = np.maximum(U @ Rm1.T, 0.0)
    B = star_rows(np.maximum(U @ R1.T, 0.0), grid)
    if m > 0:
        B = np.maximum(B @ operator_matrix("R", I, m, grid).T, 0.0)
    Gv = G_rows(I, m + 1, U, grid)
    out = {}
    for xs in spaces:
        X = norm_from_spec(xs)
        Xa = associate_spec(X)
        f1 = _row_norms(Xa, A, grid)
        f2 = _row_norms(Xa, B, grid)
        f3 = _row_norms(Xa, Gv, grid)
        f4 = np.array([down_dual_norm(X, GridFunction(grid, a)) for a in A])
        out[xs] = np.vstack((f1, f2, f3, f4)).T
    return out


def _four_way_family(grid, seed, size):
    crit = set()
    for xs in FOUR_WAY_SPACES:
        crit.update(TestFamily.for_space(grid, norm_from_spec(xs), seed, 1).critical)
    return TestFamily(grid, seed, size, theta_max=0.9, critical=sorted(crit))


def _check_four_way(cfg: SuiteConfig):
    """The four equivalent functionals: ratios to the first one, per member."""
    grid = cfg.grid()
    F = _four_way_family(grid, cfg.seed, cfg.family_size)
    reports = []
    for pn in ("s^1/2", "s", "gauss"):
        I = PROFILES[pn]()
        for m in (0, 1, 2):
            memo = {}

            def values(g, I=I, m=m, memo=memo):
                if g not in memo:
                    memo[g] = _four_way_values(I, m, FOUR_WAY_SPACES, F, g)
                return memo[g]

            for xs in FOUR_WAY_SPACES:

                def fn(g, xs=xs, values=values):
                    out = []
                    for mem, v in zip(F.members, values(g)[xs]):
                        if np.all(np.isfinite(v)) and v.min() > 0:
                            out.append((mem.id + ":lo", float(v.min() / v[0])))
                            out.append((mem.id + ":hi", float(v.max() / v[0])))
                    return out

                reports.append(ratio_report("four-way-equivalence", {"I": pn, "X": xs, "m": m}, fn, grid, cfg.band))
    return reports


TARGET_ROWS = (
    ("lorentz:4/3,1", "power:0.75", 2),
    ("lebesgue:2", "power:0.5", 1),
    ("lebesgue:1", "power:0.5", 3),
    ("lorentz:2,1", "power:0.5", 1),
    ("lebesgue:2", "power:1", 1),
    ("linf", "power:1", 1),
    ("linf", "power:1", 2),
    ("orlicz:power,2", "power:0.75", 1),
    ("orlicz:power,2", "power:0.75", 2),
    ("lebesgue:2", "gauss", 1),
    ("orlicz:exp,2", "gauss", 1),
    ("linf", "gauss", 2),
)


def _target_family(grid, Y, seed):
    F = TestFamily.for_space(grid, Y, seed, size=14, nonmonotone=False)
    return F


def _check_closed_form_targets(cfg: SuiteConfig):
    """Numeric optimal target norm against the table space, member by member."""
    grid = cfg.grid()
    reports = []
    for bs, ps, m in TARGET_ROWS:
        X = norm_from_spec(bs)
        I = profile_from_spec(ps)
        T = TargetNorm(X, I, m)
        sym = resolve_target(X, I, m)
        Y = sym.target

        def fn(g, T=T, Y=Y):
            F = _target_family(g, Y, cfg.seed)
            out = []
            for mem in F:
                r = target_norm_eval(T, mem.f(g))
                if r.ratio is not None and np.isfinite(r.ratio):
                    out.append((mem.id, float(r.ratio)))
            return out

        params = {"X": bs, "I": ps, "m": m}
        reports.append(ratio_report("closed-form-targets", params, fn, grid, cfg.band, detail={"target": str(sym)}))
    return reports


LINF_ROWS = (
    ("lebesgue:1", 0.5, 1, False),
    ("lebesgue:1", 0.5, 2, True),
    ("lebesgue:1", 0.5, 3, True),
    ("lebesgue:2", 0.5, 1, False),
    ("lorentz:2,1", 0.5, 1, True),
    ("lebesgue:4", 0.75, 1, False),
    ("lebesgue:3", 0.5, 1, True),
    ("orlicz:powerlog,2,1", 0.75, 2, False),
    ("orlicz:powerlog,2,3/2", 0.75, 2, True),
)


def _check_linf(cfg: SuiteConfig):
    """Embedding into L^inf: criterion verdict against the expected branch and the table."""
    grid = cfg.grid()
    reports = []
    for xs, al, m, expect in LINF_ROWS:
        X = norm_from_spec(xs)
        I = power_profile(al)
        v = linf_criterion(X, I, m, grid)
        sym = resolve_target(X, I, m)
        table = sym.kind == "linf"
        ok = float(v.finite == expect and table == expect)
        det = {"expected": expect, "criterion": v.finite, "table": str(sym), "value": v.value, "growth": list(v.growth), "reason": v.reason}
        reports.append(_bound_report("linf-criterion", {"X": xs, "alpha": _short(al), "m": m}, [("verdict", ok)], grid, 1.0, 1.0, det))
    return reports


def _iteration_family(grid):
    from .norms import canonical_family

    M, names = canonical_family(grid)
    sel = [i for i, n in enumerate(names) if not n.startswith("chi")]
    oct_ = [i for i in range(0, grid.n_cells, grid.K or 1)]
    return M[oct_ + sel], [names[i] for i in oct_ + sel]


def _check_iteration(cfg: SuiteConfig):
    """(X_{k,I})_{h,I} against X_{k+h,I}, compared through their associate functionals."""
    grid = cfg.grid()
    reports = []
    for xs in ("lebesgue:1", "lebesgue:2"):
        X = norm_from_spec(xs)
        for pn in ("s^3/4", "gauss"):
            I = PROFILES[pn]()
            for k, h in ((1, 1), (1, 2)):

                def fn(g, X=X, I=I, k=k, h=h):
                    M, names = _iteration_family(g)
                    a = target_assoc_rows(iterate_target(TargetNorm(X, I, k), h), M, g)
                    d = target_assoc_rows(TargetNorm(X, I, k + h), M, g)
                    return [(n, float(x / y)) for n, x, y in zip(names, a, d) if y > 0 and np.isfinite(x / y)]

                reports.append(ratio_report("iteration", {"X": xs, "I": pn, "k": k, "h": h}, fn, grid, cfg.band))
    return reports


NEGATIVE_ROWS = (
    # base, profile, m, passing target, one-step-stronger target
    ("lorentz:4/3,1", "power:0.75", 2, "lorentz:4,1", "lorentz:4,1/2"),
    ("lebesgue:1", "power:0.5", 1, "lorentz:2,1", "lorentz:2,1/2"),
    ("lorentz:3/2,1", "power:0.5", 1, "lorentz:6,1", "lorentz:6,1/2"),
    ("lebesgue:1", "power:1", 1, "lebesgue:1", "lorentz:1,1/2"),
)
NEG_DEPTHS = (4, 8, 16, 32, 64, 128, 256, 512)
NEG_GROWTH = 10.0


def _negative_values(X, I, m, Y, Ys, K, seed, size):
    """(passing bound, stronger bound) for families reaching 2^-L, L in NEG_DEPTHS."""
    L = NEG_DEPTHS[-1]
    grid = make_grid(K, 2.0 ** -L)
    Z = X
    th = 0.0 if math.isinf(Z.p) else 1.0 / Z.p
    caps = [(th, j) for j in range(2, L + 1, 2)]
    F = TestFamily(grid, seed, size=size, theta_max=0.9 * th, caps=caps, nonmonotone=False)
    T = KernelOp("H", I, m)
    Hm = operator_matrix("H", I, m, grid)
    ends = grid.edges[1:]
    rows = []
    for mem in F:
        nx = eval_step(X, mem.values, ends)
        if not (nx > 0 and np.isfinite(nx)):
            continue
        hv = np.maximum(Hm @ mem.values, 0.0)
        depth = _member_depth(mem.id, L)
        rows.append((mem.id, depth, eval_step(Y, hv, ends) / nx, eval_step(Ys, hv, ends) / nx))
    out = []
    for d in NEG_DEPTHS:
        sel = [r for r in rows if r[1] <= d]
        out.append((d, max(r[2] for r in sel), max(r[3] for r in sel)))
    return out


def _member_depth(mid, L):
    if mid.startswith("min(s,2^-"):
        return int(mid[len("min(s,2^-") :].split(")")[0])
    if mid.startswith("chi(0,2^-"):
        return int(mid[len("chi(0,2^-") :].split(")")[0])
    return L  # members reaching the bottom of the grid


def _check_negative_controls(cfg: SuiteConfig):
    """Optimality pressure: the stronger target's bound grows relative to the passing one."""
    reports = []
    for bs, ps, m, ys, yss in NEGATIVE_ROWS:
        X, I, Y, Ys = norm_from_spec(bs), profile_from_spec(ps), norm_from_spec(ys), norm_from_spec(yss)
        vals = {}
        for K in (2, 4):
            vals[K] = _negative_values(X, I, m, Y, Ys, K, cfg.seed, 256)
        v = vals[2]
        base = v[0][2] / v[0][1]
        growth = [(f"L={d}", (s / p) / base) for d, p, s in v]
        g8 = vals[4]
        base8 = g8[0][2] / g8[0][1]
        top4 = growth[-1][1]
        top8 = (g8[-1][2] / g8[-1][1]) / base8
        det = {
            "passing": [p for _, p, _ in v],
            "stronger": [s for _, _, s in v],
            "depths": list(NEG_DEPTHS),
            "growth_2N": top8,
            "target": ys,
            "stronger_target": yss,
        }
        rep = RatioReport("negative-controls", {"X": bs, "I": ps, "m": m}, growth[0][1], top4, growth[0][0], growth[-1][0],
                          make_grid(2, 2.0 ** -NEG_DEPTHS[-1]).n_cells, _rel(top4, top8), (NEG_GROWTH, INF), "growth", len(growth), det)
        reports.append(rep)
    return reports


def _check_profile_facts(cfg: SuiteConfig):
    """F_Phi/L_Phi band, and the two elementary inequalities for Phi."""
    rng = np.random.default_rng(cfg.seed)
    reports = []
    s_band = np.geomspace(2.0 ** -30, 0.5, 120)
    for name, phi in _phis().items():
        I = L_phi_profile(phi)
        ratios = [(f"s={s:.3g}", F_phi(phi, s) / float(I.I(s))) for s in s_band]
        reports.append(_bound_report("profile-facts", {"Phi": name, "fact": "F/L"}, ratios, make_grid(cfg.K, cfg.t_min), cfg.band[1], cfg.band[0]))
        # lower <= L_Phi(s) <= 2 lower on (0, 1/2]
        s = np.exp(rng.uniform(math.log(2.0 ** -60), math.log(0.5), 1000))
        low = s * phi.dphi(phi.phi_inv(np.log(1.0 / s)))
        L = I.I(s)
        r1 = low / L
        r2 = L / (2 * low)
        pairs = [("lower/L", float(r1.max())), ("L/(2 lower)", float(r2.max()))]
        viol = int((r1 > 1 + 1e-12).sum() + (r2 > 1 + 1e-12).sum())
        reports.append(_bound_report("profile-facts", {"Phi": name, "fact": "delta2"}, pairs, make_grid(cfg.K, cfg.t_min), 1 + 1e-12, detail={"violations": viol, "points": 1000}))
        # Phi^{-1}(s)/(2s) <= 1/Phi'(Phi^{-1}(s)) <= (Phi^{-1}(s)-Phi^{-1}(t))/(s-t) <= Phi^{-1}(s)/s
        x = np.exp(rng.uniform(math.log(1e-6), math.log(1e6), 1000))
        frac = rng.uniform(0.0, 1.0, 1000)
        y = x * frac
        inv = phi.phi_inv(x)
        a = inv / (2 * x)
        b = 1.0 / phi.dphi(inv)
        c = phi.phi_inv_diff(x, y) / (x - y)
        d = inv / x
        q = [a / b, b / c, c / d]
        pairs = [(nm, float(v.max())) for nm, v in zip(("first", "second", "third"), q)]
        viol = int(sum((v > 1 + 1e-12).sum() for v in q))
        reports.append(_bound_report("profile-facts", {"Phi": name, "fact": "e"}, pairs, make_grid(cfg.K, cfg.t_min), 1 + 1e-12, detail={"violations": viol, "points": 1000}))
    return reports


def _check_reduction(cfg: SuiteConfig):
    grid = cfg.grid()
    out = []
    for I, m, xs in ((power_profile(0.5), 2, "lebesgue:2"), (power_profile(0.75), 1, "lebesgue:2")):
        X = norm_from_spec(xs)
        Y = resolve_target(X, I, m).target
        F = TestFamily.for_space(grid, X, cfg.seed, 32)
        out.append(nonincreasing_reduction_check(I, m, X, Y, F, (1.0 - 1e-12, cfg.band[1])))
    return out


def _doubling_rhs_matrix(I: PowerProfile, j, grid):
    c = j - 1 - j * float(I.alpha)
    a, b = grid.edges[:-1], grid.edges[1:]

    def prim(x):
        if abs(c + 1) < 1e-14:
            return np.log(x)
        return x ** (c + 1) / (c + 1)

    def rows(t):
        lo = np.maximum(a[None, :], t[:, None])
        k = np.where(b[None, :] > t[:, None], prim(b)[None, :] - prim(lo), 0.0)
        return k

    return _cell_average_matrix(rows, grid)


def _check_doubling_simplify(cfg: SuiteConfig):
    """With a doubling power profile, the H^j kernel can be replaced by s^{j-1}/I(s)^j."""
    grid = cfg.grid()
    I = power_profile(0.5)
    j = 2
    reports = []
    for xs in ("lebesgue:1", "linf"):
        X = norm_from_spec(xs)

        def fn(g, X=X):
            F = TestFamily.for_space(g, lebesgue(1), cfg.seed, cfg.family_size)
            Hm = operator_matrix("H", I, j, g)
            Rt = _doubling_rhs_matrix(I, j, g)
            out = []
            for mem in F:
                lhs = math.factorial(j - 1) * eval_norm(X, GridFunction(g, np.maximum(Hm @ mem.values, 0)))
                rhs = eval_norm(X, GridFunction(g, np.maximum(Rt @ mem.values, 0)))
                if rhs > 0 and np.isfinite(lhs / rhs):
                    out.append((mem.id, float(lhs / rhs)))
            return out

        reports.append(ratio_report("doubling-simplify", {"I": "s^1/2", "j": j, "X": xs}, fn, grid, cfg.band))
    return reports


def _check_trial_identity(cfg: SuiteConfig):
    """Nested integrals with I = s^alpha equal the single kernel integral; and -M' = M^alpha."""
    grid = make_grid(8, 2.0 ** -20)
    F = TestFamily(grid, cfg.seed, size=10, theta_max=0.5)
    t = _interior_points(grid)[::3]
    from .operators import H_m_at

    reports = []
    for al in (0.5, 0.75):
        I = power_profile(al)
        for m in (2, 3):
            pairs = []
            for mem in F:
                f = mem.f(grid)
                a = H_m_at(I, m, f, t)
                b = compose_H(I, m, f)(t)
                sel = a > 0
                pairs.append((mem.id, float(np.max(np.abs(a[sel] - b[sel]) / a[sel]))))
            reports.append(_bound_report("trial-function-identity", {"alpha": _short(al), "m": m}, pairs, grid, 1e-6))
    pairs = []
    for al in (0.5, 0.75, 1.0):
        for r in (0.1, 0.5, 1.0, 1.5):
            if al < 1 and r >= 1 / (1 - al):
                continue
            h = 1e-5
            d = -(model_domain_M(al, r + h) - model_domain_M(al, r - h)) / (2 * h)
            pairs.append((f"alpha={al},r={r}", abs(d / model_domain_M(al, r) ** al - 1)))
    reports.append(_bound_report("trial-function-identity", {"fact": "model-domain"}, pairs, grid, 1e-8))
    return reports


def _check_boundedness(cfg: SuiteConfig):
    """||H^m f||_{X_{m,I}} / ||f||_X stays bounded (lower bound of the target norm)."""
    grid = cfg.grid()
    reports = []
    for xs, ps, m in (("lebesgue:2", "power:0.75", 1), ("lebesgue:1", "gauss", 2)):
        X = norm_from_spec(xs)
        I = profile_from_spec(ps)
        T = TargetNorm(X, I, m)

        def fn(g, X=X, I=I, m=m, T=T):
            F = TestFamily.for_space(g, X, cfg.seed, 12, nonmonotone=False)
            out = []
            for mem in F:
                f = mem.f(g)
                nx = eval_norm(X, f)
                if nx > 0 and np.isfinite(nx):
                    out.append((mem.id, target_norm_eval(T, apply_H_m(I, m, f)).value / nx))
            return out

        reports.append(ratio_report("boundedness", {"X": xs, "I": ps, "m": m}, fn, grid, (0.0, cfg.band[1])))
    return reports


def _check_dual_inequality(cfg: SuiteConfig):
    """||R^m g||_{X'} <= ||R^m g*||_{X'}, i.e. the full associate functional over (m-1)!."""
    grid = cfg.grid()
    F = TestFamily(grid, cfg.seed, size=cfg.family_size, theta_max=0.4)
    reports = []
    for xs in ("lebesgue:2", "lorentz:2,1"):
        X = norm_from_spec(xs)
        Xa = associate_spec(X)
        for pn in ("s^1/2", "gauss"):
            I = PROFILES[pn]()
            for m in (1, 2):
                T = TargetNorm(X, I, m)
                Rm = operator_matrix("R", I, m, grid)
                U = F.matrix()
                lhs = _row_norms(Xa, np.maximum(U @ Rm.T, 0.0), grid)
                rhs = target_assoc_rows(T, U, grid) / math.factorial(m - 1)
                pairs = [(mem.id, float(a / b)) for mem, a, b in zip(F, lhs, rhs) if b > 0]
                reports.append(_bound_report("dual-inequality", {"X": xs, "I": pn, "m": m}, pairs, grid, 1 + 1e-9))
    return reports


def _check_variants(cfg: SuiteConfig):
    """Sharp and iterated associates against the full one; phi against tilde for Phi = id."""
    grid = cfg.grid()
    reports = []
    for xs, pn, m in (("lebesgue:2", "s^1/2", 2), ("lebesgue:1", "s^3/4", 2)):
        X = norm_from_spec(xs)
        I = PROFILES[pn]()
        for v, chk in (("sharp", "sharp-vs-full"), ("iterated", "iterated-vs-full")):

            def fn(g, X=X, I=I, m=m, v=v):
                M, names = _iteration_family(g)
                a = target_assoc_rows(TargetNorm(X, I, m, v), M, g)
                d = target_assoc_rows(TargetNorm(X, I, m), M, g)
                return [(n, float(x / y)) for n, x, y in zip(names, a, d) if y > 0]

            reports.append(ratio_report(chk, {"X": xs, "I": pn, "m": m}, fn, grid, cfg.band))
    X = lebesgue(2)
    M, names = _iteration_family(grid)
    ph = boltzmann_phi(1.0)
    for m in (1, 2):
        a = target_assoc_rows(TargetNorm(X, None, m, "phi", ph), M, grid)
        b = target_assoc_rows(TargetNorm(X, None, m, "tilde"), M, grid)
        pairs = [(n, float(abs(x / y - 1))) for n, x, y in zip(names, a, b) if y > 0]
        reports.append(_bound_report("phi-tilde", {"X": "lebesgue:2", "m": m}, pairs, grid, 1e-12))
    return reports


def _check_level_decomposition(cfg: SuiteConfig):
    """G is nonincreasing, dominates R^m f*, and equals R^m f* off its plateaus."""
    grid = make_grid(8, 2.0 ** -24)
    F = TestFamily(grid, cfg.seed, size=16, theta_max=0.5)
    reports = []
    for pn in ("s^1/2", "gauss"):
        I = PROFILES[pn]()
        for m in (1, 2):
            pairs = []
            for mem in F:
                g, dec = apply_G_m(I, m, mem.f(grid))
                err = np.max(np.abs(dec.reconstruct() - dec.g_values) / np.maximum(dec.g_values, 1e-300))
                below = float(np.max((dec.r_values - dec.g_values) / np.maximum(dec.g_values, 1e-300)))
                mono = float(np.max(np.diff(g.values) / np.maximum(g.values[1:], 1e-300), initial=0.0))
                pairs.append((mem.id, max(err, below, mono, 0.0)))
            reports.append(_bound_report("level-decomposition", {"I": pn, "m": m}, pairs, grid, 1e-12))
    return reports


def _check_weighted_form(cfg: SuiteConfig):
    """Associate LZ norm of R_I f* against the weighted L^{q'} form (t/I(t) nondecreasing)."""
    grid = cfg.grid()
    reports = []
    for xs in ("lorentz:2,1", "lz:2,2,1", "lorentz:4/3,2"):
        X = norm_from_spec(xs)
        Xa = associate_spec(X)
        p, q, al = X.p, X.q, X.alpha
        pc = INF if p == 1 else p / (p - 1)
        qc = INF if q == 1 else q / (q - 1)
        for pn in ("s^1/2", "s", "gauss"):
            I = PROFILES[pn]()

            def fn(g, X=X, Xa=Xa, I=I, pc=pc, qc=qc, al=al):
                F = TestFamily(g, cfg.seed, size=cfg.family_size, theta_max=0.5)
                U = star_rows(F.matrix(), g)
                W = np.maximum(U @ operator_matrix("R", I, 1, g).T, 0.0)
                ex = (0.0 if math.isinf(pc) else 1.0 / pc) - (0.0 if math.isinf(qc) else 1.0 / qc)
                qr = quad_rule(g)
                wt = qr.average(qr.t ** ex * np.log(2.0 / qr.t) ** -al)
                a = _row_norms(Xa, W, g)
                out = []
                for mem, w, av in zip(F, W, a):
                    v = w * wt
                    if math.isinf(qc):
                        b = float(v.max())
                    else:
                        b = float(np.sum(v ** qc * g.lengths) ** (1.0 / qc))
                    if b > 0:
                        out.append((mem.id, float(av / b)))
                return out

            reports.append(ratio_report("weighted-lq-form", {"X": xs, "I": pn}, fn, grid, cfg.band))
    return reports


def _check_estimators(cfg: SuiteConfig):
    """Primal and dual operator-norm estimates agree within a factor 2 on Lorentz pairs."""
    grid = cfg.grid()
    reports = []
    for xs, ys, al, m in (
        ("lebesgue:1", "lorentz:2,1", 0.5, 1),
        ("lorentz:4/3,1", "lorentz:4,1", 0.75, 2),
        ("lebesgue:2", "lorentz:4,2", 0.75, 1),
        ("lebesgue:2", "lebesgue:2", 1.0, 1),
    ):
        X, Y, I = norm_from_spec(xs), norm_from_spec(ys), power_profile(al)
        T = KernelOp("H", I, m)

        def fn(g, X=X, Y=Y, T=T):
            F = TestFamily.for_space(g, X, cfg.seed, cfg.family_size)
            G = TestFamily.for_space(g, associate_spec(Y), cfg.seed + 1, cfg.family_size)
            lo = op_norm_lower(T, X, Y, F)
            du = op_norm_dual(T, X, Y, G)
            return [("dual/lower", du / lo)]

        reports.append(ratio_report("estimator-agreement", {"X": xs, "Y": ys, "I": f"s^{_short(al)}", "m": m}, fn, grid, (0.5, 2.0)))
    return reports


SUITE = {
    "kernel-composition": _check_kernel_composition,
    "associativity": _check_associativity,
    "indicator-closed-form": _check_indicator_closed_form,
    "sandwich-P": _check_sandwich,
    "doubling-bound": _check_doubling_bound,
    "four-way-equivalence": _check_four_way,
    "closed-form-targets": _check_closed_form_targets,
    "linf-criterion": _check_linf,
    "iteration": _check_iteration,
    "negative-controls": _check_negative_controls,
    "profile-facts": _check_profile_facts,
    "reduction-nonincreasing": _check_reduction,
    "doubling-simplify": _check_doubling_simplify,
    "trial-function-identity": _check_trial_identity,
    "boundedness": _check_boundedness,
    "dual-inequality": _check_dual_inequality,
    "variants": _check_variants,
    "level-decomposition": _check_level_decomposition,
    "weighted-lq-form": _check_weighted_form,
    "estimator-agreement": _check_estimators,
}


def theorem_suite(name: str, config: SuiteConfig | None = None):
    """Run one registered check and return its reports."""
    if name not in SUITE:
        raise RegistryError(f"unknown check id {name!r}; known: {', '.join(sorted(SUITE))}")
    return SUITE[name](config or SuiteConfig())


def _run_one(args):
    name, cfg = args
    return [r.to_json() for r in theorem_suite(name, cfg)]


def run_suite(names=None, config: SuiteConfig | None = None, jobs=1):
    """Run several checks (all by default); JSON reports sorted by id."""
    cfg = config or SuiteConfig()
    names = sorted(SUITE) if names is None else list(names)
    for n in names:
        if n not in SUITE:
            raise RegistryError(f"unknown check id {n!r}")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_run_one, [(n, cfg) for n in names]))
    else:
        chunks = [_run_one((n, cfg)) for n in names]
    out = [r for c in chunks for r in c]
    return sorted(out, key=lambda r: r["id"])


def reports_jsonl(reports) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in reports)


def reports_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "check", "min", "max", "band_lo", "band_hi", "N", "drift", "verdict"])
    for r in reports:
        w.writerow([r["id"], r["check"], repr(r["min"]), repr(r["max"]), r["band"][0], r["band"][1], r["N"], r["drift"], r["verdict"]])
    return buf.getvalue()
