"""Optimal target norms built from a base norm, a profile and an order.

Variants of the associate functional, for nonnegative g with rearrangement g*:

    full      (m-1)! || R_I^m g* ||_{X'}
    sharp     || t^{m-1}/I(t)^m int_0^t g* ||_{X'}
    iterated  X'_0 = X',  ||g||_{X'_j} = ||R_I g*||_{X'_{j-1}}
    tilde     full with the linear profile I(s) = s
    phi       tilde associate of the level function of g*(s) (Phi^{-1}(log 2/s)/log(2/s))^m

The target norm itself is the associate of these functionals; it is bounded
from below by duality over a family of nonincreasing test functions, and
reported together with the closed-form table space when one applies.

Working-grid convention: every evaluator keeps the grid of its argument.
Rearrangements of intermediate results are replaced by their cell averages
on that grid (exact for pairings with step functions of the grid, and a
contraction in every rearrangement-invariant norm), so the operator
matrices are built once per grid and reused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .gridfn import Grid, GridFunction, ParameterError, make_grid, power_log_integrals, quad_rule
from .norms import (
    INF,
    NormSpec,
    YoungFunction,
    associate_spec,
    canonical_family,
    eval_norm,
    eval_step,
    exp_space,
    glz,
    lebesgue,
    level_function,
    linf,
    lorentz,
    lorentz_zygmund,
    norm_from_spec,
    orlicz,
    orlicz_as_lz,
    render,
)
from .operators import _cell_average_matrix, operator_matrix
from .profiles import LPhiProfile, PhiFunction, PowerProfile, Profile, TableProfile, L_phi_profile, linear_profile, profile_from_spec

__all__ = [
    "TargetNorm",
    "UnsupportedBase",
    "SymbolicTarget",
    "TargetNormReport",
    "LinfVerdict",
    "OrliczTransform",
    "target_assoc_eval",
    "target_assoc_rows",
    "target_norm_eval",
    "resolve_target",
    "resolve_for",
    "linf_criterion",
    "orlicz_transform",
    "iterate_target",
    "star_rows",
]

VARIANTS = ("full", "sharp", "iterated", "tilde", "phi")


class UnsupportedBase(ParameterError):
    """The base norm has no closed-form associate."""


@dataclass(frozen=True)
class TargetNorm:
    base: NormSpec
    profile: Profile | None
    m: int
    variant: str = "full"
    phi: PhiFunction | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown target variant {self.variant!r}")
        if int(self.m) != self.m or self.m < 0:
            raise ParameterError("order must be a nonnegative integer")
        if self.variant == "phi" and self.phi is None:
            raise ParameterError("phi variant needs a Phi function")
        if self.variant in ("full", "sharp", "iterated") and self.profile is None:
            raise ParameterError("target needs a profile")

    def working_profile(self) -> Profile:
        if self.variant == "tilde":
            return linear_profile()
        if self.variant == "phi":
            return L_phi_profile(self.phi)
        return self.profile

    def __str__(self):
        sub = {"full": "", "sharp": "#", "iterated": "it", "tilde": "~", "phi": "Phi"}[self.variant]
        return f"({self.base})_{{{self.m},{self.working_profile()!r}{sub}}}"

    def to_json(self):
        if self.variant == "phi":
            prof = {"type": "boltzmann", "beta": self.phi.beta}
        elif self.profile is not None:
            prof = self.profile.to_json()
        else:
            prof = {"type": "linear"}
        return {"base": self.base.to_json(), "profile": prof, "m": self.m, "variant": self.variant}

    @classmethod
    def from_json(cls, d):
        base = norm_from_spec(d["base"])
        variant = d.get("variant", "full")
        m = int(d.get("m", 1))
        prof = profile_from_spec(d["profile"]) if "profile" in d else None
        if variant == "phi":
            if not isinstance(prof, LPhiProfile):
                raise ParameterError("phi variant needs a gauss or boltzmann profile")
            return cls(base, prof, m, "phi", prof.phi)
        return cls(base, prof, m, variant)


# ------------------------------------------------------------- row helpers

def star_rows(U, grid: Grid):
    """Cell averages on ``grid`` of the decreasing rearrangement of every row."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    L = grid.lengths
    e = grid.edges
    out = U.copy()
    mono = np.all(np.diff(U, axis=1) <= 0, axis=1)
    for i in np.nonzero(~mono)[0]:
        u = U[i]
        if np.isinf(u).any():
            out[i] = np.inf
            continue
        order = np.argsort(-u, kind="stable")
        v = u[order]
        ends = np.concatenate(([0.0], np.cumsum(L[order])))
        ends[-1] = 1.0
        F = np.concatenate(([0.0], np.cumsum(v * L[order])))
        out[i] = np.maximum(np.diff(np.interp(e, ends, F)), 0.0) / L
        # interpolation can leave a few ulps of increase; enforce monotonicity
        out[i] = np.minimum.accumulate(out[i])
    return out


def _apply_rows(M, U):
    fin = np.isfinite(U)
    if fin.all():
        return np.maximum(U @ M.T, 0.0)
    out = np.where(fin, U, 0.0) @ M.T
    hit = (~fin).astype(float) @ (M.T > 0).astype(float)
    return np.where(hit > 0, np.inf, np.maximum(out, 0.0))


def _norms_rows(X: NormSpec, W, grid: Grid):
    """Norms of nonincreasing rows on ``grid``."""
    if X.family == "derived":
        if X.dual:
            return target_assoc_rows(X.target, W, grid)
        return np.array([target_norm_eval(X.target, GridFunction(grid, w)).value for w in W])
    ends = grid.edges[1:]
    return np.array([eval_step(X, w, ends) for w in W])


def _xa(T: TargetNorm):
    Xa = associate_spec(T.base)
    if Xa is None:
        raise UnsupportedBase(f"no closed-form associate for {T.base}")
    return Xa


@lru_cache(maxsize=16)
def _sharp_matrix(I: Profile, m: int, grid: Grid):
    # kernel of t^{m-1}/I(t)^m int_0^t, formed on the quadrature nodes
    a = grid.edges[:-1]

    def rows(t):
        idx = grid.cell_index(t)
        j = np.arange(grid.n_cells)
        k = np.where(j[None, :] < idx[:, None], grid.lengths[None, :], 0.0)
        k = k + np.where(j[None, :] == idx[:, None], (t - a[idx])[:, None], 0.0)
        return k * (t ** (m - 1) / I.I(t) ** m)[:, None]

    return _cell_average_matrix(rows, grid)


@lru_cache(maxsize=16)
def _phi_factor(phi: PhiFunction, m: int, grid: Grid):
    qr = quad_rule(grid)
    L = np.log(2.0 / qr.t)
    return qr.average((phi.phi_inv(L) / L) ** m)


def target_assoc_rows(T: TargetNorm, U, grid: Grid):
    """Associate functional of ``T`` for every row of ``U`` (cell values on ``grid``)."""
    Xa = _xa(T)
    U = star_rows(U, grid)
    m = T.m
    if m == 0:
        return _norms_rows(Xa, U, grid)
    v = T.variant
    if v in ("full", "tilde"):
        W = _apply_rows(operator_matrix("R", T.working_profile(), m, grid), U)
        return math.factorial(m - 1) * _norms_rows(Xa, W, grid)
    if v == "sharp":
        W = _apply_rows(_sharp_matrix(T.profile, m, grid), U)
        return _norms_rows(Xa, W, grid)
    if v == "iterated":
        M = operator_matrix("R", T.profile, 1, grid)
        W = U
        for _ in range(m):
            W = star_rows(_apply_rows(M, W), grid)
        return _norms_rows(Xa, W, grid)
    # phi
    c = _phi_factor(T.phi, m, grid)
    W = np.array([level_function(GridFunction(grid, u * c)).values for u in U])
    return target_assoc_rows(TargetNorm(T.base, None, m, "tilde"), W, grid)


def target_assoc_eval(T: TargetNorm, f: GridFunction) -> float:
    """Value of the associate norm of ``T`` at ``f`` (may be ``inf``)."""
    return float(target_assoc_rows(T, f.values[None, :], f.grid)[0])


# ------------------------------------------------------------ norm by duality

@dataclass
class TargetNormReport:
    value: float
    closed_form: float | None
    symbolic: SymbolicTarget | None
    argmax: str
    members: int

    @property
    def ratio(self):
        if self.closed_form is None or not self.closed_form > 0:
            return None
        return self.value / self.closed_form


def _extremal_rows(Y: NormSpec | None, fs, grid: Grid):
    """Nonincreasing near-extremal duals of the step function fs for the space Y."""
    rows, names = [], []
    fin = np.where(np.isfinite(fs), fs, 0.0)
    for r in (0.5, 1.0, 2.0, 3.0):
        rows.append(fin ** r)
        names.append(f"f*^{r:g}")
    if Y is None:
        return rows, names
    Z = orlicz_as_lz(Y) if Y.family == "orlicz" else Y
    if Z is None or not Z.is_lz_type:
        return rows, names
    p, q, a, b = Z.p, Z.q, Z.alpha, Z.beta
    if math.isinf(q):
        return rows, names
    e = grid.edges
    ex = q / p - 1 if not math.isinf(p) else -1.0
    wq = power_log_integrals(e, ex, a * q, b * q) / grid.lengths
    if np.all(np.isfinite(wq)):
        g = wq * fin ** (q - 1)
        rows.append(np.minimum.accumulate(g))
        names.append("holder-minorant")
        lv = level_function(GridFunction(grid, g)).values
        if np.all(np.isfinite(lv)):
            rows.append(lv)
            names.append("holder-level")
    return rows, names


@lru_cache(maxsize=64)
def _family_denominators(T: TargetNorm, grid: Grid):
    M, names = canonical_family(grid)
    den = target_assoc_rows(T, M, grid)
    for arr in (M, den):
        arr.setflags(write=False)
    return M, names, den


def target_norm_eval(T: TargetNorm, f: GridFunction, adapt=True, closed_form=True) -> TargetNormReport:
    """Lower bound for ||f||_T by duality, plus the closed-form table value when one exists.

    The bound is the largest int f* g / ||g||_{T'} over the canonical
    nonincreasing family on f's grid; with ``adapt`` the family also gets
    powers of f* and Hoelder extremals of the closed-form table space.
    """
    grid = f.grid
    fs = star_rows(f.values[None, :], grid)[0]
    sym = resolve_for(T) if closed_form else None
    Y = sym.target if sym is not None and sym.kind != "no-table" else None
    M, names, den = _family_denominators(T, grid)
    if adapt:
        rows, extra_names = _extremal_rows(Y, fs, grid)
        if rows:
            E = np.vstack(rows)
            M = np.vstack((M, E))
            names = names + extra_names
            den = np.concatenate((den, target_assoc_rows(T, E, grid)))
    with np.errstate(invalid="ignore"):
        prod = np.where(M == 0, 0.0, M * (fs * grid.lengths)[None, :])
    pair = prod.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where((den > 0) & np.isfinite(den), pair / den, 0.0)
    k = int(np.argmax(ratio))
    value = float(ratio[k])
    cf = float(eval_norm(Y, f)) if Y is not None else None
    return TargetNormReport(value, cf, sym, names[k], M.shape[0])


# ------------------------------------------------------------------ resolver

@dataclass(frozen=True)
class SymbolicTarget:
    """A table target space, the L^inf verdict, or ``no-table``.

    ``rule`` names the single table branch that produced the answer;
    ``orlicz_target`` carries the best Orlicz space when the table also
    lists one; ``note`` records the scope of the optimality claim.
    """

    kind: str
    target: NormSpec | None
    rule: str
    note: str = ""
    orlicz_target: NormSpec | None = field(default=None, compare=False)

    def __str__(self):
        if self.kind == "no-table":
            return f"no-table [{self.rule}]"
        return f"{render(self.target)} [{self.rule}]"

    def to_json(self):
        d = {"target": None if self.target is None else self.target.to_json(), "theorem": self.rule, "kind": self.kind}
        if self.orlicz_target is not None:
            d["orlicz_target"] = self.orlicz_target.to_json()
        if self.note:
            d["note"] = self.note
        return d


def _fr(x):
    if isinstance(x, Fraction):
        return x
    if math.isinf(x):
        return INF
    return Fraction(x).limit_denominator(10 ** 6)


def _no_table(why):
    return SymbolicTarget("no-table", None, "no-table", why)


def _space(X, rule, note="", orl=None):
    kind = "linf" if (X.family == "lebesgue" and math.isinf(X.p)) else "space"
    return SymbolicTarget(kind, X, rule, note, orl)


def _lz_params(base: NormSpec):
    """(p, q, alpha, kind) of a base norm on the Lorentz-Zygmund scale, or None."""
    if base.family == "lebesgue":
        return _fr(base.p), _fr(base.q), Fraction(0), "lebesgue"
    if base.family in ("lorentz", "lorentz-zygmund") and not base.double and not base.quasi:
        return _fr(base.p), _fr(base.q), _fr(base.alpha), base.family
    if base.family == "orlicz":
        y = base.young
        if y.preset == "power":
            return _fr(y.p), _fr(y.p), Fraction(0), "orlicz-power"
        if y.preset == "powerlog":
            p = _fr(y.p)
            return p, p, _fr(y.beta) / p, "orlicz-powerlog"
        if y.preset == "exp":
            return INF, INF, -1 / _fr(y.gamma), "orlicz-exp"
    return None


def _lorentz_admissible(p, q):
    return (1 < p < INF) or (p == 1 and q == 1) or (p == INF and q == INF)


def _lz_admissible(p, q, a):
    if 1 < p < INF:
        return True
    if p == 1 and q == 1:
        return a >= 0
    if p == INF and q == INF:
        return a <= 0
    if p == INF and 1 <= q < INF:
        return a + 1 / q < 0
    return False


def _F(x):
    return INF if x == INF else float(x)


def _lz_out(p, q, a):
    if a == 0:
        if p == q:
            return lebesgue(_F(p))
        return lorentz(_F(p), _F(q))
    return lorentz_zygmund(_F(p), _F(q), float(a))


def _profile_key(profile):
    if isinstance(profile, (str, dict)):
        profile = profile_from_spec(profile)
    if isinstance(profile, PowerProfile):
        return "power", _fr(profile.alpha)
    if isinstance(profile, LPhiProfile):
        return "lphi", _fr(profile.phi.beta)
    return None, None


def resolve_target(base: NormSpec, profile, m: int) -> SymbolicTarget:
    """Table lookup of the optimal target; never extrapolates beyond the table."""
    if int(m) != m or m < 1:
        raise ParameterError("order must be an integer >= 1")
    m = int(m)
    kind, par = _profile_key(profile)
    lz = _lz_params(base)
    if kind is None:
        return _no_table("profile outside the catalog")
    if lz is None:
        return _no_table(f"base {render(base)} outside the table families")
    p, q, a, fam = lz
    if kind == "power":
        alpha = par
        if not (Fraction(1, 2) <= alpha <= 1):
            return _no_table("power exponent outside [1/2, 1]")
        if alpha == 1:
            return _resolve_linear(p, q, a, m)
        return _resolve_power(p, q, a, fam, alpha, m)
    return _resolve_product(p, q, a, fam, par, m)


def _resolve_power(p, q, a, fam, alpha, m):
    k = m * (1 - alpha)
    note = "optimal as the domain ranges over the Maz'ya class of the exponent"
    if fam == "orlicz-powerlog" or (a != 0 and p == q and p < INF):
        beta = a * p
        if not ((p > 1) or (p == 1 and beta >= 0)):
            return _no_table("power-log base outside its admissible range")
        return _resolve_powerlog(p, beta, k, note)
    if a != 0:
        return _no_table("Lorentz-Zygmund base with a log factor is not tabulated for power profiles")
    if not _lorentz_admissible(p, q):
        return _no_table("inadmissible Lorentz base")
    if k < 1 and p < 1 / k:
        r = p / (1 - k * p)
        orl = lebesgue(float(r)) if p == q else None
        return _space(_lz_out(r, q, 0), "power-lorentz/subcritical", note, orl)
    if k < 1 and p == 1 / k and q > 1:
        orl = exp_space(float(1 / (1 - k))) if p == q else None
        return _space(lorentz_zygmund(INF, _F(q), -1.0), "power-lorentz/critical", note, orl)
    return _space(linf(), "power-lorentz/bounded", note, linf())


def _resolve_powerlog(p, beta, k, note):
    crit = (1 - k) / k if k < 1 else None
    if k * p < 1:
        r = p / (1 - k * p)
        orl = orlicz(YoungFunction("powerlog", p=float(r), beta=float(beta / (1 - k * p)))) if beta else lebesgue(float(r))
        tgt = lorentz_zygmund(float(r), float(p), float(beta / p)) if beta else lorentz(float(r), float(p))
        if not beta and r == p:
            tgt = lebesgue(float(r))
        return _space(tgt, "power-loglorentz/subcritical", note, orl)
    if k * p == 1 and beta < crit:
        orl = exp_space(float(1 / (1 - (1 + beta) * k)))
        return _space(lorentz_zygmund(INF, float(1 / k), float(k * beta - 1)), "power-loglorentz/critical", note, orl)
    if k * p == 1 and beta == crit:
        orl = orlicz(YoungFunction("expexp", gamma=float(1 / (1 - k))))
        return _space(glz(INF, float(1 / k), float(-k), -1.0), "power-loglorentz/critical-endpoint", note, orl)
    return _space(linf(), "power-loglorentz/bounded", note, linf())


def _resolve_linear(p, q, a, m):
    if a != 0 or not _lorentz_admissible(p, q):
        return _no_table("linear profile table covers Lorentz bases only")
    note = "optimal as the domain ranges over the Maz'ya class of exponent 1"
    if p < INF:
        return _space(_lz_out(p, q, 0), "linear-lorentz/finite", note)
    return _space(exp_space(float(Fraction(1, m))), "linear-lorentz/infinite", note)


def _resolve_product(p, q, a, fam, beta, m):
    if not (1 <= beta <= 2):
        return _no_table("Boltzmann exponent outside [1, 2]")
    if not _lz_admissible(p, q, a):
        return _no_table("inadmissible Lorentz-Zygmund base")
    gauss = beta == 2
    if p < INF:
        a2 = a + m * (beta - 1) / beta
        if gauss and p == q and fam in ("lebesgue", "orlicz-power") and a == 0:
            return _space(orlicz(YoungFunction("powerlog", p=float(p), beta=float(m * p / 2))), "gauss/lebesgue")
        if p == q and fam == "orlicz-powerlog":
            return _space(orlicz(YoungFunction("powerlog", p=float(p), beta=float(a2 * p))), "product-lz/finite")
        return _space(_lz_out(p, q, a2) if a2 else _lz_out(p, q, 0), "product-lz/finite")
    a2 = a - m / beta
    if gauss and q == INF and fam == "orlicz-exp":
        g = -1 / a
        return _space(exp_space(float(2 * g / (2 + m * g))), "gauss/exp")
    if gauss and q == INF and a == 0:
        return _space(exp_space(float(Fraction(2, m))), "gauss/bounded")
    if q == INF:
        return _space(exp_space(float(-1 / a2)), "product-lz/infinite")
    return _space(lorentz_zygmund(INF, _F(q), float(a2)), "product-lz/infinite")


def resolve_for(T: TargetNorm) -> SymbolicTarget | None:
    """Table target of a TargetNorm, following nested (iterated) bases."""
    if T.m == 0:
        return _space(T.base, "identity")
    base = T.base
    if base.family == "derived" and not base.dual:
        inner = resolve_for(base.target)
        if inner is None or inner.kind == "no-table":
            return _no_table("inner target has no table entry")
        base = inner.target
    elif base.family == "derived":
        return _no_table("associate bases are not tabulated")
    try:
        out = resolve_target(base, T.working_profile(), T.m)
    except ParameterError:
        return _no_table("order outside the table")
    return out


# --------------------------------------------------------------- L^inf test

@dataclass
class LinfVerdict:
    """Whether ||(1/I(s)) J(0,s)^{m-1}||_{X'} is finite.

    ``finite`` comes from the analytic tail exponents when they are known
    (kernel ~ s^-theta log^gamma(2/s) near 0) and from the growth of the
    truncated norm under t_min -> 0 otherwise; ``growth`` lists the
    truncated values at t_min = 2^-20, 2^-40, 2^-80.
    """

    finite: bool
    value: float
    exponents: tuple | None
    reason: str
    growth: tuple = ()
    route: str = "analytic"

    def __bool__(self):
        return self.finite


def _kernel_exponents(I: Profile, m: int):
    if isinstance(I, PowerProfile):
        al = _fr(I.alpha)
        if al < 1:
            return (1 - m * (1 - al), Fraction(0)), None
        if m == 1:
            return (Fraction(1), Fraction(0)), None
        return None, "int_0 dr/I diverges, so the kernel is infinite"
    if isinstance(I, LPhiProfile):
        if m == 1:
            b = _fr(I.phi.beta)
            return (Fraction(1), -(b - 1) / b), None
        return None, "int_0 dr/I diverges, so the kernel is infinite"
    if isinstance(I, TableProfile):
        return (Fraction(-(m - 1)), Fraction(0)), None
    return None, None


def _lz_member(Z: NormSpec, theta, gamma):
    """Whether s^-theta log^gamma(2/s) belongs to the Lorentz-Zygmund space Z."""
    p, q, a, b = _fr(Z.p), _fr(Z.q), _fr(Z.alpha), _fr(Z.beta)
    if Z.double:
        if theta > 1 or (theta == 1 and gamma >= -1):
            return False
        if theta == 1:
            gamma = gamma + 1
    elif theta > 1:
        return False
    e = (1 / p if p != INF else Fraction(0)) - theta
    if e > 0:
        return True
    if e < 0:
        return False
    g = a + gamma
    if q == INF:
        return g < 0 or (g == 0 and b <= 0)
    return g * q < -1 or (g * q == -1 and b * q < -1)


def _kernel_function(I: Profile, m: int, grid: Grid):
    e = grid.edges
    with np.errstate(over="ignore", invalid="ignore"):
        Jb = np.asarray(I.J(np.zeros_like(e[1:]), e[1:]), dtype=float)
        Ja = np.asarray(I.J(np.zeros_like(e[:-1]), e[:-1]), dtype=float)
    Ja[0] = 0.0
    with np.errstate(invalid="ignore", over="ignore"):
        vals = (Jb ** m - Ja ** m) / (m * grid.lengths)
    vals = np.where(np.isnan(vals) | ~np.isfinite(Jb), np.inf, vals)
    return GridFunction(grid, vals)


def linf_criterion(X: NormSpec, I: Profile, m: int, grid: Grid | None = None) -> LinfVerdict:
    Xa = associate_spec(X)
    if Xa is None:
        raise UnsupportedBase(f"no closed-form associate for {X}")
    grid = grid or make_grid()
    value = float(eval_norm(Xa, _kernel_function(I, m, grid)))
    growth = tuple(float(eval_norm(Xa, _kernel_function(I, m, make_grid(16, 2.0 ** -k)))) for k in (20, 40, 80))
    ex, why = _kernel_exponents(I, m)
    if ex is None and why is not None:
        return LinfVerdict(False, INF, None, why, growth)
    Z = orlicz_as_lz(Xa) if Xa.family == "orlicz" else Xa
    if ex is not None and Z is not None and Z.is_lz_type:
        theta, gamma = ex
        ok = _lz_member(Z, theta, gamma)
        why = f"kernel ~ s^{-theta} log^{gamma}(2/s) near 0 {'lies' if ok else 'does not lie'} in {render(Z)}"
        return LinfVerdict(ok, value if ok else INF, (float(theta), float(gamma)), why, growth)
    # numeric route: bounded growth over three orders of magnitude of t_min
    g20, g40, g80 = growth
    ok = np.isfinite(g80) and g80 <= 1.05 * g40
    return LinfVerdict(bool(ok), value if ok else INF, None, "truncated norms under t_min -> 0", growth, "numeric")


# ---------------------------------------------------------- Orlicz transform

@dataclass
class OrliczTransform:
    """Result of the Orlicz transform A -> A_{m,alpha}.

    ``verdict`` is ``orlicz`` (with ``young`` the tabulated A_{m,alpha}) or
    ``linf`` when the order is too large or the tail integral converges.
    """

    verdict: str
    young: YoungFunction | None
    exponent: float | None
    divergent: bool | None
    reason: str


def _tail_divergence(A: YoungFunction, e):
    """Whether int^inf (t/A(t))^e dt diverges (analytic for presets)."""
    if A.preset == "power":
        return (A.p - 1) * e <= 1
    if A.preset == "powerlog":
        s = (A.p - 1) * e
        return s < 1 or (s == 1 and A.beta * e <= 1)
    if A.preset in ("exp", "expexp"):
        return False
    # table: linear extension beyond the last point, so t/A(t) -> 1/slope
    return True


def orlicz_transform(A: YoungFunction, alpha: float, m: int, s_max=2.0 ** 60, n=2000) -> OrliczTransform:
    """Tabulated A_{m,alpha}(t) = A(H^{-1}(t)), H(s) = (int_0^s (t/A)^{e} dt)^{1-k}.

    Here k = m(1-alpha) and e = k/(1-k).  A is replaced by the linear
    function A(1) t on [0, 1] so that the integral near 0 is finite; this
    changes A only near 0, which does not affect the Orlicz space on (0, 1).
    """
    k = m * (1.0 - alpha)
    if k >= 1:
        return OrliczTransform("linf", None, None, None, "order at least 1/(1-alpha)")
    e = k / (1.0 - k)
    div = _tail_divergence(A, e)
    if not div:
        return OrliczTransform("linf", None, e, False, "the tail integral converges")
    A1 = float(A.A(1.0))

    def A_mod(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 1.0, A1 * t, A.A(np.maximum(t, 1.0)))

    s = np.concatenate(([0.0], np.geomspace(2.0 ** -40, s_max, n)))
    x, w = np.polynomial.legendre.leggauss(8)
    la, lb = np.log(s[1:-1]), np.log(s[2:])
    mid, half = 0.5 * (la + lb), 0.5 * (lb - la)
    tt = np.exp(mid[:, None] + half[:, None] * x[None, :])
    with np.errstate(over="ignore", divide="ignore"):
        vals = (tt / A_mod(tt)) ** e * tt
    pieces = (vals * w[None, :]).sum(axis=1) * half
    first = s[1] * (1.0 / A1) ** e
    cum = np.concatenate(([0.0, first], first + np.cumsum(pieces)))
    H = cum ** (1.0 - k)
    Avals = A_mod(s)
    ok = np.isfinite(Avals) & np.isfinite(H)
    Hs, As = H[ok], Avals[ok]
    keep = np.concatenate(([True], np.diff(Hs) > 0))
    pts = [[float(h), float(a_)] for h, a_ in zip(Hs[keep][1:], As[keep][1:])]
    # the composition is convex up to tabulation error; take the greatest convex minorant
    pts = _convex_minorant(pts)
    return OrliczTransform("orlicz", YoungFunction("table", points=pts), e, True, "the tail integral diverges")


def _convex_minorant(pts):
    pts = [(0.0, 0.0)] + [tuple(p) for p in pts]
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return [list(p) for p in hull[1:]]


def iterate_target(T: TargetNorm, h: int) -> TargetNorm:
    """(T)_h: the same construction of order h with T as the base norm."""
    if h == 0:
        return T
    if T.variant not in ("full", "sharp", "phi"):
        raise ParameterError("iteration is defined for the full, sharp and phi variants")
    return TargetNorm(NormSpec("derived", target=T), T.profile, h, T.variant, T.phi)
