"""Isoperimetric profiles I on [0, 1] and product-measure helpers.

Every profile exposes ``I(s)``, an increasing antiderivative ``psi`` of
1/I with its inverse, and ``J(a, b) = int_a^b dr / I(r)``.  The profile
built from a measure density exp(-Phi) is ``L_Phi(s) = s Phi'(Phi^{-1}(log 2/s))``;
its J has the closed form Phi^{-1}(log 2/a) - Phi^{-1}(log 2/b).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .gridfn import Grid, ParameterError

__all__ = [
    "Profile",
    "PowerProfile",
    "LPhiProfile",
    "TableProfile",
    "PhiFunction",
    "power_profile",
    "linear_profile",
    "john_profile",
    "gauss_profile",
    "boltzmann_profile",
    "table_profile",
    "L_phi_profile",
    "gauss_phi",
    "boltzmann_phi",
    "H_function",
    "H_inverse",
    "F_phi",
    "model_domain_M",
    "profile_from_spec",
]


class Profile:
    """Nondecreasing profile with its 1/I antiderivative."""

    kind = "abstract"

    def I(self, s):  # noqa: E743 - the profile's conventional name
        raise NotImplementedError

    def psi(self, s):
        raise NotImplementedError

    def psi_inv(self, y):
        raise NotImplementedError

    def J(self, a, b):
        """int_a^b dr / I(r) for a <= b (vectorized; a may be 0)."""
        return self.psi(b) - self.psi(a)

    @property
    def key(self):
        raise NotImplementedError

    @property
    def is_doubling(self):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Profile) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"{type(self).__name__}{self.key[1:]}"

    def lower_bound(self, grid: Grid):
        """inf of I(t)/t over the grid breakpoints."""
        t = grid.breakpoints
        return float(np.min(self.I(t) / t))

    def doubling_constant(self, grid: Grid):
        """sup of J(0, s) I(s) / s over the breakpoints (inf if J(0, .) diverges)."""
        s = grid.breakpoints
        j0 = self.J(np.zeros_like(s), s)
        return float(np.max(j0 * self.I(s) / s))

    def is_nondecreasing(self, n=10_000):
        s = np.linspace(1.0 / n, 1.0, n)
        return bool(np.all(np.diff(self.I(s)) >= -1e-15 * self.I(s)[1:]))

    def to_json(self):
        raise NotImplementedError


class PowerProfile(Profile):
    """I(s) = s^alpha, 0 <= alpha <= 1."""

    def __init__(self, alpha, kind="power", n=None):
        alpha = float(alpha)
        if not 0 <= alpha <= 1:
            raise ParameterError("alpha must lie in [0, 1]")
        self.alpha = alpha
        self.beta = 1.0 - alpha
        self.kind = kind
        self.n = n

    @property
    def key(self):
        return ("power", self.alpha)

    @property
    def is_doubling(self):
        return self.alpha < 1

    def I(self, s):  # noqa: E743
        return np.asarray(s, dtype=float) ** self.alpha

    def psi(self, s):
        s = np.asarray(s, dtype=float)
        if self.beta == 0:
            with np.errstate(divide="ignore"):
                return np.log(s)
        return s ** self.beta / self.beta

    def psi_inv(self, y):
        y = np.asarray(y, dtype=float)
        if self.beta == 0:
            return np.exp(y)
        return (self.beta * y) ** (1.0 / self.beta)

    def J(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.beta == 0:
                out = np.log(b / a)
            else:
                out = -(b ** self.beta) * np.expm1(self.beta * np.log(a / b)) / self.beta
        return np.where(a >= b, 0.0, out)

    def to_json(self):
        if self.kind == "john":
            return {"type": "john", "n": self.n}
        if self.kind == "linear":
            return {"type": "linear"}
        return {"type": "power", "alpha": self.alpha}


class PhiFunction:
    """Phi(t) = t^beta / beta on [0, inf), 1 <= beta <= 2.

    beta = 2 is the Gauss case and beta = 1 gives Phi(t) = t.  The
    normalizing constant c_Phi (total mass one for c exp(-Phi(|x|))) is
    computed once by quadrature.
    """

    def __init__(self, beta, name=None):
        beta = float(beta)
        if not 1 <= beta <= 2:
            raise ParameterError("beta must lie in [1, 2]")
        self.beta = beta
        self.name = name or ("gauss" if beta == 2 else "boltzmann")
        half, _ = integrate.quad(lambda t: math.exp(-self.phi(t)), 0, math.inf, epsabs=0, epsrel=1e-13)
        self.c = 1.0 / (2.0 * half)

    def __eq__(self, other):
        return isinstance(other, PhiFunction) and other.beta == self.beta

    def __hash__(self):
        return hash(("phi", self.beta))

    def __repr__(self):
        return f"PhiFunction(beta={self.beta})"

    def phi(self, t):
        return np.abs(t) ** self.beta / self.beta

    def dphi(self, t):
        if self.beta == 1:
            return np.ones_like(np.asarray(t, dtype=float))
        return np.asarray(t, dtype=float) ** (self.beta - 1.0)

    def phi_inv(self, y):
        return (self.beta * np.asarray(y, dtype=float)) ** (1.0 / self.beta)

    def phi_inv_diff(self, ya, yb):
        """Phi^{-1}(ya) - Phi^{-1}(yb) for ya >= yb > 0 without cancellation."""
        ya = np.asarray(ya, dtype=float)
        yb = np.asarray(yb, dtype=float)
        base = self.phi_inv(yb)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = base * np.expm1(np.log1p((ya - yb) / yb) / self.beta)
        return np.where(np.isinf(ya), np.inf, out)

    def density(self, x):
        return self.c * np.exp(-self.phi(x))


@lru_cache(maxsize=None)
def gauss_phi():
    return PhiFunction(2.0, "gauss")


@lru_cache(maxsize=None)
def boltzmann_phi(beta):
    return PhiFunction(beta)


class LPhiProfile(Profile):
    """L_Phi(s) = s Phi'(Phi^{-1}(log(2/s)))."""

    def __init__(self, phi: PhiFunction, kind=None):
        self.phi = phi
        self.kind = kind or phi.name

    @property
    def key(self):
        return ("lphi", self.phi.beta)

    @property
    def is_doubling(self):
        return False

    def I(self, s):  # noqa: E743
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            out = s * self.phi.dphi(self.phi.phi_inv(np.log(2.0 / s)))
        return np.where(s <= 0, 0.0, out)

    def psi(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return -self.phi.phi_inv(np.log(2.0 / s))

    def psi_inv(self, y):
        y = np.asarray(y, dtype=float)
        return 2.0 * np.exp(-self.phi.phi(-y))

    def J(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        with np.errstate(divide="ignore"):
            la = np.log(2.0 / a)
            lb = np.log(2.0 / b)
        out = self.phi.phi_inv_diff(la, lb)
        return np.where(a >= b, 0.0, out)

    def to_json(self):
        if self.phi.beta == 2 and self.kind == "gauss":
            return {"type": "gauss"}
        return {"type": "boltzmann", "beta": self.phi.beta}


class TableProfile(Profile):
    """Left-continuous step profile: I = I_k on (s_{k-1}, s_k]."""

    def __init__(self, points):
        pts = sorted((float(s), float(v)) for s, v in points)
        s = np.array([p[0] for p in pts])
        v = np.array([p[1] for p in pts])
        if s.size == 0 or s[0] <= 0 or np.any(np.diff(s) <= 0) or s[-1] > 1:
            raise ParameterError("table abscissae must be increasing in (0, 1]")
        if np.any(v <= 0) or np.any(np.diff(v) < 0):
            raise ParameterError("table values must be positive and nondecreasing")
        if s[-1] < 1:
            s = np.append(s, 1.0)
            v = np.append(v, v[-1])
        self.s = s
        self.v = v
        self.edges = np.concatenate(([0.0], s))
        self.cum = np.concatenate(([0.0], np.cumsum(np.diff(self.edges) / v)))
        self.kind = "table"

    @property
    def key(self):
        return ("table", tuple(self.s.tolist()), tuple(self.v.tolist()))

    @property
    def is_doubling(self):
        return True

    def I(self, s):  # noqa: E743
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self.s, s, side="left"), 0, self.v.size - 1)
        return np.where(s <= 0, 0.0, self.v[idx])

    def psi(self, s):
        return np.interp(np.asarray(s, dtype=float), self.edges, self.cum)

    def psi_inv(self, y):
        return np.interp(np.asarray(y, dtype=float), self.cum, self.edges)

    def to_json(self):
        return {"type": "table", "points": [[float(a), float(b)] for a, b in zip(self.s, self.v)]}


def power_profile(alpha):
    return PowerProfile(alpha)


def linear_profile():
    return PowerProfile(1.0, kind="linear")


def john_profile(n):
    """Profile s^{1 - 1/n} of a John domain in dimension n."""
    n = int(n)
    if n < 2:
        raise ParameterError("dimension must be at least 2")
    return PowerProfile(1.0 - 1.0 / n, kind="john", n=n)


def L_phi_profile(phi: PhiFunction):
    return LPhiProfile(phi)


def gauss_profile():
    return LPhiProfile(gauss_phi(), "gauss")


def boltzmann_profile(beta):
    return LPhiProfile(boltzmann_phi(float(beta)), "boltzmann")


def table_profile(points):
    return TableProfile(points)


def profile_from_spec(spec):
    """Build a profile from a dict or a short string like ``power:0.75``."""
    if isinstance(spec, Profile):
        return spec
    if isinstance(spec, str):
        name, _, arg = spec.partition(":")
        name = name.strip().lower()
        if name == "power":
            return power_profile(_num(arg))
        if name == "john":
            return john_profile(int(arg))
        if name == "linear":
            return linear_profile()
        if name == "gauss":
            return gauss_profile()
        if name == "boltzmann":
            return boltzmann_profile(_num(arg))
        raise ParameterError(f"unknown profile {spec!r}")
    t = spec.get("type")
    if t == "power":
        return power_profile(spec["alpha"])
    if t == "john":
        return john_profile(spec["n"])
    if t == "linear":
        return linear_profile()
    if t == "gauss":
        return gauss_profile()
    if t == "boltzmann":
        return boltzmann_profile(spec["beta"])
    if t == "table":
        return table_profile(spec["points"])
    raise ParameterError(f"unknown profile type {t!r}")


def _num(text):
    from fractions import Fraction

    return float(Fraction(text.strip()))


# ------------------------------------------------- one-dimensional measure

def H_function(phi: PhiFunction, t):
    """Upper tail mass H(t) of the density c exp(-Phi(|x|))."""
    t = float(t)
    if t < 0:
        return 1.0 - H_function(phi, -t)
    if math.isinf(t):
        return 0.0
    val, _ = integrate.quad(lambda r: math.exp(-phi.phi(r)), t, math.inf, epsabs=0, epsrel=1e-13, limit=200)
    return phi.c * val


def _log_H(phi, t):
    h = H_function(phi, t)
    if h > 0:
        return math.log(h)
    # far tail: c exp(-Phi(t)) / Phi'(t) to leading order
    return math.log(phi.c) - float(phi.phi(t)) - math.log(float(phi.dphi(t)))


def H_inverse(phi: PhiFunction, s, tol=1e-13):
    """t with H(t) = s, by root finding on a geometrically grown bracket."""
    s = float(s)
    if not 0 < s < 1:
        if s == 0:
            return math.inf
        if s == 1:
            return -math.inf
        raise ParameterError("s must lie in [0, 1]")
    if s > 0.5:
        return -H_inverse(phi, 1.0 - s, tol)
    if s == 0.5:
        return 0.0
    target = math.log(s)
    hi = 1.0
    while _log_H(phi, hi) > target:
        hi *= 2.0
    return optimize.brentq(lambda t: _log_H(phi, t) - target, 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def F_phi(phi: PhiFunction, s):
    """F_Phi(s) = c exp(-Phi(|H^{-1}(s)|)); zero at s = 0 and s = 1."""
    s = float(s)
    if s <= 0 or s >= 1:
        return 0.0
    return float(phi.density(H_inverse(phi, s)))


def model_domain_M(alpha, r):
    """M_alpha(r) = (1 - (1 - alpha) r)^{1/(1-alpha)}, or exp(-r) when alpha = 1.

    Satisfies -M' = M^alpha.
    """
    alpha = float(alpha)
    r = float(r)
    if not 0 < alpha <= 1:
        raise ParameterError("alpha must lie in (0, 1]")
    if r < 0:
        raise ParameterError("r must be nonnegative")
    if alpha == 1:
        return math.exp(-r)
    if r > 1.0 / (1.0 - alpha):
        raise ParameterError("r beyond the end of the model domain")
    return (1.0 - (1.0 - alpha) * r) ** (1.0 / (1.0 - alpha))
