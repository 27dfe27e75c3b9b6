"""Closed-form and quadrature quantities behind the sausage growth laws.

Conventions: the heat kernel is ``(2 pi t)^(-d/2) exp(-r^2 / 2t)`` (generator
one half of the Laplacian), so the Green function of R^d, d >= 3, is
``Gamma(d/2 - 1) / (2 pi^(d/2)) r^(2-d)`` and the Newtonian capacity of a
ball is its reciprocal at the radius.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .space import GASKET_ALPHA, GASKET_BETA, ScalingFunction

TRANSIENT = "transient"
WEAKLY_RECURRENT = "weakly-recurrent"
STRONGLY_RECURRENT = "strongly-recurrent"


@dataclass(frozen=True)
class RegimeClassification:
    regime: str
    f_asymptotic: str     # "1", "log t" or "t^(1-a/b)"
    alpha: float
    beta: float


@dataclass(frozen=True)
class LimitConstant:
    """A limit constant, or an interval for one.

    origin is ``"capacity"``, ``"green-reciprocal"`` or ``"sandwich-interval"``.
    """

    value: float
    origin: str
    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self):
        if self.lower is None:
            object.__setattr__(self, "lower", self.value)
        if self.upper is None:
            object.__setattr__(self, "upper", self.value)
        if self.lower > self.upper:
            raise ValueError("lower > upper")
        if self.origin in ("capacity", "green-reciprocal") and self.lower != self.upper:
            raise ValueError("capacity constants are exact")

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= x <= self.upper + slack


# ---------------------------------------------------------------------------
# exponent presets

def gasket_exponents() -> tuple[float, float]:
    """(alpha, beta) of the pre-Sierpinski gasket."""
    return GASKET_ALPHA, GASKET_BETA


def gasket_scaling() -> tuple[ScalingFunction, ScalingFunction]:
    return ScalingFunction.power(GASKET_ALPHA), ScalingFunction.power(GASKET_BETA)


def euclid_scaling(dim: int) -> tuple[ScalingFunction, ScalingFunction]:
    return ScalingFunction.power(float(dim)), ScalingFunction.power(2.0)


# ---------------------------------------------------------------------------
# Psi and f

def _psi_numeric(phi: ScalingFunction, r: float, t: float) -> float:
    # objective in x = log s; scan, then golden-section around the best cell
    def obj(x):
        s = math.exp(x)
        return r / s - t / phi(s)

    xs = np.linspace(math.log(1e-6), math.log(1e6), 2001)
    vals = np.array([obj(x) for x in xs])
    i = int(np.argmax(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    res = optimize.minimize_scalar(lambda x: -obj(x), bracket=None,
                                   bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10})
    return max(0.0, -res.fun, float(vals[i]))


def psi(phi: ScalingFunction, r: float, t: float) -> float:
    """``sup_{s > 0} (r/s - t/phi(s))``; never negative."""
    if not t > 0:
        raise ValueError("t must be positive")
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        return 0.0
    if phi.kind == "pure-power" and phi.exponent > 1.0:
        b, c = phi.exponent, phi.prefactor
        # in u = 1/s: r u - (t/c) u^b, maximal at u* = (r c / (b t))^(1/(b-1))
        u = (r * c / (b * t)) ** (1.0 / (b - 1.0))
        return r * u * (1.0 - 1.0 / b)
    return _psi_numeric(phi, r, t)


def _f_integrand(V: ScalingFunction, phi: ScalingFunction):
    return lambda s: 1.0 / V(phi.inverse(s))


def f_integral(V: ScalingFunction, phi: ScalingFunction, t: float) -> float:
    """``f(t) = int_1^t ds / V(phi^{-1}(s))``."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if t == 1:
        return 0.0
    if V.kind == "pure-power" and phi.kind == "pure-power":
        # V(phi^{-1}(s)) = k s^q
        q = V.exponent / phi.exponent
        k = V.prefactor * phi.prefactor ** (-q)
        if q == 1.0:
            return math.log(t) / k
        return (t ** (1.0 - q) - 1.0) / ((1.0 - q) * k)
    kink = phi.prefactor     # phi^{-1}(s) = 1 there
    pts = [kink] if 1.0 < kink < t else None
    val, _ = integrate.quad(_f_integrand(V, phi), 1.0, t, points=pts,
                            epsrel=1e-10, epsabs=1e-14, limit=200)
    return val


def f_asymptotic_tag(alpha: float, beta: float) -> str:
    if alpha > beta:
        return "1"
    if alpha == beta:
        return "log t"
    return "t^(1-a/b)"


def classify_regime(alpha: float, beta: float) -> RegimeClassification:
    if not alpha > 0 or not beta > 1:
        raise ValueError("need alpha > 0 and beta > 1")
    if alpha > beta:
        reg = TRANSIENT
    elif alpha == beta:
        reg = WEAKLY_RECURRENT
    else:
        reg = STRONGLY_RECURRENT
    return RegimeClassification(reg, f_asymptotic_tag(alpha, beta), alpha, beta)


def radial_limit(V: ScalingFunction, phi: ScalingFunction) -> str:
    """``"zero"`` iff ``int_0^1 ds / V(phi^{-1}(s))`` diverges, else ``"positive"``.

    Near 0 only the inner exponents matter; the integrand behaves like
    ``s^(-alpha/beta)``.
    """
    return "zero" if V.inner / phi.inner >= 1.0 else "positive"


def lil_normalizers(V: ScalingFunction, phi: ScalingFunction,
                    t: float) -> tuple[float, float]:
    """(``t / f(u)``, ``min(V(phi^{-1}(u)), t / f(u))``) with ``u = t / log log t``."""
    if not t > math.e:
        raise ValueError("t must exceed e")
    u = t / math.log(math.log(t))
    fu = f_integral(V, phi, u)
    sup_n = t / fu if fu > 0 else math.inf
    return sup_n, min(float(V(phi.inverse(u))), sup_n)


# ---------------------------------------------------------------------------
# Euclidean constants

def heat_kernel(dim: int, t, r):
    t = np.asarray(t, dtype=float)
    return (2.0 * np.pi * t) ** (-dim / 2.0) * np.exp(-np.asarray(r) ** 2 / (2.0 * t))


def green_bm(dim: int, r: float) -> float:
    if dim < 3:
        raise ValueError("the Green function diverges for dim <= 2")
    if not r > 0:
        raise ValueError("r must be positive")
    return math.gamma(dim / 2.0 - 1.0) / (2.0 * math.pi ** (dim / 2.0)) * r ** (2 - dim)


def capacity_ball(dim: int, eps: float) -> float:
    if dim < 3:
        raise ValueError("capacity of a ball needs dim >= 3")
    if not eps > 0:
        raise ValueError("eps must be positive")
    return 2.0 * math.pi ** (dim / 2.0) * eps ** (dim - 2) / math.gamma(dim / 2.0 - 1.0)


def scaled_limit_ratio(dim: int) -> float:
    """``2^((dim-2)/2)``: the stated ratio of per-time sausage constants between
    the plateau-4 and plateau-1 homogeneous spaces."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return 2.0 ** ((dim - 2) / 2.0)


def conformal_limit_ratio(dim: int, plateau: float = 4.0) -> float:
    """Ratio of per-time sausage constants for the metric ``plateau * I``
    against the identity, with Euclidean eps-balls and the Riemannian volume.

    The process is Brownian motion run at speed ``1/plateau`` and the volume
    carries density ``plateau^(dim/2)``, so the ratio is ``plateau^((dim-2)/2)``.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return plateau ** ((dim - 2) / 2.0)


def sandwich_interval(c0: float, c1: float, c2: float) -> LimitConstant:
    """``[c0/c2, c0/c1]``."""
    if min(c0, c1, c2) <= 0:
        raise ValueError("constants must be positive")
    if c1 > c2:
        raise ValueError("need c1 <= c2")
    lo, hi = c0 / c2, c0 / c1
    return LimitConstant(0.5 * (lo + hi), "sandwich-interval", lo, hi)


def capacity_constant(dim: int, eps: float) -> LimitConstant:
    return LimitConstant(capacity_ball(dim, eps), "capacity")


def euclid_sausage_mean(dim: int, t, eps: float):
    """Exact or leading-order mean Lebesgue volume of the eps-sausage of
    standard Brownian motion started at 0.

    d = 1: ``sqrt(8t/pi) + 2 eps`` (mean range plus the two end caps).
    d = 2: ``2 pi t / log t`` (leading order only).
    d = 3: ``2 pi eps t + 4 eps^2 sqrt(2 pi t) + 4/3 pi eps^3``.
    d >= 4: ``capacity * t`` (leading order only).
    """
    t = np.asarray(t, dtype=float)
    if dim == 1:
        return np.sqrt(8.0 * t / np.pi) + 2.0 * eps
    if dim == 2:
        return 2.0 * np.pi * t / np.log(t)
    if dim == 3:
        return (2.0 * np.pi * eps * t + 4.0 * eps ** 2 * np.sqrt(2.0 * np.pi * t)
                + 4.0 / 3.0 * np.pi * eps ** 3)
    return capacity_ball(dim, eps) * t


def ball_volume(dim: int, r: float) -> float:
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0) * r ** dim
