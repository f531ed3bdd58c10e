"""Geometric constants, best constants and the closed-form extremal families.

Notation used throughout the package: ``N`` is the dimension, ``R`` the ball
radius, ``a = (N-2)/2`` the Hardy exponent, ``q = 2N/(N-2)`` the critical
exponent and ``beta = 2(N-1)/(N-2)`` the exponent of the logarithmic weight.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InconsistencyError, InvalidArgumentError
from .special import gamma


@dataclass(frozen=True)
class GeometryContext:
    N: int
    R: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise InvalidArgumentError(f"dimension must be an integer >= 3, got {self.N}")
        if not self.R > 0:
            raise InvalidArgumentError(f"radius must be positive, got {self.R}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "R", float(self.R))

    @property
    def omega_N(self):
        """Volume of the unit ball in R^N."""
        return math.pi ** (self.N / 2) / gamma(self.N / 2 + 1)

    @property
    def sphere_area_Nminus1(self):
        """Area of the unit sphere bounding the unit ball of R^N (= N omega_N)."""
        return self.N * self.omega_N

    @property
    def sphere_area_N(self):
        """Area of the unit N-sphere, which lives in R^(N+1)."""
        return 2 * math.pi ** ((self.N + 1) / 2) / gamma((self.N + 1) / 2)

    @property
    def a(self):
        return (self.N - 2) / 2

    @property
    def q(self):
        return 2 * self.N / (self.N - 2)

    @property
    def beta(self):
        return 2 * (self.N - 1) / (self.N - 2)

    @property
    def theta(self):
        return (self.N - 2) / self.N


@dataclass(frozen=True)
class ExtremalParams:
    mu: float = 1.0
    nu: float = 1.0

    def __post_init__(self):
        if self.mu == 0 or self.nu == 0:
            raise InvalidArgumentError("mu and nu must be nonzero")


@dataclass(frozen=True)
class BlissParams:
    k: float
    l: float
    a: float = 1.0
    b: float = 1.0
    h: float = field(init=False)

    def __post_init__(self):
        if not (self.l > self.k > 1):
            raise InvalidArgumentError(f"need l > k > 1, got k={self.k}, l={self.l}")
        if not (self.a > 0 and self.b > 0):
            raise InvalidArgumentError("a and b must be positive")
        object.__setattr__(self, "h", self.l / self.k - 1)

    @classmethod
    def for_dimension(cls, N, a=1.0, b=1.0):
        """The (k, l) = (2, 2N/(N-2)) specialisation tied to dimension N."""
        return cls(2.0, 2 * N / (N - 2), a, b)


@dataclass(frozen=True)
class RadialProfile:
    """A radial function with its derivative, both vectorised over numpy arrays."""

    value: Callable
    derivative: Callable
    domain: tuple
    label: str = ""
    zero_at_right_endpoint: bool = False
    value_at_origin: Optional[float] = None
    second_derivative: Optional[Callable] = None
    # optional log-coordinate forms on (0, R): s -> p(R e^-s) and s -> r p'(r) at
    # r = R e^-s; they stay accurate where r itself would underflow
    log_value: Optional[Callable] = None
    log_slope: Optional[Callable] = None
    # (b, base) when the profile is r^b times base
    power_of: Optional[tuple] = None

    def __call__(self, r):
        return self.value(r)

    def scaled(self, c):
        second, lv, ls = self.second_derivative, self.log_value, self.log_slope
        return replace(
            self,
            value=lambda r: c * self.value(r),
            derivative=lambda r: c * self.derivative(r),
            second_derivative=None if second is None else (lambda r: c * second(r)),
            value_at_origin=None if self.value_at_origin is None else c * self.value_at_origin,
            log_value=None if lv is None else (lambda s: c * lv(s)),
            log_slope=None if ls is None else (lambda s: c * ls(s)),
            power_of=None if self.power_of is None else (self.power_of[0], self.power_of[1].scaled(c)),
            label=f"{c:g}*{self.label}",
        )


def zero_profile(domain, label="zero"):
    return RadialProfile(
        value=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        derivative=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        domain=domain,
        label=label,
        zero_at_right_endpoint=True,
        value_at_origin=0.0,
        second_derivative=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
    )


# ----------------------------------------------------------------------------
# best constants

def sobolev_constant(geom):
    """S(N) = N(N-2)/4 * |S_N|^(2/N)."""
    N = geom.N
    return N * (N - 2) / 4 * geom.sphere_area_N ** (2 / N)


def sobolev_constant_alt_form(geom):
    """The closed form 2^(2/N) pi^(1+1/N) Gamma((N+1)/2)^(-2/N).

    This equals |S_N|^(2/N) only; it lacks the factor N(N-2)/4 and is kept
    for the audit record, never used as a constant.
    """
    N = geom.N
    return 2 ** (2 / N) * math.pi ** (1 + 1 / N) * gamma((N + 1) / 2) ** (-2 / N)


_FORM_RTOL = 1e-12


def cm_constant(geom):
    """Best constant of the one-dimensional log-weighted inequality, both closed forms."""
    N = geom.N
    first = (N - 2) ** (-2 * (N - 1) / N) * geom.sphere_area_Nminus1 ** (-2 / N) * sobolev_constant(geom)
    second = 0.25 * (N / (N - 2)) ** ((N - 2) / N) * (geom.sphere_area_N / geom.omega_N) ** (2 / N)
    if abs(first - second) > _FORM_RTOL * abs(first):
        raise InconsistencyError(f"C_M closed forms disagree: {first!r} vs {second!r}")
    return first


def chs_constant(geom):
    N = geom.N
    return sobolev_constant(geom) * (N - 2) ** (-2 * (N - 1) / N)


def bliss_constant(p):
    """K = [1/(l-h-1)] [h Gamma(l/h) / (Gamma(1/h) Gamma((l-1)/h))]^h."""
    k, l, h = p.k, p.l, p.h
    return (h * gamma(l / h) / (gamma(1 / h) * gamma((l - 1) / h))) ** h / (l - h - 1)


# ----------------------------------------------------------------------------
# extremal families

def _psi_parts(params, geom):
    mu2, nu2 = params.mu ** 2, params.nu ** 2
    m = geom.a

    def value(t):
        t = np.asarray(t, dtype=float)
        return (mu2 + nu2 * t * t) ** (-m)

    def derivative(t):
        t = np.asarray(t, dtype=float)
        return -2 * m * nu2 * t * (mu2 + nu2 * t * t) ** (-m - 1)

    def second(t):
        t = np.asarray(t, dtype=float)
        base = mu2 + nu2 * t * t
        return -2 * m * nu2 * base ** (-m - 1) + 4 * m * (m + 1) * nu2 * nu2 * t * t * base ** (-m - 2)

    return value, derivative, second


def extremal_psi(params, geom):
    """psi(t) = (mu^2 + nu^2 t^2)^(-(N-2)/2) on (0, inf)."""
    value, derivative, second = _psi_parts(params, geom)
    return RadialProfile(
        value=value,
        derivative=derivative,
        domain=(0.0, math.inf),
        label=f"psi[{params.mu:g},{params.nu:g}]",
        value_at_origin=abs(params.mu) ** (-(geom.N - 2)),
        second_derivative=second,
    )


def _log_power_extremal(params, geom, label):
    """psi composed with t(r) = (-log(r/R))^(-1/(N-2)), written to stay finite at 0 and R."""
    N, R = geom.N, geom.R
    mu2, nu2 = params.mu ** 2, params.nu ** 2
    m = geom.a
    psi, dpsi, d2psi = _psi_parts(params, geom)

    def tau(r):
        # tau = t^-2 = (-log(r/R))^(2/(N-2)); tau(0) = inf, tau(R) = 0
        with np.errstate(divide="ignore"):
            s = -np.log(np.asarray(r, dtype=float) / R)
        return np.maximum(s, 0.0) ** (2 / (N - 2))

    def value(r):
        with np.errstate(divide="ignore"):
            return (mu2 + nu2 / tau(r)) ** (-m)

    def derivative(r):
        # d/dr psi(t(r)) = -nu^2 t^N (mu^2 + nu^2 t^2)^(-N/2) / r
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return -nu2 * (mu2 * tau(r) + nu2) ** (-N / 2) / r

    def second(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = tau(r) ** -0.5
            dt = t ** (N - 1) / ((N - 2) * r)
            d2t = (N - 1) * dt * dt / t - dt / r
            return d2psi(t) * dt * dt + dpsi(t) * d2t

    def log_value(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return (mu2 + nu2 * s ** (-2 / (N - 2))) ** (-m)

    def log_slope(s):
        s = np.asarray(s, dtype=float)
        return -nu2 * (mu2 * s ** (2 / (N - 2)) + nu2) ** (-N / 2)

    return RadialProfile(
        value=value,
        derivative=derivative,
        domain=(0.0, R),
        label=f"{label}[{params.mu:g},{params.nu:g}]",
        zero_at_right_endpoint=True,
        value_at_origin=abs(params.mu) ** (-(N - 2)),
        second_derivative=second,
        log_value=log_value,
        log_slope=log_slope,
    )


def extremal_phi(params, geom):
    return _log_power_extremal(params, geom, "phi")


def extremal_v(params, geom):
    return _log_power_extremal(params, geom, "v")


def extremal_u(params, geom):
    """u(r) = r^-(N-2)/2 v(r); diverges at the origin."""
    v = _log_power_extremal(params, geom, "v")
    a = geom.a

    def value(r):
        r = np.asarray(r, dtype=float)
        return r ** (-a) * v.value(r)

    def derivative(r):
        r = np.asarray(r, dtype=float)
        return r ** (-a) * (v.derivative(r) - a * v.value(r) / r)

    def second(r):
        r = np.asarray(r, dtype=float)
        return r ** (-a) * (v.second_derivative(r) - 2 * a * v.derivative(r) / r + a * (a + 1) * v.value(r) / (r * r))

    R = geom.R

    def log_value(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(over="ignore"):
            return R ** (-a) * np.exp(a * s) * v.log_value(s)

    def log_slope(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            return R ** (-a) * np.exp(a * s) * (v.log_slope(s) - a * v.log_value(s))

    return RadialProfile(
        value=value,
        derivative=derivative,
        domain=(0.0, R),
        label=f"u[{params.mu:g},{params.nu:g}]",
        zero_at_right_endpoint=True,
        value_at_origin=None,
        second_derivative=second,
        log_value=log_value,
        log_slope=log_slope,
        power_of=(-a, v),
    )


def bliss_extremal(p):
    """v(x) = (a + b x^-h)^(-1/h), evaluated as x (a x^h + b)^(-1/h)."""
    a, b, h = p.a, p.b, p.h

    def value(x):
        x = np.asarray(x, dtype=float)
        return x * (a * x ** h + b) ** (-1 / h)

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return b * (a * x ** h + b) ** (-(1 + h) / h)

    return RadialProfile(
        value=value,
        derivative=derivative,
        domain=(0.0, math.inf),
        label=f"bliss[{a:g},{b:g}]",
        value_at_origin=0.0,
    )
