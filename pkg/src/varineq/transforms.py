"""Radial changes of variables and the Hardy substitution u = r^-(N-2)/2 v.

Three maps are provided:

* ``T_LOG_POWER``: t = (-log(r/R))^(-1/(N-2)), (0, R) -> (0, inf), increasing;
* ``T_LOG``:       t = -log(r/R),              (0, R) -> (0, inf), decreasing;
* ``T_POWER``:     t = r^-(N-2),               (0, inf) -> (0, inf), decreasing.

Push-forwards are oriented so that every transported integral runs over
increasing t with the Jacobian |dr/dt|.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError
from .profiles import RadialProfile

T_LOG_POWER = "T_LOG_POWER"
T_LOG = "T_LOG"
T_POWER = "T_POWER"

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class CoordinateMap:
    forward: Callable
    inverse: Callable
    d_forward: Callable   # dt/dr as a function of r
    d_inverse: Callable   # dr/dt as a function of t
    label: str
    geom: object
    source: tuple
    target: tuple

    def inverted(self):
        return CoordinateMap(
            forward=self.inverse,
            inverse=self.forward,
            d_forward=self.d_inverse,
            d_inverse=self.d_forward,
            label=f"inv({self.label})",
            geom=self.geom,
            source=self.target,
            target=self.source,
        )


def t_log_power(geom):
    N, R = geom.N, geom.R
    k = N - 2

    def forward(r):
        with np.errstate(divide="ignore"):
            s = -np.log(np.asarray(r, dtype=float) / R)
            return np.maximum(s, 0.0) ** (-1.0 / k)

    def inverse(t):
        with np.errstate(divide="ignore", over="ignore"):
            return R * np.exp(-np.asarray(t, dtype=float) ** (-k))

    def d_forward(r):
        r = np.asarray(r, dtype=float)
        return forward(r) ** (N - 1) / (k * r)

    def d_inverse(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return k * inverse(t) * t ** (-(N - 1))

    return CoordinateMap(forward, inverse, d_forward, d_inverse, T_LOG_POWER, geom, (0.0, R), (0.0, math.inf))


def t_log(geom):
    R = geom.R

    def forward(r):
        with np.errstate(divide="ignore"):
            return -np.log(np.asarray(r, dtype=float) / R)

    def inverse(t):
        return R * np.exp(-np.asarray(t, dtype=float))

    def d_forward(r):
        return -1.0 / np.asarray(r, dtype=float)

    def d_inverse(t):
        return -inverse(t)

    return CoordinateMap(forward, inverse, d_forward, d_inverse, T_LOG, geom, (0.0, R), (0.0, math.inf))


def t_power(geom):
    k = geom.N - 2

    def forward(r):
        return np.asarray(r, dtype=float) ** (-k)

    def inverse(t):
        return np.asarray(t, dtype=float) ** (-1.0 / k)

    def d_forward(r):
        return -k * np.asarray(r, dtype=float) ** (-k - 1)

    def d_inverse(t):
        t = np.asarray(t, dtype=float)
        return -(1.0 / k) * t ** (-1.0 / k - 1)

    return CoordinateMap(forward, inverse, d_forward, d_inverse, T_POWER, geom, (0.0, math.inf), (0.0, math.inf))


def power_map(exponent, geom, label="POWER"):
    """t = s^exponent on (0, inf), used to split T_LOG_POWER into T_LOG then a power."""
    e = float(exponent)

    def forward(s):
        return np.asarray(s, dtype=float) ** e

    def inverse(t):
        return np.asarray(t, dtype=float) ** (1.0 / e)

    def d_forward(s):
        return e * np.asarray(s, dtype=float) ** (e - 1)

    def d_inverse(t):
        return (1.0 / e) * np.asarray(t, dtype=float) ** (1.0 / e - 1)

    return CoordinateMap(forward, inverse, d_forward, d_inverse, label, geom, (0.0, math.inf), (0.0, math.inf))


MAPS = {T_LOG_POWER: t_log_power, T_LOG: t_log, T_POWER: t_power}


def coordinate_map(label, geom):
    try:
        return MAPS[label](geom)
    except KeyError:
        raise InvalidArgumentError(f"unknown map {label!r}") from None


def _same_domain(d1, d2):
    return all(x == y or (math.isinf(x) and math.isinf(y)) for x, y in zip(d1, d2))


def pushforward(cmap, p):
    """q(t) = p(r(t)) with derivative p'(r(t)) dr/dt.

    Values are computed through r(t), so they are only meaningful where r(t)
    is a normal float (for T_LOG_POWER, t above about 690^(-1/(N-2))).
    Where r(t) underflows the Jacobian is exactly zero in floating point and
    the derivative is returned as 0.
    """
    if not _same_domain(cmap.source, p.domain):
        raise InvalidArgumentError(
            f"profile domain {p.domain} does not match the source {cmap.source} of {cmap.label}")

    def value(t):
        return p.value(cmap.inverse(t))

    def derivative(t):
        r = cmap.inverse(t)
        jac = cmap.d_inverse(t)
        with np.errstate(all="ignore"):
            out = p.derivative(r) * jac
        return np.where(np.abs(r) < _TINY, 0.0, out)

    if p.log_value is not None and cmap.label in (T_LOG_POWER, T_LOG):
        # s = -log(r/R) is t^-(N-2) or t itself; r p'(r) turns into d/dt without r
        k = cmap.geom.N - 2
        log_power = cmap.label == T_LOG_POWER

        def value(t):
            t = np.asarray(t, dtype=float)
            with np.errstate(divide="ignore"):
                return p.log_value(t ** -k if log_power else t)

        def derivative(t):
            t = np.asarray(t, dtype=float)
            if not log_power:
                return -p.log_slope(t)
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                out = p.log_slope(t ** -k) * k * t ** (-(k + 1))
            return np.where(t > 0, out, 0.0)

    increasing = _is_increasing(cmap)
    origin = p.value_at_origin if increasing else None
    return RadialProfile(
        value=value,
        derivative=derivative,
        domain=cmap.target,
        label=f"{cmap.label}*{p.label}",
        zero_at_right_endpoint=p.zero_at_right_endpoint and increasing,
        value_at_origin=origin,
    )


def pullback(cmap, q):
    """p(r) = q(t(r)); the inverse operation of :func:`pushforward`."""
    return pushforward(cmap.inverted(), q)


def _is_increasing(cmap):
    lo, hi = cmap.source
    probe = 0.5 * (lo + hi) if math.isfinite(hi) else 1.0
    return float(cmap.d_forward(np.array([probe]))[0]) > 0


# ----------------------------------------------------------------------------
# Hardy substitution

U_TO_V = "u_to_v"
V_TO_U = "v_to_u"


@dataclass(frozen=True)
class SubstitutionHardy:
    geom: object
    direction: str = U_TO_V

    def __post_init__(self):
        if self.direction not in (U_TO_V, V_TO_U):
            raise InvalidArgumentError(f"unknown direction {self.direction!r}")

    def apply(self, p):
        a = self.geom.a if self.direction == U_TO_V else -self.geom.a
        return _multiply_by_power(p, a, "v" if self.direction == U_TO_V else "u")

    def reversed(self):
        return replace(self, direction=V_TO_U if self.direction == U_TO_V else U_TO_V)


def _multiply_by_power(p, a, tag):
    """r^a p(r) with derivative r^a (p' + a p / r).

    r^a applied to r^-a base returns base itself, so no cancelling powers are
    ever evaluated.
    """
    if p.power_of is not None and p.power_of[0] + a == 0:
        return p.power_of[1]

    def value(r):
        r = np.asarray(r, dtype=float)
        return r ** a * p.value(r)

    def derivative(r):
        r = np.asarray(r, dtype=float)
        return r ** a * (p.derivative(r) + a * p.value(r) / r)

    log_value = log_slope = None
    if p.log_value is not None:
        R = p.domain[1]

        def log_value(s):
            s = np.asarray(s, dtype=float)
            with np.errstate(over="ignore"):
                return R ** a * np.exp(-a * s) * p.log_value(s)

        def log_slope(s):
            s = np.asarray(s, dtype=float)
            with np.errstate(over="ignore", invalid="ignore"):
                return R ** a * np.exp(-a * s) * (p.log_slope(s) + a * p.log_value(s))

    return RadialProfile(
        value=value,
        derivative=derivative,
        domain=p.domain,
        label=f"{tag}({p.label})",
        zero_at_right_endpoint=p.zero_at_right_endpoint,
        value_at_origin=None,
        log_value=log_value,
        log_slope=log_slope,
        power_of=(a, p),
    )


def u_to_v(p, geom):
    return SubstitutionHardy(geom, U_TO_V).apply(p)


def v_to_u(p, geom):
    return SubstitutionHardy(geom, V_TO_U).apply(p)


# ----------------------------------------------------------------------------
# norm identities

EQ_HARDY_SPLIT = "hardy_split"          # compact support: gradient and Hardy terms apart
EQ_HARDY_BOUNDARY = "hardy_boundary"    # combined integrand minus L(u)^2
EQ_W_TO_D = "w_to_d"                    # ||v||_W^2 = (N-2)^-1 ||w||_D^2
EQ_H_TO_D = "h_to_d"                    # ||u||_H^2 = (N-2)^-1 ||w||_D^2, w from r^a u


def _r_integral(func, domain, rule):
    from . import quad
    from .functionals import REL_TOL
    f = quad.Integrand(func, singular_left=True, singular_right=True,
                       recommended_substitution=quad.T_LOG)
    return quad.integrate_relative(f, domain[0], domain[1], REL_TOL, rule)


def _has_log_forms(p):
    return p.log_value is not None and p.log_slope is not None and p.domain[0] == 0.0


def _s_integral(func, geom, rule):
    """int_0^inf func(s) ds for s = -log(r/R), taken in t with s = t^-(N-2):
    algebraic tails in s become smooth behaviour at t = 0."""
    from . import quad
    from .functionals import REL_TOL
    k = geom.N - 2

    def g(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = func(t ** -k) * k * t ** (-(k + 1))
        return np.where(t > 0, out, 0.0)

    f = quad.Integrand(g)
    return quad.integrate_relative(f, 0.0, math.inf, REL_TOL, rule)


def hardy_remainder(u, geom, rule=None):
    """int |grad u|^2 - a^2 int u^2/|x|^2 as one integral, so the r^-1 parts cancel pointwise.

    Returns ``(value, err)``.
    """
    from . import quad
    rule = rule or quad.DEFAULT_RULE
    N, a = geom.N, geom.a
    area = geom.sphere_area_Nminus1
    v = u_to_v(u, geom)
    if _has_log_forms(v):
        # with v = r^a u the integrand is (r v')(r v' - 2a v) per unit s = -log(r/R)
        def g(s):
            slope = v.log_slope(s)
            return slope * (slope - 2 * a * v.log_value(s))

        val, err = _s_integral(g, geom, rule)
        return area * val, area * err
    if u.power_of is not None and v is u.power_of[1]:
        # u = r^-a v exactly: the same integrand per unit r, v'(r v' - 2a v)
        def h(r):
            r = np.asarray(r, dtype=float)
            d = v.derivative(r)
            return d * (r * d - 2 * a * v.value(r))

        val, err = _r_integral(h, u.domain, rule)
        return area * val, area * err

    def f(r):
        r = np.asarray(r, dtype=float)
        g = r ** ((N - 1) / 2) * u.derivative(r)
        h = r ** ((N - 3) / 2) * u.value(r)
        return (g - a * h) * (g + a * h)

    val, err = _r_integral(f, u.domain, rule)
    return area * val, area * err


def w_norm_sq(v, geom, rule=None):
    """||v||_W^2 = int |x|^-(N-2) |grad v|^2 dx for radial v on B_R."""
    from . import quad
    rule = rule or quad.DEFAULT_RULE
    if _has_log_forms(v):
        val, err = _s_integral(lambda s: v.log_slope(s) ** 2, geom, rule)
    else:
        val, err = _r_integral(lambda r: (np.sqrt(r) * v.derivative(r)) ** 2, v.domain, rule)
    area = geom.sphere_area_Nminus1
    return area * val, area * err


def d_norm_sq_log_power(v, geom, rule=None):
    """||w||_D^2 for w the T_LOG_POWER push-forward of v, integrated in t."""
    from . import quad
    from .functionals import log_power_t_integral
    rule = rule or quad.DEFAULT_RULE
    w = pushforward(t_log_power(geom), v)
    val, err = log_power_t_integral(lambda t: w.derivative(t) ** 2, geom, rule,
                                    from_origin=_has_log_forms(v))
    area = geom.sphere_area_Nminus1
    return area * val, area * err


def verify_norm_identity(map_or_sub, p, geom, kind=None, tol=1e-8, rule=None):
    """Both sides of a norm identity for profile ``p``.

    ``SubstitutionHardy`` (p is u): ``EQ_HARDY_BOUNDARY`` by default, which
    covers u ~ r^-a at the origin through L(u); ``EQ_HARDY_SPLIT`` evaluates
    the gradient and Hardy integrals separately and needs u r^a -> 0.
    ``T_LOG_POWER`` map: ``EQ_W_TO_D`` (p is v) by default or ``EQ_H_TO_D``
    (p is u).  The report compares left against right, relative to the
    larger side.
    """
    import time
    from . import quad
    from .functionals import boundary_term_L
    from .report import make_report
    rule = rule or quad.DEFAULT_RULE
    start = time.perf_counter()
    extra = {}
    if isinstance(map_or_sub, SubstitutionHardy):
        kind = kind or EQ_HARDY_BOUNDARY
        u = p if map_or_sub.direction == U_TO_V else map_or_sub.apply(p)
        v = u_to_v(u, geom)
        rhs, rhs_err = w_norm_sq(v, geom, rule)
        if kind == EQ_HARDY_SPLIT:
            N, a = geom.N, geom.a
            grad, e1 = _r_integral(lambda r: r ** (N - 1) * u.derivative(r) ** 2, u.domain, rule)
            hardy, e2 = _r_integral(lambda r: r ** (N - 3) * u.value(r) ** 2, u.domain, rule)
            area = geom.sphere_area_Nminus1
            lhs = area * (grad - a * a * hardy)
            lhs_err = area * (e1 + a * a * e2)
        elif kind == EQ_HARDY_BOUNDARY:
            combined, lhs_err = hardy_remainder(u, geom, rule)
            L = boundary_term_L(u, geom)
            lhs = combined - L * L
            extra = {"L": L, "mismatch_without_L": combined - rhs}
        else:
            raise InvalidArgumentError(f"kind {kind!r} does not apply to the Hardy substitution")
    elif isinstance(map_or_sub, CoordinateMap) and map_or_sub.label == T_LOG_POWER:
        kind = kind or EQ_W_TO_D
        if kind == EQ_W_TO_D:
            v = p
            lhs, lhs_err = w_norm_sq(v, geom, rule)
        elif kind == EQ_H_TO_D:
            v = u_to_v(p, geom)
            combined, lhs_err = hardy_remainder(p, geom, rule)
            L = boundary_term_L(p, geom)
            lhs = combined - L * L
        else:
            raise InvalidArgumentError(f"kind {kind!r} does not apply to {map_or_sub.label}")
        d_sq, d_err = d_norm_sq_log_power(v, geom, rule)
        factor = 1.0 / (geom.N - 2)
        rhs, rhs_err = factor * d_sq, factor * d_err
        # the same pair read as unsquared norms, ||v|| = (N-2)^-1 ||w||
        extra = {"d_norm_sq": d_sq, "unsquared_ratio": math.sqrt(lhs / d_sq) if d_sq > 0 else math.nan,
                 "unsquared_predicted": factor, "squared_predicted_ratio": math.sqrt(factor)}
    else:
        raise InvalidArgumentError("need a SubstitutionHardy or the T_LOG_POWER map")
    scale = max(abs(lhs), abs(rhs))
    computed = (lhs - rhs) / scale if scale > 0 else 0.0
    params = {"kind": kind, "N": geom.N, "R": geom.R, "profile": p.label, "lhs": lhs, "rhs": rhs}
    params.update(extra)
    return make_report(
        f"norm_identity.{kind}", computed, 0.0, tol,
        quad_err_est=(lhs_err + rhs_err) / scale if scale > 0 else 0.0,
        params=params, runtime_ms=1e3 * (time.perf_counter() - start), relative=False)
