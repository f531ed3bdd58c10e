"""Energies, weighted norms, Rayleigh quotients, the boundary functional L(u)
and the Maz'ya B-criterion.

Inequality families (all radial):

``SOBOLEV_RADIAL``  |S^(N-1)| int_0^inf t^(N-1) |w'|^2  vs  int t^(N-1) |w|^q
``MAZYA_M``         int_0^R r |v'|^2  vs  int_0^R r^-1 (-log(r/R))^-beta |v|^q
``WEIGHTED_HS``     the same in N dimensions, i.e. both sides times |S^(N-1)|
``IHS_RADIAL``      the Hardy remainder of u (through v = r^a u)  vs  int |u|^q (-log)^-beta dx
``BLISS``           int_0^inf |v'|^k  vs  int_0^inf |v|^l x^-(l-h)
"""

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import quad
from .errors import (AccuracyError, CrossCheckError, DivergenceError, InconsistencyError,
                     InvalidArgumentError, LimitError)
from .profiles import (BlissParams, GeometryContext, RadialProfile, bliss_constant, chs_constant,
                       cm_constant, sobolev_constant, zero_profile)
from .quad import Integrand, T_LOG
from .report import make_report
from .transforms import pullback, pushforward, t_log_power, u_to_v

SOBOLEV_RADIAL = "SOBOLEV_RADIAL"
MAZYA_M = "MAZYA_M"
BLISS = "BLISS"
IHS_RADIAL = "IHS_RADIAL"
WEIGHTED_HS = "WEIGHTED_HS"
FAMILIES = (SOBOLEV_RADIAL, MAZYA_M, BLISS, IHS_RADIAL, WEIGHTED_HS)

REL_TOL = 1e-12
_OVERFLOW_GUARD = 1e300
# cross-route agreement: 10x the combined estimates plus a roundoff floor
_ROUTE_FACTOR = 10.0
_ROUTE_FLOOR = 1e-11


@dataclass(frozen=True)
class InequalitySpec:
    family: str
    geom: GeometryContext
    bliss_params: Optional[BlissParams] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}")
        if self.family == BLISS and self.bliss_params is None:
            object.__setattr__(self, "bliss_params", BlissParams.for_dimension(self.geom.N))

    @property
    def exponents(self):
        if self.family == BLISS:
            return self.bliss_params.k, self.bliss_params.l
        return 2.0, self.geom.q

    def predicted_constant(self):
        if self.family == MAZYA_M:
            return cm_constant(self.geom)
        if self.family in (IHS_RADIAL, WEIGHTED_HS):
            return chs_constant(self.geom)
        if self.family == SOBOLEV_RADIAL:
            return sobolev_constant(self.geom)
        return bliss_constant(self.bliss_params)


def _integrate(f, lo, hi, rel_tol=REL_TOL, rule=quad.DEFAULT_RULE):
    return quad.integrate_relative(f, lo, hi, rel_tol, rule)


def _integrate_soft(f, lo, hi, rel_tol=REL_TOL, rule=quad.DEFAULT_RULE):
    """One route of a two-route evaluation: a quadrature failure returns its
    best estimate (err possibly inf) and the route comparison decides."""
    try:
        return _integrate(f, lo, hi, rel_tol, rule)
    except AccuracyError as exc:
        if not math.isfinite(exc.value):
            return math.nan, math.inf
        return exc.value, exc.err_est


def _log_power_weighted(geom, p, scale_exponent=0.0):
    """r^-1 (|p| r^scale (-log(r/R))^-(N-1)/N)^q, i.e. the log-weighted q-th power.

    Folding the weight inside the power keeps the integrand finite where the
    weight and |p|^q separately over- or underflow.
    """
    R, q = geom.R, geom.q
    inner = (geom.N - 1) / geom.N

    def f(r):
        r = np.asarray(r, dtype=float)
        s = -np.log(r / R)
        core = np.abs(p.value(r)) * s ** (-inner)
        if scale_exponent:
            core = core * r ** scale_exponent
        return core ** q / r

    return f


# ----------------------------------------------------------------------------
# energies

def energy_with_error(spec, p, rule=quad.DEFAULT_RULE):
    geom = spec.geom
    fam = spec.family
    lo, hi = p.domain
    if fam == SOBOLEV_RADIAL:
        N = geom.N
        f = Integrand(lambda t: np.asarray(t) ** (N - 1) * p.derivative(t) ** 2,
                      singular_right=math.isfinite(hi))
        val, err = _integrate(f, lo, hi, rule=rule)
        val, err = geom.sphere_area_Nminus1 * val, geom.sphere_area_Nminus1 * err
    elif fam in (MAZYA_M, WEIGHTED_HS, IHS_RADIAL):
        v = u_to_v(p, geom) if fam == IHS_RADIAL else p
        if _has_log_forms(v):
            # int r v'^2 dr = int_0^inf (r v')^2 ds with s = -log(r/R)
            f = Integrand(lambda s: v.log_slope(s) ** 2, singular_left=True)
            val, err = _integrate_soft(f, 0.0, math.inf, rule=rule)
        else:
            # (sqrt(r) v')^2 stays finite where r v'^2 would overflow near the origin
            f = Integrand(lambda r: (np.sqrt(r) * v.derivative(r)) ** 2,
                          singular_left=True, singular_right=True, recommended_substitution=T_LOG)
            val, err = _integrate_soft(f, lo, hi, rule=rule)
        # second route in t: int r v'^2 dr = (N-2)^-1 int t^(N-1) w'^2 dt; it
        # reaches past the r-underflow depth that truncates the first
        w = pushforward(t_log_power(geom), v)
        m, em = log_power_t_integral(lambda t: w.derivative(t) ** 2, geom, rule, soft=True,
                                     from_origin=_has_log_forms(v))
        m, em = m / (geom.N - 2), em / (geom.N - 2)
        val, err = _pick_route(f"{fam} energy of {p.label}", (val, err), (m, em))
        if fam != MAZYA_M:
            val, err = geom.sphere_area_Nminus1 * val, geom.sphere_area_Nminus1 * err
    else:
        k = spec.bliss_params.k
        f = Integrand(lambda x: np.abs(p.derivative(x)) ** k, singular_left=True,
                      singular_right=math.isfinite(hi))
        val, err = _integrate(f, lo, hi, rule=rule)
    if not math.isfinite(val) or abs(val) > _OVERFLOW_GUARD:
        raise DivergenceError(f"{fam} energy of {p.label} diverges ({val})")
    return val, err


def energy(spec, p, rule=quad.DEFAULT_RULE):
    return energy_with_error(spec, p, rule)[0]


# ----------------------------------------------------------------------------
# right-hand norms, two routes each

def _rhs_direct(spec, p, rule):
    geom = spec.geom
    fam = spec.family
    lo, hi = p.domain
    if fam == SOBOLEV_RADIAL:
        N, q = geom.N, geom.q
        f = Integrand(lambda t: np.asarray(t) ** (N - 1) * np.abs(p.value(t)) ** q,
                      singular_right=math.isfinite(hi))
        val, err = _integrate_soft(f, lo, hi, rule=rule)
        return geom.sphere_area_Nminus1 * val, geom.sphere_area_Nminus1 * err
    if fam in (MAZYA_M, WEIGHTED_HS, IHS_RADIAL):
        v = u_to_v(p, geom) if fam == IHS_RADIAL else p
        if _has_log_forms(v):
            inner = (geom.N - 1) / geom.N
            q = geom.q

            def g(s):
                s = np.asarray(s, dtype=float)
                with np.errstate(divide="ignore"):
                    return (np.abs(v.log_value(s)) * s ** (-inner)) ** q

            val, err = _integrate_soft(Integrand(g, singular_left=True), 0.0, math.inf, rule=rule)
        else:
            scale = geom.a if fam == IHS_RADIAL else 0.0
            f = Integrand(_log_power_weighted(geom, p, scale), singular_left=True,
                          singular_right=True, recommended_substitution=T_LOG)
            val, err = _integrate_soft(f, lo, hi, rule=rule)
        if fam != MAZYA_M:
            val, err = geom.sphere_area_Nminus1 * val, geom.sphere_area_Nminus1 * err
        return val, err
    bp = spec.bliss_params
    l, h = bp.l, bp.h
    f = Integrand(lambda x: np.abs(p.value(x)) ** l * np.asarray(x) ** (h - l),
                  singular_left=True, singular_right=math.isfinite(hi))
    return _integrate_soft(f, lo, hi, rule=rule)


# smallest radius the maps evaluate at; below it r underflows
_R_FLOOR = 1e-290
_FIT_NODES = 13
_FIT_DEGREES = (8, 6)


def _has_log_forms(v):
    return v.log_value is not None and v.log_slope is not None and v.domain[0] == 0.0


def log_power_t_integral(h, geom, rule=quad.DEFAULT_RULE, soft=False, from_origin=False):
    """int_0^inf t^(N-1) h(t) dt for h built from a T_LOG_POWER push-forward.

    For t < t_min the preimage r underflows, so h is extrapolated there by
    degree 6 and 8 fits on Chebyshev nodes of [t_min, 2 t_min], integrated
    exactly against t^(N-1); their difference is the error estimate of that
    piece.  With ``soft`` a quadrature failure returns its best estimate
    (the error may be inf) instead of raising.  ``from_origin`` skips the
    extrapolation for push-forwards built from log-coordinate forms, which are
    exact down to t = 0.
    """
    N = geom.N
    if from_origin:
        f = Integrand(lambda t: np.asarray(t) ** (N - 1) * h(t))
        return (_integrate_soft if soft else _integrate)(f, 0.0, math.inf, rule=rule)
    t_min = math.log(1.0 / _R_FLOOR) ** (-1.0 / (N - 2))
    cheb = 1.5 + 0.5 * np.cos(np.pi * (np.arange(_FIT_NODES) + 0.5) / _FIT_NODES)
    # profiles that overflow near the origin push the start outwards
    for _ in range(40):
        nodes = t_min * cheb
        with np.errstate(all="ignore"):
            hv = np.asarray(h(nodes), dtype=float)
        if np.all(np.isfinite(hv)):
            break
        t_min *= 1.25
    f = Integrand(lambda t: np.asarray(t) ** (N - 1) * h(t))
    val, err = (_integrate_soft if soft else _integrate)(f, t_min, math.inf, rule=rule)
    pieces = []
    for deg in _FIT_DEGREES:
        c = np.polynomial.polynomial.polyfit(nodes, hv, deg)
        # int_0^t_min t^(N-1) sum c_j t^j dt
        pieces.append(sum(cj * t_min ** (N + j) / (N + j) for j, cj in enumerate(c)))
    return val + pieces[1], err + abs(pieces[1] - pieces[0])


def _rhs_mapped(spec, p, rule):
    """Second route: T_LOG_POWER for the r-families and the Sobolev form,
    inversion x = 1/y for Bliss."""
    geom = spec.geom
    fam = spec.family
    N, q = geom.N, geom.q
    cmap = t_log_power(geom)
    if fam in (MAZYA_M, WEIGHTED_HS, IHS_RADIAL):
        v = u_to_v(p, geom) if fam == IHS_RADIAL else p
        w = pushforward(cmap, v)
        val, err = log_power_t_integral(lambda t: np.abs(w.value(t)) ** q, geom, rule, soft=True,
                                        from_origin=_has_log_forms(v))
        factor = (N - 2) * (1.0 if fam == MAZYA_M else geom.sphere_area_Nminus1)
        return factor * val, factor * err
    if fam == SOBOLEV_RADIAL:
        lo, hi = p.domain
        r_hi = float(cmap.inverse(np.array([hi]))[0]) if math.isfinite(hi) else geom.R
        forward = cmap.forward
        v_of_r = RadialProfile(value=lambda r: p.value(forward(r)), derivative=None,
                               domain=(0.0, geom.R))
        f = Integrand(_log_power_weighted(geom, v_of_r), singular_left=True,
                      singular_right=True, recommended_substitution=T_LOG)
        val, err = _integrate_soft(f, 0.0, r_hi, rule=rule)
        factor = geom.sphere_area_Nminus1 / (N - 2)
        return factor * val, factor * err
    bp = spec.bliss_params
    l, h = bp.l, bp.h
    lo, hi = p.domain
    y_lo = 1.0 / hi if math.isfinite(hi) else 0.0

    def f(y):
        y = np.asarray(y, dtype=float)
        return np.abs(p.value(1.0 / y)) ** l * y ** (l - h - 2)

    return _integrate_soft(Integrand(f, singular_left=y_lo > 0), y_lo, math.inf, rule=rule)


def rhs_norm_routes(spec, p, rule=quad.DEFAULT_RULE):
    """Both evaluations ``((direct, err), (mapped, err))`` of the right-hand integral;
    a route whose quadrature failed carries its best estimate and error."""
    return _rhs_direct(spec, p, rule), _rhs_mapped(spec, p, rule)


def _pick_route(what, direct, mapped):
    """Cross-check two evaluations and keep the one with the tighter own estimate.

    A route without a finite error estimate is dropped; both missing is an error.
    """
    (d, ed), (m, em) = direct, mapped
    if not math.isfinite(ed) and not math.isfinite(em):
        raise AccuracyError(f"{what}: neither route converged", d if math.isfinite(d) else m, math.inf)
    if not math.isfinite(ed) or not math.isfinite(em):
        return (float(m), float(em)) if math.isfinite(em) else (float(d), float(ed))
    allowed = _ROUTE_FACTOR * (ed + em) + _ROUTE_FLOOR * max(abs(d), abs(m))
    if abs(d - m) > allowed:
        raise CrossCheckError(f"{what}: direct {d!r} vs mapped {m!r} (allowed {allowed:.3g})")
    return (float(d), float(ed)) if ed <= em else (float(m), float(em))


def rhs_norm_with_error(spec, p, rule=quad.DEFAULT_RULE):
    return _pick_route(f"{spec.family} rhs of {p.label}", *rhs_norm_routes(spec, p, rule))


def rhs_norm(spec, p, rule=quad.DEFAULT_RULE):
    return rhs_norm_with_error(spec, p, rule)[0]


def quotient_with_error(spec, p, rule=quad.DEFAULT_RULE):
    e, ee = energy_with_error(spec, p, rule)
    n, en = rhs_norm_with_error(spec, p, rule)
    if n == 0.0:
        raise InvalidArgumentError(f"zero right-hand norm for {p.label}")
    if spec.family == BLISS:
        if e == 0.0:
            raise InvalidArgumentError(f"zero energy for {p.label}")
        power = spec.bliss_params.l / spec.bliss_params.k
        value = n / e ** power
        rel = en / abs(n) + power * ee / abs(e)
    else:
        theta = spec.geom.theta
        value = e / n ** theta
        rel = ee / abs(e) + theta * en / abs(n)
    return value, abs(value) * rel


def rayleigh_quotient(spec, p, rule=quad.DEFAULT_RULE):
    """energy / rhs^((N-2)/N); for Bliss rhs / energy^(l/k), so the extremal attains K from below."""
    return quotient_with_error(spec, p, rule)[0]


def quotient_report(spec, p, tol=1e-6, rule=quad.DEFAULT_RULE):
    start = time.perf_counter()
    value, err = quotient_with_error(spec, p, rule)
    elapsed = 1e3 * (time.perf_counter() - start)
    return make_report(
        f"quotient.{spec.family}",
        value,
        spec.predicted_constant(),
        tol,
        quad_err_est=err,
        params={"family": spec.family, "N": spec.geom.N, "R": spec.geom.R, "profile": p.label},
        runtime_ms=elapsed,
    )


# ----------------------------------------------------------------------------
# boundary functional

# sample depths s = -log(r/R): 100^(2^(j/2)) steps down from r = R/100
_LADDER = tuple(math.log(100.0) * 2 ** (j / 2) for j in range(15))
_LOG_LADDER = np.array([10.0 ** k for k in range(20, 301, 20)])


def boundary_limit(u, geom, ladder=_LADDER, rtol=1e-9):
    """lim_{r->0} r^((N-2)/2) u(r) and a convergence diagnostic.

    Samples sit at r = R exp(-s_j) with s_j growing by sqrt(2), so
    h = 1/s shrinks geometrically.  Fast (algebraic in r) convergence is
    detected directly; otherwise the sequence is treated as
    L + sum_i c_i h^(p_i) with unknown exponents and extrapolated by iterated
    Aitken steps, which estimate the ratio 2^(p/2) locally instead of assuming it.
    The level whose estimate moves least is returned, its movement being the
    diagnostic.
    """
    a, R = geom.a, geom.R
    v = u_to_v(u, geom)
    if _has_log_forms(v):
        # r^a u read off in s directly, so the ladder can run past the r-underflow depth
        g = np.asarray(v.log_value(_LOG_LADDER), dtype=float)
        g = g[np.isfinite(g)]
        if g.size >= 2 and abs(g[-1] - g[-2]) <= 1e-14 * float(np.max(np.abs(g))) + 1e-300:
            return float(g[-1]), abs(float(g[-1] - g[-2]))
    samples = []
    for s in ladder:
        with np.errstate(all="ignore"):
            r = R * math.exp(-s)
            scale = r ** a
            g = float(scale * u.value(np.array([r]))[0])
        if scale < 1e-290 or not math.isfinite(g):
            break
        samples.append(g)
    if len(samples) < 5:
        raise LimitError(f"too few usable samples for the limit of {u.label}")
    g = np.array(samples)
    mag = float(np.max(np.abs(g)))
    if abs(g[-1] - g[-2]) <= 1e-14 * mag + 1e-300:
        return float(g[-1]), abs(float(g[-1] - g[-2]))

    col = g
    estimates = [float(g[-1])]
    while col.size >= 3:
        d = np.diff(col)
        den = d[1:] - d[:-1]
        if np.any(den == 0.0):
            break
        col = col[2:] - d[1:] ** 2 / den
        estimates.append(float(col[-1]))
    moves = np.abs(np.diff(estimates))
    best = int(np.argmin(moves)) + 1
    limit, diag = estimates[best], float(moves[best - 1])
    if diag > rtol * max(abs(limit), mag) and diag > 1e-14:
        raise LimitError(f"limit of r^a u for {u.label} did not converge (estimate {limit}, diag {diag:.3g})")
    return limit, diag


def boundary_prefactor(geom):
    return math.sqrt(geom.N * (geom.N - 2) * geom.omega_N / 2)


def boundary_term_L(u, geom):
    """L(u) = (N(N-2) omega_N / 2)^(1/2) lim_{r->0} r^((N-2)/2) u(r)."""
    return boundary_prefactor(geom) * boundary_limit(u, geom)[0]


def radial_projection(terms, domain=None):
    """Sphere average of a finite harmonic sum given as ``[(k, f_k), ...]``.

    Only k = 0 terms survive the average.
    """
    radial = [f for k, f in terms if k == 0]
    if not radial:
        if domain is None:
            domain = terms[0][1].domain if terms else (0.0, 1.0)
        return zero_profile(domain, label="radial(0)")
    if len(radial) == 1:
        return radial[0]

    def value(r):
        return sum(f.value(r) for f in radial)

    def derivative(r):
        return sum(f.derivative(r) for f in radial)

    return RadialProfile(value=value, derivative=derivative, domain=radial[0].domain,
                         label="+".join(f.label for f in radial),
                         zero_at_right_endpoint=all(f.zero_at_right_endpoint for f in radial))


# ----------------------------------------------------------------------------
# finite-q weighted embeddings

CRITICAL_WEIGHT = "critical"   # |x|^(-q(N-2)/2)
HALF_WEIGHT = "half"           # |x|^(-(N-2)/2)


def embedding_quotient(v, geom, q, weight=CRITICAL_WEIGHT, rule=quad.DEFAULT_RULE):
    """||v||_W^2 / ||v||_{L^q(w)}^2 for 1 <= q < 2N/(N-2)."""
    if not 1 <= q < geom.q:
        raise InvalidArgumentError(f"q must lie in [1, {geom.q}), got {q}")
    N, a = geom.N, geom.a
    power = q * a if weight == CRITICAL_WEIGHT else a
    if weight not in (CRITICAL_WEIGHT, HALF_WEIGHT):
        raise InvalidArgumentError(f"unknown weight {weight!r}")
    num = energy(InequalitySpec(WEIGHTED_HS, geom), v, rule)
    f = Integrand(lambda r: np.asarray(r) ** (N - 1 - power) * np.abs(v.value(r)) ** q,
                  singular_left=True, singular_right=True)
    den, _ = _integrate(f, v.domain[0], v.domain[1], rule=rule)
    den *= geom.sphere_area_Nminus1
    if den == 0:
        raise InvalidArgumentError("zero denominator")
    return num / den ** (2 / q)


# ----------------------------------------------------------------------------
# Maz'ya criterion

def mazya_measure(geom, l, rule=quad.DEFAULT_RULE):
    """mu((0, l)) for d mu = r^-1 (-log r)^-beta dr on (0, 1).

    Integrated in sigma = -log r, where the measure becomes sigma^-beta d sigma
    on (-log l, inf).
    """
    beta = geom.beta
    f = Integrand(lambda sig: np.asarray(sig) ** (-beta))
    return _integrate(f, -math.log(l), math.inf, rel_tol=1e-14, rule=rule)


def mazya_B(geom, n_grid=41, l_min=1e-12, l_max=0.9, rule=quad.DEFAULT_RULE):
    """B = sup_l mu((0,l))^(1/q) (int_l^1 dr/r)^(1/2) and the sandwich [B, B (q/(q-1))^(1/2) q^(1/q)].

    The measures are the unit-radius pair; the radius drops out of B by
    the dilation r -> r/R.  Raises when B(l) is not constant in l or when
    C_M^(-1/2) leaves the sandwich.
    """
    q = geom.q
    grid = np.logspace(math.log10(l_min), math.log10(l_max), n_grid)
    values = []
    for l in grid:
        mu_l, _ = mazya_measure(geom, float(l), rule)
        values.append(mu_l ** (1 / q) * math.sqrt(-math.log(l)))
    values = np.array(values)
    B = float(values.max())
    spread = float(values.max() - values.min()) / B
    if spread > 1e-10:
        raise InconsistencyError(f"B(l) not constant over the grid (relative spread {spread:.3g})")
    upper = B * math.sqrt(q / (q - 1)) * q ** (1 / q)
    best = cm_constant(geom) ** -0.5
    if not (B <= best <= upper):
        raise InconsistencyError(f"C_M^(-1/2) = {best} outside [{B}, {upper}]")
    return B, (B, upper)
