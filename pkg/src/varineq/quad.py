"""Adaptive composite Gauss-Legendre quadrature for weighted radial integrands.

Integrable endpoint singularities are handled by geometric mesh grading
(ratio 1/2) toward flagged endpoints.  Logarithmic singularities at the left
endpoint (the origin, for radial integrals), which grading alone cannot
resolve, are removed by an exponential stretching ``r = a + (c - a) exp(-s)``
when the integrand recommends the ``T_LOG`` substitution; a flagged right
endpoint is always graded.  Semi-infinite ranges use the rational map ``t = a + x/(1-x)``.

All callables are evaluated on numpy arrays.
"""

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import AccuracyError, InvalidArgumentError

T_LOG = "T_LOG"

_EPS = np.finfo(float).eps
_GRADE_LEVELS = 30
_MAX_PANELS = 400_000
# stretched points stay normal floats: exp(-_S_LIMIT) ~ 1e-300
_S_LIMIT = 690.0
_SAFETY = 3.0


@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule parameters.

    ``mesh`` holds breakpoints on the unit interval; they are mapped affinely
    onto the integration interval.
    """

    panel_order: int = 8
    mesh: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    target_tol: float = 1e-10
    max_refinements: int = 40

    def __post_init__(self):
        if not 2 <= self.panel_order <= 64:
            raise InvalidArgumentError("panel_order must lie in [2, 64]")
        m = np.asarray(self.mesh, dtype=float)
        if m.size < 2 or np.any(np.diff(m) <= 0) or m[0] != 0.0 or m[-1] != 1.0:
            raise InvalidArgumentError("mesh must increase strictly from 0 to 1")
        if not self.target_tol > 0:
            raise InvalidArgumentError("target_tol must be positive")
        if self.max_refinements < 0:
            raise InvalidArgumentError("max_refinements must be non-negative")


DEFAULT_RULE = QuadratureRule()


@dataclass(frozen=True)
class Integrand:
    func: Callable
    singular_left: bool = False
    singular_right: bool = False
    recommended_substitution: Optional[str] = None
    label: str = field(default="", compare=False)


def as_integrand(f):
    return f if isinstance(f, Integrand) else Integrand(f)


@functools.lru_cache(maxsize=None)
def _gauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_nodes(order):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if not isinstance(order, (int, np.integer)) or not 2 <= order <= 64:
        raise InvalidArgumentError(f"order must be an integer in [2, 64], got {order!r}")
    x, w = _gauss(int(order))
    return x.copy(), w.copy()


def _panel_sums(func, lo, hi, order):
    """Gauss sums of func and |func| over each panel [lo_i, hi_i]."""
    x, w = _gauss(order)
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    # rounding can land a node on a panel end; keep nodes strictly inside
    pts = np.clip(pts, np.nextafter(lo, hi)[:, None], np.nextafter(hi, lo)[:, None])
    with np.errstate(all="ignore"):
        vals = np.asarray(func(pts.ravel()), dtype=float).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.isfinite(vals)]
        raise AccuracyError(f"integrand not finite at {bad[:3]}")
    return half * (vals @ w), half * (np.abs(vals) @ w)


def _initial_mesh(a, b, rule, grade_left, grade_right):
    pts = a + (b - a) * np.asarray(rule.mesh, dtype=float)
    extra = []
    geo = 0.5 ** np.arange(1, _GRADE_LEVELS + 1)
    if grade_left:
        extra.append(pts[0] + (pts[1] - pts[0]) * geo)
    if grade_right:
        extra.append(pts[-1] - (pts[-1] - pts[-2]) * geo)
    if extra:
        pts = np.unique(np.concatenate([pts] + extra))
    return pts


def _endpoint_panel(func, lo, hi, coarse, fine, other_half, n, left):
    """Value and error of a panel touching a singular endpoint.

    The half next to the endpoint ([lo, hi]) is split once more, giving three
    nested sums.  Near r^alpha the differences shrink geometrically with ratio
    rho = 2^-(alpha+1), so the error left after the finest sum is d2 rho/(1-rho);
    the plain half-panel difference misses this by up to 1/(2^(alpha+1)-1).
    """
    m = 0.5 * (lo + hi)
    s1, _ = _panel_sums(func, np.array([lo, m]), np.array([m, hi]), n)
    finest = float(s1.sum()) + other_half
    d1, d2 = fine - coarse, finest - fine
    if d1 != 0.0 and 0.0 < d2 / d1 < 1.0:
        rho = d2 / d1
        return finest, abs(d2) * max(_SAFETY, 2 * rho / (1 - rho))
    return finest, _SAFETY * max(abs(d1), abs(d2))


def _adaptive(func, a, b, rule, grade_left=False, grade_right=False, breaks=None):
    n = rule.panel_order
    tol = rule.target_tol
    mesh = _initial_mesh(a, b, rule, grade_left, grade_right)
    if breaks is not None:
        mesh = np.unique(np.concatenate([mesh, [x for x in breaks if a < x < b]]))
    lo, hi = mesh[:-1], mesh[1:]
    coarse, _ = _panel_sums(func, lo, hi, n)

    for _ in range(rule.max_refinements + 1):
        mid = 0.5 * (lo + hi)
        left, left_abs = _panel_sums(func, lo, mid, n)
        right, right_abs = _panel_sums(func, mid, hi, n)
        fine = left + right
        err = _SAFETY * np.abs(fine - coarse)
        floor = 64 * _EPS * (left_abs + right_abs)
        value = fine.copy()
        if grade_left and lo[0] == a:
            value[0], err[0] = _endpoint_panel(func, lo[0], mid[0], coarse[0], fine[0], right[0], n, True)
        if grade_right and hi[-1] == b:
            value[-1], err[-1] = _endpoint_panel(func, mid[-1], hi[-1], coarse[-1], fine[-1], left[-1], n, False)
        total = float(np.sum(value))
        total_err = float(np.sum(err))
        if total_err <= max(tol, float(np.sum(floor))):
            return total, total_err
        resolvable = (hi - lo) > 16 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        split = (err > floor) & (err > tol / lo.size) & resolvable
        if not np.any(split):
            split = (err >= err.max()) & resolvable
            if not np.any(split):
                break
        if lo.size + np.count_nonzero(split) > _MAX_PANELS:
            break
        keep = ~split
        # children inherit the half-panel sums as their coarse values
        lo = np.concatenate([lo[keep], lo[split], mid[split]])
        hi = np.concatenate([hi[keep], mid[split], hi[split]])
        coarse = np.concatenate([coarse[keep], left[split], right[split]])
        order = np.argsort(lo, kind="stable")
        lo, hi, coarse = lo[order], hi[order], coarse[order]

    # a flagged endpoint panel stuck at the float spacing hides mass it cannot sample
    stuck = (hi - lo) <= 16 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
    for flagged, i in ((grade_left, 0), (grade_right, -1)):
        if flagged and stuck[i]:
            total_err += _SAFETY * float(left_abs[i] + right_abs[i])
    raise AccuracyError(
        f"quadrature on [{a}, {b}] did not reach tol={tol:g} "
        f"(best {total:.17g} +- {total_err:.3g})",
        value=total,
        err_est=total_err,
    )


def _stretched(func, a, c):
    """Integrand in s for r = a + (c - a) exp(-s), s in [0, inf)."""
    width = c - a

    def g(s):
        jac = width * np.exp(-s)
        with np.errstate(all="ignore"):
            return func(a + jac) * jac

    return g


def _stretch_limit(end, width):
    """Largest s for which end + width*exp(-s) is still a normal float distinct from end."""
    s_max = _S_LIMIT + math.log(width)
    if end != 0.0:
        s_max = min(s_max, math.log(width / (4 * _EPS * abs(end))))
    return s_max


def _tail_fit(g, s_max, fractions):
    """Tail integral over [s_max, inf) from three samples.

    The local exponent p(s) = -s g'/g is modelled as p_inf + kappa/s, which
    is exact to O(1/s^2) for shifted power laws g = C (s + c)^-p.
    """
    s = np.asarray(fractions) * s_max
    g1, g2, g3 = (float(v) for v in g(s))
    if g1 * g3 <= 0 or g2 * g3 <= 0:
        raise AccuracyError("stretched integrand changes sign in its tail")
    p1 = math.log(g1 / g2) / math.log(s[1] / s[0])
    p2 = math.log(g2 / g3) / math.log(s[2] / s[1])
    m1, m2 = math.sqrt(s[0] * s[1]), math.sqrt(s[1] * s[2])
    kappa = (p1 - p2) / (1 / m1 - 1 / m2)
    p_inf = p2 - kappa / m2
    if p_inf <= 1.0 or p2 <= 1.0:
        raise AccuracyError(f"tail decays too slowly (exponent {p2:.3g})")
    tail = g3 * (s_max / (p_inf - 1.0) * (1 - kappa / s_max) + kappa / p_inf)
    return tail, abs(tail) * (kappa / s_max) ** 2


def _stretched_integral(g, s_max, rule):
    """Integral of g over [0, inf) as quadrature on [0, s_max] plus a fitted tail.

    Exponentially decaying integrands have a negligible tail by the time the
    stretched point underflows; the fit matters for logarithmic weights,
    whose integrands decay like powers of s.
    """
    # weighted profiles may overflow before r underflows; back off until finite
    for _ in range(60):
        probe = np.array([0.8, 0.9, 0.95, 1.0]) * s_max
        if np.all(np.isfinite(g(probe))):
            break
        s_max *= 0.9
    # s is a log scale: breakpoints 1/4, 1/2, 1, 2, 4, ... keep features near
    # s = 0 (r near c) from falling between the nodes of a wide first panel
    breaks = 2.0 ** np.arange(-2, math.ceil(math.log2(s_max)) + 1)
    value, err = _adaptive(g, 0.0, s_max, rule, breaks=breaks)
    probe = np.asarray(g(np.array([0.8, 0.9, 0.95, 1.0]) * s_max), dtype=float)
    g_end = float(np.max(np.abs(probe)))
    if g_end * s_max <= 1e-3 * rule.target_tol:
        return value, err + g_end * s_max
    if not (np.all(probe > 0) or np.all(probe < 0)):
        # sign changes this far out are cancellation noise: no resolvable tail
        return value, err + g_end * s_max
    try:
        tail, fit_err = _tail_fit(g, s_max, (0.8, 0.9, 1.0))
        other, _ = _tail_fit(g, s_max, (0.9, 0.95, 1.0))
    except AccuracyError as exc:
        # the tail is unknown, so no finite error bound can be given
        raise AccuracyError(str(exc), value, math.inf) from None
    tail_err = abs(tail - other) + fit_err
    # a tail that cannot be pushed further out is accepted when the fits
    # agree to 1%; its uncertainty is carried in the estimate
    if tail_err > max(rule.target_tol, 1e-2 * abs(tail)):
        raise AccuracyError(
            f"unresolved tail beyond s={s_max:.3g} (tail {tail:.3g} +- {tail_err:.3g})",
            value + tail, err + tail_err)
    return value + tail, err + tail_err


def integrate(f, a, b, rule=DEFAULT_RULE):
    """Integrate ``f`` over [a, b]; returns ``(value, err_est)``.

    ``b`` may be ``inf``, in which case the call is forwarded to
    :func:`integrate_semi_infinite`.
    """
    f = as_integrand(f)
    if not a < b:
        raise InvalidArgumentError(f"need a < b, got [{a}, {b}]")
    if math.isinf(b):
        return integrate_semi_infinite(f, a, rule)
    if math.isinf(a):
        raise InvalidArgumentError("left endpoint must be finite")

    if f.recommended_substitution == T_LOG and f.singular_left:
        c = 0.5 * (a + b) if f.singular_right else b
        failure = None
        try:
            value, err = _stretched_integral(_stretched(f.func, a, c), _stretch_limit(a, c - a), rule)
        except AccuracyError as exc:
            failure, value, err = exc, exc.value, exc.err_est
        if c < b:
            v, e = _adaptive(f.func, c, b, rule, grade_right=True)
            value, err = value + v, err + e
        if failure is not None:
            # the best estimate must cover the whole interval
            raise AccuracyError(str(failure), value, err) from None
        return value, err

    return _adaptive(f.func, a, b, rule, f.singular_left, f.singular_right)


def integrate_semi_infinite(f, a, rule=DEFAULT_RULE):
    """Integrate ``f`` over [a, inf) through t = a + x/(1-x), x in [0, 1)."""
    f = as_integrand(f)
    if math.isinf(a):
        raise InvalidArgumentError("left endpoint must be finite")
    if f.recommended_substitution == T_LOG and f.singular_left:
        near = integrate(Integrand(f.func, singular_left=True, recommended_substitution=T_LOG), a, a + 1.0, rule)
        far = integrate_semi_infinite(Integrand(f.func), a + 1.0, rule)
        return near[0] + far[0], near[1] + far[1]

    func = f.func

    def g(x):
        one_minus = 1.0 - x
        t = a + x / one_minus
        with np.errstate(all="ignore"):
            out = func(t) / (one_minus * one_minus)
        return np.where(np.isinf(t), 0.0, out)

    return _adaptive(g, 0.0, 1.0, rule, grade_left=f.singular_left, grade_right=True)


def integrate_relative(f, a, b, rel_tol=1e-12, rule=DEFAULT_RULE):
    """Like :func:`integrate` but with the tolerance scaled to the magnitude of the result."""
    try:
        value, err = integrate(f, a, b, rule)
    except AccuracyError as exc:
        value, err = exc.value, exc.err_est
    target = rel_tol * abs(value)
    if err <= target or target == 0.0 and err <= rule.target_tol:
        return value, err
    tight = QuadratureRule(rule.panel_order, rule.mesh, max(target, 1e-300), rule.max_refinements)
    return integrate(f, a, b, tight)
