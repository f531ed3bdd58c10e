"""Bessel functions of real order and the eigenbasis

    e_{k,n}(r) = r^-(N-2)/2 J_m(z_{m,n} r / R),   m^2 = k(k + N - 2),

of -Delta - ((N-2)/2)^2 / |x|^2 on the ball, restricted to its radial factors.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import quad
from .errors import InvalidArgumentError, SearchError
from .profiles import RadialProfile
from .special import gamma

M_MAX = 20.0
X_MAX = 200.0
SERIES_X = 12.0
_SERIES_TERMS = 80
_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class BesselOrder:
    k: int
    N: int
    m: float = field(init=False)
    c_k: float = field(init=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise InvalidArgumentError(f"harmonic index must be a non-negative integer, got {self.k}")
        if int(self.N) != self.N or self.N < 3:
            raise InvalidArgumentError(f"dimension must be an integer >= 3, got {self.N}")
        c_k = float(self.k * (self.N + self.k - 2))
        object.__setattr__(self, "c_k", c_k)
        object.__setattr__(self, "m", math.sqrt(c_k))


# ----------------------------------------------------------------------------
# J_m

def _check_args(m, x):
    if not 0.0 <= m <= M_MAX:
        raise InvalidArgumentError(f"order must lie in [0, {M_MAX}], got {m}")
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > X_MAX):
        raise InvalidArgumentError(f"argument must lie in [0, {X_MAX}]")


def _series(m, x):
    """Ascending series sum_k (-1)^k (x/2)^(2k+m) / (k! Gamma(k+m+1))."""
    half = 0.5 * x
    with np.errstate(divide="ignore"):
        # x^m 2^-m, not (x/2)^m: x/2 underflows for the smallest subnormal x
        term = x ** m * 0.5 ** m / gamma(m + 1.0) if m > 0 else np.ones_like(x)
    total = term.copy()
    h2 = half * half
    for k in range(1, _SERIES_TERMS):
        term = -term * h2 / (k * (k + m))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(m, x):
    """Backward recurrence J_{nu-1} = (2 nu / x) J_nu - J_{nu+1} from a high start,
    normalised by (x/2)^a0 = sum_k (a0 + 2k) Gamma(a0 + k)/k! J_{a0+2k}(x)
    with a0 the fractional part of m."""
    a0 = m - math.floor(m)
    top = int(math.floor(m))
    start = int(max(x.max(), m) + 40 + 8 * math.sqrt(x.max())) + 2
    # coefficients of the normalisation sum
    coef = np.zeros(start + 1)
    g = gamma(a0 + 1.0)   # Gamma(a0 + k)/k! at k = 1; k = 0 carries a0 Gamma(a0) = Gamma(a0+1)
    coef[0] = g
    for k in range(1, start // 2 + 1):
        if k > 1:
            g = g * (a0 + k - 1) / k
        coef[2 * k] = (a0 + 2 * k) * g
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = coef[start] * j_cur if start % 2 == 0 else np.zeros_like(x)
    want = np.zeros_like(x)
    if start == top:
        want = j_cur.copy()
    for i in range(start, 0, -1):
        nu = a0 + i
        j_prev = (2.0 * nu / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if (i - 1) % 2 == 0:
            norm = norm + coef[i - 1] * j_cur
        if i - 1 == top:
            want = j_cur.copy()
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            s = np.where(big, 1e-250, 1.0)
            j_cur, j_next, norm, want = j_cur * s, j_next * s, norm * s, want * s
    return want * (0.5 * x) ** a0 / norm


def bessel_j(m, x):
    """J_m(x) for real order m in [0, 20] and x in [0, 200]; scalar or array ``x``.

    Series for x <= 12, Miller backward recurrence beyond.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = float(m)
    _check_args(m, x)
    out = np.empty_like(x)
    small = x <= SERIES_X
    if np.any(small):
        out[small] = _series(m, x[small])
    if np.any(~small):
        out[~small] = _miller(m, x[~small])
    return float(out[0]) if scalar else out


def bessel_zero(m, n):
    """n-th positive zero of J_m, bracketed by a scan from x = m in steps of pi/4
    and refined by bisection to 1e-12."""
    m = float(m)
    if not 0.0 <= m <= M_MAX:
        raise InvalidArgumentError(f"order must lie in [0, {M_MAX}], got {m}")
    if int(n) != n or not 1 <= n <= 50:
        raise InvalidArgumentError(f"zero index must be an integer in [1, 50], got {n}")
    step = math.pi / 4
    lo = max(m, 1e-3)
    f_lo = bessel_j(m, lo)
    count = 0
    while lo + step <= X_MAX:
        hi = lo + step
        f_hi = bessel_j(m, hi)
        if f_hi == 0.0:
            count += 1
            if count == n:
                return hi
            lo, f_lo = hi + 1e-9, bessel_j(m, hi + 1e-9)
            continue
        if f_lo * f_hi < 0:
            count += 1
            if count == n:
                return _bisect(m, lo, hi, f_lo)
        lo, f_lo = hi, f_hi
    raise SearchError(f"zero {n} of J_{m} not bracketed below {X_MAX}")


def _bisect(m, lo, hi, f_lo):
    while hi - lo > _ZERO_TOL:
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(m, mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ZeroTable:
    """Immutable table of zeros z_{m,n}, keyed by (m, n)."""

    entries: tuple

    @classmethod
    def build(cls, orders, n_max):
        return cls(tuple((float(m), n, bessel_zero(m, n)) for m in orders for n in range(1, n_max + 1)))

    def zero(self, m, n):
        for mm, nn, z in self.entries:
            if mm == float(m) and nn == n:
                return z
        return bessel_zero(m, n)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "n", "z"])
        for m, n, z in self.entries:
            writer.writerow([repr(m), n, repr(z)])
        return buf.getvalue()


# ----------------------------------------------------------------------------
# eigenfunctions

@dataclass(frozen=True)
class EigenFunction:
    order: BesselOrder
    n: int
    z_mn: float
    R: float = 1.0
    radial_part: Callable = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        a = (self.order.N - 2) / 2
        m, z, R = self.order.m, self.z_mn, self.R

        def radial(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore"):
                return r ** (-a) * bessel_j(m, np.clip(z * r / R, 0.0, X_MAX))

        object.__setattr__(self, "radial_part", radial)

    def bessel_factor(self, r):
        """J_m(z r/R), i.e. r^((N-2)/2) times the radial part."""
        return bessel_j(self.order.m, np.clip(self.z_mn * np.asarray(r, dtype=float) / self.R, 0.0, X_MAX))

    def as_profile(self):
        return RadialProfile(value=self.radial_part, derivative=None, domain=(0.0, self.R),
                             label=f"e[{self.order.k},{self.n}]", zero_at_right_endpoint=True)


def eigenfunction(k, n, N, R=1.0, table=None):
    order = BesselOrder(k, N)
    z = table.zero(order.m, n) if table is not None else bessel_zero(order.m, n)
    return EigenFunction(order, n, z, R)


def eigenbasis(geom, k, n_max, table=None):
    return [eigenfunction(k, n, geom.N, geom.R, table) for n in range(1, n_max + 1)]


# ----------------------------------------------------------------------------
# Gram matrix and expansions

_GRAM_RULE = quad.QuadratureRule(panel_order=16, target_tol=1e-14)


def _inner(f, geom, rule=_GRAM_RULE):
    """int_0^R f(r) dr for a smooth integrand; the r-power is supplied by the caller."""
    return quad.integrate(quad.Integrand(f, singular_left=True), 0.0, geom.R, rule)


def gram_matrix(geom, k, n_max, table=None):
    """G_ij = int_0^R r^(N-1) e_i e_j dr over the order-k eigenfunctions, unnormalised.

    r^(N-1) e_i e_j = r J_m(z_i r/R) J_m(z_j r/R), which is what gets integrated.
    """
    if not 1 <= n_max <= 20:
        raise InvalidArgumentError("n_max must lie in [1, 20]")
    basis = eigenbasis(geom, k, n_max, table)
    G = np.zeros((n_max, n_max))
    for i in range(n_max):
        for j in range(i, n_max):
            ei, ej = basis[i], basis[j]
            val, _ = _inner(lambda r: np.asarray(r) * ei.bessel_factor(r) * ej.bessel_factor(r), geom)
            G[i, j] = G[j, i] = val
    return G


@dataclass
class Expansion:
    coefficients: np.ndarray
    basis: list
    residuals: list   # int r^(N-1) (u - partial sum)^2 after each added term
    norm_sq: float

    def partial_sum(self, count=None):
        count = len(self.basis) if count is None else count
        coeffs, basis = self.coefficients[:count], self.basis[:count]

        def value(r):
            return sum(c * e.radial_part(r) for c, e in zip(coeffs, basis))

        return RadialProfile(value=value, derivative=None, domain=(0.0, basis[0].R),
                             label=f"partial[{count}]")

    def boundary_limit(self, count=None):
        """lim r^((N-2)/2) of the partial sum; J_0(0) = 1 makes it the coefficient sum."""
        count = len(self.basis) if count is None else count
        return float(np.sum(self.coefficients[:count]))


def expand_radial(u, geom, n_max, table=None):
    """Coefficients of u against e_{0,1..n_max}: c_n = <u, e_n> / G_nn, <f, g> = int r^(N-1) f g."""
    if not 1 <= n_max <= 50:
        raise InvalidArgumentError("n_max must lie in [1, 50]")
    N, a = geom.N, geom.a
    basis = eigenbasis(geom, 0, n_max, table)

    # r^(N-1) u e_n = r^((N-2)/2 + 1) u J_0(z r/R): keep the product together
    def weighted_u(r):
        r = np.asarray(r, dtype=float)
        return r ** (a + 1) * u.value(r)

    coeffs = np.zeros(n_max)
    for idx, e in enumerate(basis):
        proj, _ = _inner(lambda r: weighted_u(r) * e.bessel_factor(r), geom)
        diag, _ = _inner(lambda r: np.asarray(r) * e.bessel_factor(r) ** 2, geom)
        coeffs[idx] = proj / diag
    # squared L^2 norm of u and of the residual after each added term
    norm_sq, _ = _inner(lambda r: np.asarray(r) ** (N - 1) * u.value(r) ** 2, geom)
    residuals = []
    for count in range(1, n_max + 1):
        cs, bs = coeffs[:count], basis[:count]

        def res(r, cs=cs, bs=bs):
            r = np.asarray(r, dtype=float)
            v = r ** a * u.value(r) - sum(c * b.bessel_factor(r) for c, b in zip(cs, bs))
            return r * v * v

        residuals.append(_inner(res, geom)[0])
    return Expansion(coeffs, basis, residuals, norm_sq)


# ----------------------------------------------------------------------------
# eigen-ODE collocation

_FD7 = (np.array([-3, -2, -1, 0, 1, 2, 3], dtype=float),
        np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0,
        np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0)


def eigen_ode_residual(e, geom, n_points=50, h_rel=5e-3):
    """Relative collocation residual of

        -e'' - ((N-1)/r) e' - ((N-2)/2)^2 e/r^2 + (c_k/r^2) e = (z/R)^2 e

    at ``n_points`` interior points, derivatives by sixth-order central
    differences with step ``h_rel * r`` (the r^-(N-2)/2 factor makes a fixed
    step inaccurate near the origin).  Returns ||lhs - rhs||_2 / ||rhs||_2.
    """
    N, R = geom.N, geom.R
    a = geom.a
    offsets, w1, w2 = _FD7
    r = np.linspace(0.1 * R, 0.9 * R, n_points)
    h = h_rel * r
    pts = r[:, None] + h[:, None] * offsets[None, :]
    vals = e.radial_part(pts.ravel()).reshape(pts.shape)
    d1 = vals @ w1 / h
    d2 = vals @ w2 / (h * h)
    f = vals[:, 3]
    lhs = -d2 - (N - 1) / r * d1 - a * a * f / r ** 2 + e.order.c_k * f / r ** 2
    rhs = (e.z_mn / R) ** 2 * f
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
