"""Euler-Lagrange residuals of the extremals and the quotient equivalence under
w(t) = r^((N-2)/2) u(r), t = (-log(r/R))^(-1/(N-2)).
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import quad
from .errors import InvalidStateError
from .functionals import IHS_RADIAL, InequalitySpec, log_power_t_integral, quotient_with_error
from .profiles import ExtremalParams, extremal_psi, extremal_u
from .report import make_report
from .transforms import pushforward, t_log_power, u_to_v


@dataclass
class ELResidualReport:
    lambda_fit: float
    rel_residual: float
    mesh: np.ndarray = field(repr=False)
    params: dict = field(default_factory=dict)

    def as_dict(self):
        return {"lambda_fit": self.lambda_fit, "rel_residual": self.rel_residual,
                "n_nodes": int(self.mesh.size), "params": dict(self.params)}


def _fit(lhs, rhs, mesh, params):
    rr = float(rhs @ rhs)
    if rr == 0.0 or not math.isfinite(rr):
        raise InvalidStateError("right-hand side vanishes on the mesh")
    lam = float(lhs @ rhs) / rr
    res = float(np.linalg.norm(lhs - lam * rhs) / np.linalg.norm(lhs))
    return ELResidualReport(lam, res, mesh, params)


def expected_lambda(params, geom):
    """Multiplier for u_{mu,nu}: N mu^2 nu^2 / (N-2)."""
    N = geom.N
    return N * params.mu ** 2 * params.nu ** 2 / (N - 2)


def el_residual(u_params, geom, n_nodes=200, scale=1.0):
    """Fit lambda in -u'' - ((N-1)/r) u' - a^2 u/r^2 = lambda (-log(r/R))^-beta u^((N+2)/(N-2))
    for u = scale * u_{mu,nu} on n_nodes points of [delta, R - delta], delta = 1e-4 R.

    Derivatives are the closed forms of the extremal, no differencing.
    """
    N, R, a = geom.N, geom.R, geom.a
    delta = 1e-4 * R
    r = np.linspace(delta, R - delta, int(n_nodes))
    u = extremal_u(u_params, geom)
    val = scale * u.value(r)
    d1 = scale * u.derivative(r)
    d2 = scale * u.second_derivative(r)
    lhs = -d2 - (N - 1) / r * d1 - a * a * val / (r * r)
    s = -np.log(r / R)
    rhs = s ** (-geom.beta) * np.abs(val) ** ((N + 2) / (N - 2)) * np.sign(val)
    params = {"mu": u_params.mu, "nu": u_params.nu, "N": N, "R": R, "scale": scale}
    return _fit(lhs, rhs, r, params)


def unit_multiplier_nu(geom, mu=1.0, n_nodes=200, bracket=(1e-3, 1e3)):
    """nu at which the fitted multiplier equals 1 for fixed mu (root-find on nu)."""
    def f(nu):
        return el_residual(ExtremalParams(mu, nu), geom, n_nodes).lambda_fit - 1.0

    return brentq(f, *bracket, xtol=1e-14, rtol=1e-14)


def sobolev_el_residual(params, geom, n_nodes=200, t_max=10.0):
    """Fit lambda in -psi'' - ((N-1)/t) psi' = lambda psi^((N+2)/(N-2)) for psi_{mu,nu};
    the closed form multiplier is N(N-2) mu^2 nu^2."""
    N = geom.N
    t = np.linspace(1e-3, t_max, int(n_nodes))
    psi = extremal_psi(params, geom)
    lhs = -psi.second_derivative(t) - (N - 1) / t * psi.derivative(t)
    rhs = psi.value(t) ** ((N + 2) / (N - 2))
    return _fit(lhs, rhs, t, {"mu": params.mu, "nu": params.nu, "N": N})


def transported_sobolev_quotient(u, geom, rule=quad.DEFAULT_RULE):
    """Sobolev quotient in R^N of w = pushforward(T_LOG_POWER, r^a u); returns (value, err)."""
    N, q, theta = geom.N, geom.q, geom.theta
    v = u_to_v(u, geom)
    w = pushforward(t_log_power(geom), v)
    area = geom.sphere_area_Nminus1
    exact = v.log_value is not None and v.log_slope is not None
    num, e_num = log_power_t_integral(lambda t: w.derivative(t) ** 2, geom, rule, from_origin=exact)
    den, e_den = log_power_t_integral(lambda t: np.abs(w.value(t)) ** q, geom, rule,
                                      from_origin=exact)
    num, e_num, den, e_den = area * num, area * e_num, area * den, area * e_den
    value = num / den ** theta
    return value, value * (e_num / num + theta * e_den / den)


def equivalence_ratio(geom):
    """Predicted Sobolev/IHS quotient ratio (N-2)^(2(N-1)/N)."""
    N = geom.N
    return (N - 2) ** (2 * (N - 1) / N)


def equivalence_check(geom, p, tol=1e-7, rule=quad.DEFAULT_RULE):
    """IHS quotient of u = p against the Sobolev quotient of its transform."""
    start = time.perf_counter()
    q_ihs, e_ihs = quotient_with_error(InequalitySpec(IHS_RADIAL, geom), p, rule)
    q_sob, e_sob = transported_sobolev_quotient(p, geom, rule)
    ratio = q_sob / q_ihs
    return make_report(
        "equivalence",
        ratio,
        equivalence_ratio(geom),
        tol,
        quad_err_est=ratio * (e_ihs / q_ihs + e_sob / q_sob),
        params={"N": geom.N, "R": geom.R, "profile": p.label,
                "ihs_quotient": q_ihs, "sobolev_quotient": q_sob},
        runtime_ms=1e3 * (time.perf_counter() - start),
    )
