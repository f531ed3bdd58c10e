"""Command-line entry point.

    varineq <command> [--dim N] [--radius R] [--mu MU] [--nu NU]
            [--quad-tol TOL] [--format json|csv] [--out PATH] [--seed SEED]

Exit codes: 0 all checks within tolerance, 1 a tolerance failure,
2 usage error, 3 numerical-engine failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import quad
from .elcheck import el_residual, equivalence_check, expected_lambda, sobolev_el_residual, unit_multiplier_nu
from .errors import InvalidArgumentError, NumericalError
from .functionals import (BLISS, IHS_RADIAL, MAZYA_M, SOBOLEV_RADIAL, WEIGHTED_HS, InequalitySpec,
                          boundary_prefactor, boundary_term_L, mazya_B, quotient_with_error)
from .minimize import INITS, TENT, MinimizeConfig, minimize_quotient
from .profiles import (BlissParams, ExtremalParams, GeometryContext, bliss_constant, bliss_extremal,
                       chs_constant, cm_constant, extremal_phi, extremal_psi, extremal_u, extremal_v,
                       sobolev_constant, sobolev_constant_alt_form)
from .report import AUDIT, make_report
from .seeded import Lcg64, seeded_profiles
from .spectral import bessel_j, bessel_zero, eigen_ode_residual, eigenfunction, expand_radial, gram_matrix
from .transforms import (EQ_H_TO_D, EQ_HARDY_BOUNDARY, EQ_HARDY_SPLIT, EQ_W_TO_D, SubstitutionHardy,
                         pushforward, t_log_power, v_to_u, verify_norm_identity)

COMMANDS = ("constants", "quotient", "minimize", "transform-check", "el-residual",
            "spectral", "mazya-b", "full-audit")
INEQS = {"whs": WEIGHTED_HS, "mazya": MAZYA_M, "sobolev": SOBOLEV_RADIAL, "ihs": IHS_RADIAL, "bliss": BLISS}
ENV_QUAD_TOL = "VARINEQ_QUAD_TOL"
DEFAULT_QUAD_TOL = 1e-10

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Usage(f"{self.prog}: error: {message}")


def build_parser():
    parser = _Parser(prog="varineq", description="Numerical checks of Hardy-Sobolev type inequalities.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--dim", type=int, default=3)
    parser.add_argument("--radius", type=float, default=1.0)
    parser.add_argument("--mu", type=float, default=1.0)
    parser.add_argument("--nu", type=float, default=1.0)
    parser.add_argument("--quad-tol", type=float, default=None,
                        help=f"quadrature target tolerance (default {DEFAULT_QUAD_TOL:g}, or ${ENV_QUAD_TOL})")
    parser.add_argument("--format", dest="out_format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", dest="out_path", default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ineq", choices=sorted(INEQS), default="whs", help="family for 'quotient'")
    parser.add_argument("--init", choices=INITS, default=TENT, help="start for 'minimize'")
    parser.add_argument("--T", type=float, default=200.0, help="truncation for 'minimize'")
    parser.add_argument("--nodes", type=int, default=4000, help="node count for 'minimize'")
    parser.add_argument("--count", type=int, default=10, help="seeded profiles per suite")
    return parser


def resolve_quad_tol(flag_value, environ=None):
    """Flag, then environment, then default."""
    environ = os.environ if environ is None else environ
    if flag_value is not None:
        return float(flag_value)
    if environ.get(ENV_QUAD_TOL):
        try:
            return float(environ[ENV_QUAD_TOL])
        except ValueError:
            raise InvalidArgumentError(f"{ENV_QUAD_TOL} is not a number: {environ[ENV_QUAD_TOL]!r}") from None
    return DEFAULT_QUAD_TOL


class RunConfig:
    def __init__(self, args, environ=None):
        self.command = args.command
        self.dim = args.dim
        self.radius = args.radius
        self.mu = args.mu
        self.nu = args.nu
        self.quad_tol = resolve_quad_tol(args.quad_tol, environ)
        self.out_format = args.out_format
        self.out_path = args.out_path
        self.seed = args.seed
        self.ineq = args.ineq
        self.init = args.init
        self.T = args.T
        self.nodes = args.nodes
        self.count = args.count
        if self.dim < 3:
            raise InvalidArgumentError(f"--dim must be >= 3, got {self.dim}")
        if not self.quad_tol > 0:
            raise InvalidArgumentError("--quad-tol must be positive")
        if not self.seed >= 0 or self.seed >= 2 ** 64:
            raise InvalidArgumentError("--seed must be a 64-bit unsigned integer")
        if self.count < 1:
            raise InvalidArgumentError("--count must be >= 1")
        self.geom = GeometryContext(self.dim, self.radius)
        self.params = ExtremalParams(self.mu, self.nu)
        self.rule = quad.QuadratureRule(target_tol=self.quad_tol)

    def as_dict(self):
        out = {"dim": self.dim, "radius": self.radius, "mu": self.mu, "nu": self.nu,
               "quad_tol": self.quad_tol, "seed": self.seed}
        if self.command == "quotient":
            out["ineq"] = self.ineq
        if self.command in ("minimize", "full-audit"):
            out.update(init=self.init, T=self.T, nodes=self.nodes)
        if self.command in ("transform-check", "full-audit"):
            out["count"] = self.count
        return out


# ----------------------------------------------------------------------------
# suites

def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, 1e3 * (time.perf_counter() - start)


def suite_constants(cfg):
    g = cfg.geom
    N = g.N
    reports = []
    S = sobolev_constant(g)
    val, err = quotient_with_error(InequalitySpec(SOBOLEV_RADIAL, g), extremal_psi(ExtremalParams(), g), cfg.rule)
    reports.append(make_report("constant.S", S, val, 1e-8, err, {"N": N, "oracle": "quotient of psi_1,1"}))
    CM = cm_constant(g)
    val, err = quotient_with_error(InequalitySpec(MAZYA_M, g), extremal_phi(ExtremalParams(), g), cfg.rule)
    reports.append(make_report("constant.C_M", CM, val, 1e-8, err, {"N": N, "oracle": "quotient of phi_1,1"}))
    CHS = chs_constant(g)
    reports.append(make_report("constant.C_HS", CHS, CM * g.sphere_area_Nminus1 ** (2 / N), 1e-10,
                               params={"N": N, "oracle": "C_M (N omega_N)^(2/N)"}))
    K = bliss_constant(BlissParams.for_dimension(N))
    reports.append(make_report("constant.K", K, CM ** (-N / (N - 2)), 1e-10,
                               params={"N": N, "oracle": "C_M^(-N/(N-2))"}))
    (B, sandwich), ms = _timed(lambda: mazya_B(g, rule=cfg.rule))
    reports.append(make_report("constant.B", B, (N / (N - 2)) ** (-(N - 2) / (2 * N)), 1e-10, runtime_ms=ms,
                               params={"N": N, "sandwich": list(sandwich), "C_M^-1/2": CM ** -0.5,
                                       "oracle": "(N/(N-2))^(-(N-2)/(2N))"}))
    return reports


_QUOTIENT_PROFILES = {
    WEIGHTED_HS: extremal_v,
    MAZYA_M: extremal_phi,
    SOBOLEV_RADIAL: extremal_psi,
    IHS_RADIAL: extremal_u,
}


def suite_quotient(cfg, family=None, tol=1e-6):
    family = family or INEQS[cfg.ineq]
    g = cfg.geom
    if family == BLISS:
        bp = BlissParams.for_dimension(g.N, abs(cfg.mu), abs(cfg.nu))
        spec = InequalitySpec(BLISS, g, bp)
        p = bliss_extremal(bp)
    else:
        spec = InequalitySpec(family, g)
        p = _QUOTIENT_PROFILES[family](cfg.params, g)
    (val, err), ms = _timed(lambda: quotient_with_error(spec, p, cfg.rule))
    return [make_report(f"quotient.{family}", val, spec.predicted_constant(), tol, err,
                        {"family": family, "N": g.N, "R": g.R, "profile": p.label}, ms)]


def minimize_target(geom):
    """inf of the one-dimensional quotient: S (N omega_N)^(-2/N)."""
    return sobolev_constant(geom) * geom.sphere_area_Nminus1 ** (-2 / geom.N)


def suite_minimize(cfg):
    g = cfg.geom
    config = MinimizeConfig(T=cfg.T, n=cfg.nodes)
    result, ms = _timed(lambda: minimize_quotient(config, g, cfg.init, cfg.seed))
    target = minimize_target(g)
    qs = result.quotients
    monotone = all(b <= a for a, b in zip(qs, qs[1:]))
    final = result.quotient
    within = target - 1e-6 <= final <= target * 1.02
    params = {"N": g.N, "T": cfg.T, "n": cfg.nodes, "init": cfg.init, "iterations": len(qs) - 1,
              "converged": result.converged, "monotone": monotone, "band": [target - 1e-6, target * 1.02]}
    rep = make_report("minimize.quotient", final, target, 0.02, params=params, runtime_ms=ms)
    rep.passed = bool(within and monotone)
    return [rep], result


def _seeded(cfg, powers=(1, 2)):
    return seeded_profiles(cfg.geom.R, cfg.count, Lcg64(cfg.seed), powers)


def suite_transform(cfg, tol=1e-8):
    g = cfg.geom
    reports = []
    # push-forward of phi is psi, pointwise
    phi, psi = extremal_phi(cfg.params, g), extremal_psi(cfg.params, g)
    w = pushforward(t_log_power(g), phi)
    t = np.logspace(-1, 2, 41)
    dev = float(np.max(np.abs(w.value(t) - psi.value(t)) / np.abs(psi.value(t))))
    reports.append(make_report("pushforward.phi_to_psi", dev, 0.0, 1e-12, relative=False,
                               params={"N": g.N, "samples": int(t.size)}))
    hardy = SubstitutionHardy(g)
    tlp = t_log_power(g)
    cases = [(hardy, extremal_u(cfg.params, g), EQ_HARDY_BOUNDARY),
             (tlp, extremal_v(cfg.params, g), EQ_W_TO_D),
             (tlp, extremal_u(cfg.params, g), EQ_H_TO_D)]
    for p in _seeded(cfg):
        cases.append((hardy, p, EQ_HARDY_SPLIT))
        cases.append((tlp, p, EQ_W_TO_D))
    for p in seeded_profiles(g.R, cfg.count, Lcg64(cfg.seed), powers=(0,)):
        cases.append((hardy, v_to_u(p, g), EQ_HARDY_BOUNDARY))
    for m, p, kind in cases:
        reports.append(verify_norm_identity(m, p, g, kind, tol, cfg.rule))
    return reports


def suite_el(cfg):
    g = cfg.geom
    reports = []
    rep, ms = _timed(lambda: el_residual(cfg.params, g, 200))
    reports.append(make_report("el.residual", rep.rel_residual, 0.0, 1e-8, relative=False, runtime_ms=ms,
                               params={"lambda_fit": rep.lambda_fit, **rep.params}))
    reports.append(make_report("el.lambda", rep.lambda_fit, expected_lambda(cfg.params, g), 1e-8,
                               params={"expected": "N mu^2 nu^2 / (N-2)"}))
    srep = sobolev_el_residual(cfg.params, g)
    reports.append(make_report("el.sobolev_residual", srep.rel_residual, 0.0, 1e-10, relative=False,
                               params={"lambda_fit": srep.lambda_fit, **srep.params}))
    reports.append(make_report("el.sobolev_lambda", srep.lambda_fit,
                               g.N * (g.N - 2) * cfg.mu ** 2 * cfg.nu ** 2, 1e-10,
                               params={"expected": "N(N-2) mu^2 nu^2"}))
    nu1 = unit_multiplier_nu(g, abs(cfg.mu))
    check = el_residual(ExtremalParams(abs(cfg.mu), nu1), g).lambda_fit
    reports.append(make_report("el.unit_multiplier", check, 1.0, 1e-6,
                               params={"mu": abs(cfg.mu), "nu": nu1}))
    return reports


def suite_spectral(cfg):
    g = cfg.geom
    reports = []
    for m in (0.0, 1.0):
        z = bessel_zero(m, 1)
        reports.append(make_report(f"spectral.zero[{m:g},1]", bessel_j(m, z), 0.0, 1e-10, relative=False,
                                   params={"z": z}))
    for k in (0, 1):
        G, ms = _timed(lambda: gram_matrix(g, k, 8))
        d = np.sqrt(np.diag(G))
        off = float(np.max(np.abs(G / np.outer(d, d) - np.eye(G.shape[0]))))
        reports.append(make_report(f"spectral.gram_offdiag[k={k}]", off, 0.0, 1e-8, relative=False,
                                   runtime_ms=ms, params={"N": g.N, "n_max": 8}))
    worst = max(eigen_ode_residual(eigenfunction(k, n, g.N, g.R), g) for k in (0, 1, 2) for n in (1, 2, 3))
    reports.append(make_report("spectral.eigen_ode", worst, 0.0, 1e-6, relative=False,
                               params={"k": [0, 1, 2], "n": [1, 2, 3]}))
    u = extremal_u(cfg.params, g)
    exp_, ms = _timed(lambda: expand_radial(u, g, 20))
    rel = math.sqrt(exp_.residuals[-1] / exp_.norm_sq)
    reports.append(make_report("spectral.reconstruction", rel, 0.0, 1e-2, relative=False, runtime_ms=ms,
                               params={"n_max": 20}))
    L_direct = boundary_term_L(u, g)
    L_series = boundary_prefactor(g) * exp_.boundary_limit()
    reports.append(make_report("spectral.L_consistency", L_series, L_direct, 0.02,
                               params={"n_max": 20}))
    return reports


def suite_mazya(cfg):
    g = cfg.geom
    N = g.N
    (B, (lo, hi)), ms = _timed(lambda: mazya_B(g, rule=cfg.rule))
    best = cm_constant(g) ** -0.5
    rep = make_report("mazya.B", B, (N / (N - 2)) ** (-(N - 2) / (2 * N)), 1e-10, runtime_ms=ms,
                      params={"N": N, "lower": lo, "upper": hi, "C_M^-1/2": best})
    rep2 = make_report("mazya.sandwich", float(lo <= best <= hi), 1.0, 0.0, relative=False,
                       params={"lower": lo, "upper": hi, "C_M^-1/2": best})
    return [rep, rep2]


def audit_records(geom):
    """Records of the two printed forms that do not match the computation."""
    N = geom.N
    S = sobolev_constant(geom)
    alt = sobolev_constant_alt_form(geom)
    recs = [make_report("audit.sobolev_two_forms", alt / S, 1.0, 1e-12, kind=AUDIT,
                        params={"N": N, "S": S, "alt_form": alt,
                                "explained_ratio": 4 / (N * (N - 2)),
                                "note": "alt form equals |S_N|^(2/N), missing the factor N(N-2)/4"})]
    for n in sorted({N, max(N, 4)}):
        g = GeometryContext(n, geom.R)
        rep = verify_norm_identity(t_log_power(g), extremal_v(ExtremalParams(), g), g, EQ_W_TO_D)
        p = rep.params
        recs.append(make_report(
            f"audit.w_to_d_reading[N={n}]", p["unsquared_ratio"], p["unsquared_predicted"], 1e-8, kind=AUDIT,
            params={"N": n, "ratio": "||v||_W / ||w||_D",
                    "unsquared_reading": p["unsquared_predicted"],
                    "squared_reading": p["squared_predicted_ratio"],
                    "squared_identity_mismatch": rep.computed}))
    return recs


def suite_full(cfg):
    g = cfg.geom
    reports = []
    reports += suite_constants(cfg)
    for fam in (WEIGHTED_HS, MAZYA_M, SOBOLEV_RADIAL, IHS_RADIAL, BLISS):
        reports += suite_quotient(cfg, fam)
    # lower bound over seeded admissible profiles
    for fam in (WEIGHTED_HS, MAZYA_M, IHS_RADIAL):
        spec = InequalitySpec(fam, g)
        best = spec.predicted_constant()
        worst = min(quotient_with_error(spec, p, cfg.rule)[0] for p in _seeded(cfg))
        rep = make_report(f"lower_bound.{fam}", worst, best, 0.0, params={"count": cfg.count})
        rep.passed = bool(worst >= best - 1e-7)
        reports.append(rep)
    ratios = [equivalence_check(g, p, rule=cfg.rule) for p in _seeded(cfg)]
    reports += ratios
    reports += suite_transform(cfg)
    reports += suite_el(cfg)
    reports += suite_spectral(cfg)
    reports += suite_mazya(cfg)
    reports += suite_minimize(cfg)[0]
    reports += audit_records(g)
    return reports


SUITES = {
    "constants": suite_constants,
    "quotient": suite_quotient,
    "transform-check": suite_transform,
    "el-residual": suite_el,
    "spectral": suite_spectral,
    "mazya-b": suite_mazya,
    "full-audit": suite_full,
}


# ----------------------------------------------------------------------------
# output

def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _float_repr(x):
    """17 significant digits; integral values keep a trailing '.0'."""
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def to_json(command, params, reports, passed):
    doc = _clean({"command": command, "params": params,
                  "reports": [r.as_dict() for r in reports], "pass": passed})
    enc = json.JSONEncoder(indent=2, sort_keys=True, allow_nan=False)
    # the stdlib encoder prints floats with repr(); use a fixed 17-digit form instead
    chunks = json.encoder._make_iterencode(
        {}, enc.default, json.encoder.encode_basestring_ascii, enc.indent, _float_repr,
        enc.key_separator, enc.item_separator, enc.sort_keys, enc.skipkeys, True)(doc, 0)
    return "".join(chunks) + "\n"


REPORT_COLUMNS = ("name", "kind", "computed", "predicted", "abs_err", "rel_err", "quad_err_est", "tol",
                  "passed", "runtime_ms")


def reports_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        d = r.as_dict()
        writer.writerow([d[c] if not isinstance(d[c], float) else _float_repr(d[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


def overall_pass(reports):
    return all(r.passed for r in reports if r.kind != AUDIT)


def execute(cfg):
    """Execute one command; returns ``(exit_code, text)``."""
    trace = None
    if cfg.command == "minimize":
        reports, trace = suite_minimize(cfg)
    else:
        reports = SUITES[cfg.command](cfg)
    passed = overall_pass(reports)
    if cfg.out_format == "csv":
        text = trace.trace_csv() if trace is not None else reports_csv(reports)
    else:
        text = to_json(cfg.command, cfg.as_dict(), reports, passed)
    return (EXIT_OK if passed else EXIT_FAIL), text


def main(argv=None, environ=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig(args, environ)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InvalidArgumentError as exc:
        parser.print_usage(sys.stderr)
        print(f"varineq: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


def run(cfg):
    """Execute one command and write its output; returns the exit code."""
    try:
        code, text = execute(cfg)
    except NumericalError as exc:
        print(f"varineq: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg.out_path:
        with open(cfg.out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
