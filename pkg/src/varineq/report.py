"""Structured verification results."""

import math
from dataclasses import asdict, dataclass, field

CHECK = "check"
AUDIT = "audit"


@dataclass
class VerificationReport:
    name: str
    computed: float
    predicted: float
    abs_err: float
    rel_err: float
    quad_err_est: float = 0.0
    params: dict = field(default_factory=dict)
    runtime_ms: float = 0.0
    tol: float = 0.0
    passed: bool = True
    kind: str = CHECK

    def as_dict(self):
        return asdict(self)


def make_report(name, computed, predicted, tol, quad_err_est=0.0, params=None,
                runtime_ms=0.0, relative=True, kind=CHECK):
    """Build a report; passes when the relative (or absolute) error is within ``tol``."""
    computed = float(computed)
    predicted = float(predicted)
    abs_err = abs(computed - predicted)
    rel_err = abs_err / abs(predicted) if predicted != 0 else abs_err
    measure = rel_err if relative else abs_err
    passed = bool(math.isfinite(measure) and measure <= tol)
    return VerificationReport(
        name=name,
        computed=computed,
        predicted=predicted,
        abs_err=abs_err,
        rel_err=rel_err,
        quad_err_est=float(quad_err_est),
        params=dict(params or {}),
        runtime_ms=float(runtime_ms),
        tol=float(tol),
        passed=passed,
        kind=kind,
    )
