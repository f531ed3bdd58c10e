"""Numerical verification toolkit for Hardy-Sobolev type inequalities with
logarithmic weights: constants, quotients, transforms, minimization,
spectral expansions and Euler-Lagrange residuals."""

from .errors import (AccuracyError, CrossCheckError, DivergenceError, InconsistencyError,
                     InvalidArgumentError, InvalidStateError, LimitError, NumericalError,
                     SearchError, VarineqError)
from .profiles import (BlissParams, ExtremalParams, GeometryContext, RadialProfile, bliss_constant,
                       chs_constant, cm_constant, sobolev_constant)
from .report import VerificationReport, make_report

__version__ = "0.1.0"
