"""Integral transforms for products of Slater orbitals, multi-orbital
amplitudes, and closed forms for Macdonald-function integrals."""
from .errors import (BesselUnderflowWarning, BranchWarning, ConsistencyError,
                     DivergentParameterError, DomainError)
from .quadrature import EvalResult, QuadraturePlan, integrate_1d, integrate_nd
from .specfun import bessel_k, bessel_k_scaled, gamma_exp_integral, hermite
from .amplitudes import (AmplitudeSpec, PipelineRoute, evaluate, s2_closed, s3_closed,
                         s4_closed)

__all__ = [
    "BesselUnderflowWarning", "BranchWarning", "ConsistencyError", "DivergentParameterError",
    "DomainError", "EvalResult", "QuadraturePlan", "integrate_1d", "integrate_nd", "bessel_k",
    "bessel_k_scaled", "gamma_exp_integral", "hermite", "AmplitudeSpec", "PipelineRoute",
    "evaluate", "s2_closed", "s3_closed", "s4_closed",
]
__version__ = "0.1.0"
