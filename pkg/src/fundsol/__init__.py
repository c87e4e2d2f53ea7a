"""Explicit fundamental solutions for multipliers with ellipsoidal radial symmetry."""
from .errors import ConfigError, FundsolError, NumericFailure
from .rootsys import RadialFactorization, factor_radial
from .solop import (BumpSpec, PairingResult, PointMass, QuadOptions, SourceTerm, apply_p0, approximant_value,
                    e_q, e_q_derivs, factorize, pair_delta, pair_source, residual_R, trace_on_surface)
from .symbol import EllipsoidalFrame, SymbolSpec, eval_symbol, phi, radial_profile
from .testfn import TestFunction, apply_symbol, apply_transpose, gaussian

__version__ = "0.1.0"

__all__ = [
    "BumpSpec", "ConfigError", "EllipsoidalFrame", "FundsolError", "NumericFailure", "PairingResult",
    "PointMass", "QuadOptions", "RadialFactorization", "SourceTerm", "SymbolSpec", "TestFunction",
    "apply_p0", "apply_symbol", "apply_transpose", "approximant_value", "e_q", "e_q_derivs", "eval_symbol",
    "factor_radial", "factorize", "gaussian", "pair_delta", "pair_source", "phi", "radial_profile",
    "residual_R", "trace_on_surface",
]
