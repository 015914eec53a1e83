"""Numerical experiments on oscillatory integral operators with cubic phase.

The operator is ``T f(u, v) = int e^{i lam S(u, v, t)} Phi(u, v, t) f(t) dt``
with ``S = P1(u, v) t**2 + P2(u, v) t``.  Submodules:

``phase``      forms, classification, normal-form reduction
``quadrature`` composite Gauss-Legendre evaluation of ``T f``
``testfn``     plateau bumps and the lower-bound witness ``f_lam``
``normest``    operator norms and Rayleigh quotients
``decayfit``   lambda sweeps and power-law fits
``cli``        command-line front end
"""

from .errors import NonConvergenceError, NonFiniteError, NumericalError, ValidationError
from .phase import (
    LinearForm,
    PhaseClass,
    PhaseSpec,
    QuadraticForm,
    case_b,
    case_c,
    classify,
    discriminant,
    divides,
    eval_phase,
    hyperbolic,
    make_spec,
    reduce_to_normal_form,
)
from .quadrature import Amplitude, QuadConfig, SampledFunction, apply_operator, gl_panel, oscillatory_integral, panel_count
from .testfn import BumpSpec, ExtremalParams, calibrate_epsilon, l2_norm, make_bump, make_extremal
from .normest import (
    DiscreteOperator,
    NormResult,
    UVGrid,
    build_uv_grid,
    discretize,
    estimate_norm,
    gram_operator,
    operator_norm,
    rayleigh_quotient,
    witness_chain,
)
from .decayfit import DecayFit, SweepRow, fit_power_law, sweep

__version__ = "0.1.0"

__all__ = [
    "NonConvergenceError",
    "NonFiniteError",
    "NumericalError",
    "ValidationError",
    "LinearForm",
    "PhaseClass",
    "PhaseSpec",
    "QuadraticForm",
    "case_b",
    "case_c",
    "classify",
    "discriminant",
    "divides",
    "eval_phase",
    "hyperbolic",
    "make_spec",
    "reduce_to_normal_form",
    "Amplitude",
    "QuadConfig",
    "SampledFunction",
    "apply_operator",
    "gl_panel",
    "oscillatory_integral",
    "panel_count",
    "BumpSpec",
    "ExtremalParams",
    "calibrate_epsilon",
    "l2_norm",
    "make_bump",
    "make_extremal",
    "DiscreteOperator",
    "NormResult",
    "UVGrid",
    "build_uv_grid",
    "discretize",
    "estimate_norm",
    "gram_operator",
    "operator_norm",
    "rayleigh_quotient",
    "witness_chain",
    "DecayFit",
    "SweepRow",
    "fit_power_law",
    "sweep",
]
