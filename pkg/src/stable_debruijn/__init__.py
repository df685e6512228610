"""Numerical companion for the de Bruijn-type identity under symmetric alpha-stable noise.

Densities of the symmetric stable law and their derivatives, certified
dominating envelopes, entropy of X + eta^(1/alpha) N and its dispersion
derivative, and a Monte Carlo cross-check.
"""

from .bounds_lab import (DispersionWindow, EnvelopeSpec, ParameterError, TailConstants,
                         build_envelope, certify_domination, envelope_integrals,
                         fit_tail_constants, q_lower_bound_check)
from .entropy import (DeBruijnReport, EntropyReport, entropy, entropy_dispersion_deriv_identity,
                      fractional_fisher_J, integrability_check, r_b)
from .mixture import MixtureModel, mixture_pdf, mixture_pdf_dispersion_deriv
from .reports import CertificateReport
from .sampling_mc import histogram_check, mc_entropy, sample_stable
from .source_dist import SourceDistribution, log_moment, median_radius
from .specfun import gamma, global_deriv_bound, log_gamma
from .stable_core import (ConvergenceError, QuadratureConfig, StableModel, dispersion_deriv,
                          scaled_pdf, stable_pdf, stable_pdf_deriv, tail_asymptote)

__all__ = [
    "DispersionWindow", "EnvelopeSpec", "ParameterError", "TailConstants", "build_envelope",
    "certify_domination", "envelope_integrals", "fit_tail_constants", "q_lower_bound_check",
    "DeBruijnReport", "EntropyReport", "entropy", "entropy_dispersion_deriv_identity",
    "fractional_fisher_J", "integrability_check", "r_b", "MixtureModel", "mixture_pdf",
    "mixture_pdf_dispersion_deriv", "CertificateReport", "histogram_check", "mc_entropy",
    "sample_stable", "SourceDistribution", "log_moment", "median_radius", "gamma",
    "global_deriv_bound", "log_gamma", "ConvergenceError", "QuadratureConfig", "StableModel",
    "dispersion_deriv", "scaled_pdf", "stable_pdf", "stable_pdf_deriv", "tail_asymptote",
]

__version__ = "0.1.0"
