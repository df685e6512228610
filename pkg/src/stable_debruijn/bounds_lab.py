"""Concrete constants for the domination argument, and grid certificates.

For eta in a window (b, 2b) the dispersion derivative of p_eta is bounded by

    |d p_eta/d eta (t)| <= (1/alpha) eta^(-1-1/alpha) p_N(u) + (1/alpha) |t| eta^(-1-2/alpha) |p_N'(u)|

with u = t / eta^(1/alpha).  Near the origin the two terms are bounded by
A(b) and B(b)|t| using max p_N and the uniform derivative bound; for
|t| >= t0 by (k + kappa_1) / (alpha |t|^(1+alpha)), which the lower tail
constant K converts into a multiple C of p_N(t).  None of these constants
has a closed form here: k, kappa_1 and K are grid fits, inflated (upper) or
deflated (lower) by a safety margin, and every derived bound is checked on
explicit grids.  Reports say "certified on grid", never "proven".
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .mixture import MixtureModel, mixture_pdf
from .quadrature import composite_rule, geometric_breakpoints
from .reports import CertificateReport, ratio_report
from .source_dist import SourceDistribution, median_radius
from .specfun import gamma, global_deriv_bound
from .stable_core import (QuadratureConfig, StableModel, TailFitError, dispersion_deriv,
                          max_density, stable_pdf, stable_pdf_deriv,
                          stable_tail_mass)

SAFETY = 0.05
DOMINATION_TOL = 1e-9
LOWER_FIT_THRESHOLD = 2.5


class ParameterError(ValueError):
    """Inconsistent bound parameters (e.g. t0 inside the tail-fit window)."""


@dataclass(frozen=True)
class DispersionWindow:
    """All certified statements quantify over eta in the open interval (b, 2b)."""

    b: float

    def __post_init__(self):
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ParameterError(f"window endpoint b must be positive, got {self.b!r}")

    @classmethod
    def around(cls, eta: float) -> "DispersionWindow":
        """Window with eta at 1.5 b, the midpoint of (b, 2b)."""
        return cls(eta / 1.5)

    def contains(self, eta: float) -> bool:
        return self.b < eta < 2.0 * self.b

    def eta_grid(self, n: int = 8) -> np.ndarray:
        """``n`` equally spaced interior points of (b, 2b)."""
        return self.b * (1.0 + np.arange(1, n + 1) / (n + 1))


@dataclass(frozen=True)
class TailConstants:
    """Admissible tail constants for p_N on |u| >= T.

    k, kappa_1 are upper constants (p_N(u) <= k/|u|^(1+a),
    |p_N'(u)| <= kappa_1/|u|^(2+a)); K is the lower constant
    (p_N(u) >= K/|u|^(1+a)).  K_tilde_base = K / (2 * 2^(1/a)) is the part of the
    q_eta lower-bound constant that does not depend on the source.
    """

    alpha: float
    k: float
    kappa_1: float
    K: float
    T: float
    u_hi: float
    k_fit: float
    kappa_1_fit: float
    K_fit: float
    safety: float

    @property
    def K_tilde_base(self) -> float:
        return self.K / (2.0 * 2.0 ** (1.0 / self.alpha))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["K_tilde_base"] = self.K_tilde_base
        return d


@functools.lru_cache(maxsize=128)
def fit_tail_constants(alpha: float, u_lo: float = 50.0, u_hi: float = 500.0,
                       n_points: int = 200, safety: float = SAFETY,
                       config: QuadratureConfig | None = None) -> TailConstants:
    """Fit k, kappa_1 (grid max) and K (grid min) of the tail products on [u_lo, u_hi]."""
    if not 0.0 < u_lo < u_hi:
        raise ParameterError("need 0 < u_lo < u_hi")
    u = np.geomspace(u_lo, u_hi, n_points)
    p0 = stable_pdf_deriv(alpha, 0, u, config)
    p1 = stable_pdf_deriv(alpha, 1, u, config)
    if np.any(p0 < 1e-300) or np.any(np.abs(p1) < 1e-300):
        raise TailFitError(f"density underflows on [{u_lo}, {u_hi}]; widen the window")
    prod0 = p0 * u ** (1.0 + alpha)
    prod1 = np.abs(p1) * u ** (2.0 + alpha)
    k_fit, K_fit, kap_fit = float(prod0.max()), float(prod0.min()), float(prod1.max())
    return TailConstants(alpha, k_fit * (1 + safety), kap_fit * (1 + safety), K_fit * (1 - safety),
                         float(u_lo), float(u_hi), k_fit, kap_fit, K_fit, safety)


@dataclass(frozen=True)
class EnvelopeSpec:
    """s_b(t) = A + B|t| for |t| <= t0 and C p_N(t) for |t| >= t0."""

    alpha: float
    A: float
    B: float
    C: float
    t0: float
    window: DispersionWindow
    tails: TailConstants

    def __post_init__(self):
        for name in ("A", "B", "C", "t0"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"envelope constant {name} must be positive")

    def value(self, t, config: QuadratureConfig | None = None):
        t = np.asarray(t, dtype=float)
        at = np.abs(t)
        out = self.A + self.B * at
        far = at >= self.t0
        if np.any(far):
            out = np.where(far, 0.0, out)
            out[far] = self.C * stable_pdf(self.alpha, at[far], config)
        return float(out) if out.ndim == 0 else out

    def constants(self) -> dict:
        return {"alpha": self.alpha, "b": self.window.b, "A": self.A, "B": self.B,
                "C": self.C, "t0": self.t0, **{f"tail_{k}": v for k, v in self.tails.as_dict().items()
                                               if k != "alpha"}}


def envelope_A(alpha: float, b: float, config: QuadratureConfig | None = None) -> float:
    return max_density(alpha, config) / (alpha * b ** (1.0 + 1.0 / alpha))


def envelope_B(alpha: float, b: float) -> float:
    return gamma(2.0 / alpha) / (math.pi * alpha ** 2 * b ** (1.0 + 2.0 / alpha))


def min_t0(alpha: float, window: DispersionWindow, tails: TailConstants) -> float:
    """Smallest crossover for which both tail fits apply at every eta < 2b."""
    return tails.T * (2.0 * window.b) ** (1.0 / alpha)


def build_envelope(alpha: float, window: DispersionWindow, t0: float | None = None,
                   tails: TailConstants | None = None,
                   config: QuadratureConfig | None = None) -> EnvelopeSpec:
    """Assemble s_b from the compact-set and tail bounds."""
    tails = tails or fit_tail_constants(alpha, config=config)
    lo = min_t0(alpha, window, tails)
    if t0 is None:
        t0 = max(50.0, lo)
    if t0 < lo * (1.0 - 1e-12):
        raise ParameterError(f"t0={t0} lies inside the tail-fit window; need t0 >= {lo}")
    A = envelope_A(alpha, window.b, config)
    B = envelope_B(alpha, window.b)
    C = (tails.k + tails.kappa_1) / (alpha * tails.K)
    return EnvelopeSpec(alpha, A, B, C, float(t0), window, tails)


def default_t_grid(t_max: float = 200.0, step: float = 0.1, tail_max: float = 1e4,
                   n_tail: int = 200) -> np.ndarray:
    """Symmetric grid: uniform step on [-t_max, t_max] plus log-spaced tails."""
    core = np.round(np.arange(-round(t_max / step), round(t_max / step) + 1) * step, 12)
    tail = np.geomspace(t_max, tail_max, n_tail)[1:]
    return np.concatenate([-tail[::-1], core, tail])


def certify_domination(alpha: float, spec: EnvelopeSpec, eta_grid=None, t_grid=None,
                       config: QuadratureConfig | None = None) -> CertificateReport:
    """Check |d p_eta/d eta (t)| <= s_b(t) (1 + 1e-9) over eta_grid x t_grid."""
    eta_grid = spec.window.eta_grid() if eta_grid is None else np.asarray(eta_grid, dtype=float)
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(eta_grid <= spec.window.b * (1 - 1e-15)) or np.any(eta_grid > 2 * spec.window.b):
        raise ParameterError("eta grid must lie in the closed window [b, 2b]")
    env = spec.value(t_grid, config)
    lhs = np.vstack([np.abs(dispersion_deriv(StableModel(alpha, e), t_grid, config)) for e in eta_grid])
    rhs = np.broadcast_to(env, lhs.shape)
    E, T = np.meshgrid(eta_grid, t_grid, indexing="ij")
    grid = {"eta": [float(e) for e in eta_grid], "t_min": float(t_grid.min()),
            "t_max": float(t_grid.max()), "n_t": int(len(t_grid))}
    return ratio_report("eq:deff", lhs, rhs, {"eta": E, "t": T}, grid, spec.constants(),
                        DOMINATION_TOL)


def certify_partial_bounds(alpha: float, spec: EnvelopeSpec, eta_grid=None, t_grid=None,
                           config: QuadratureConfig | None = None) -> list[CertificateReport]:
    """The triangle bound on |dp_eta/deta| and its four compact/tail pieces."""
    eta_grid = spec.window.eta_grid() if eta_grid is None else np.asarray(eta_grid, dtype=float)
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    tails = spec.tails
    E, T = np.meshgrid(eta_grid, t_grid, indexing="ij")
    S = E ** (1.0 / alpha)
    U = T / S
    p0 = stable_pdf_deriv(alpha, 0, U, config)
    p1 = stable_pdf_deriv(alpha, 1, U, config)
    term1 = p0 / (alpha * E ** (1.0 + 1.0 / alpha))
    term2 = np.abs(T) * np.abs(p1) / (alpha * E ** (1.0 + 2.0 / alpha))
    deriv = np.abs(-(p0 + U * p1) / (alpha * E * S))
    far = np.abs(T) >= spec.t0
    at = np.where(far, np.abs(T), 1.0)
    grid = {"eta": [float(e) for e in eta_grid], "t_min": float(t_grid.min()),
            "t_max": float(t_grid.max()), "n_t": int(len(t_grid)), "t0": spec.t0}
    consts = spec.constants()
    pts = {"eta": E, "t": T}
    tol = DOMINATION_TOL
    reports = [
        ratio_report("eq:deriv", deriv, term1 + term2, pts, grid, consts, tol),
        ratio_report("eq:firstcom", term1, np.full_like(term1, spec.A), pts, grid, consts, tol),
        ratio_report("eq:secondcom", term2, spec.B * np.abs(T) + (T == 0), pts, grid, consts, tol),
    ]
    fp = {"eta": E[far], "t": T[far]}
    reports.append(ratio_report("eq:firsth", term1[far],
                                tails.k / (alpha * at[far] ** (1 + alpha)), fp, grid, consts, tol))
    reports.append(ratio_report("eq:secondh", term2[far],
                                tails.kappa_1 / (alpha * at[far] ** (1 + alpha)), fp, grid, consts, tol))
    return reports


def certify_global_deriv_bound(alpha: float, n: int, u_grid=None,
                               config: QuadratureConfig | None = None) -> CertificateReport:
    """Grid max of |d^n p_N/du^n| against Gamma((n+1)/alpha)/(pi alpha)."""
    if u_grid is None:
        u_grid = np.round(np.arange(-2000, 2001) * 0.05, 12)
    u_grid = np.asarray(u_grid, dtype=float)
    vals = np.abs(stable_pdf_deriv(alpha, n, u_grid, config))
    bound = global_deriv_bound(alpha, n)
    grid = {"u_min": float(u_grid.min()), "u_max": float(u_grid.max()), "n_u": int(len(u_grid)),
            "n": int(n)}
    return ratio_report("eq:uppcons", vals, np.full_like(vals, bound), {"u": u_grid}, grid,
                        {"alpha": alpha, "n": int(n), "bound": bound}, DOMINATION_TOL)


def _tail_log_integral(alpha: float, t0: float, config=None) -> float:
    """int_t0^inf ln(1+t) p_N(t) dt: log-spaced panels plus the leading-term remainder."""
    top = t0 * 1e12
    rule = composite_rule(geometric_breakpoints(t0, top, 2.0))
    body, _ = rule.integrate(np.log1p(rule.nodes) * stable_pdf(alpha, rule.nodes, config))
    c1 = gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2.0) / math.pi
    rem = c1 * top ** (-alpha) * (math.log(top) / alpha + 1.0 / alpha ** 2)
    return body + rem


def envelope_integrals(spec: EnvelopeSpec, config: QuadratureConfig | None = None) -> tuple[float, float]:
    """(S_b, L_b): integrals of s_b and of ln(1+|t|) s_b over the real line."""
    A, B, C, t0, a = spec.A, spec.B, spec.C, spec.t0, spec.alpha
    central = 2.0 * (A * t0 + B * t0 ** 2 / 2.0)
    S_b = central + 2.0 * C * stable_tail_mass(a, t0, config)
    lg = math.log1p(t0)
    int_log = (1.0 + t0) * lg - t0
    int_tlog = 0.5 * (t0 ** 2 - 1.0) * lg - t0 ** 2 / 4.0 + t0 / 2.0
    L_b = 2.0 * (A * int_log + B * int_tlog) + 2.0 * C * _tail_log_integral(a, t0, config)
    return S_b, L_b


def envelope_central_mass(spec: EnvelopeSpec) -> float:
    return 2.0 * (spec.A * spec.t0 + spec.B * spec.t0 ** 2 / 2.0)


@dataclass(frozen=True)
class LowerChain:
    """Constants of the q_eta lower bound q >= b K_tilde / |y|^(1+alpha)."""

    median_radius: float
    y_min: float
    ratio_factor: float
    K_tilde: float
    y_floor: float


def lower_chain(alpha: float, window: DispersionWindow, source: SourceDistribution,
                tails: TailConstants) -> LowerChain:
    """K_tilde = K / (2 2^(1/alpha)) * (y_min / (y_min + y~))^(1+alpha), y_min = 10 y~."""
    yt = median_radius(source)
    y_min = 10.0 * yt
    factor = (y_min / (y_min + yt)) ** (1.0 + alpha)
    y_floor = max(tails.T * (2.0 * window.b) ** (1.0 / alpha) + yt, y_min)
    return LowerChain(yt, y_min, factor, tails.K_tilde_base * factor, y_floor)


def lower_tail_constants(alpha: float, config: QuadratureConfig | None = None) -> TailConstants:
    return fit_tail_constants(alpha, LOWER_FIT_THRESHOLD, 1e4, 400, config=config)


def q_lower_bound_check(alpha: float, window: DispersionWindow, source: SourceDistribution,
                        y_grid, eta_grid=None, tails: TailConstants | None = None,
                        config: QuadratureConfig | None = None) -> CertificateReport:
    """Check q_eta(+-y) >= b K_tilde / |y|^(1+alpha) for eta in the window.

    The report ratio is bound / q, so it must stay <= 1.
    """
    tails = tails or lower_tail_constants(alpha, config)
    chain = lower_chain(alpha, window, source, tails)
    y_grid = np.abs(np.asarray(y_grid, dtype=float))
    if np.min(y_grid) < chain.y_floor * (1 - 1e-12):
        raise ParameterError(f"y grid must start beyond {chain.y_floor:.6g} "
                             "(tail threshold and ten median radii)")
    eta_grid = window.eta_grid() if eta_grid is None else np.asarray(eta_grid, dtype=float)
    ys = np.concatenate([-y_grid[::-1], y_grid])
    q = np.vstack([mixture_pdf(MixtureModel(StableModel(alpha, e), source), ys, config)
                   for e in eta_grid])
    bound = window.b * chain.K_tilde / np.abs(ys) ** (1.0 + alpha)
    E, Y = np.meshgrid(eta_grid, ys, indexing="ij")
    grid = {"eta": [float(e) for e in eta_grid], "y_min": float(y_grid.min()),
            "y_max": float(y_grid.max()), "n_y": int(len(y_grid)), "signs": "both"}
    consts = {"alpha": alpha, "b": window.b, "K": tails.K, "T": tails.T,
              "K_tilde": chain.K_tilde, "median_radius": chain.median_radius,
              "y_min_ratio_bound": chain.y_min, "ratio_factor": chain.ratio_factor}
    rep = ratio_report("q-lower-chain", np.broadcast_to(bound, q.shape), q,
                       {"eta": E, "y": Y}, grid, consts, 0.0, keep_rows=True)
    return rep


__all__ = [
    "ParameterError", "DispersionWindow", "TailConstants", "EnvelopeSpec", "LowerChain",
    "fit_tail_constants", "build_envelope", "certify_domination", "certify_partial_bounds",
    "certify_global_deriv_bound", "envelope_integrals", "envelope_central_mass",
    "envelope_A", "envelope_B", "q_lower_bound_check", "lower_chain", "lower_tail_constants",
    "default_t_grid", "min_t0", "SAFETY", "DOMINATION_TOL",
]
