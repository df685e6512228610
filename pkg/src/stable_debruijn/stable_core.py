"""Symmetric alpha-stable densities and their derivatives.

The standard law N has characteristic function exp(-|w|^alpha).  Its n-th
derivative is evaluated by Fourier inversion,

    d^n p_N/du^n (u) = (1/pi) int_0^inf w^n exp(-w^alpha) cos(w u + n pi/2) dw,

on panels no wider than half a period of the cosine, and, for |u| beyond a
per-(alpha, n) switch radius, by the Bergstrom expansion in powers of
|u|^-alpha.  The switch radius is the smallest |u| at which the truncated
expansion is accurate to about 1e-14 relative to its leading term, so the two
evaluators agree at the seam to near machine precision.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import composite_rule, geometric_breakpoints
from .specfun import global_deriv_bound, log_gamma_array

MAX_DERIV_ORDER = 4
_SERIES_TOL = 1e-14
_SERIES_KMAX = 400
_SERIES_RADIUS_CAP = 2.0e3
_ORIGIN_MASS = 1e-18
_MATRIX_CHUNK = 2_000_000
_TABLE_DEGREE = 20
_TABLE_MAX_PANELS = 1024


class ConvergenceError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class TailFitError(ValueError):
    """The density underflows on the requested fit window."""


@dataclass(frozen=True)
class StableModel:
    """Symmetric stable law with exponent ``alpha`` and dispersion ``eta``.

    The eta = 1 member has characteristic function exp(-|w|^alpha); a general
    member is that law scaled by eta**(1/alpha).
    """

    alpha: float
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha!r}")
        if not (self.eta > 0.0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be positive and finite, got {self.eta!r}")

    @property
    def scale(self) -> float:
        return self.eta ** (1.0 / self.alpha)

    def with_eta(self, eta: float) -> "StableModel":
        return StableModel(self.alpha, eta)


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_panels: int = 100_000
    freq_cutoff_eps: float = 1e-16
    # None selects the automatic per-(alpha, n) radius.
    tail_switch_radius: float | None = None
    cauchy_fast_path: bool = True
    # Chebyshev table for |u| < radius, validated against the direct quadrature
    core_table: bool = True

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "freq_cutoff_eps"):
            val = getattr(self, name)
            if not (val > 0.0 and math.isfinite(val)):
                raise ValueError(f"{name} must be positive, got {val!r}")
        if int(self.max_panels) != self.max_panels or self.max_panels < 16:
            raise ValueError(f"max_panels must be an integer >= 16, got {self.max_panels!r}")
        if self.tail_switch_radius is not None and not self.tail_switch_radius > 0.0:
            raise ValueError("tail_switch_radius must be positive when given")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class TailReport:
    alpha: float
    n: int
    slope: float
    intercept: float
    expected_slope: float
    window: tuple[float, float]

    @property
    def slope_error(self) -> float:
        return abs(self.slope - self.expected_slope)


@dataclass
class EvalInfo:
    """Diagnostics from a density evaluation."""

    error_estimate: np.ndarray
    clamped: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    used_series: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def any_clamped(self) -> bool:
        return bool(np.any(self.clamped))


def _check_order(n):
    if int(n) != n or not 0 <= n <= MAX_DERIV_ORDER:
        raise ValueError(f"derivative order must be an integer in 0..{MAX_DERIV_ORDER}, got {n!r}")
    return int(n)


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    return alpha


# ---------------------------------------------------------------------------
# asymptotic expansion


@dataclass(frozen=True)
class SeriesPlan:
    """Truncated expansion p^(n)(x) = x^(-1-n) sum_k coeffs[k-1] x^(-alpha k), x > 0."""

    alpha: float
    n: int
    radius: float
    coeffs: np.ndarray
    # bound on the truncation error relative to the leading term at ``radius``
    rel_error: float

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        z = x ** (-self.alpha)
        acc = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            acc = (acc + c) * z
        return acc * x ** (-1.0 - self.n)

    def tail_mass(self, x: float) -> float:
        """int_x^inf p_N for n = 0, termwise."""
        if self.n != 0:
            raise ValueError("tail mass only defined for the density itself")
        k = np.arange(1, self.n_terms + 1)
        terms = self.coeffs * x ** (-self.alpha * k) / (self.alpha * k)
        return float(math.fsum(terms))


def _series_log_magnitudes(alpha, n, kmax):
    k = np.arange(1, kmax + 1, dtype=float)
    return k, log_gamma_array(alpha * k + n + 1.0) - log_gamma_array(k + 1.0) - math.log(math.pi)


def _series_coeffs(alpha, n, K):
    k, logmag = _series_log_magnitudes(alpha, n, K)
    sign_k = np.where(k.astype(int) % 2 == 1, 1.0, -1.0)
    return (-1.0) ** n * sign_k * np.sin(k * math.pi * alpha / 2.0) * np.exp(logmag)


def _truncation_at(alpha, n, x, logmag, k):
    """Smallest usable term count at x, or None when x is too close to 0."""
    logx = math.log(x)
    loga = logmag - alpha * k * logx  # the common x^(-1-n) factor is dropped
    lead = loga[0] + math.log(abs(math.sin(math.pi * alpha / 2.0)))
    small = loga[1:] <= lead + math.log(_SERIES_TOL)
    decreasing = np.append(loga[2:] <= loga[1:-1], True)
    ok = np.nonzero(small & decreasing)[0]
    if len(ok) == 0:
        return None
    K = int(ok[0]) + 1
    # Horner roundoff ~ eps * sum of term magnitudes
    cancel = np.logaddexp.reduce(loga[:K]) + math.log(4 * np.finfo(float).eps)
    if cancel > lead + math.log(_SERIES_TOL):
        return None
    return K, float(math.exp(loga[K] - lead))


@functools.lru_cache(maxsize=256)
def series_plan(alpha: float, n: int, radius: float | None = None) -> SeriesPlan:
    """Choose switch radius and term count for the expansion of p^(n)."""
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    k, logmag = _series_log_magnitudes(alpha, n, _SERIES_KMAX)
    if radius is not None:
        logx = math.log(radius)
        loga = logmag - alpha * k * logx
        lead = loga[0] + math.log(abs(math.sin(math.pi * alpha / 2.0)))
        usable = np.nonzero(logmag[1:] < 700.0)[0]
        K = int(np.argmin(loga[1:][usable])) + 1
        small = np.nonzero(loga[1:K + 1] <= lead + math.log(0.1 * _SERIES_TOL))[0]
        if len(small):
            K = int(small[0]) + 1
        return SeriesPlan(alpha, n, float(radius), _series_coeffs(alpha, n, K),
                          float(math.exp(loga[K] - lead)))
    grid = np.exp(np.linspace(math.log(0.05), math.log(_SERIES_RADIUS_CAP), 500))
    feasible = [_truncation_at(alpha, n, x, logmag, k) for x in grid]
    ok = np.array([f is not None for f in feasible])
    if not ok[-1]:
        return SeriesPlan(alpha, n, math.inf, np.zeros(1), math.inf)
    bad = np.nonzero(~ok)[0]
    first = 0 if len(bad) == 0 else int(bad[-1]) + 1
    K, rel = feasible[first]
    return SeriesPlan(alpha, n, float(grid[first]), _series_coeffs(alpha, n, K), rel)


# ---------------------------------------------------------------------------
# Fourier inversion


def frequency_cutoff(alpha: float, n: int, eps: float) -> float:
    """Omega with Omega^n exp(-Omega^alpha) = eps, beyond the integrand's peak."""
    L = -math.log(eps)
    s = L
    for _ in range(60):
        s_new = L + (n / alpha) * math.log(max(s, 1e-300))
        if abs(s_new - s) < 1e-13 * s:
            s = s_new
            break
        s = s_new
    s = max(s, n / alpha)
    return s ** (1.0 / alpha)


@dataclass(frozen=True)
class _FourierRule:
    nodes: np.ndarray
    amp: np.ndarray       # Kronrod weight * w^n exp(-w^alpha) / pi
    amp_gap: np.ndarray   # (Kronrod - Gauss) weight * same
    n_panels: int
    truncation: float


@functools.lru_cache(maxsize=512)
def _fourier_rule(alpha: float, n: int, eps: float, u_max: float, max_panels: int) -> _FourierRule:
    omega = frequency_cutoff(alpha, n, eps)
    width = omega / 24.0
    half_period = math.pi / u_max if u_max > 0 else math.inf
    if half_period < width:
        # breakpoints on the zeros of cos(w u_max + n pi/2)
        offset = ((1 - n) * math.pi / 2.0) % math.pi
        first = offset / u_max if offset > 0 else half_period
        n_zero = int(math.floor((omega - first) / half_period)) + 1
        zeros = first + half_period * np.arange(n_zero)
        zeros = zeros[zeros < omega]
        outer = np.append(zeros, omega)
    else:
        first = width
        outer = np.linspace(width, omega, int(round(omega / width)))
    a_min = (_ORIGIN_MASS * (n + 1)) ** (1.0 / (n + 1))
    a_min = min(a_min, first / 4.0)
    graded = geometric_breakpoints(a_min, first)
    bp = np.concatenate([[0.0], graded[:-1], outer])
    if len(bp) - 1 > max_panels:
        raise ConvergenceError(f"Fourier rule needs {len(bp) - 1} panels > max_panels={max_panels}",
                               math.inf)
    rule = composite_rule(bp)
    w = rule.nodes
    kernel = w ** n * np.exp(-w ** alpha) / math.pi
    truncation = eps * omega ** (1.0 - alpha) / (alpha * math.pi)
    return _FourierRule(w, rule.weights * kernel, (rule.weights - rule.gauss_weights) * kernel,
                        rule.n_panels, truncation)


def _phase(n, arg):
    m = n % 4
    if m == 0:
        return np.cos(arg)
    if m == 1:
        return -np.sin(arg)
    if m == 2:
        return -np.cos(arg)
    return np.sin(arg)


def _fourier_eval(alpha, n, x, u_max, config):
    rule = _fourier_rule(alpha, n, config.freq_cutoff_eps, float(u_max), int(config.max_panels))
    out = np.empty_like(x)
    err = np.empty_like(x)
    m = len(rule.nodes)
    step = max(1, _MATRIX_CHUNK // m)
    for start in range(0, len(x), step):
        xs = x[start:start + step]
        osc = _phase(n, np.outer(xs, rule.nodes))
        out[start:start + step] = osc @ rule.amp
        gap = (osc * rule.amp_gap).reshape(len(xs), rule.n_panels, 21).sum(axis=2)
        err[start:start + step] = np.abs(gap).sum(axis=1) + rule.truncation
    return out, err


def _quadrature_region(alpha, n, x, radius, config):
    """Evaluate at 0 <= x < radius, grouping points by octave below the radius."""
    out = np.empty_like(x)
    err = np.empty_like(x)
    omega = frequency_cutoff(alpha, n, config.freq_cutoff_eps)
    ref = radius if math.isfinite(radius) else max(float(np.max(x)), 1.0)
    # below this octave the half period exceeds the base panel width
    j_flat = max(0, int(math.ceil(math.log2(max(ref * omega / (24.0 * math.pi), 1.0)))))
    with np.errstate(divide="ignore"):
        octave = np.where(x > 0, np.floor(np.log2(ref / np.maximum(x, 1e-300))), j_flat)
    octave = np.clip(octave, 0, j_flat).astype(int)
    for j in np.unique(octave):
        sel = octave == j
        u_max = 0.0 if j == j_flat else ref * 2.0 ** (-j)
        out[sel], err[sel] = _fourier_eval(alpha, n, x[sel], u_max, config)
    return out, err


@dataclass(frozen=True)
class _CoreTable:
    width: float
    coeffs: np.ndarray   # (panels, degree) Chebyshev coefficients
    error: float         # validation error plus node quadrature error

    def __call__(self, x):
        idx = np.minimum((x / self.width).astype(int), self.coeffs.shape[0] - 1)
        t = 2.0 * (x - idx * self.width) / self.width - 1.0
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for k in range(self.coeffs.shape[1] - 1, 0, -1):
            b1, b2 = self.coeffs[idx, k] + 2.0 * t * b1 - b2, b1
        return self.coeffs[idx, 0] + t * b1 - b2


@functools.lru_cache(maxsize=256)
def _core_table(alpha: float, n: int, radius: float, config: "QuadratureConfig") -> _CoreTable | None:
    """Piecewise Chebyshev interpolant of the quadrature values on [0, radius].

    Panels are doubled until the interpolant matches fresh quadrature values
    between the nodes; None when that needs more than _TABLE_MAX_PANELS.
    """
    deg = _TABLE_DEGREE
    theta = np.pi * (np.arange(deg) + 0.5) / deg
    nodes = np.cos(theta)
    basis = np.cos(np.outer(np.arange(deg), theta))
    probe = np.array([-0.97, -0.61, -0.23, 0.11, 0.52, 0.89])
    panels = 16
    while panels <= _TABLE_MAX_PANELS:
        h = radius / panels
        left = np.arange(panels) * h
        x = (left[:, None] + 0.5 * h * (nodes + 1.0)).ravel()
        vals, err = _quadrature_region(alpha, n, x, radius, config)
        coeffs = (2.0 / deg) * vals.reshape(panels, deg) @ basis.T
        coeffs[:, 0] *= 0.5
        table = _CoreTable(h, coeffs, 0.0)
        xp = (left[:, None] + 0.5 * h * (probe + 1.0)).ravel()
        ref, ref_err = _quadrature_region(alpha, n, xp, radius, config)
        gap = float(np.max(np.abs(table(xp) - ref)))
        tol = max(1e-3 * config.abs_tol, 1e-13 * float(np.max(np.abs(vals))))
        if gap <= tol:
            return _CoreTable(h, coeffs, gap + float(max(err.max(), ref_err.max())))
        panels *= 2
    return None


def _cauchy_deriv(n, u):
    z = (u - 1j) ** (-(n + 1))
    return (-1.0) ** n * math.factorial(n) * z.imag / math.pi


def _evaluate(alpha, n, u, config):
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    config = config or DEFAULT_CONFIG
    u = np.asarray(u, dtype=float)
    shape = u.shape
    u = u.ravel()
    if not np.all(np.isfinite(u)):
        raise ValueError("u must be finite")
    if alpha == 1.0 and config.cauchy_fast_path:
        vals = _cauchy_deriv(n, u)
        return vals.reshape(shape), np.zeros(shape), np.zeros(shape, dtype=bool)

    plan = series_plan(alpha, n, config.tail_switch_radius)
    x = np.abs(u)
    vals = np.empty_like(x)
    err = np.empty_like(x)
    far = x >= plan.radius
    if np.any(far):
        vals[far] = plan.evaluate(x[far])
        err[far] = np.abs(vals[far]) * plan.rel_error / max(abs(math.sin(math.pi * alpha / 2.0)), 1e-3)
    near = ~far
    if np.any(near):
        table = (_core_table(alpha, n, plan.radius, config)
                 if config.core_table and math.isfinite(plan.radius) else None)
        if table is not None:
            vals[near] = table(x[near])
            err[near] = table.error
        else:
            vals[near], err[near] = _quadrature_region(alpha, n, x[near], plan.radius, config)
    if n % 2 == 1:
        vals = np.where(u < 0, -vals, vals)
    tol = np.maximum(config.abs_tol, config.rel_tol * np.abs(vals))
    if np.any(err > tol):
        worst = int(np.argmax(err - tol))
        raise ConvergenceError(f"density derivative n={n} at u={u[worst]!r} did not converge",
                               float(err[worst]))
    return vals.reshape(shape), err.reshape(shape), far.reshape(shape)


def _scalar_or_array(values, like):
    return float(values) if np.ndim(like) == 0 else values


def stable_pdf_deriv(alpha: float, n: int, u, config: QuadratureConfig | None = None):
    """n-th derivative (0 <= n <= 4) of the standard symmetric stable density."""
    vals, _, _ = _evaluate(alpha, n, u, config)
    return _scalar_or_array(vals, u)


def stable_pdf_info(alpha: float, u, config: QuadratureConfig | None = None):
    """Density values clamped at zero, plus an :class:`EvalInfo`."""
    vals, err, used_series = _evaluate(alpha, 0, u, config)
    clamped = vals < 0.0
    vals = np.where(clamped, 0.0, vals)
    return _scalar_or_array(vals, u), EvalInfo(err, clamped, used_series)


def stable_pdf(alpha: float, u, config: QuadratureConfig | None = None):
    """Density p_N(u) of the standard symmetric stable law."""
    return stable_pdf_info(alpha, u, config)[0]


def scaled_pdf(model: StableModel, t, config: QuadratureConfig | None = None):
    """Density p_eta(t) = eta^(-1/alpha) p_N(t eta^(-1/alpha))."""
    s = model.scale
    return stable_pdf(model.alpha, np.asarray(t, dtype=float) / s, config) / s


def dispersion_deriv(model: StableModel, t, config: QuadratureConfig | None = None):
    """d p_eta(t) / d eta from the scaling law.

    Both terms share the factor 1/(alpha eta^(1+1/alpha)), leaving
    -(p_N(u) + u p_N'(u)) with u = t / eta^(1/alpha).
    """
    s = model.scale
    u = np.asarray(t, dtype=float) / s
    p0 = stable_pdf_deriv(model.alpha, 0, u, config)
    p1 = stable_pdf_deriv(model.alpha, 1, u, config)
    return -(p0 + u * p1) / (model.alpha * model.eta * s)


def stable_tail_mass(alpha: float, x: float, config: QuadratureConfig | None = None) -> float:
    """Pr(N > x) for x >= 0: quadrature up to the switch radius, series beyond."""
    alpha = _check_alpha(alpha)
    if x < 0:
        raise ValueError("x must be nonnegative")
    config = config or DEFAULT_CONFIG
    if alpha == 1.0 and config.cauchy_fast_path:
        return 0.5 - math.atan(x) / math.pi
    plan = series_plan(alpha, 0, config.tail_switch_radius)
    if x >= plan.radius:
        return plan.tail_mass(x)
    R = plan.radius
    bp = density_breakpoints(x, R)
    rule = composite_rule(bp)
    body, _ = rule.integrate(stable_pdf(alpha, rule.nodes, config))
    return body + plan.tail_mass(R)


def density_breakpoints(lo: float, hi: float, width: float = 0.125) -> np.ndarray:
    """Panels on [lo, hi] (0 <= lo < hi), graded geometrically toward u = 0."""
    if lo < width:
        start = max(lo, 1e-12)
        inner = geometric_breakpoints(start, width)
        if lo == 0.0:
            inner = np.concatenate([[0.0], inner])
        lo_u = width
    else:
        inner = np.array([lo])
        lo_u = lo
    n = max(1, int(math.ceil((hi - lo_u) / width)))
    outer = np.linspace(lo_u, hi, n + 1)
    return np.unique(np.concatenate([inner, outer]))


def total_mass(alpha: float, config: QuadratureConfig | None = None) -> float:
    """2 Pr(N > 0); equals 1 for a correctly normalised density."""
    return 2.0 * stable_tail_mass(alpha, 0.0, config)


def tail_asymptote(alpha: float, n: int, u_lo: float = 50.0, u_hi: float = 500.0,
                   n_points: int = 64, config: QuadratureConfig | None = None) -> TailReport:
    """Least-squares slope of log|p^(n)| against log u on [u_lo, u_hi]."""
    alpha = _check_alpha(alpha)
    n = _check_order(n)
    if not 0.0 < u_lo < u_hi:
        raise ValueError("need 0 < u_lo < u_hi")
    u = np.geomspace(u_lo, u_hi, n_points)
    vals = np.abs(stable_pdf_deriv(alpha, n, u, config))
    if np.any(vals < 1e-300):
        raise TailFitError(f"|p^({n})| underflows on [{u_lo}, {u_hi}]; raise the window")
    slope, intercept = np.polyfit(np.log(u), np.log(vals), 1)
    return TailReport(alpha, n, float(slope), float(intercept), -(n + alpha + 1.0), (u_lo, u_hi))


def max_density(alpha: float, config: QuadratureConfig | None = None) -> float:
    """max_u p_N(u), taken at the mode u = 0 of the symmetric law."""
    return float(stable_pdf(alpha, 0.0, config))


__all__ = [
    "ConvergenceError", "TailFitError", "StableModel", "QuadratureConfig", "DEFAULT_CONFIG",
    "TailReport", "EvalInfo", "SeriesPlan", "series_plan", "frequency_cutoff",
    "stable_pdf", "stable_pdf_info", "stable_pdf_deriv", "scaled_pdf", "dispersion_deriv",
    "stable_tail_mass", "total_mass", "tail_asymptote", "max_density", "global_deriv_bound",
    "density_breakpoints",
]
