"""Differential entropy of Y = X + eta^(1/alpha) N and its dispersion derivative.

All integrals over y use one fixed composite Kronrod grid per model, built
(and adaptively refined) at the model's own eta.  The finite-difference
stencil in eta reuses that grid, so J_fd and J_identity see the same
quadrature and their difference measures the identity, not grid noise.

Outside [-Y*, Y*] the integrands are controlled by the tail envelopes:
q <= k eta / (|y| - M)^(1+alpha) from the upper tail fit, and
q >= b K_tilde / |y|^(1+alpha) from the lower-bound chain, which together
bound |q ln q|.  Y* is doubled until that bound drops below abs_tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds_lab import (DispersionWindow, EnvelopeSpec, fit_tail_constants, lower_chain,
                         lower_tail_constants)
from .mixture import MixtureModel, mixture_pdf, mixture_pdf_and_deriv
from .quadrature import composite_rule, panel_rule
from .source_dist import discretize, log_moment
from .stable_core import DEFAULT_CONFIG, ConvergenceError, QuadratureConfig

Q_FLOOR = 1e-300
FD_REL_STEP = 1e-4
MIN_WIDTH_FACTOR = 0.25
GROWTH = 0.5
MAX_REFINE_ROUNDS = 40


@dataclass
class EntropyReport:
    h: float
    err_est: float
    domain_used: tuple
    tail_mass_bound: float
    n_panels: int = 0
    quad_err: float = 0.0
    constants: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"h": self.h, "err_est": self.err_est, "domain_used": list(self.domain_used),
                "tail_mass_bound": self.tail_mass_bound, "n_panels": self.n_panels,
                "quad_err": self.quad_err, "constants": self.constants}


@dataclass
class DeBruijnReport:
    J_identity: float
    J_fd: float
    abs_diff: float
    fd_step: float
    mass_deriv: float = 0.0
    J_err_est: float = 0.0
    h: float = float("nan")
    constants: dict = field(default_factory=dict)

    @property
    def tolerance(self) -> float:
        return max(1e-4, 1e-3 * abs(self.J_identity))

    @property
    def passed(self) -> bool:
        return self.abs_diff <= self.tolerance and abs(self.mass_deriv) <= 1e-6

    def to_json(self) -> dict:
        return {"bound_id": "eq:final111", "J_identity": self.J_identity, "J_fd": self.J_fd,
                "abs_diff": self.abs_diff, "fd_step": self.fd_step,
                "mass_deriv": self.mass_deriv, "J_err_est": self.J_err_est, "h": self.h,
                "tolerance": self.tolerance, "constants": self.constants, "pass": self.passed}


@dataclass(frozen=True)
class EntropyGrid:
    """Fixed y quadrature for one model, plus the tail bounds beyond +-y_star."""

    rule: object
    y_star: float
    tail_h: float
    tail_J: float
    tail_mass: float
    constants: dict


def _neg_q_log_q(q):
    q = np.asarray(q, dtype=float)
    safe = np.where(q > Q_FLOOR, q, 1.0)
    return np.where(q > Q_FLOOR, -q * np.log(safe), 0.0)


def _power_log_tail(c: float, alpha: float, Y: float, M: float, log_floor: float) -> float:
    """Bound on 2 int_Y^inf c/(y-M)^(1+a) ((1+a) ln y - log_floor) dy, Y > M."""
    r = (Y / (Y - M)) ** (1.0 + alpha)
    a = alpha
    inner = (1.0 + a) * (Y ** -a * math.log(Y) / a + Y ** -a / a ** 2) - log_floor * Y ** -a / a
    return 2.0 * c * r * max(inner, 0.0)


def _tail_bounds(model: MixtureModel, Y: float, M: float, k: float, kappa_1: float,
                 K_tilde: float, b: float):
    a, eta = model.alpha, model.eta
    log_floor = math.log(b * K_tilde)
    tail_h = _power_log_tail(k * eta, a, Y, M, log_floor)
    tail_J = _power_log_tail((k + kappa_1) / a, a, Y, M, log_floor)
    tail_mass = 2.0 * (k + kappa_1) / a * (Y / (Y - M)) ** (1.0 + a) * Y ** -a / a
    return tail_h, tail_J, tail_mass


def _march(lo: float, hi: float, atoms: np.ndarray, w_min: float) -> np.ndarray:
    """Breakpoints from lo to hi; width max(w_min, GROWTH * distance to nearest atom),
    stopping on atoms that are not too close to the previous breakpoint."""
    pts = [lo]
    y = lo
    n = len(atoms)
    while y < hi:
        j = int(np.searchsorted(atoms, y, side="right"))
        d = min(abs(y - atoms[j - 1]) if j > 0 else np.inf, abs(atoms[j] - y) if j < n else np.inf)
        nxt = y + max(w_min, GROWTH * d)
        while j < n and atoms[j] < nxt:
            if atoms[j] - y >= MIN_WIDTH_FACTOR * w_min:
                nxt = atoms[j]
                break
            j += 1
        nxt = min(nxt, hi)
        if hi - nxt < MIN_WIDTH_FACTOR * w_min:
            nxt = hi
        pts.append(nxt)
        y = nxt
    return np.asarray(pts)


def build_entropy_grid(model: MixtureModel, config: QuadratureConfig | None = None) -> EntropyGrid:
    """Choose Y*, lay out panels, then bisect panels whose Kronrod-Gauss gap is large."""
    config = config or DEFAULT_CONFIG
    alpha, eta, s = model.alpha, model.eta, model.stable.scale
    locs, _ = discretize(model.source)
    atoms = np.unique(locs)
    M = float(np.max(np.abs(atoms)))
    tails = fit_tail_constants(alpha)
    window = DispersionWindow.around(eta)
    chain = lower_chain(alpha, window, model.source, lower_tail_constants(alpha))
    # the upper fit holds for |y - x| >= T s; the lower chain for |y| >= y_floor
    s_hi = (2.0 * window.b) ** (1.0 / alpha)
    Y = max(2.0 * (M + tails.T * s_hi), chain.y_floor, 1.0)
    while True:
        tb = _tail_bounds(model, Y, M, tails.k, tails.kappa_1, chain.K_tilde, window.b)
        if max(tb[0], tb[1]) <= config.abs_tol and tb[2] <= 0.1 * config.abs_tol:
            break
        Y *= 2.0
        if Y > 1e300:
            raise ConvergenceError("tail window did not converge", max(tb))
    bp = _march(-Y, Y, atoms, MIN_WIDTH_FACTOR * s)
    a_pan, b_pan = bp[:-1], bp[1:]
    for _ in range(MAX_REFINE_ROUNDS):
        gap_h, gap_J, est_h, est_J = _panel_gaps(model, a_pan, b_pan, config)
        tot_h, tot_J = gap_h.sum(), gap_J.sum()
        tgt_h = max(config.abs_tol, config.rel_tol * 1e-2 * abs(est_h))
        tgt_J = max(config.abs_tol, config.rel_tol * 1e-2 * abs(est_J))
        if tot_h <= tgt_h and tot_J <= tgt_J:
            break
        n = len(a_pan)
        bad = (gap_h > tgt_h / n) | (gap_J > tgt_J / n)
        if len(a_pan) + bad.sum() > config.max_panels:
            raise ConvergenceError("entropy grid exceeds max_panels", float(tot_h + tot_J))
        mid = 0.5 * (a_pan[bad] + b_pan[bad])
        a_pan = np.concatenate([a_pan[~bad], a_pan[bad], mid])
        b_pan = np.concatenate([b_pan[~bad], mid, b_pan[bad]])
        order = np.argsort(a_pan)
        a_pan, b_pan = a_pan[order], b_pan[order]
    else:
        raise ConvergenceError("entropy grid refinement did not converge", float(tot_h + tot_J))
    rule = composite_rule(np.append(a_pan, b_pan[-1]))
    constants = {"y_star": Y, "support_radius": M, "k": tails.k, "kappa_1": tails.kappa_1,
                 "K_tilde": chain.K_tilde, "b": window.b, "n_panels": rule.n_panels}
    return EntropyGrid(rule, Y, tb[0], tb[1], tb[2], constants)


def _panel_gaps(model, a, b, config):
    nodes, wk, wg = panel_rule(a, b)
    q, dq = mixture_pdf_and_deriv(model, nodes, config)
    fh = _neg_q_log_q(q)
    fJ = -dq * np.log(np.where(q > Q_FLOOR, q, 1.0))
    gap_h = np.abs(np.sum(fh * (wk - wg), axis=1))
    gap_J = np.abs(np.sum(fJ * (wk - wg), axis=1))
    return gap_h, gap_J, float(np.sum(fh * wk)), float(np.sum(fJ * wk))


def _entropy_on(grid: EntropyGrid, model: MixtureModel, config):
    q = mixture_pdf(model, grid.rule.nodes, config)
    return grid.rule.integrate(_neg_q_log_q(q))


def entropy(model: MixtureModel, config: QuadratureConfig | None = None,
            grid: EntropyGrid | None = None) -> EntropyReport:
    """h(Y) = -int q ln q in nats, with quadrature and tail error estimates."""
    config = config or DEFAULT_CONFIG
    _require_log_moment(model)
    grid = grid or build_entropy_grid(model, config)
    h, qerr = _entropy_on(grid, model, config)
    return EntropyReport(h, qerr + grid.tail_h, (-grid.y_star, grid.y_star), grid.tail_h,
                         grid.rule.n_panels, qerr, dict(grid.constants))


def _require_log_moment(model):
    lm = log_moment(model.source)
    if not math.isfinite(lm):
        raise ValueError("source has no finite log-moment")
    return lm


def dispersion_integrals(model: MixtureModel, config: QuadratureConfig | None = None,
                         grid: EntropyGrid | None = None) -> dict:
    """-int dq/deta ln q, int dq/deta and int -q ln q on one grid."""
    config = config or DEFAULT_CONFIG
    grid = grid or build_entropy_grid(model, config)
    q, dq = mixture_pdf_and_deriv(model, grid.rule.nodes, config)
    logq = np.log(np.where(q > Q_FLOOR, q, 1.0))
    J, J_err = grid.rule.integrate(-dq * logq)
    mass, mass_err = grid.rule.integrate(dq)
    h, h_err = grid.rule.integrate(_neg_q_log_q(q))
    return {"J": J, "J_err": J_err + grid.tail_J, "mass_deriv": mass,
            "mass_err": mass_err + grid.tail_mass, "h": h, "h_err": h_err + grid.tail_h}


def entropy_dispersion_deriv_identity(model: MixtureModel,
                                      config: QuadratureConfig | None = None) -> float:
    """dh/deta via -int (dq/deta) ln q; the dropped int dq/deta is checked to vanish."""
    out = dispersion_integrals(model, config)
    if abs(out["mass_deriv"]) > 1e-6:
        raise ConvergenceError("int dq/deta dy does not vanish", abs(out["mass_deriv"]))
    return out["J"]


def fractional_fisher_J(model: MixtureModel, config: QuadratureConfig | None = None,
                        rel_step: float = FD_REL_STEP) -> DeBruijnReport:
    """Dispersion derivative of h two ways: the identity integral and a Richardson
    central difference of h on the same y grid."""
    config = config or DEFAULT_CONFIG
    _require_log_moment(model)
    grid = build_entropy_grid(model, config)
    ident = dispersion_integrals(model, config, grid)
    eta = model.eta
    step = rel_step * eta

    def H(e):
        return _entropy_on(grid, model.with_eta(e), config)[0]

    d1 = (H(eta + step) - H(eta - step)) / (2.0 * step)
    d2 = (H(eta + 2 * step) - H(eta - 2 * step)) / (4.0 * step)
    J_fd = (4.0 * d1 - d2) / 3.0
    consts = dict(grid.constants)
    consts.update(alpha=model.alpha, eta=eta, source=model.source.to_json())
    return DeBruijnReport(ident["J"], J_fd, abs(ident["J"] - J_fd), step, ident["mass_deriv"],
                          ident["J_err"], ident["h"], consts)


# ---------------------------------------------------------------------------
# integrability witness


def r_b(model: MixtureModel, spec: EnvelopeSpec, y, config: QuadratureConfig | None = None):
    """E_X[s_b(y - X)]."""
    locs, w = discretize(model.source)
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    out = np.empty_like(flat)
    rows = max(1, 1_000_000 // len(locs))
    for start in range(0, len(flat), rows):
        t = flat[start:start + rows, None] - locs[None, :]
        out[start:start + rows] = spec.value(t, config) @ w
    return float(out[0]) if y.ndim == 0 else out.reshape(y.shape)


@dataclass
class IntegrabilityReport:
    """int ln(1+|y|) r_b(y) dy against S_b E ln(1+|X|) + L_b, plus side checks."""

    lhs: float
    rhs: float
    S_b: float
    L_b: float
    log_moment: float
    r_b_max: float
    r_b_argmax: float
    y0: float
    y0_check: bool
    y0_values: dict
    constants: dict
    # a point-mass source at 0 makes the two sides equal, so allow rounding
    tolerance: float = 1e-10

    @property
    def max_ratio(self) -> float:
        return self.lhs / self.rhs

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + self.tolerance and self.y0_check

    def to_json(self) -> dict:
        return {"bound_id": "eq:ff", "lhs": self.lhs, "rhs": self.rhs, "S_b": self.S_b,
                "L_b": self.L_b, "log_moment": self.log_moment, "max_ratio": self.max_ratio,
                "slack_min": 1.0 - self.max_ratio, "r_b_max": self.r_b_max,
                "r_b_argmax": self.r_b_argmax, "y0": self.y0, "y0_check": self.y0_check,
                "y0_values": self.y0_values, "constants_used": self.constants,
                "tolerance": self.tolerance, "pass": self.passed}


def integrability_check(model: MixtureModel, spec: EnvelopeSpec,
                        config: QuadratureConfig | None = None) -> IntegrabilityReport:
    """Integrate ln(1+|y|) r_b(y) on panels broken at every atom and at atom +- t0.

    The part beyond |y| = Y is replaced by its upper bound from the tail
    constants, so the left side is an over-estimate.
    """
    from .bounds_lab import envelope_integrals

    alpha, t0 = model.alpha, spec.t0
    locs, _ = discretize(model.source)
    atoms = np.unique(locs)
    M = float(np.max(np.abs(atoms)))
    kinks = np.unique(np.concatenate([atoms, atoms - t0, atoms + t0]))
    Y = 1e6 * max(M + t0, 1.0)
    inner = np.unique(np.concatenate([kinks, np.linspace(kinks[0], kinks[-1], 257)]))
    lo = np.geomspace(-Y, inner[0] - 1.0, 80) if inner[0] - 1.0 < 0 else np.array([])
    hi_start = inner[-1] + 1.0
    hi = np.geomspace(hi_start, Y, 80) if hi_start > 0 else np.array([])
    bp = np.unique(np.concatenate([[-Y], lo, inner, hi, [Y]]))
    rule = composite_rule(bp)
    rb = r_b(model, spec, rule.nodes, config)
    body, _ = rule.integrate(np.log1p(np.abs(rule.nodes)) * rb)
    tails = spec.tails
    c = spec.C * tails.k
    # ln(1+y) <= ln y + ln(1 + 1/Y) for y >= Y
    r = (Y / (Y - M)) ** (1.0 + alpha)
    remainder = 2.0 * c * r * Y ** -alpha * (math.log(Y) / alpha + 1.0 / alpha ** 2
                                             + math.log1p(1.0 / Y) / alpha)
    lhs = body + remainder
    S_b, L_b = envelope_integrals(spec, config)
    lm = log_moment(model.source)
    rhs = S_b * lm + L_b
    probe = np.unique(np.concatenate([bp[np.abs(bp) <= 10 * (M + t0)], rule.nodes]))
    rprobe = r_b(model, spec, probe, config)
    i = int(np.argmax(rprobe))
    # y0 side check: on |y| <= y0, max |ln q| is attained where q is smallest
    window = spec.window
    chain = lower_chain(alpha, window, model.source, lower_tail_constants(alpha))
    y0 = chain.y_floor
    ys = np.linspace(-y0, y0, 2001)
    y0_vals = {}
    ok = True
    for eta in window.eta_grid():
        q = mixture_pdf(model.with_eta(float(eta)), ys, config)
        lhs_y0 = float(np.max(np.abs(np.log(q))))
        rhs_y0 = abs(math.log(float(np.min(q))))
        y0_vals[f"{eta:.6g}"] = [lhs_y0, rhs_y0]
        ok = ok and lhs_y0 <= rhs_y0 * (1 + 1e-12)
    consts = spec.constants()
    consts.update(y_limit=Y, remainder=remainder, t0=t0)
    return IntegrabilityReport(lhs, rhs, S_b, L_b, lm, float(rprobe[i]), float(probe[i]), y0, ok,
                               y0_vals, consts)


__all__ = [
    "EntropyReport", "DeBruijnReport", "EntropyGrid", "IntegrabilityReport",
    "build_entropy_grid", "entropy", "dispersion_integrals", "entropy_dispersion_deriv_identity",
    "fractional_fisher_J", "r_b", "integrability_check", "Q_FLOOR", "FD_REL_STEP",
]
