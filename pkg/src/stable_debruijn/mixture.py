"""Density q_eta of Y = X + eta^(1/alpha) N and its dispersion derivative."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .source_dist import SourceDistribution, discretize
from .stable_core import QuadratureConfig, StableModel, stable_pdf_deriv

_CHUNK = 1_000_000


@dataclass(frozen=True)
class MixtureModel:
    """Independent X and N; the model never correlates them."""

    stable: StableModel
    source: SourceDistribution

    @property
    def alpha(self) -> float:
        return self.stable.alpha

    @property
    def eta(self) -> float:
        return self.stable.eta

    def with_eta(self, eta: float) -> "MixtureModel":
        return MixtureModel(self.stable.with_eta(eta), self.source)


def _sweep(model: MixtureModel, y, want_deriv: bool, config):
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    locs, w = discretize(model.source)
    s = model.stable.scale
    alpha, eta = model.alpha, model.eta
    q = np.empty_like(flat)
    dq = np.empty_like(flat) if want_deriv else None
    rows = max(1, _CHUNK // len(locs))
    for start in range(0, len(flat), rows):
        u = (flat[start:start + rows, None] - locs[None, :]) / s
        p0 = stable_pdf_deriv(alpha, 0, u, config)
        q[start:start + rows] = (p0 @ w) / s
        if want_deriv:
            p1 = stable_pdf_deriv(alpha, 1, u, config)
            dq[start:start + rows] = -((p0 + u * p1) @ w) / (alpha * eta * s)
    q = q.reshape(y.shape)
    if want_deriv:
        dq = dq.reshape(y.shape)
    return q, dq


def _out(vals, like):
    return float(vals) if np.ndim(like) == 0 else vals


def mixture_pdf(model: MixtureModel, y, config: QuadratureConfig | None = None):
    """q_eta(y) = E[p_eta(y - X)]."""
    return _out(_sweep(model, y, False, config)[0], y)


def mixture_pdf_dispersion_deriv(model: MixtureModel, y, config: QuadratureConfig | None = None):
    """d q_eta(y) / d eta, taken inside the expectation over X."""
    return _out(_sweep(model, y, True, config)[1], y)


def mixture_pdf_and_deriv(model: MixtureModel, y, config: QuadratureConfig | None = None):
    """(q_eta(y), d q_eta(y)/d eta) from one sweep over the source atoms."""
    q, dq = _sweep(model, y, True, config)
    return _out(q, y), _out(dq, y)


def fd_dispersion_deriv(model: MixtureModel, y, rel_step: float = 1e-5,
                        config: QuadratureConfig | None = None):
    """Central difference of q_eta(y) in eta, step rel_step * eta."""
    h = rel_step * model.eta
    up = mixture_pdf(model.with_eta(model.eta + h), y, config)
    dn = mixture_pdf(model.with_eta(model.eta - h), y, config)
    return (np.asarray(up) - np.asarray(dn)) / (2.0 * h) if np.ndim(y) else (up - dn) / (2.0 * h)


__all__ = ["MixtureModel", "mixture_pdf", "mixture_pdf_dispersion_deriv",
           "mixture_pdf_and_deriv", "fd_dispersion_deriv"]
