"""Monte Carlo oracle: exact symmetric stable variates and a plug-in entropy estimate.

Seed contract: an integer seed feeds numpy's PCG64 through default_rng.
sample_stable draws the block of n uniforms first, then (alpha != 1) the block
of n standard exponentials, so the first variate at alpha = 1 is tan(pi(U1 - 1/2)).
mc_entropy splits its seed into two SeedSequence children, one for the source
draws and one for the noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mixture import MixtureModel, mixture_pdf
from .quadrature import composite_rule
from .source_dist import SourceDistribution
from .stable_core import QuadratureConfig, stable_pdf

DEFAULT_SEED = 20261016


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)) and not 0 <= int(seed) < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.default_rng(seed)


def sample_stable(alpha: float, n_samples: int, seed=DEFAULT_SEED) -> np.ndarray:
    """Chambers-Mallows-Stuck draws from the law with characteristic function exp(-|w|^alpha)."""
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    rng = _rng(seed)
    v = math.pi * (rng.random(n_samples) - 0.5)
    if alpha == 1.0:
        return np.tan(v)
    w = rng.standard_exponential(n_samples)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - alpha * v) / w) ** ((1.0 - alpha) / alpha))


def sample_source(source: SourceDistribution, n_samples: int, seed=DEFAULT_SEED) -> np.ndarray:
    rng = _rng(seed)
    if source.is_discrete:
        idx = rng.choice(len(source.locations), size=n_samples, p=np.asarray(source.weights))
        return np.asarray(source.locations, dtype=float)[idx]
    p = source.params
    if source.name == "gaussian":
        return rng.normal(p["mu"], p["sigma"], n_samples)
    if source.name == "cauchy":
        return p["x0"] + p["gamma"] * rng.standard_cauchy(n_samples)
    if source.name == "uniform":
        return rng.uniform(p["a"], p["b"], n_samples)
    raise ValueError(f"no sampler for source {source.name!r}")


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    n_samples: int
    seed: int

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "n_samples": self.n_samples,
                "seed": self.seed}


def mc_entropy(model: MixtureModel, n_samples: int = 1_000_000, seed=DEFAULT_SEED,
               config: QuadratureConfig | None = None) -> MCEstimate:
    """-(1/n) sum ln q_eta(Y_i) with Y_i = X_i + eta^(1/alpha) N_i drawn from the model."""
    src_seq, noise_seq = np.random.SeedSequence(seed).spawn(2)
    x = sample_source(model.source, n_samples, np.random.default_rng(src_seq))
    noise = sample_stable(model.alpha, n_samples, np.random.default_rng(noise_seq))
    y = x + model.stable.scale * noise
    logs = -np.log(mixture_pdf(model, y, config))
    mean = math.fsum(logs) / n_samples
    sd = float(np.std(logs, ddof=1))
    return MCEstimate(mean, sd / math.sqrt(n_samples), n_samples, int(seed))


@dataclass(frozen=True)
class HistogramReport:
    alpha: float
    n_samples: int
    seed: int
    n_bins: int
    fraction_below: float
    max_stat: float
    threshold: float = 4.0
    required_fraction: float = 0.95

    @property
    def passed(self) -> bool:
        return self.fraction_below >= self.required_fraction

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "n_samples": self.n_samples, "seed": self.seed,
                "n_bins": self.n_bins, "fraction_below": self.fraction_below,
                "max_stat": self.max_stat, "threshold": self.threshold,
                "required_fraction": self.required_fraction, "pass": self.passed}


def bin_probabilities(alpha: float, edges, config: QuadratureConfig | None = None) -> np.ndarray:
    """Integral of the standard stable density over each bin (one Kronrod panel per bin)."""
    rule = composite_rule(edges)
    vals = stable_pdf(alpha, rule.nodes, config) * rule.weights
    return vals.reshape(rule.n_panels, 21).sum(axis=1)


def histogram_check(alpha: float, n_samples: int = 1_000_000, seed=DEFAULT_SEED,
                    width: float = 0.1, limit: float = 20.0,
                    config: QuadratureConfig | None = None) -> HistogramReport:
    """Per-bin (O - E)^2 / E on bins of ``width`` over [-limit, limit]."""
    draws = sample_stable(alpha, n_samples, seed)
    n_bins = int(round(2 * limit / width))
    edges = np.linspace(-limit, limit, n_bins + 1)
    observed, _ = np.histogram(draws, bins=edges)
    expected = n_samples * bin_probabilities(alpha, edges, config)
    stat = (observed - expected) ** 2 / expected
    return HistogramReport(alpha, n_samples, int(seed), n_bins, float(np.mean(stat < 4.0)),
                           float(stat.max()))


__all__ = ["sample_stable", "sample_source", "mc_entropy", "MCEstimate", "histogram_check",
           "HistogramReport", "bin_probabilities", "DEFAULT_SEED"]
