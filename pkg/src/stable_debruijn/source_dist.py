"""Laws of the source variable X: atoms, empirical samples, parametric families."""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, special

from .quadrature import geometric_breakpoints

QUANTILE_CLIP = 1e-10
MEDIAN_FLOOR = 1e-12
_PARAM_SPECS = {
    "gaussian": ("mu", "sigma"),
    "cauchy": ("x0", "gamma"),
    "uniform": ("a", "b"),
}


class SourceError(ValueError):
    """Malformed source description."""


@dataclass(frozen=True)
class SourceDistribution:
    """Immutable description of the law of X.

    Use the constructors :meth:`from_atoms`, :meth:`from_sample`,
    :meth:`gaussian`, :meth:`cauchy`, :meth:`uniform` or :meth:`from_json`.
    """

    kind: str
    locations: tuple = ()
    weights: tuple = ()
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind in ("atoms", "sample"):
            if len(self.locations) == 0:
                raise SourceError(f"{self.kind} source needs at least one point")
            if len(self.locations) != len(self.weights):
                raise SourceError("locations and weights differ in length")
            w = np.asarray(self.weights, dtype=float)
            if np.any(~np.isfinite(np.asarray(self.locations, dtype=float))):
                raise SourceError("atom locations must be finite")
            if np.any(w <= 0):
                raise SourceError("atom weights must be positive")
            if abs(math.fsum(w) - 1.0) > 1e-12:
                raise SourceError(f"weights sum to {math.fsum(w)!r}, not 1")
        elif self.kind == "parametric":
            if self.name not in _PARAM_SPECS:
                raise SourceError(f"unknown parametric family {self.name!r}")
            missing = set(_PARAM_SPECS[self.name]) - set(self.params)
            if missing:
                raise SourceError(f"{self.name} source missing parameters {sorted(missing)}")
            p = self.params
            if self.name == "gaussian" and not p["sigma"] > 0:
                raise SourceError("gaussian sigma must be positive")
            if self.name == "cauchy" and not p["gamma"] > 0:
                raise SourceError("cauchy gamma must be positive")
            if self.name == "uniform" and not p["a"] < p["b"]:
                raise SourceError("uniform needs a < b")
        else:
            raise SourceError(f"unknown source kind {self.kind!r}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_atoms(cls, atoms) -> "SourceDistribution":
        """``atoms`` is an iterable of (location, weight) pairs."""
        pairs = [(float(x), float(w)) for x, w in atoms]
        if not pairs:
            raise SourceError("atoms source needs at least one point")
        locs, wts = zip(*pairs)
        return cls("atoms", tuple(locs), tuple(wts))

    @classmethod
    def atom(cls, x: float = 0.0) -> "SourceDistribution":
        return cls.from_atoms([(x, 1.0)])

    @classmethod
    def from_sample(cls, values) -> "SourceDistribution":
        vals = tuple(float(v) for v in values)
        if not vals:
            raise SourceError("sample source needs at least one value")
        w = 1.0 / len(vals)
        return cls("sample", vals, (w,) * len(vals))

    @classmethod
    def gaussian(cls, mu: float = 0.0, sigma: float = 1.0) -> "SourceDistribution":
        return cls("parametric", name="gaussian", params={"mu": float(mu), "sigma": float(sigma)})

    @classmethod
    def cauchy(cls, x0: float = 0.0, gamma: float = 1.0) -> "SourceDistribution":
        return cls("parametric", name="cauchy", params={"x0": float(x0), "gamma": float(gamma)})

    @classmethod
    def uniform(cls, a: float = 0.0, b: float = 1.0) -> "SourceDistribution":
        return cls("parametric", name="uniform", params={"a": float(a), "b": float(b)})

    @classmethod
    def from_json(cls, obj) -> "SourceDistribution":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise SourceError("source JSON must be an object with a 'kind' field")
        kind = obj["kind"]
        try:
            if kind == "atoms":
                return cls.from_atoms(obj["atoms"])
            if kind == "sample":
                return cls.from_sample(obj["values"])
            if kind == "parametric":
                params = {k: float(v) for k, v in obj.get("params", {}).items()}
                return cls("parametric", name=obj["name"], params=params)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SourceError):
                raise
            raise SourceError(f"malformed {kind} source: {exc}") from exc
        raise SourceError(f"unknown source kind {kind!r}")

    @classmethod
    def load(cls, path) -> "SourceDistribution":
        with open(Path(path)) as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        if self.kind == "atoms":
            return {"kind": "atoms", "atoms": [[x, w] for x, w in zip(self.locations, self.weights)]}
        if self.kind == "sample":
            return {"kind": "sample", "values": list(self.locations)}
        return {"kind": "parametric", "name": self.name, "params": dict(self.params)}

    def __hash__(self):
        return hash((self.kind, self.locations, self.weights, self.name,
                     tuple(sorted(self.params.items()))))

    # -- parametric helpers -------------------------------------------------

    @property
    def is_discrete(self) -> bool:
        return self.kind != "parametric"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.name == "gaussian":
            z = (x - p["mu"]) / p["sigma"]
            return np.exp(-0.5 * z * z) / (p["sigma"] * math.sqrt(2 * math.pi))
        if self.name == "cauchy":
            z = (x - p["x0"]) / p["gamma"]
            return 1.0 / (math.pi * p["gamma"] * (1.0 + z * z))
        if self.name == "uniform":
            return np.where((x >= p["a"]) & (x <= p["b"]), 1.0 / (p["b"] - p["a"]), 0.0)
        raise SourceError("pdf only defined for parametric sources")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.name == "gaussian":
            return special.ndtr((x - p["mu"]) / p["sigma"])
        if self.name == "cauchy":
            return 0.5 + np.arctan((x - p["x0"]) / p["gamma"]) / math.pi
        if self.name == "uniform":
            return np.clip((x - p["a"]) / (p["b"] - p["a"]), 0.0, 1.0)
        raise SourceError("cdf only defined for parametric sources")

    def quantile(self, v):
        v = np.asarray(v, dtype=float)
        p = self.params
        if self.name == "gaussian":
            return p["mu"] + p["sigma"] * special.ndtri(v)
        if self.name == "cauchy":
            return p["x0"] + p["gamma"] * np.tan(math.pi * (v - 0.5))
        if self.name == "uniform":
            return p["a"] + (p["b"] - p["a"]) * v
        raise SourceError("quantile only defined for parametric sources")

    def clipped_support(self) -> tuple[float, float]:
        lo, hi = self.quantile([QUANTILE_CLIP, 1.0 - QUANTILE_CLIP])
        return float(lo), float(hi)


# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _quantile_rule(n_central: int, order: int = 8):
    """Composite Gauss-Legendre rule on [QUANTILE_CLIP, 1 - QUANTILE_CLIP] in
    probability space, graded toward both ends where quantiles blow up."""
    edge = 0.02
    left = geometric_breakpoints(QUANTILE_CLIP, edge, 10.0)
    mid = np.linspace(edge, 1.0 - edge, n_central + 1)
    right = 1.0 - left[::-1]
    bp = np.unique(np.concatenate([left, mid, right]))
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(bp)[:, None]
    mid_pts = 0.5 * (bp[1:] + bp[:-1])[:, None]
    return (mid_pts + half * x).ravel(), (half * w).ravel()


def discretize(source: SourceDistribution, n_central: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Atoms (locations, weights) representing the source.

    Discrete sources are returned as they are.  Parametric sources become a
    fixed quadrature rule in probability space over the quantile-clipped
    support, renormalised to unit mass; the rule depends only on the source,
    so every downstream quantity is an exact finite mixture.
    """
    if source.is_discrete:
        return np.asarray(source.locations, dtype=float), np.asarray(source.weights, dtype=float)
    nodes, weights = _quantile_rule(n_central)
    locs = source.quantile(nodes)
    w = weights / math.fsum(weights)
    return locs, w


def expect_over_source(source: SourceDistribution, f, n_central: int = 16):
    """E[f(X)].

    ``f`` maps an array of locations to an array of the same leading length
    (extra trailing axes are allowed and are carried through).
    """
    locs, w = discretize(source, n_central)
    vals = np.asarray(f(locs), dtype=float)
    if vals.shape[:1] != locs.shape:
        raise ValueError("f must return one value (or row) per location")
    if vals.ndim == 1:
        return math.fsum(vals * w)
    return np.tensordot(w, vals, axes=(0, 0))


def log_moment(source: SourceDistribution) -> float:
    """E[ln(1 + |X|)]; finite for every supported family."""
    if source.is_discrete:
        locs, w = discretize(source)
        return math.fsum(w * np.log1p(np.abs(locs)))
    lo, hi = source.clipped_support()
    g = lambda x: math.log1p(abs(x)) * float(source.pdf(x))
    pts = [x for x in (0.0,) if lo < x < hi]
    body = 0.0
    edges = [lo] + pts + [hi]
    for a, b in zip(edges[:-1], edges[1:]):
        if source.name == "cauchy":
            # heavy tails: integrate in probability space
            va, vb = float(source.cdf(a)), float(source.cdf(b))
            h = lambda v: math.log1p(abs(float(source.quantile(v))))
            val, _ = integrate.quad(h, va, vb, limit=200, epsabs=1e-13, epsrel=1e-11)
        else:
            val, _ = integrate.quad(g, a, b, limit=200, epsabs=1e-13, epsrel=1e-11)
        body += val
    if source.name == "cauchy":
        body += _cauchy_log_tail(source, lo, hi)
    return body


def _cauchy_log_tail(source, lo, hi):
    """Mass of ln(1+|x|) beyond the clipped quantiles, from the 1/x^2 tail."""
    x0, g = source.params["x0"], source.params["gamma"]
    total = 0.0
    for edge in (hi - x0, x0 - lo):
        # int_edge^inf ln(1+|x0+t|) g / (pi t^2) dt with |x0+t| ~ t
        total += g / math.pi * (math.log(edge) + 1.0) / edge
    return total


def prob_abs_le(source: SourceDistribution, r: float) -> float:
    """Pr(|X| <= r)."""
    if source.is_discrete:
        locs, w = discretize(source)
        return math.fsum(w[np.abs(locs) <= r])
    if r < 0:
        return 0.0
    return float(source.cdf(r) - source.cdf(-r))


def median_radius(source: SourceDistribution) -> float:
    """Smallest r > 0 with Pr(|X| <= r) >= 1/2, floored at 1e-12."""
    if source.is_discrete:
        locs, w = discretize(source)
        order = np.argsort(np.abs(locs), kind="stable")
        absx = np.abs(locs)[order]
        cum = np.cumsum(w[order])
        idx = int(np.nonzero(cum >= 0.5 - 1e-12)[0][0])
        return max(float(absx[idx]), MEDIAN_FLOOR)
    f = lambda r: prob_abs_le(source, r) - 0.5
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    r = optimize.bisect(f, 0.0, hi, xtol=1e-12, maxiter=200)
    # step to the side where the defining inequality holds
    while f(r) < 0:
        r = np.nextafter(r, np.inf) + 1e-12
    return max(float(r), MEDIAN_FLOOR)


def support_radius(source: SourceDistribution) -> float:
    """max |x| over the atoms used to represent the source."""
    locs, _ = discretize(source)
    return float(np.max(np.abs(locs)))


__all__ = [
    "SourceDistribution", "SourceError", "discretize", "expect_over_source",
    "log_moment", "median_radius", "prob_abs_le", "support_radius", "QUANTILE_CLIP",
]
