"""Batch verification runs: ``stable-debruijn <command> --alpha ... [options]``.

Reports land in OUTPUT/<command>/<alpha>_<eta>.json (or <alpha>_b<b>.json for
window-based suites), written atomically with sorted keys so an identical
config reproduces byte-identical files.  Exit status: 0 when every
certificate passes, 1 when any fails (failing files are listed on stderr),
2 on configuration errors (nothing is written).
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds_lab as bl
from .entropy import entropy, fractional_fisher_J, integrability_check
from .mixture import MixtureModel
from .reports import dumps, rows_to_csv, write_atomic
from .sampling_mc import DEFAULT_SEED, histogram_check, mc_entropy
from .source_dist import SourceDistribution, SourceError, median_radius
from .stable_core import (ConvergenceError, QuadratureConfig, StableModel, TailFitError, scaled_pdf,
                          total_mass)

log = logging.getLogger("stable_debruijn")

COMMANDS = ("pdf", "derivs", "bounds", "entropy", "debruijn", "mc", "certify-all")
WINDOW_COMMANDS = ("bounds", "certify-all")
THREADS_ENV = "STABLE_DEBRUIJN_THREADS"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    alpha_list: list
    eta_list: list = field(default_factory=list)
    b_list: list = field(default_factory=list)
    source_path: str | None = None
    output_path: str = "output"
    format: str = "json"
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    seed: int = DEFAULT_SEED
    n_samples: int = 1_000_000
    orders: tuple = (0, 1, 2, 3)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.alpha_list:
            raise ConfigError("alpha list is empty")
        for a in self.alpha_list:
            if not (0.0 < a < 2.0):
                raise ConfigError(f"alpha must lie in (0, 2), got {a}")
        if self.command in WINDOW_COMMANDS:
            if not self.b_list:
                raise ConfigError(f"{self.command} needs at least one --b")
            if any(not (b > 0 and math.isfinite(b)) for b in self.b_list):
                raise ConfigError("window endpoints b must be positive")
        else:
            if not self.eta_list:
                raise ConfigError(f"{self.command} needs at least one --eta")
            if any(not (e > 0 and math.isfinite(e)) for e in self.eta_list):
                raise ConfigError("dispersions eta must be positive")
        if self.source_path is not None and not Path(self.source_path).is_file():
            raise ConfigError(f"source file not found: {self.source_path}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be at least 2")
        if any(n not in range(5) for n in self.orders):
            raise ConfigError("derivative orders must lie in 0..4")

    def source(self) -> SourceDistribution:
        if self.source_path is None:
            return SourceDistribution.atom(0.0)
        return SourceDistribution.load(self.source_path)


def _num(x: float) -> str:
    return format(float(x), "g")


@dataclass
class Job:
    suite: str
    alpha: float
    key: str
    eta: float | None = None
    b: float | None = None

    @property
    def stem(self) -> str:
        return f"{_num(self.alpha)}_{self.key}"


def _doc(reports: list[dict], **meta) -> dict:
    return {**meta, "reports": reports, "bound_ids": [r["bound_id"] for r in reports],
            "pass": all(bool(r["pass"]) for r in reports)}


def _summary_rows(alpha, reports: list[dict]) -> list[dict]:
    rows = []
    for r in reports:
        arg = r.get("argmax_point", {})
        rows.append({"alpha": alpha, "eta": arg.get("eta", r.get("eta", "")),
                     "y": arg.get("y", arg.get("t", arg.get("u", ""))),
                     "value": arg.get("lhs", r.get("value", "")),
                     "bound": arg.get("rhs", r.get("bound", "")),
                     "slack": r.get("slack_min", ""), "pass": bool(r["pass"])})
    return rows


# -- suites -----------------------------------------------------------------


def _run_pdf(cfg: RunConfig, job: Job, source):
    qc = cfg.quadrature
    model = StableModel(job.alpha, job.eta)
    t = np.round(np.arange(-5000, 5001) * 0.01, 12)
    vals = scaled_pdf(model, t, qc)
    mass = total_mass(job.alpha, qc)
    rep = {"bound_id": "pdf-mass", "alpha": job.alpha, "eta": job.eta, "total_mass": mass,
           "max_value": float(vals.max()), "grid_spec": {"t_min": -50.0, "t_max": 50.0, "step": 0.01},
           "slack_min": 1e-6 - abs(mass - 1.0), "pass": abs(mass - 1.0) <= 1e-6}
    rows = [{"alpha": job.alpha, "eta": job.eta, "y": float(x), "value": float(v), "bound": "",
             "slack": "", "pass": ""} for x, v in zip(t, vals)]
    return _doc([rep], alpha=job.alpha, eta=job.eta), rows


def _run_derivs(cfg: RunConfig, job: Job, source):
    reps = [bl.certify_global_deriv_bound(job.alpha, n, config=cfg.quadrature).to_json()
            for n in cfg.orders]
    return _doc(reps, alpha=job.alpha, eta=job.eta), _summary_rows(job.alpha, reps)


def _window_reports(cfg: RunConfig, job: Job, source):
    qc = cfg.quadrature
    window = bl.DispersionWindow(job.b)
    spec = bl.build_envelope(job.alpha, window, config=qc)
    reps = [bl.certify_domination(job.alpha, spec, config=qc)]
    reps += bl.certify_partial_bounds(job.alpha, spec, config=qc)
    S_b, L_b = bl.envelope_integrals(spec, qc)
    yt = median_radius(source)
    tails = bl.lower_tail_constants(job.alpha, qc)
    floor = bl.lower_chain(job.alpha, window, source, tails).y_floor
    y_lo = max(10.0 * yt + 10.0, floor)
    y_grid = np.geomspace(y_lo, max(1e3, 10.0 * y_lo), 60)
    lower = bl.q_lower_bound_check(job.alpha, window, source, y_grid, tails=tails, config=qc)
    out = [r.to_json() for r in reps] + [lower.to_json()]
    integ = integrability_check(MixtureModel(StableModel(job.alpha, 1.5 * job.b), source), spec, qc)
    out.append(integ.to_json())
    rows = _summary_rows(job.alpha, out[:-2])
    rows += [{**r, "alpha": job.alpha} for r in lower.rows]
    rows += _summary_rows(job.alpha, [{**out[-1], "value": integ.lhs, "bound": integ.rhs}])
    meta = {"alpha": job.alpha, "b": job.b, "S_b": S_b, "L_b": L_b,
            "envelope": spec.constants(), "source": source.to_json()}
    return out, rows, meta


def _run_bounds(cfg: RunConfig, job: Job, source):
    out, rows, meta = _window_reports(cfg, job, source)
    return _doc(out, **meta), rows


def _run_entropy(cfg: RunConfig, job: Job, source):
    model = MixtureModel(StableModel(job.alpha, job.eta), source)
    rep = entropy(model, cfg.quadrature).to_json()
    rep.update(bound_id="entropy", alpha=job.alpha, eta=job.eta)
    rep["pass"] = math.isfinite(rep["h"]) and rep["err_est"] < 1e-6
    rows = [{"alpha": job.alpha, "eta": job.eta, "y": "", "value": rep["h"], "bound": rep["err_est"],
             "slack": "", "pass": rep["pass"]}]
    return _doc([rep], alpha=job.alpha, eta=job.eta, source=source.to_json()), rows


def _run_debruijn(cfg: RunConfig, job: Job, source):
    model = MixtureModel(StableModel(job.alpha, job.eta), source)
    rep = fractional_fisher_J(model, cfg.quadrature).to_json()
    rows = [{"alpha": job.alpha, "eta": job.eta, "y": "", "value": rep["J_identity"],
             "bound": rep["J_fd"], "slack": rep["tolerance"] - rep["abs_diff"], "pass": rep["pass"]}]
    return _doc([rep], alpha=job.alpha, eta=job.eta, source=source.to_json()), rows


def _run_mc(cfg: RunConfig, job: Job, source):
    model = MixtureModel(StableModel(job.alpha, job.eta), source)
    est = mc_entropy(model, cfg.n_samples, cfg.seed, cfg.quadrature)
    quad = entropy(model, cfg.quadrature)
    z = abs(est.value - quad.h) / math.hypot(est.stderr, quad.err_est)
    mc_rep = {"bound_id": "mc-entropy", "mc": est.to_json(), "entropy": quad.h,
              "entropy_err_est": quad.err_est, "z": z, "pass": z <= 3.0}
    hist = histogram_check(job.alpha, cfg.n_samples, cfg.seed, config=cfg.quadrature).to_json()
    hist["bound_id"] = "histogram-chi2"
    reps = [mc_rep, hist]
    rows = [{"alpha": job.alpha, "eta": job.eta, "y": "", "value": est.value, "bound": quad.h,
             "slack": 3.0 - z, "pass": mc_rep["pass"]},
            {"alpha": job.alpha, "eta": job.eta, "y": "", "value": hist["fraction_below"],
             "bound": hist["required_fraction"], "slack": hist["fraction_below"] - 0.95,
             "pass": hist["pass"]}]
    return _doc(reps, alpha=job.alpha, eta=job.eta, seed=cfg.seed, source=source.to_json()), rows


def _run_certify_all(cfg: RunConfig, job: Job, source):
    out, rows, meta = _window_reports(cfg, job, source)
    derivs = [bl.certify_global_deriv_bound(job.alpha, n, config=cfg.quadrature).to_json()
              for n in cfg.orders]
    window = bl.DispersionWindow(job.b)
    db = []
    for eta in (window.eta_grid(3)):
        model = MixtureModel(StableModel(job.alpha, float(eta)), source)
        rep = fractional_fisher_J(model, cfg.quadrature).to_json()
        rep["eta"] = float(eta)
        db.append(rep)
    rows += _summary_rows(job.alpha, derivs)
    rows += [{"alpha": job.alpha, "eta": r["eta"], "y": "", "value": r["J_identity"],
              "bound": r["J_fd"], "slack": r["tolerance"] - r["abs_diff"], "pass": r["pass"]}
             for r in db]
    return _doc(out + derivs + db, **meta), rows


SUITES = {"pdf": _run_pdf, "derivs": _run_derivs, "bounds": _run_bounds, "entropy": _run_entropy,
          "debruijn": _run_debruijn, "mc": _run_mc, "certify-all": _run_certify_all}


def _jobs(cfg: RunConfig) -> list[Job]:
    if cfg.command in WINDOW_COMMANDS:
        return [Job(cfg.command, a, f"b{_num(b)}", b=b) for a in cfg.alpha_list for b in cfg.b_list]
    return [Job(cfg.command, a, _num(e), eta=e) for a in cfg.alpha_list for e in cfg.eta_list]


def _workers(n_jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {cap!r}")
    return max(1, min(limit, n_jobs))


def _execute(cfg: RunConfig, job: Job, source) -> tuple[Path, bool]:
    try:
        doc, rows = SUITES[cfg.command](cfg, job, source)
    except (ConvergenceError, TailFitError, bl.ParameterError) as exc:
        # a computation that cannot be carried out certifies nothing
        log.warning("%s %s: %s", cfg.command, job.stem, exc)
        doc, rows = {"alpha": job.alpha, "eta": job.eta, "b": job.b, "reports": [],
                     "bound_ids": [], "error": f"{type(exc).__name__}: {exc}", "pass": False}, []
    doc["suite"] = cfg.command
    doc["config"] = {"abs_tol": cfg.quadrature.abs_tol, "rel_tol": cfg.quadrature.rel_tol,
                     "max_panels": cfg.quadrature.max_panels,
                     "freq_cutoff_eps": cfg.quadrature.freq_cutoff_eps}
    base = Path(cfg.output_path) / cfg.command
    path = base / f"{job.stem}.json"
    write_atomic(path, dumps(doc))
    if cfg.format == "csv":
        write_atomic(base / f"{job.stem}.csv", rows_to_csv(rows))
    return path, bool(doc["pass"])


def run(cfg: RunConfig) -> int:
    """Execute a validated config; returns the exit status."""
    try:
        cfg.validate()
        source = cfg.source()
        jobs = _jobs(cfg)
        workers = _workers(len(jobs))
    except (ConfigError, SourceError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    results = []
    if workers == 1:
        results = [_execute(cfg, j, source) for j in jobs]
    else:
        with cf.ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda j: _execute(cfg, j, source), jobs))
    failed = [str(p) for p, ok in results if not ok]
    for p, ok in results:
        log.info("%s %s", "pass" if ok else "FAIL", p)
    if failed:
        for p in failed:
            print(f"certificate failed: {p}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stable-debruijn", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--alpha", nargs="*", type=float, default=[], help="stability exponents in (0, 2)")
    p.add_argument("--eta", nargs="*", type=float, default=[], help="dispersions")
    p.add_argument("--b", nargs="*", type=float, default=[], help="window endpoints (eta in (b, 2b))")
    p.add_argument("--source", dest="source_path", default=None, help="source distribution JSON")
    p.add_argument("--output", dest="output_path", default="output")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--n-samples", type=int, default=1_000_000)
    p.add_argument("--orders", nargs="*", type=int, default=[0, 1, 2, 3])
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--max-panels", type=int, default=100_000)
    p.add_argument("--freq-cutoff-eps", type=float, default=1e-16)
    p.add_argument("--tail-switch-radius", type=float, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        qc = QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol, max_panels=args.max_panels,
                              freq_cutoff_eps=args.freq_cutoff_eps,
                              tail_switch_radius=args.tail_switch_radius)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    cfg = RunConfig(args.command, list(args.alpha), list(args.eta), list(args.b), args.source_path,
                    args.output_path, args.format, qc, args.seed, args.n_samples, tuple(args.orders))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
