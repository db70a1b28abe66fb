"""Dispatch an ExperimentConfig to the owning module and serialize the result."""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from ..bootstrap.regions import Box, Torus
from ..bootstrap.sampling import BoxPolicy, sample_bootstrap_tau
from ..family.difficulty import analyze_family
from ..geometry.events import make_checker, spanning_preconditions, spans
from ..geometry.snail import build_snail
from ..kcm.constraints import Boundary
from ..kcm.dynamics import KcmParams, sample_tau0_kcm
from ..rng import draw, stream_key
from .config import ExperimentConfig, parse_region
from .estimate import GeometryParams, estimate_alpha, estimate_event_prob
from .io import (manifest_line, read_tau_samples, table_body, write_tau_samples)

TRIAL_STREAM = 2


def code_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed, a pure function of (master_seed, trial index)."""
    return draw(stream_key(master_seed, TRIAL_STREAM), trial) >> 1


@dataclass
class RunResult:
    body: str  # deterministic given the config
    manifest: dict
    path: Path | None = None

    @property
    def text(self) -> str:
        return self.body + manifest_line(self.manifest)


def geometry_params(cfg: ExperimentConfig, fam, R=None) -> GeometryParams:
    return GeometryParams(
        family=fam,
        R=cfg.R[0] if R is None else R,
        L=Fraction(cfg.L),
        rbar=tuple(Fraction(r) for r in cfg.rbar),
        delta=Fraction(cfg.delta),
        w=cfg.w,
        side=cfg.side,
        u0=cfg.u0,
    )


def _analyze(cfg, fam) -> str:
    rows = []
    for line in analyze_family(fam).to_text().splitlines():
        key, _, value = line.partition(": ")
        if key.startswith("difficulty "):
            key, value = "difficulty", line[len("difficulty "):]
        rows.append((key, value))
    return table_body("family-report", ("field", "value"), rows)


def _bootstrap_tau(cfg, fam) -> str:
    policy = BoxPolicy(cfg.box_start, cfg.box_cap)
    out = []
    for q in cfg.q:
        for t in range(cfg.trials):
            out.append(sample_bootstrap_tau(fam, q, policy, trial_seed(cfg.master_seed, t)))
    return write_tau_samples(out)


def _kcm_tau(cfg, fam) -> str:
    kind, W, H = parse_region(cfg.region)
    region = Torus(W, H) if kind == "torus" else Box.centered(W, H)
    out = []
    for q in cfg.q:
        for t in range(cfg.trials):
            params = KcmParams(q, region, cfg.t_max, cfg.master_seed, Boundary(cfg.boundary))
            out.append(sample_tau0_kcm(params, fam, trial_seed(cfg.master_seed, t)))
    return write_tau_samples(out)


def _geometry(cfg, fam) -> str:
    regions = build_snail(geometry_params(cfg, fam).spec())
    tags = regions.tags()
    rows = [(x, y, r, s) for (x, y), (r, s) in sorted(tags.items(), key=lambda kv: (kv[0][1], kv[0][0]))]
    return table_body("snail-sites", ("x", "y", "region", "slice"), rows)


def _verify(cfg, fam) -> str:
    regions = build_snail(geometry_params(cfg, fam).spec())
    checker = make_checker(regions, fam, cfg.w)
    pre = ";".join(spanning_preconditions(regions)) or "-"
    rows = []
    for q in cfg.q:
        for t in range(cfg.trials):
            seed = trial_seed(cfg.master_seed, t)
            x = checker.sample_supergood(q, np.random.default_rng(seed))
            rep = checker.evaluate(x)
            ok = spans(checker.configuration(x), regions, fam)
            rows.append((q, t, seed, rep.sg, ok, rep.first_failure or "-", "-" if ok else pre))
    cols = ("q", "trial", "seed", "supergood", "spans", "first_failure", "failed_preconditions")
    return table_body("supergood-verify", cols, rows)


def _fit(cfg, fam) -> str:
    text = Path(cfg.input).read_text(encoding="utf-8")
    est = estimate_alpha(read_tau_samples(text))
    cols = ("q", "n", "n_finite", "n_truncated", "n_excluded", "median", "slope", "intercept", "stderr")
    rows = [r + (est.slope, est.intercept, est.stderr) for r in est.rows()]
    return table_body("scaling-fit", cols, rows)


def _event_prob(cfg, fam) -> str:
    rows = []
    for R in cfg.R:
        geo = geometry_params(cfg, fam, R)
        checker = geo.checker()
        for q in cfg.q:
            e = estimate_event_prob(cfg.event, checker, q, cfg.trials, cfg.master_seed)
            rows.append((cfg.event, fam.name, R, q, cfg.w, e.trials, e.hits, e.forced_sites,
                         e.p_hat, e.stderr, e.log_p))
    cols = ("event", "family", "R", "q", "w", "trials", "hits", "forced_sites", "p_hat", "stderr", "log_p")
    return table_body("event-prob", cols, rows)


_DISPATCH = {
    "analyze": _analyze,
    "bootstrap-tau": _bootstrap_tau,
    "kcm-tau": _kcm_tau,
    "geometry": _geometry,
    "verify": _verify,
    "fit": _fit,
    "event-prob": _event_prob,
}


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run one experiment; write body plus a manifest line to cfg.output when set."""
    cfg.validate()
    fam = cfg.load_family()
    t0 = time.perf_counter()
    body = _DISPATCH[cfg.mode](cfg, fam)
    manifest = {
        "mode": cfg.mode,
        "config_hash": cfg.digest(),
        "version": code_version(),
        "wall_time_s": round(time.perf_counter() - t0, 6),
    }
    res = RunResult(body, manifest)
    if cfg.output:
        res.path = Path(cfg.output)
        res.path.write_text(res.text, encoding="utf-8")
    return res
