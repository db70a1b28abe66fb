"""Scaling-exponent fits and event-probability Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from ..errors import InsufficientData
from ..family.directions import Direction
from ..family.family import UpdateFamily
from ..family.quasistable import quasi_stable_set
from ..geometry.events import EventChecker, has_run, make_checker, side_has_helping_set
from ..geometry.snail import BOTH, SnailSpec, build_snail
from ..rng import stream_key, uniform_array

MIN_SAMPLES = 10
MIN_Q = 3


@dataclass
class ScalingEstimate:
    slope: float
    intercept: float
    stderr: float
    q_window: tuple  # (q_min, q_max) of the fitted points
    medians: dict  # q -> median tau over the usable samples
    n_samples: dict  # q -> number of rows
    n_finite: dict  # q -> non-truncated rows
    n_excluded: dict  # q -> finite rows with tau <= e
    n_truncated: dict  # q -> truncated rows

    def rows(self) -> list:
        return [(q, self.n_samples[q], self.n_finite[q], self.n_truncated[q], self.n_excluded[q], self.medians[q])
                for q in sorted(self.medians, reverse=True)]


def estimate_alpha(samples, transform: str = "loglog") -> ScalingEstimate:
    """OLS of log log(median tau) on log(1/q), one point per q.

    Truncated samples are dropped; finite tau <= e are dropped and counted
    because log log is undefined or negative there. Each q needs at least
    MIN_SAMPLES usable samples and at least MIN_Q values of q are required.
    """
    if transform != "loglog":
        raise ValueError(f"unknown transform {transform!r}")
    by_q: dict[float, list] = {}
    for s in samples:
        by_q.setdefault(float(s.q), []).append(s)
    medians, n_all, n_fin, n_exc, n_tr = {}, {}, {}, {}, {}
    for q, group in by_q.items():
        finite = [s.tau for s in group if s.finite]
        usable = [t for t in finite if t > math.e]
        n_all[q], n_fin[q], n_tr[q] = len(group), len(finite), len(group) - len(finite)
        n_exc[q] = len(finite) - len(usable)
        if len(usable) < MIN_SAMPLES:
            raise InsufficientData(f"q={q}: {len(usable)} usable samples, need {MIN_SAMPLES}")
        medians[q] = float(np.median(usable))
    if len(medians) < MIN_Q:
        raise InsufficientData(f"{len(medians)} distinct q values, need {MIN_Q}")
    qs = sorted(medians)
    x = np.array([math.log(1 / q) for q in qs])
    y = np.array([math.log(math.log(medians[q])) for q in qs])
    fit = stats.linregress(x, y)
    return ScalingEstimate(float(fit.slope), float(fit.intercept), float(fit.stderr),
                           (qs[0], qs[-1]), medians, n_all, n_fin, n_exc, n_tr)


# ------------------------------------------------------------------ events

@dataclass(frozen=True)
class GeometryParams:
    family: UpdateFamily
    R: int = 8
    L: Fraction = Fraction(60)
    rbar: tuple = (Fraction(10), Fraction(2), Fraction(0))
    delta: Fraction = Fraction(1, 5)
    w: int = 4
    side: str = BOTH
    u0: tuple = (-1, 0)

    def spec(self) -> SnailSpec:
        qs = quasi_stable_set(self.family, Direction(*self.u0))
        spec = SnailSpec.from_reals(qs, self.R, self.L, self.rbar, self.delta, self.w, self.side)
        spec.check()
        return spec

    def checker(self) -> EventChecker:
        return make_checker(build_snail(self.spec()), self.family, self.w)


@dataclass
class EventEstimate:
    event: str
    p_hat: float
    stderr: float
    log_p: float
    hits: int
    trials: int
    forced_sites: int = 0  # sites whose infection probability enters exactly as q^n
    notes: list = field(default_factory=list)


def _event_parts(checker: EventChecker, event: str):
    """(forced index array, test on x) for an event name."""
    sb = [(idx, tmpl) for _, _, _, idx, tmpl in checker.sb]
    w = checker.w
    if event == "G(T)" or event.startswith("G(T"):
        want = None if event == "G(T)" else event[3:-1]
        st = [idx for _, (i, sg), idx in checker.st if want is None or f"{i}{sg}" == want]
        if want is not None and not any(f"{i}{sg}" == want for i, sg in checker.regions.T):
            raise ValueError(f"{event}: no such trapezoid")
        return None, lambda x: all(has_run(x[i], w) for i in st)
    g_bo = lambda x: all(side_has_helping_set(x[i], t, w) for i, t in sb)
    if event == "G(Bo)":
        return None, g_bo
    forced = np.union1d(checker.A_idx, checker.HA_idx)
    if event == "SG(B)":
        return forced, g_bo
    if event == "SG(V)":
        side = checker.regions.spec.side
        signs = {"Right": "+", "Left": "-"}.get(side, "+-")
        st = [idx for _, (i, sg), idx in checker.st if sg in signs]
        return forced, lambda x: g_bo(x) and all(has_run(x[i], w) for i in st)
    raise ValueError(f"unknown event {event!r}")


def estimate_event_prob(event: str, geometry, q: float, trials: int, seed: int = 0) -> EventEstimate:
    """Monte Carlo estimate of the product-measure probability of a snail event.

    For super-good events the fully infected frame (A and the shifted
    half-annulus) contributes the exact factor q^n and only the remaining
    sub-events are sampled: a plain estimate would almost never hit.
    Site uniforms for trial t are counter-keyed on (seed, t), so results do
    not depend on the sampling order.
    """
    if trials < 1:
        raise InsufficientData("need at least one trial")
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    checker = geometry if isinstance(geometry, EventChecker) else geometry.checker()
    forced, test = _event_parts(checker, event)
    N = len(checker.sites)
    key = stream_key(seed, 0)
    base = np.arange(N, dtype=np.uint64)
    hits = 0
    for t in range(trials):
        x = uniform_array(key, base + np.uint64(t * N)) < q
        if forced is not None:
            x[forced] = True
        hits += bool(test(x))
    f = hits / trials
    n_forced = 0 if forced is None else len(forced)
    scale = q ** n_forced
    log_p = n_forced * math.log(q) + (math.log(f) if hits else -math.inf)
    return EventEstimate(event, scale * f, scale * math.sqrt(f * (1 - f) / trials), log_p, hits, trials, n_forced)
