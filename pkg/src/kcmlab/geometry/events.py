"""Good and super-good events on a snail, their sampler and the spanning check."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bootstrap.closure import closure
from ..bootstrap.regions import Configuration, SiteSet
from ..errors import AssumptionUnmet, SearchExhausted
from ..family.difficulty import INFINITY, HelpingSetSpec, difficulty, find_helping_set
from ..family.family import UpdateFamily
from ..family.directions import Direction
from .snail import Slice, SnailRegions


@dataclass(frozen=True)
class LineTemplate:
    """A helping set on the line: offsets along the slice order and the copy count."""

    direction: Direction
    offsets: tuple  # sorted, starting at 0; empty when the direction is unstable
    m: int

    @classmethod
    def from_spec(cls, spec: HelpingSetSpec) -> "LineTemplate":
        if not spec.base_set:
            return cls(spec.direction, (), 0)
        pos = sorted(-s for s in spec.line_positions())
        return cls(spec.direction, tuple(p - pos[0] for p in pos), spec.m)

    def sites_at(self, anchor_pos: int) -> list[int]:
        return [anchor_pos + o for o in self.offsets]


def line_template(u: Direction, fam: UpdateFamily, radius: int | None = None) -> LineTemplate:
    """Helping-set template on l_u; raises AssumptionUnmet when none of size alpha(u) exists."""
    full = difficulty(u, fam)
    if full.value == 0:
        return LineTemplate(u, (), 0)
    if full.value == INFINITY:
        raise AssumptionUnmet(f"direction {u} is not an isolated stable direction")
    try:
        spec = find_helping_set(u, fam, radius=radius, line_only=True, n_max=int(full.value))
    except SearchExhausted as exc:
        raise AssumptionUnmet(f"no helping set on the line l_u for u = {u}") from exc
    if len(spec.base_set) != full.value:
        raise AssumptionUnmet(f"line helping set for {u} has size {len(spec.base_set)} > alpha = {full.value}")
    return LineTemplate.from_spec(spec)


def front_templates(qs, fam: UpdateFamily) -> dict:
    return {i: line_template(qs.u(i), fam) for i in range(-qs.k + 1, qs.k)}


def end_margin(w: int, normal: Direction) -> int:
    """Lattice steps along the line needed for Euclidean distance >= w."""
    e = 0
    while e * e * normal.norm2 < w * w:
        e += 1
    return e


def has_run(flags: np.ndarray, w: int) -> bool:
    if len(flags) < w:
        return False
    c = np.concatenate(([0], np.cumsum(flags, dtype=np.int64)))
    return bool(np.any(c[w:] - c[:-w] == w))


def helping_anchors(flags: np.ndarray, tmpl: LineTemplate, margin: int) -> list[int]:
    """Indices a with every site of the copy infected and at least `margin` steps from both ends."""
    n = len(flags)
    if not tmpl.offsets:
        return []
    span = tmpl.offsets[-1]
    lo, hi = margin, n - 1 - margin - span
    out = []
    for a in range(lo, hi + 1):
        if all(flags[a + o] for o in tmpl.offsets):
            out.append(a)
    return out


def disjoint_copies(anchors: list[int], offsets, m: int) -> list[int] | None:
    """m anchors whose copies are pairwise disjoint, found by backtracking."""
    def rec(start, chosen, used):
        if len(chosen) == m:
            return list(chosen)
        for idx in range(start, len(anchors)):
            cells = {anchors[idx] + o for o in offsets}
            if cells & used:
                continue
            got = rec(idx + 1, chosen + [anchors[idx]], used | cells)
            if got is not None:
                return got
        return None

    return rec(0, [], set())


def side_has_helping_set(flags: np.ndarray, tmpl: LineTemplate, w: int) -> bool:
    if tmpl.m == 0 or not tmpl.offsets or len(flags) == 0:
        return True
    anchors = helping_anchors(flags, tmpl, end_margin(w, tmpl.direction))
    return disjoint_copies(anchors, tmpl.offsets, tmpl.m) is not None


def event_sort_key(name: str):
    """Lexicographic sub-event order: A < HA < SB (by j, i) < ST (by i, side, j)."""
    if name == "A":
        return (0,)
    if name == "HA":
        return (1,)
    head, rest = name.split("[")
    vals = dict(kv.split("=") for kv in rest.rstrip("]").split(","))
    if head == "SB":
        return (2, int(vals["j"]), int(vals["i"]))
    return (3, int(vals["i"]), 0 if head == "ST+" else 1, int(vals["j"]))


@dataclass
class EventReport:
    events: dict  # name -> bool, in lexicographic sub-event order
    aggregates: dict = field(default_factory=dict)

    @property
    def first_failure(self) -> str | None:
        for name, ok in self.events.items():
            if not ok:
                return name
        return None

    @property
    def sg(self) -> bool:
        return self.aggregates["SG(V)"]

    def to_text(self) -> str:
        lines = [f"{k} {int(v)}" for k, v in self.aggregates.items()]
        lines += [f"{k} {int(v)}" for k, v in self.events.items()]
        lines.append(f"first_failure {self.first_failure or '-'}")
        return "\n".join(lines) + "\n"


class EventChecker:
    """Compiles the sub-events of a snail into index arrays over its site list."""

    def __init__(self, regions: SnailRegions, w: int, templates: dict):
        self.regions = regions
        self.w = w
        self.templates = templates
        self.sites = sorted(regions.V, key=lambda p: (p[1], p[0]))
        self.index = {p: n for n, p in enumerate(self.sites)}
        self.A_idx = self._idx(regions.A)
        self.HA_idx = self._idx(regions.HA_shift)
        self.sb = []  # (name, j, i, idx, template)
        for j, sides in regions.B_slices:
            for i, sl in sides.items():
                self._check_contiguous(sl)
                self.sb.append((f"SB[i={i},j={j}]", j, i, self._idx(sl.sites), templates[i]))
        self.st = []  # (name, (i, sign), idx)
        for (i, sg), slices in regions.T_slices.items():
            for sl in slices:
                self._check_contiguous(sl)
                self.st.append((f"ST{sg}[i={i},j={sl.j}]", (i, sg), self._idx(sl.sites)))
        self.names = sorted(["A", "HA"] + [e[0] for e in self.sb] + [e[0] for e in self.st],
                            key=event_sort_key)

    def _idx(self, sites) -> np.ndarray:
        if isinstance(sites, (set, frozenset)):
            sites = sorted(sites, key=lambda p: (p[1], p[0]))
        return np.array([self.index[p] for p in sites], dtype=np.int64)

    @staticmethod
    def _check_contiguous(sl: Slice):
        if any(b - a != 1 for a, b in zip(sl.positions, sl.positions[1:])):
            raise ValueError(f"slice {sl.label} is not a contiguous lattice segment")

    def flags(self, omega) -> np.ndarray:
        """Infection indicator over self.sites from a Configuration or a set of infected sites."""
        if isinstance(omega, np.ndarray):
            return omega.astype(bool)
        infected = omega.infected_sites() if isinstance(omega, Configuration) else omega
        return np.fromiter((p in infected for p in self.sites), dtype=bool, count=len(self.sites))

    def evaluate(self, x: np.ndarray) -> EventReport:
        ev = {"A": bool(x[self.A_idx].all()), "HA": bool(x[self.HA_idx].all())}
        for name, _, _, idx, tmpl in self.sb:
            ev[name] = side_has_helping_set(x[idx], tmpl, self.w)
        for name, _, idx in self.st:
            ev[name] = has_run(x[idx], self.w)
        ordered = {k: ev[k] for k in self.names}
        return EventReport(ordered, self._aggregate(ev))

    def _aggregate(self, ev) -> dict:
        agg = {}
        g_bo = all(ev[e[0]] for e in self.sb)
        sg_b = ev["A"] and ev["HA"] and g_bo
        agg["G(Bo)"] = g_bo
        agg["SG(B)"] = sg_b
        traps = {}
        for name, key, _ in self.st:
            traps[key] = traps.get(key, True) and ev[name]
        for (i, sg) in sorted(self.regions.T, key=lambda t: (t[1] == "-", t[0])):
            agg[f"G(T{i}{sg})"] = traps.get((i, sg), True)
        for sg in "+-":
            agg[f"SG(V{sg})"] = sg_b and all(v for (i, s), v in traps.items() if s == sg)
        side = self.regions.spec.side
        parts = [agg["SG(V+)"]] if side == "Right" else [agg["SG(V-)"]] if side == "Left" else [agg["SG(V+)"], agg["SG(V-)"]]
        agg["SG(V)"] = all(parts)
        return agg

    def check(self, omega) -> EventReport:
        return self.evaluate(self.flags(omega))

    # ---- conditional sampler using the product structure
    def sample_supergood(self, q: float, rng: np.random.Generator, max_tries: int = 100000) -> np.ndarray:
        """A draw from the product measure (infection probability q) conditioned on SG(V).

        A and HA+Lu0 are infected, the annulus interior is free, and each base
        slice and trapezoid slice is resampled independently until its own
        sub-event holds.
        """
        x = rng.random(len(self.sites)) < q
        x[self.A_idx] = True
        x[self.HA_idx] = True
        by_j: dict[int, list] = {}
        for name, j, i, idx, tmpl in self.sb:
            by_j.setdefault(j, []).append((idx, tmpl))
        for j, sides in sorted(by_j.items()):
            part = np.unique(np.concatenate([idx for idx, _ in sides]))
            for _ in range(max_tries):
                x[part] = rng.random(len(part)) < q
                if all(side_has_helping_set(x[idx], tmpl, self.w) for idx, tmpl in sides):
                    break
            else:
                raise RuntimeError(f"base slice {j}: rejection sampling did not terminate")
        seen = set()
        for name, key, idx in self.st:
            sig = tuple(idx.tolist())
            if sig in seen:  # T_0^- coincides with T_0^+
                continue
            seen.add(sig)
            for _ in range(max_tries):
                x[idx] = rng.random(len(idx)) < q
                if has_run(x[idx], self.w):
                    break
            else:
                raise RuntimeError(f"{name}: rejection sampling did not terminate")
        return x

    def configuration(self, x: np.ndarray) -> Configuration:
        return Configuration.from_sites(SiteSet(self.regions.V), [p for p, b in zip(self.sites, x) if b])


def make_checker(regions: SnailRegions, fam: UpdateFamily, w: int | None = None) -> EventChecker:
    w = regions.spec.w if w is None else w
    return EventChecker(regions, w, front_templates(regions.spec.qs, fam))


def check_events(omega, regions: SnailRegions, w: int | None = None, fam: UpdateFamily | None = None,
                 templates: dict | None = None) -> EventReport:
    """Evaluate every sub-event of the super-good event on omega."""
    w = regions.spec.w if w is None else w
    if templates is None:
        if fam is None:
            raise ValueError("helping-set templates need the update family")
        templates = front_templates(regions.spec.qs, fam)
    return EventChecker(regions, w, templates).check(omega)


def sample_supergood(regions: SnailRegions, fam: UpdateFamily, q: float, seed: int, w: int | None = None):
    checker = make_checker(regions, fam, w)
    x = checker.sample_supergood(q, np.random.default_rng(seed))
    return checker.configuration(x)


def spans(omega, regions: SnailRegions, fam: UpdateFamily) -> bool:
    """Whether the closure of omega restricted to V is all of V."""
    V = SiteSet(regions.V)
    infected = omega.infected_sites() if isinstance(omega, Configuration) else omega
    cfg = Configuration.from_sites(V, [p for p in infected if p in regions.V])
    return closure(cfg, fam).count == len(regions.V)


def verify_supergood_spans(omega, regions: SnailRegions, fam: UpdateFamily, w: int | None = None,
                           checker: EventChecker | None = None) -> bool:
    checker = checker or make_checker(regions, fam, w)
    rep = checker.check(omega)
    if not rep.sg:
        raise ValueError(f"omega is not super good (first failure {rep.first_failure})")
    return spans(omega, regions, fam)


def spanning_preconditions(regions: SnailRegions) -> list[str]:
    """Strip-lemma preconditions (slice length at least w^2 lattice steps) that fail."""
    w = regions.spec.w
    out = []
    for key, slices in sorted(regions.T_slices.items()):
        for sl in slices:
            if len(sl.sites) < w * w:
                out.append(f"{sl.label}: {len(sl.sites)} sites < w^2 = {w * w}")
    for j, sides in regions.B_slices:
        for i, sl in sides.items():
            if len(sl.sites) < w * w:
                out.append(f"{sl.label}: {len(sl.sites)} sites < w^2 = {w * w}")
    return out
