"""Difficulties of directions, helping sets, and the family difficulty.

Infinite growth of ``[H_u ∪ Z] ∩ l_u`` is certified inside a finite strip.  In
line coordinates ``(s, h)`` (see :class:`LineFrame`) the open half-plane H_u is
``h < 0``.  The closure of ``H_u ∪ Z`` is computed in the window
``s in [-W, W + span]``, ``h in [0, height)`` with everything outside treated as
healthy, which under-approximates the true closure.  A certificate needs

1. the infected part of l_u to reach beyond ``W/2`` on some side, and
2. a block ``X`` of the windowed closure (all infected cells with s in an
   interval of width ``B``, containing a cell of l_u) such that the closure of
   ``H_u ∪ X`` contains ``X + k t`` for some ``k >= 1`` (or ``X - k t`` on the
   left).  Translation invariance then gives ``X + j k t`` for every j, so
   infinitely many sites of l_u are infected.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..bootstrap.kernels import closure_times, flatten_rules
from ..errors import InfiniteStableSet, SearchExhausted
from .directions import Direction, LineFrame, angle_key, cross, gap_representative, sort_ccw
from .family import (
    CRITICAL,
    SUBCRITICAL,
    SUPERCRITICAL,
    StableSet,
    UpdateFamily,
    classify_kind,
    is_stable,
    stable_set,
)

INFINITY = math.inf


@dataclass(frozen=True)
class SearchParams:
    radius: int | None = None  # L-infinity search radius; default 3 * diameter
    n_max: int = 3
    window: int | None = None  # half-length W of the strip window
    height: int | None = None  # strip height above l_u
    line_only: bool = False  # restrict Z to l_u

    def resolved_radius(self, fam: UpdateFamily) -> int:
        r = 3 * fam.diameter if self.radius is None else self.radius
        if r < fam.diameter:
            raise ValueError("search radius must be at least the family diameter")
        return r


@dataclass(frozen=True)
class Certificate:
    direction: Direction
    witness: tuple  # sites in original coordinates
    grows_right: bool
    grows_left: bool
    block_start: int
    block_width: int
    period: int  # translation (in units of the line period t) reproducing the block
    window: int
    height: int


@dataclass(frozen=True)
class Difficulty:
    value: float  # nonnegative int or INFINITY
    witness: tuple | None = None
    certificate: Certificate | None = None

    def __str__(self):
        v = "inf" if self.value == INFINITY else str(int(self.value))
        if self.witness:
            return v + " [" + ";".join(f"({a},{b})" for a, b in self.witness) + "]"
        return v


@dataclass(frozen=True)
class HelpingSetSpec:
    direction: Direction
    base_set: tuple  # Z, on or above l_u
    offsets: tuple  # a_1..a_m on l_u
    period: tuple  # b on l_u
    m: int
    bidirectional: bool = True

    def line_positions(self) -> tuple[int, ...]:
        """Positions of Z along l_u in units of the period (requires Z on l_u)."""
        fr = LineFrame(self.direction)
        out = []
        for x, y in self.base_set:
            s, h = fr.to_sh(x, y)
            if h != 0:
                raise ValueError("helping set is not on the line")
            out.append(s)
        return tuple(sorted(out))


# ---------------------------------------------------------------- strip sim

class _Strip:
    """Rule geometry of a family in the line frame of a direction."""

    def __init__(self, fam: UpdateFamily, u: Direction, height: int | None):
        self.frame = LineFrame(u)
        rules_sh = [[self.frame.to_sh(a, b) for a, b in r] for r in fam.sorted_rules()]
        self.rules_sh = rules_sh
        self.ds, self.dh, self.starts = flatten_rules(rules_sh)
        self.sreach = max(1, int(np.abs(self.ds).max()))
        self.hreach = max(1, int(np.abs(self.dh).max()))
        self.below = max(1, int(-self.dh.min()) if self.dh.min() < 0 else 1)
        self.height = height

    def closure(self, cells, s_lo, s_hi, height):
        """Closure of H_u ∪ cells in the window; returns a bool grid [h + below, s - s_lo]."""
        W = s_hi - s_lo + 1
        H = self.below + height
        state = np.zeros((H, W), np.uint8)
        state[: self.below, :] = 1
        for s, h in cells:
            if s_lo <= s <= s_hi and 0 <= h < height:
                state[h + self.below, s - s_lo] = 1
        mask = np.ones((H, W), np.uint8)
        t = closure_times(state, mask, False, self.ds, self.dh, self.starts)
        return t >= 0


def _certify(strip: _Strip, Z_sh, window: int, height: int):
    """Return (grows_right, grows_left, block_start, width, period) or None."""
    span = max(s for s, _ in Z_sh)
    s_lo, s_hi = -window, window + span
    grid = strip.closure(Z_sh, s_lo, s_hi, height)
    b = strip.below
    line = grid[b]
    inf_s = np.nonzero(line)[0] + s_lo
    if inf_s.size == 0:
        return None
    half = window // 2
    right = inf_s.max() >= span + half
    left = inf_s.min() <= -half
    if not (right or left):
        return None
    D = strip.sreach
    result = None
    for sign in (1, -1):
        if (sign == 1 and not right) or (sign == -1 and not left):
            continue
        found = _periodic_block(strip, grid, s_lo, sign, span, half, D, height)
        if found is not None:
            if result is None:
                result = (sign, *found)
    if result is None:
        return None
    sign, a, width, k = result
    return right, left, a, width, sign * k


def _periodic_block(strip, grid, s_lo, sign, span, half, D, height):
    b = strip.below
    for width in (D, 2 * D, 3 * D, 4 * D + 2):
        kmax = 2 * width + 4 * D + 8
        for shift in range(0, 2 * D + 2):
            a = (span + half // 2 + shift) if sign == 1 else (-half // 2 - shift - width + 1)
            cols = slice(a - s_lo, a - s_lo + width)
            block = grid[b:, cols]
            if not block[0].any():
                continue
            hs, ss = np.nonzero(block)
            X = [(int(s) + a, int(h)) for h, s in zip(hs, ss)]
            lo = a - 2 * D - 2 if sign == 1 else a - kmax - 2 * D - 2
            hi = a + width + kmax + 2 * D + 2 if sign == 1 else a + width + 2 * D + 2
            sub = strip.closure(X, lo, hi, height)
            for k in range(1, kmax + 1):
                if all(sub[h + b, s + sign * k - lo] for s, h in X):
                    return a, width, k
    return None


def _default_window(strip: _Strip, span: int) -> int:
    return 8 * (span + strip.sreach) + 48


def certify_witness(u: Direction, fam: UpdateFamily, witness, window=None, height=None):
    """Re-run the growth certificate for an explicit witness (original coordinates)."""
    strip = _Strip(fam, u, height)
    fr = strip.frame
    Z = [fr.to_sh(x, y) for x, y in witness]
    if any(h < 0 for _, h in Z):
        raise ValueError("witness must lie outside H_u")
    smin = min(s for s, _ in Z)
    Z = [(s - smin, h) for s, h in Z]
    span = max(s for s, _ in Z)
    hmax = max(h for _, h in Z)
    W = window or _default_window(strip, span)
    Ht = height or (hmax + 4 * strip.hreach + 2)
    return _certify(strip, Z, W, Ht) is not None


def _candidates(fam, u, radius, line_only):
    """Canonical translation classes of candidate cells: s in [0, S], h in [0, Hm]."""
    fr = LineFrame(u)
    pts = [fr.to_sh(x, y) for x in range(-radius, radius + 1) for y in range(-radius, radius + 1)]
    pts = [p for p in pts if p[1] >= 0]
    S = max(s for s, _ in pts) - min(s for s, _ in pts)
    Hm = 0 if line_only else max(h for _, h in pts)
    return S, Hm


def search_difficulty(u: Direction, fam: UpdateFamily, search: SearchParams = SearchParams()):
    """Least n <= n_max with a certified Z of size n; raises SearchExhausted."""
    radius = search.resolved_radius(fam)
    strip = _Strip(fam, u, search.height)
    fr = strip.frame
    S, Hm = _candidates(fam, u, radius, search.line_only)
    cells = [(s, h) for s in range(S + 1) for h in range(Hm + 1)]
    cells.sort(key=lambda c: (c[0] + c[1], c[1], c[0]))
    index = {c: i for i, c in enumerate(cells)}
    for n in range(1, search.n_max + 1):
        for h0 in range(Hm + 1):
            first = (0, h0)
            rest = [c for c in cells if c > first and c[0] <= S]
            for combo in itertools.combinations(rest, n - 1):
                Z = (first,) + tuple(sorted(combo, key=index.__getitem__))
                span = max(s for s, _ in Z)
                hmax = max(h for _, h in Z)
                W = search.window or _default_window(strip, span)
                Ht = search.height or (hmax + 4 * strip.hreach + 2)
                cert = _certify(strip, Z, W, Ht)
                if cert is None:
                    continue
                right, left, a, width, k = cert
                witness = tuple(fr.from_sh(s, h) for s, h in Z)
                return Difficulty(
                    n,
                    witness,
                    Certificate(u, witness, right, left, a, width, k, W, Ht),
                )
    raise SearchExhausted(u, search.n_max, radius)


def difficulty(u: Direction, fam: UpdateFamily, search: SearchParams = SearchParams(),
               S: StableSet | None = None) -> Difficulty:
    if not is_stable(u, fam):
        return Difficulty(0)
    S = S or stable_set(fam)
    if not S.is_isolated(u):
        return Difficulty(INFINITY)
    return search_difficulty(u, fam, search)


def find_helping_set(u: Direction, fam: UpdateFamily, radius: int | None = None,
                     line_only: bool = False, n_max: int = 3) -> HelpingSetSpec:
    """A witness Z of size alpha(u) with its line period and disjoint placement offsets."""
    d = difficulty(u, fam, SearchParams(radius=radius, n_max=n_max, line_only=line_only))
    if d.value == 0:
        return HelpingSetSpec(u, (), ((0, 0),), LineFrame(u).t, 1, True)
    if d.value == INFINITY:
        raise ValueError(f"{u} is not an isolated stable direction")
    fr = LineFrame(u)
    cert = d.certificate
    bidir = cert.grows_right and cert.grows_left
    span = max(fr.to_sh(x, y)[0] for x, y in d.witness) - min(fr.to_sh(x, y)[0] for x, y in d.witness)
    m = 1 if bidir else 2
    offsets = tuple(fr.from_sh(j * (span + 1), 0) for j in range(m))
    return HelpingSetSpec(u, d.witness, offsets, fr.t, m, bidir)


# ------------------------------------------------------ family difficulty

def _feature_points(S: StableSet) -> list[Direction]:
    pts = set(S.isolated_points)
    for a in S.arcs:
        pts.add(a.start)
        pts.add(a.end)
    pts |= {-p for p in list(pts)}
    return sort_ccw(pts)


def family_difficulty(fam: UpdateFamily, search: SearchParams = SearchParams(),
                      S: StableSet | None = None, difficulties: dict | None = None):
    """(alpha(U), midpoint) minimizing the max difficulty over open semicircles.

    The candidate semicircles are (p, p + pi) with p running over feature points
    of S and their antipodes; starting a semicircle inside a gap between such
    points only adds directions, so these candidates attain the minimum.
    """
    S = S or stable_set(fam)
    if S.empty:
        return 0, Direction(1, 0)
    if difficulties is None:
        difficulties = {p: difficulty(p, fam, search, S).value for p in S.isolated_points}
    P = _feature_points(S)
    n = len(P)
    atoms = []
    for i, p in enumerate(P):  # P is closed under negation, so n >= 2
        atoms.append(p)
        atoms.append(gap_representative(p, P[(i + 1) % n]))

    def value(a):
        if S.in_arc(a):
            return INFINITY
        if S.is_isolated(a):
            return difficulties[a]
        return 0

    vals = {a: value(a) for a in atoms}
    best, best_mid = None, None
    for p in P:
        worst = max((vals[a] for a in atoms if cross(p, a) > 0), default=0)
        mid = p.rot_ccw()
        if best is None or worst < best or (worst == best and angle_key(mid) < angle_key(best_mid)):
            best, best_mid = worst, mid
    return best, best_mid


# -------------------------------------------------------- classification

@dataclass(frozen=True)
class Classification:
    kind: str
    alpha: float | None
    witness_semicircle: Direction | None
    stable_set_finite: bool


def classify(fam: UpdateFamily, search: SearchParams = SearchParams()) -> Classification:
    S = stable_set(fam)
    kind = classify_kind(S)
    try:
        alpha, mid = family_difficulty(fam, search, S)
    except SearchExhausted:
        alpha, mid = None, None
    return Classification(kind, alpha, mid, S.finite)


REFINED_LABELS = {
    0: "balanced-unrooted",
    1: "balanced-rooted",
    2: "unbalanced-unrooted",
    3: "unbalanced-rooted",
}


def refined_class(fam: UpdateFamily, search: SearchParams = SearchParams(),
                  S: StableSet | None = None, difficulties: dict | None = None) -> int:
    """Four-way split on D = {u : alpha(u) > alpha(U)}."""
    S = S or stable_set(fam)
    if not S.finite:
        raise InfiniteStableSet("refined classes need a finite stable set")
    if difficulties is None:
        difficulties = {p: difficulty(p, fam, search, S).value for p in S.isolated_points}
    alpha, _ = family_difficulty(fam, search, S, difficulties)
    D = {u for u, a in difficulties.items() if a > alpha}
    has_opposite = any(-u in D for u in D)
    if len(D) <= 1:
        return 0
    if not has_opposite:
        return 1
    if len(D) == 2:
        return 2
    return 3


@dataclass
class FamilyReport:
    family: UpdateFamily
    search: SearchParams
    stable: StableSet
    kind: str
    difficulties: dict = field(default_factory=dict)
    alpha: float | None = None
    midpoint: Direction | None = None
    refined: int | None = None
    notes: list = field(default_factory=list)

    def to_text(self) -> str:
        fam = self.family
        lines = [
            f"family: {fam.name}",
            f"rules: {len(fam.rules)}",
            f"diameter: {fam.diameter}",
            f"search: radius={self.search.resolved_radius(fam)} n_max={self.search.n_max}"
            f" line_only={str(self.search.line_only).lower()}",
        ]
        if self.stable.arcs:
            for a in self.stable.arcs:
                lines.append(f"stable_arc: {a.start!r} -> {a.end!r}" + (" (full circle)" if a.full else ""))
        else:
            lines.append("stable_arc: none")
        lines.append("isolated: " + (" ".join(repr(p) for p in self.stable.isolated_points) or "none"))
        for u in sort_ccw(self.difficulties):
            d = self.difficulties[u]
            lines.append(f"difficulty {u!r} -> {d}")
        a = "unknown" if self.alpha is None else ("inf" if self.alpha == INFINITY else str(int(self.alpha)))
        mid = "" if self.midpoint is None else f" (semicircle midpoint {self.midpoint!r})"
        lines.append(f"alpha: {a}{mid}")
        lines.append(f"class: {self.kind}")
        if self.refined is None:
            lines.append("refined: n/a")
        else:
            lines.append(f"refined: {self.refined} {REFINED_LABELS[self.refined]}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines) + "\n"


def analyze_family(fam: UpdateFamily, search: SearchParams = SearchParams()) -> FamilyReport:
    S = stable_set(fam)
    rep = FamilyReport(fam, search, S, classify_kind(S))
    exhausted = False
    for p in S.isolated_points:
        try:
            rep.difficulties[p] = difficulty(p, fam, search, S)
        except SearchExhausted as e:
            exhausted = True
            rep.notes.append(str(e))
    if not exhausted:
        vals = {p: d.value for p, d in rep.difficulties.items()}
        rep.alpha, rep.midpoint = family_difficulty(fam, search, S, vals)
        if S.finite and rep.kind == CRITICAL:
            rep.refined = refined_class(fam, search, S, vals)
    if not S.finite:
        rep.notes.append("stable set is infinite; refined class undefined")
    return rep
