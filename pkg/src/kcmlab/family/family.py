"""Update families, the family file format, stable sets and classification."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

from ..errors import EmptyFamily, EmptyRule, FamilySyntaxError, OriginInRule
from .directions import (
    Direction,
    ccw_from,
    cross,
    gap_representative,
    in_closed_arc,
    sort_ccw,
)

Site = tuple[int, int]

_PAIR = re.compile(r"^\s*(-?\d+)\s+(-?\d+)\s*$")


@dataclass(frozen=True)
class UpdateFamily:
    rules: tuple[frozenset, ...]
    name: str = "family"

    def __post_init__(self):
        if not self.rules:
            raise EmptyFamily("family has no rules")
        for r in self.rules:
            if not r:
                raise EmptyRule("empty rule")
            if (0, 0) in r:
                raise OriginInRule("rule contains the origin")

    @classmethod
    def from_rules(cls, rules, name="family") -> "UpdateFamily":
        """Build from any iterable of site iterables; duplicate rules are merged."""
        seen, out = set(), []
        for r in rules:
            fr = frozenset((int(a), int(b)) for a, b in r)
            if fr not in seen:
                seen.add(fr)
                out.append(fr)
        out.sort(key=lambda r: sorted(r))
        return cls(tuple(out), name)

    @cached_property
    def diameter(self) -> int:
        return max(max(abs(a), abs(b)) for r in self.rules for a, b in r)

    @cached_property
    def sites(self) -> tuple[Site, ...]:
        return tuple(sorted({s for r in self.rules for s in r}))

    def sorted_rules(self) -> list[list[Site]]:
        return [sorted(r) for r in self.rules]

    def with_rule(self, rule) -> "UpdateFamily":
        return UpdateFamily.from_rules(list(self.rules) + [rule], self.name)

    def rotated(self, quarter_turns: int = 1) -> "UpdateFamily":
        def rot(p):
            x, y = p
            for _ in range(quarter_turns % 4):
                x, y = -y, x
            return (x, y)

        return UpdateFamily.from_rules([[rot(p) for p in r] for r in self.rules], self.name)

    def negated(self) -> "UpdateFamily":
        return UpdateFamily.from_rules([[(-a, -b) for a, b in r] for r in self.rules], self.name)

    def to_text(self) -> str:
        lines = [f"# {self.name}"]
        for r in self.sorted_rules():
            lines.append("; ".join(f"{a} {b}" for a, b in r))
        return "\n".join(lines) + "\n"


def parse_family(text: str, name: str = "family") -> UpdateFamily:
    """Parse the family file format: one rule per line, sites "x y" separated by ';'."""
    rules = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sites = []
        for chunk in line.split(";"):
            if not chunk.strip():
                raise EmptyRule("empty site entry", lineno)
            m = _PAIR.match(chunk)
            if not m:
                raise FamilySyntaxError(f"malformed site {chunk.strip()!r}", lineno)
            p = (int(m.group(1)), int(m.group(2)))
            if p == (0, 0):
                raise OriginInRule("rule contains the origin", lineno)
            sites.append(p)
        rules.append(sites)
    if not rules:
        raise EmptyFamily("family has no rules")
    return UpdateFamily.from_rules(rules, name)


# ------------------------------------------------------------------ zoo

ZOO_TEXT = {
    "two_neighbour": "\n".join(
        f"{a[0]} {a[1]}; {b[0]} {b[1]}"
        for i, a in enumerate([(1, 0), (-1, 0), (0, 1), (0, -1)])
        for b in [(1, 0), (-1, 0), (0, 1), (0, -1)][i + 1:]
    ),
    "unbalanced_rooted": "-1 0; -2 0; 0 -1\n-1 0; -2 0; 0 1\n1 0; 2 0; 0 -1; 0 -2\n1 0; 2 0; 0 1; 0 2",
    "duarte": "-1 0; 0 1\n-1 0; 0 -1\n0 1; 0 -1",
    "one_neighbour": "1 0\n-1 0\n0 1\n0 -1",
    "east": "-1 0\n0 -1",
    "east_line": "1 0",
    "opposite_pair": "1 0; -1 0",
}


def zoo(name: str) -> UpdateFamily:
    try:
        return parse_family(ZOO_TEXT[name], name)
    except KeyError:
        raise KeyError(f"unknown family {name!r}; known: {sorted(ZOO_TEXT)}") from None


# ------------------------------------------------------------ stability

def rule_in_open_halfplane(rule, u) -> bool:
    return all(u[0] * a + u[1] * b < 0 for a, b in rule)


def is_stable(u, fam: UpdateFamily) -> bool:
    """No rule lies in the open half-plane H_u = {<x,u> < 0}."""
    return not any(rule_in_open_halfplane(r, u) for r in fam.rules)


@dataclass(frozen=True)
class Arc:
    """Closed ccw arc from start to end; start == end denotes the full circle."""

    start: Direction
    end: Direction

    @property
    def full(self) -> bool:
        return self.start == self.end

    def contains(self, u) -> bool:
        return in_closed_arc(self.start, self.end, u)

    def interior_contains(self, u) -> bool:
        if self.full:
            return True
        return u != self.start and u != self.end and self.contains(u)


@dataclass(frozen=True)
class StableSet:
    arcs: tuple[Arc, ...]
    isolated_points: tuple[Direction, ...]
    critical: tuple[Direction, ...] = field(default=(), compare=False)

    @property
    def empty(self) -> bool:
        return not self.arcs and not self.isolated_points

    @property
    def finite(self) -> bool:
        return not self.arcs

    @property
    def full_circle(self) -> bool:
        return any(a.full for a in self.arcs)

    def contains(self, u) -> bool:
        return u in self.isolated_points or any(a.contains(u) for a in self.arcs)

    def is_isolated(self, u) -> bool:
        return u in self.isolated_points

    def in_arc(self, u) -> bool:
        return any(a.contains(u) for a in self.arcs)

    def features(self) -> list[tuple[Direction, Direction]]:
        """Arcs and isolated points as (start, end) pairs in ccw order."""
        feats = [(a.start, a.end) for a in self.arcs] + [(p, p) for p in self.isolated_points]
        return sorted(feats, key=lambda f: _akey(f[0]))


def _akey(d):
    from .directions import angle_key

    return angle_key(d)


def critical_directions(fam: UpdateFamily) -> list[Direction]:
    """Directions orthogonal to some rule site; stability can only change there."""
    out = set()
    for a, b in fam.sites:
        d = Direction.of(-b, a)
        out.add(d)
        out.add(-d)
    return sort_ccw(out)


def stable_set(fam: UpdateFamily) -> StableSet:
    crit = critical_directions(fam)
    n = len(crit)
    pt = [is_stable(c, fam) for c in crit]
    gap = [is_stable(gap_representative(crit[i], crit[(i + 1) % n]), fam) for i in range(n)]
    if all(gap):
        return StableSet((Arc(crit[0], crit[0]),), (), tuple(crit))
    arcs, iso = [], []
    # start scanning right after an unstable gap so every arc is seen whole
    first = next(i for i in range(n) if not gap[i])
    i = 0
    while i < n:
        j = (first + 1 + i) % n
        if not pt[j]:
            i += 1
            continue
        if not gap[j]:
            iso.append(crit[j])
            i += 1
            continue
        # arc starts at crit[j]; extend while gaps stay stable
        length = 0
        while gap[(j + length) % n]:
            length += 1
        end = crit[(j + length) % n]
        arcs.append(Arc(crit[j], end))
        i += length + 1
    for j in range(n):
        if gap[j] or gap[j - 1]:
            assert pt[j], "stable set must be closed"
    arcs.sort(key=lambda a: _akey(a.start))
    iso.sort(key=_akey)
    return StableSet(tuple(arcs), tuple(iso), tuple(crit))


# ---------------------------------------------------------- classification

SUPERCRITICAL, CRITICAL, SUBCRITICAL = "Supercritical", "Critical", "Subcritical"


def _gaps_at_least_pi(feats) -> bool:
    """Some ccw gap between consecutive features has length >= pi."""
    m = len(feats)
    for i in range(m):
        end = feats[i][1]
        nxt = feats[(i + 1) % m][0]
        if m == 1 and feats[0][0] == feats[0][1]:
            return True  # one isolated point: the gap is the whole circle minus it
        if cross(end, nxt) <= 0:
            return True
    return False


def classify_kind(S: StableSet) -> str:
    if S.empty:
        return SUPERCRITICAL
    if S.full_circle:
        return SUBCRITICAL
    feats = sorted(
        [(a.start, a.end) for a in S.arcs] + [(p, p) for p in S.isolated_points],
        key=lambda f: _akey(f[0]),
    )
    if _gaps_at_least_pi(feats):
        return SUPERCRITICAL
    arcs = sorted([(a.start, a.end) for a in S.arcs], key=lambda f: _akey(f[0]))
    if arcs and not _gaps_at_least_pi_open(arcs):
        return SUBCRITICAL
    return CRITICAL


def _gaps_at_least_pi_open(arcs) -> bool:
    """Some gap between consecutive arcs, which may contain isolated points, is >= pi.

    A semicircle meets the arc part of S in positive length iff every gap between
    arcs is strictly shorter than pi.
    """
    m = len(arcs)
    for i in range(m):
        end = arcs[i][1]
        nxt = arcs[(i + 1) % m][0]
        if cross(end, nxt) <= 0:
            return True
    return False
