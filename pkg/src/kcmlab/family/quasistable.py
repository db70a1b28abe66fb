"""Quasi-stable direction sets: a symmetric rational enlargement of S."""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import InsertionBoundExceeded, NotFiniteCritical
from .directions import Direction, cw_from, reflect, sort_ccw
from .family import CRITICAL, UpdateFamily, classify_kind, stable_set


def pair_witness(u, v, fam: UpdateFamily):
    """A rule X with <x,u> <= 0 and <x,v> <= 0 for all x in X, or None."""
    for r in fam.sorted_rules():
        if all(u.dot(x) <= 0 and v.dot(x) <= 0 for x in r):
            return r
    return None


@dataclass(frozen=True)
class QuasiStableSet:
    directions: tuple[Direction, ...]  # u_0 .. u_{4k-1}, clockwise from u0
    u0: Direction
    s_prime: tuple[Direction, ...]

    @property
    def k(self) -> int:
        return len(self.directions) // 4

    def __len__(self):
        return len(self.directions)

    def u(self, i: int) -> Direction:
        return self.directions[i % len(self.directions)]

    def index(self, d: Direction) -> int:
        return self.directions.index(d)

    @property
    def front(self) -> tuple[Direction, ...]:
        """Directions in the open semicircle centred at u0: u_{-k+1} .. u_{k-1}."""
        k = self.k
        return tuple(self.u(i) for i in range(-k + 1, k))

    @classmethod
    def from_directions(cls, dirs, u0: Direction, s_prime=None) -> "QuasiStableSet":
        """Close a direction set under quarter turns and reflection at u0 and order it."""
        closed = set()
        for d in dirs:
            for e in (d, reflect(d, u0)):
                for _ in range(4):
                    closed.add(e)
                    e = e.rot_ccw()
        if u0 not in closed:
            raise ValueError(f"u0={u0!r} is not in the closed direction set")
        ordered = tuple(sorted(closed, key=lambda d: cw_from(u0, d)))
        return cls(ordered, u0, tuple(sort_ccw(s_prime if s_prime is not None else dirs)))


def _fill_gap(a: Direction, b: Direction, fam: UpdateFamily, depth: int, bound: int):
    """Directions strictly between a and b (ccw) making every consecutive pair good."""
    if pair_witness(a, b, fam) is not None:
        return []
    if depth >= bound:
        raise InsertionBoundExceeded(
            f"no quasi-stable refinement between {a!r} and {b!r} within depth {bound}"
        )
    m = Direction.of(a.x + b.x, a.y + b.y)  # Stern-Brocot mediant
    return _fill_gap(a, m, fam, depth + 1, bound) + [m] + _fill_gap(m, b, fam, depth + 1, bound)


def quasi_stable_set(fam: UpdateFamily, u0: Direction, bound: int = 12) -> QuasiStableSet:
    S = stable_set(fam)
    if not S.finite or classify_kind(S) != CRITICAL:
        raise NotFiniteCritical("quasi-stable sets need a critical family with finite stable set")
    pts = sort_ccw(S.isolated_points)
    sprime = []
    for i, a in enumerate(pts):
        b = pts[(i + 1) % len(pts)]
        sprime.append(a)
        sprime.extend(_fill_gap(a, b, fam, 0, bound))
    try:
        return QuasiStableSet.from_directions(sprime, u0, sprime)
    except ValueError as e:
        raise NotFiniteCritical(f"u0 must be a quarter turn of a semicircle endpoint in S: {e}") from None
