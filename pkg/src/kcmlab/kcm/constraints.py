"""Constraint tables: for each region site, where each rule cell lives.

Cells are indices into an extended state vector ``[region sites..., frozen
boundary cells...]`` so that the compiled loops never branch on geometry.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from ..bootstrap.regions import Configuration, Region
from ..family.family import UpdateFamily


class _Unconstrained:
    """Test hook: every site may update at every ring."""

    name = "unconstrained"
    rules = ()

    def __repr__(self):
        return "UNCONSTRAINED"

    def sorted_rules(self):
        return []


UNCONSTRAINED = _Unconstrained()


@dataclass(frozen=True)
class Boundary:
    """State of sites outside a non-wrapping region: all healthy, all infected, or frozen custom."""

    kind: str = "healthy"
    infected: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in ("healthy", "infected", "custom"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")

    @classmethod
    def custom(cls, infected_sites) -> "Boundary":
        return cls("custom", frozenset(map(tuple, infected_sites)))

    def is_infected(self, x: int, y: int) -> bool:
        if self.kind == "infected":
            return True
        if self.kind == "custom":
            return (x, y) in self.infected
        return False

    def describe(self) -> str:
        if self.kind == "custom":
            return "custom:" + ";".join(f"{x},{y}" for x, y in sorted(self.infected))
        return self.kind


@dataclass
class ConstraintTable:
    sites: np.ndarray  # (N, 2)
    nbr: np.ndarray  # (N, n_offsets) indices into the extended state
    starts: np.ndarray  # rule boundaries within the offset axis
    boundary_values: np.ndarray  # uint8 values of the frozen cells
    always: bool

    @property
    def n(self) -> int:
        return self.sites.shape[0]

    def index(self, x: int, y: int) -> int:
        hits = np.nonzero((self.sites[:, 0] == x) & (self.sites[:, 1] == y))[0]
        if hits.size == 0:
            raise KeyError((x, y))
        return int(hits[0])


@functools.lru_cache(maxsize=64)
def build_table(region: Region, fam, boundary: Boundary = Boundary()) -> ConstraintTable:
    """Cached; the returned table must be treated as read-only."""
    sites = region.sites()
    N = sites.shape[0]
    pos = {(int(x), int(y)): i for i, (x, y) in enumerate(sites)}
    rules = fam.sorted_rules()
    offsets = [p for r in rules for p in r]
    starts = np.cumsum([0] + [len(r) for r in rules]).astype(np.int64)
    nbr = np.zeros((N, len(offsets)), dtype=np.int64)
    extra: dict[tuple[int, int], int] = {}
    extra_vals = []
    x0, y0, w, h = region.bbox
    for i, (x, y) in enumerate(sites.tolist()):
        for j, (dx, dy) in enumerate(offsets):
            tx, ty = x + dx, y + dy
            if region.wraps:
                tx = x0 + (tx - x0) % w
                ty = y0 + (ty - y0) % h
            if (tx, ty) in pos:
                k = pos[(tx, ty)]
                if k == i:
                    raise ValueError(f"rule cell of site ({x},{y}) wraps onto itself; region too small")
            else:
                if (tx, ty) not in extra:
                    extra[(tx, ty)] = N + len(extra)
                    extra_vals.append(1 if boundary.is_infected(tx, ty) else 0)
                k = extra[(tx, ty)]
            nbr[i, j] = k
    return ConstraintTable(
        sites,
        nbr,
        starts,
        np.asarray(extra_vals, dtype=np.uint8),
        fam is UNCONSTRAINED,
    )


def constraint(x, omega: Configuration, fam, boundary: Boundary = Boundary()) -> int:
    """1 iff some rule translate x + U is fully infected (torus wraps, boxes read the boundary)."""
    if fam is UNCONSTRAINED:
        return 1
    region = omega.region
    x0, y0, w, h = region.bbox

    def infected(px, py):
        if region.wraps:
            px = x0 + (px - x0) % w
            py = y0 + (py - y0) % h
        if region.contains(px, py):
            return omega.is_infected(px, py)
        return boundary.is_infected(px, py)

    for r in fam.sorted_rules():
        if all(infected(x[0] + a, x[1] + b) for a, b in r):
            return 1
    return 0
