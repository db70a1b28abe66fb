"""Bootstrap closures, synchronous rounds and infection times."""
from __future__ import annotations

import numpy as np

from ..errors import OriginOutsideRegion
from ..family.family import UpdateFamily
from .kernels import closure_times, flatten_rules
from .regions import Configuration


def _rule_arrays(fam: UpdateFamily):
    return flatten_rules(fam.sorted_rules())


def infection_times(seed: Configuration, fam: UpdateFamily) -> np.ndarray:
    """Grid of synchronous infection times (-1 = never) of the restricted process."""
    region = seed.region
    dxs, dys, starts = _rule_arrays(fam)
    if seed.grid.size == 0:
        return np.full(seed.grid.shape, -1, np.int32)
    return closure_times(
        seed.grid.view(np.uint8),
        region.mask.view(np.uint8),
        region.wraps,
        dxs,
        dys,
        starts,
    )


def closure(seed: Configuration, fam: UpdateFamily) -> Configuration:
    """Least fixed point of the restricted bootstrap map on the seed's region."""
    return Configuration(seed.region, infection_times(seed, fam) >= 0)


def _shifted(grid: np.ndarray, dx: int, dy: int, wraps: bool) -> np.ndarray:
    """out[r, c] = grid[r + dy, c + dx], zero outside the grid unless wrapping."""
    if wraps:
        return np.roll(grid, shift=(-dy, -dx), axis=(0, 1))
    h, w = grid.shape
    out = np.zeros_like(grid)
    rs, re = max(0, -dy), min(h, h - dy)
    cs, ce = max(0, -dx), min(w, w - dx)
    if rs < re and cs < ce:
        out[rs:re, cs:ce] = grid[rs + dy:re + dy, cs + dx:ce + dx]
    return out


def step(grid: np.ndarray, mask: np.ndarray, fam: UpdateFamily, wraps: bool) -> np.ndarray:
    """One synchronous round A_{t+1} = A_t ∪ {x : some x + U ⊆ A_t}."""
    fire = np.zeros_like(grid)
    for rule in fam.sorted_rules():
        ok = mask.copy()
        for dx, dy in rule:
            ok &= _shifted(grid, dx, dy, wraps)
        fire |= ok
    return grid | (fire & mask)


def evolve_rounds(seed: Configuration, fam: UpdateFamily, t: int) -> Configuration:
    if t < 0:
        raise ValueError("t must be nonnegative")
    region = seed.region
    g = seed.grid.copy()
    for _ in range(t):
        nxt = step(g, region.mask, fam, region.wraps)
        if np.array_equal(nxt, g):
            break
        g = nxt
    return Configuration(region, g)


def bootstrap_tau0(omega: Configuration, fam: UpdateFamily) -> int | None:
    """First round at which the origin is infected, or None if it never is."""
    region = omega.region
    if not region.contains(0, 0):
        raise OriginOutsideRegion(f"origin not in {region.describe()}")
    t = int(infection_times(omega, fam)[region.index_of(0, 0)])
    return None if t < 0 else t
