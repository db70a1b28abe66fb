"""Bootstrap infection-time sampling on growing boxes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..family.family import UpdateFamily
from ..rng import site_uniforms, stream_key
from ..samples import TauSample
from .kernels import closure_times, flatten_rules, keyed_bernoulli_grid


@dataclass(frozen=True)
class BoxPolicy:
    start: int = 64
    cap: int = 4096
    grow: bool = True

    def sides(self):
        n = self.start
        while True:
            yield n
            if not self.grow or n >= self.cap:
                return
            n = min(2 * n, self.cap)


def box_bounds(n: int) -> tuple[int, int]:
    """Box of side n around the origin: x, y in [-n//2, -n//2 + n)."""
    return -(n // 2), n


def draw_box(q: float, seed: int, n: int) -> np.ndarray:
    """Infection grid of the n-box; each site's state depends only on (seed, site)."""
    x0, _ = box_bounds(n)
    key = np.uint64(stream_key(seed, 0))
    return keyed_bernoulli_grid(key, x0, x0, n, n, q)


def draw_box_reference(q: float, seed: int, n: int) -> np.ndarray:
    """Vectorized numpy route to the same grid (used to cross-check the compiled one)."""
    x0, _ = box_bounds(n)
    ys, xs = np.mgrid[x0:x0 + n, x0:x0 + n]
    return (site_uniforms(stream_key(seed, 0), xs.ravel(), ys.ravel()) < q).reshape(n, n).astype(np.uint8)


def sample_bootstrap_tau(fam: UpdateFamily, q: float, policy: BoxPolicy = BoxPolicy(), seed: int = 0) -> TauSample:
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    dxs, dys, starts = flatten_rules(fam.sorted_rules())
    tau, side = None, policy.start
    for side in policy.sides():
        grid = draw_box(q, seed, side)
        mask = np.ones_like(grid)
        times = closure_times(grid, mask, False, dxs, dys, starts)
        c = side // 2
        t = int(times[c, c])
        if t >= 0:
            tau = t
            break
    return TauSample(
        tau=None if tau is None else float(tau),
        truncated=tau is None,
        seed=seed,
        q=q,
        region=f"box:{side}",
        family=fam.name,
        box=side,
    )
