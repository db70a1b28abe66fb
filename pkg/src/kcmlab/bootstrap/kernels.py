"""Compiled inner loops for bootstrap closures.

Grids are indexed ``[row, col]`` = ``[y - y0, x - x0]``.  Rule sites are passed
flattened: rule ``u`` owns offsets ``dxs[starts[u]:starts[u+1]]``.
"""
import numpy as np
from numba import njit

from ..rng import nb_uniform


@njit(cache=True)
def closure_times(state, mask, torus, dxs, dys, starts):
    """Synchronous infection time of every cell under the restricted bootstrap map.

    Returns an int32 grid: 0 for initially infected cells, t >= 1 for cells
    first infected in round t, -1 for cells healthy in the closure.  Infected
    cells are appended to one queue in order of infection time; when a cell of
    level t is popped only its candidates ``z - y`` are re-examined, and a rule
    counts as fully infected at level t when all its cells carry times in
    [0, t].
    """
    H, W = state.shape
    n_rules = starts.shape[0] - 1
    n_off = dxs.shape[0]
    time = np.full((H, W), -1, np.int32)
    queue = np.empty(H * W, np.int32)
    tail = 0
    for r in range(H):
        for c in range(W):
            if mask[r, c] != 0 and state[r, c] != 0:
                time[r, c] = 0
                queue[tail] = r * W + c
                tail += 1
    head = 0
    level = 0
    while head < tail:
        level_end = tail
        while head < level_end:
            z = queue[head]
            head += 1
            zr = z // W
            zc = z % W
            for j in range(n_off):
                xr = zr - dys[j]
                xc = zc - dxs[j]
                if torus:
                    xr %= H
                    xc %= W
                elif xr < 0 or xr >= H or xc < 0 or xc >= W:
                    continue
                if mask[xr, xc] == 0 or time[xr, xc] != -1:
                    continue
                fired = False
                for u in range(n_rules):
                    ok = True
                    for m in range(starts[u], starts[u + 1]):
                        yr = xr + dys[m]
                        yc = xc + dxs[m]
                        if torus:
                            yr %= H
                            yc %= W
                        elif yr < 0 or yr >= H or yc < 0 or yc >= W:
                            ok = False
                            break
                        if mask[yr, yc] == 0:
                            ok = False
                            break
                        tv = time[yr, yc]
                        if tv < 0 or tv > level:
                            ok = False
                            break
                    if ok:
                        fired = True
                        break
                if fired:
                    time[xr, xc] = level + 1
                    queue[tail] = xr * W + xc
                    tail += 1
        level += 1
    return time


@njit(cache=True)
def keyed_bernoulli_grid(key, x0, y0, W, H, q):
    """uint8 grid with cell (x, y) infected iff uniform(key, site counter(x, y)) < q."""
    out = np.zeros((H, W), np.uint8)
    for r in range(H):
        y = np.uint64(np.int64(y0 + r) & 0xFFFFFFFF)
        for c in range(W):
            x = np.uint64(np.int64(x0 + c) & 0xFFFFFFFF)
            ctr = (x << np.uint64(32)) | y
            if nb_uniform(key, ctr) < q:
                out[r, c] = 1
    return out


def flatten_rules(rules):
    """(dxs, dys, starts) arrays for a sequence of rules given as site lists."""
    dxs, dys, starts = [], [], [0]
    for r in rules:
        for a, b in r:
            dxs.append(a)
            dys.append(b)
        starts.append(len(dxs))
    return (
        np.asarray(dxs, dtype=np.int64),
        np.asarray(dys, dtype=np.int64),
        np.asarray(starts, dtype=np.int64),
    )
