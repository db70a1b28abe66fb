"""Continuous-time simulation of the kinetically constrained model.

With N sites, the superposition of the N rate-1 Poisson clocks rings at rate N:
each ring advances time by Exponential(N), picks a uniform site, and, if the
site's constraint holds, resamples it (infected with probability q).  Rejected
rings advance time only.

Every ring consumes exactly three draws of the dynamics stream, in order:
holding time, site, resampling coin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..bootstrap.regions import Configuration, Region
from ..errors import OriginOutsideRegion
from ..rng import nb_uniform, stream_key, uniform_array
from ..samples import TauSample
from .constraints import Boundary, ConstraintTable, build_table

STREAM_INITIAL = 0
STREAM_DYNAMICS = 1


@dataclass(frozen=True)
class KcmParams:
    q: float
    region: Region
    t_max: float
    master_seed: int = 0
    boundary: Boundary = field(default_factory=Boundary)

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        if self.t_max < 0:
            raise ValueError("t_max must be nonnegative")


@njit(cache=True)
def _legal(ext, x, nbr, starts, always):
    if always:
        return True
    n_rules = starts.shape[0] - 1
    for u in range(n_rules):
        ok = True
        for m in range(starts[u], starts[u + 1]):
            if ext[nbr[x, m]] == 0:
                ok = False
                break
        if ok:
            return True
    return False


@njit(cache=True)
def kcm_kernel(ext, N, nbr, starts, always, q, t, t_max, key, counter, stop_site,
               record, rec_t, rec_site, rec_old, rec_new):
    """Advance the chain in place.

    Returns (status, t, counter, rings, n_records) with status 0 = reached
    t_max, 1 = stop site infected by a legal update, 2 = record buffer full.
    """
    rings = 0
    nrec = 0
    cap = rec_t.shape[0]
    while True:
        if record and nrec == cap:
            return 2, t, counter, rings, nrec
        u1 = nb_uniform(key, counter)
        dt = -math.log1p(-u1) / N
        if t + dt > t_max:
            return 0, t_max, counter + 3, rings, nrec
        u2 = nb_uniform(key, counter + 1)
        u3 = nb_uniform(key, counter + 2)
        counter += 3
        t += dt
        rings += 1
        x = int(u2 * N)
        if x >= N:
            x = N - 1
        if _legal(ext, x, nbr, starts, always):
            old = ext[x]
            new = 1 if u3 < q else 0
            ext[x] = new
            if record:
                rec_t[nrec] = t
                rec_site[nrec] = x
                rec_old[nrec] = old
                rec_new[nrec] = new
                nrec += 1
            if x == stop_site and new == 1:
                return 1, t, counter, rings, nrec


@dataclass
class KcmTrace:
    table: ConstraintTable
    initial: np.ndarray  # uint8 per site, 1 = infected
    final: np.ndarray
    t: float
    rings: int
    status: int
    times: np.ndarray
    sites: np.ndarray
    old: np.ndarray
    new: np.ndarray

    def final_configuration(self, region: Region) -> Configuration:
        return _to_config(region, self.table, self.final)

    def events(self):
        """(time, (x, y), old, new) per legal update in the omega convention (0 = infected)."""
        for t, s, o, n in zip(self.times.tolist(), self.sites.tolist(), self.old.tolist(), self.new.tolist()):
            x, y = self.table.sites[s]
            yield t, (int(x), int(y)), 1 - o, 1 - n

    def to_csv(self) -> str:
        lines = ["# schema: kcmlab.trace v1", "time,x,y,old,new"]
        for t, (x, y), o, n in self.events():
            lines.append(f"{t!r},{x},{y},{o},{n}")
        return "\n".join(lines) + "\n"


def _to_config(region: Region, table: ConstraintTable, state: np.ndarray) -> Configuration:
    infected = [tuple(p) for p, v in zip(table.sites.tolist(), state[: table.n].tolist()) if v]
    return Configuration.from_sites(region, infected)


def draw_initial(table: ConstraintTable, q: float, master_seed: int) -> np.ndarray:
    """Equilibrium draw: site i (enumeration order) infected iff uniform(counter i) < q."""
    u = uniform_array(stream_key(master_seed, STREAM_INITIAL), np.arange(table.n, dtype=np.uint64))
    return (u < q).astype(np.uint8)


def _config_to_state(initial: Configuration, table: ConstraintTable) -> np.ndarray:
    g = initial.grid
    region = initial.region
    return np.array([g[region.index_of(int(x), int(y))] for x, y in table.sites], dtype=np.uint8)


def simulate(table: ConstraintTable, state: np.ndarray, q: float, t_max: float, key: int,
             stop_site: int = -1, record: bool = False, t0: float = 0.0, counter: int = 0):
    """Drive the compiled kernel, growing the record buffers as needed."""
    ext = np.concatenate([state.astype(np.uint8), table.boundary_values])
    chunks = []
    cap = 4096 if record else 0
    t = t0
    total_rings = 0
    key = np.uint64(key)
    while True:
        rt = np.empty(cap, np.float64)
        rs = np.empty(cap, np.int64)
        ro = np.empty(cap, np.uint8)
        rn = np.empty(cap, np.uint8)
        status, t, counter, rings, nrec = kcm_kernel(
            ext, table.n, table.nbr, table.starts, table.always, q, t, t_max,
            key, np.uint64(counter), stop_site, record, rt, rs, ro, rn,
        )
        total_rings += rings
        counter = int(counter)
        if record:
            chunks.append((rt[:nrec], rs[:nrec], ro[:nrec], rn[:nrec]))
        if status != 2:
            break
        cap = min(cap * 2, 1 << 22)
    if chunks:
        times, sites, old, new = (np.concatenate(c) for c in zip(*chunks))
    else:
        times, sites = np.empty(0), np.empty(0, np.int64)
        old = new = np.empty(0, np.uint8)
    return ext[: table.n].copy(), t, total_rings, status, times, sites, old, new


def run_kcm(params: KcmParams, fam, initial="MU", observers=(), record: bool | None = None) -> KcmTrace:
    """Simulate up to ``params.t_max``; observers receive every legal update in order.

    Observers are called after the compiled run with ``(time, site, old, new)``
    in the omega convention (0 = infected), in exactly the order the updates happened.
    """
    table = build_table(params.region, fam, params.boundary)
    if isinstance(initial, str) and initial == "MU":
        state = draw_initial(table, params.q, params.master_seed)
    else:
        state = _config_to_state(initial, table)
    record = bool(observers) if record is None else record
    key = stream_key(params.master_seed, STREAM_DYNAMICS)
    final, t, rings, status, times, sites, old, new = simulate(
        table, state, params.q, params.t_max, key, record=record
    )
    trace = KcmTrace(table, state, final, t, rings, status, times, sites, old, new)
    for ev in trace.events() if observers else ():
        for obs in observers:
            obs(*ev)
    return trace


def sample_tau0_kcm(params: KcmParams, fam, seed: int) -> TauSample:
    """First time the origin is infected, starting from equilibrium."""
    region = params.region
    if not region.contains(0, 0):
        raise OriginOutsideRegion(f"origin not in {region.describe()}")
    table = build_table(region, fam, params.boundary)
    origin = table.index(0, 0)
    state = draw_initial(table, params.q, seed)
    desc = region.describe()
    name = getattr(fam, "name", "")
    if state[origin]:
        return TauSample(0.0, False, seed, params.q, desc, name, 0, t_max=params.t_max)
    key = stream_key(seed, STREAM_DYNAMICS)
    _, t, rings, status, *_ = simulate(table, state, params.q, params.t_max, key, stop_site=origin)
    if status == 1:
        return TauSample(float(t), False, seed, params.q, desc, name, rings, t_max=params.t_max)
    return TauSample(None, True, seed, params.q, desc, name, rings, t_max=params.t_max)
