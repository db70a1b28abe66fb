"""Exact computations on tiny systems by enumerating all 2^N configurations.

State ``s`` (an integer) has site ``j`` infected iff bit j of s is set, with
sites in the region's enumeration order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg, splu

from ..bootstrap.regions import Region
from ..errors import EventNull, SizeCap
from ..rng import CounterRNG
from .constraints import Boundary, build_table

INFINITY = math.inf
SITE_CAP = 20


@dataclass
class SmallSystem:
    region: Region
    family: object
    q: float
    boundary: Boundary = Boundary()
    condition: object = None  # None, bool array over states, or predicate(bits) -> bool
    site_cap: int = SITE_CAP

    def __post_init__(self):
        if self.region.n_sites > self.site_cap:
            raise SizeCap(f"{self.region.n_sites} sites exceed the cap of {self.site_cap}")
        self.table = build_table(self.region, self.family, self.boundary)

    @property
    def n(self) -> int:
        return self.table.n

    @cached_property
    def states(self) -> np.ndarray:
        return np.arange(1 << self.n, dtype=np.int64)

    @cached_property
    def bits(self) -> np.ndarray:
        """(2^N, N) bool matrix of site states."""
        return ((self.states[:, None] >> np.arange(self.n)) & 1).astype(bool)

    @cached_property
    def mu(self) -> np.ndarray:
        k = self.bits.sum(axis=1)
        return self.q ** k * (1 - self.q) ** (self.n - k)

    def event_mask(self, event) -> np.ndarray:
        if event is None:
            return np.ones(1 << self.n, dtype=bool)
        if isinstance(event, np.ndarray):
            if event.shape != (1 << self.n,):
                raise ValueError("event mask has the wrong length")
            return event.astype(bool)
        return np.fromiter((bool(event(b)) for b in self.bits), dtype=bool, count=1 << self.n)

    @cached_property
    def constraints(self) -> np.ndarray:
        """(N, 2^N) bool: c_x for every site and state."""
        t = self.table
        if t.always:
            return np.ones((self.n, 1 << self.n), dtype=bool)
        ext = np.concatenate(
            [self.bits, np.broadcast_to(t.boundary_values.astype(bool), (1 << self.n, t.boundary_values.size))],
            axis=1,
        )
        out = np.zeros((self.n, 1 << self.n), dtype=bool)
        for x in range(self.n):
            for u in range(len(t.starts) - 1):
                cells = t.nbr[x, t.starts[u]:t.starts[u + 1]]
                out[x] |= ext[:, cells].all(axis=1)
        return out

    def local_variances(self, f: np.ndarray) -> np.ndarray:
        """(N, 2^N): Var_x(f) evaluated at every state."""
        q = self.q
        out = np.empty((self.n, 1 << self.n))
        for x in range(self.n):
            b = 1 << x
            d = f[self.states | b] - f[self.states & ~b]
            out[x] = q * (1 - q) * d * d
        return out


@dataclass(frozen=True)
class VarianceReport:
    mean: float
    variance: float
    conditioned_variance: float
    dirichlet_form: float


def conditioned_variance(mu, mask, f) -> float:
    pe = mu[mask].sum()
    if pe <= 0:
        raise EventNull("conditioning event has probability zero")
    w = mu[mask] / pe
    m = np.dot(w, f[mask])
    return float(np.dot(w, (f[mask] - m) ** 2))


def exact_variance_tools(sys: SmallSystem, f) -> VarianceReport:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (1 << sys.n,):
        raise ValueError("f must be defined on all states")
    mu = sys.mu
    mean = float(np.dot(mu, f))
    var = float(np.dot(mu, (f - mean) ** 2))
    cvar = conditioned_variance(mu, sys.event_mask(sys.condition), f)
    dform = float(np.sum(sys.constraints * sys.local_variances(f) * mu[None, :]))
    return VarianceReport(mean, var, cvar, dform)


def dirichlet_matrix(sys: SmallSystem) -> sp.csr_matrix:
    """Sparse K with f^T K f = sum_x mu(c_x Var_x f)."""
    q = sys.q
    rows, cols, vals = [], [], []
    for x in range(sys.n):
        b = 1 << x
        s0 = sys.states[(sys.states & b) == 0]
        w = sys.mu[s0] * q * sys.constraints[x, s0]
        keep = w > 0
        rows.append(s0[keep])
        cols.append((s0 | b)[keep])
        vals.append(w[keep])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    size = 1 << sys.n
    A = sp.coo_matrix((v, (r, c)), shape=(size, size)).tocsr()
    A = A + A.T
    deg = np.asarray(A.sum(axis=1)).ravel()
    return (sp.diags(deg) - A).tocsr()


@dataclass(frozen=True)
class GammaResult:
    gamma: float
    ratio: float  # sup of Var(f|E) / D(f) before clipping at 1
    f: np.ndarray | None  # extremal function (or a reducibility witness)
    iterations: int
    reducible: bool


def _solver(K):
    n = K.shape[0]
    Kr = K[1:, 1:].tocsc()
    if n <= 4096:
        lu = splu(Kr)

        def solve(b):
            x = np.zeros(n)
            x[1:] = lu.solve(b[1:])
            return x
    else:
        def solve(b):
            x = np.zeros(n)
            x[1:], _ = cg(Kr, b[1:], rtol=1e-14, maxiter=10 * n)
            return x
    return solve


def exact_gamma(sys: SmallSystem, supergood=None, tol: float = 1e-13, max_iter: int = 20000,
                seed: int = 0) -> GammaResult:
    """Smallest gamma >= 1 with Var(f | E) <= gamma * D(f) for every f.

    Only the values of f on the connected component (of the constrained
    transition graph) containing E matter; if E meets two components the
    indicator of one of them has D = 0 and positive conditioned variance, so the
    answer is infinite.  Otherwise power iteration on K^+ M, with K the Dirichlet
    matrix and M the conditioned covariance form, converges to the sup ratio.
    """
    mask = sys.event_mask(supergood)
    mu = sys.mu
    pe = mu[mask].sum()
    if pe <= 0:
        raise EventNull("conditioning event has probability zero")
    K = dirichlet_matrix(sys)
    ncomp, labels = connected_components(K, directed=False)
    comps = np.unique(labels[mask])
    size = 1 << sys.n
    if comps.size > 1:
        f = (labels == comps[0]).astype(float)
        return GammaResult(INFINITY, INFINITY, f, 0, True)
    if mask.sum() == 1:
        return GammaResult(1.0, 0.0, np.zeros(size), 0, False)
    nodes = np.nonzero(labels == comps[0])[0]
    Kc = K[nodes][:, nodes]
    pi = np.where(mask, mu, 0.0)[nodes] / pe

    def M(g):
        return pi * g - pi * np.dot(pi, g)

    solve = _solver(Kc)
    rng = CounterRNG(seed, 7)
    g = rng.uniform_array(nodes.size) - 0.5
    lam_old = 0.0
    lam = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        g = solve(M(g))
        g -= g.mean()
        nrm = np.linalg.norm(g)
        if nrm == 0:
            break
        g /= nrm
        num = float(np.dot(g, M(g)))
        den = float(g @ (Kc @ g))
        lam = num / den
        if it > 2 and abs(lam - lam_old) <= tol * abs(lam):
            break
        lam_old = lam
    f = np.zeros(size)
    f[nodes] = g
    gamma = lam if lam > 1 + 1e-12 else 1.0
    return GammaResult(gamma, lam, f, it, False)
