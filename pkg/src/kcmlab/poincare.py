"""Exact checks of product-space variance inequalities on small finite spaces.

Functions on a product of finite probability spaces are ndarrays with one
axis per factor.  Quadratic forms (variances, constrained Dirichlet forms) are
also assembled as dense matrices over the flattened joint space so that the
worst-case ratio of two forms can be found by generalized power iteration.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EventNull, HypothesisFails

MAX_STATES = 10**6
DENSE_STATES = 4096
SUITE_STATES = 64  # joint-space cap for the random suites
REL_TOL = 1e-9


# ------------------------------------------------------------------ spaces

@dataclass
class ProductSpace:
    """A product of finite probability spaces given by their weight vectors."""

    factors: list

    def __post_init__(self):
        fs = []
        for w in self.factors:
            w = np.asarray(w, dtype=float)
            if w.ndim != 1 or len(w) == 0 or np.any(w <= 0):
                raise ValueError("every factor needs positive weights")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("factor weights must sum to 1")
            fs.append(w)
        self.factors = fs
        if self.size > MAX_STATES:
            raise ValueError(f"joint space has {self.size} > {MAX_STATES} states")

    @classmethod
    def iid(cls, weights, n: int) -> "ProductSpace":
        return cls([np.asarray(weights, dtype=float)] * n)

    @property
    def shape(self) -> tuple:
        return tuple(len(w) for w in self.factors)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n(self) -> int:
        return len(self.factors)

    def joint(self) -> np.ndarray:
        out = np.ones(())
        for w in self.factors:
            out = np.multiply.outer(out, w)
        return out

    def states(self):
        return itertools.product(*(range(s) for s in self.shape))


def random_space(rng: np.random.Generator, sizes) -> ProductSpace:
    fs = []
    for s in sizes:
        w = rng.random(s) + 0.05
        fs.append(w / w.sum())
    return ProductSpace(fs)


# ------------------------------------------------------ enumeration kernel

def mean(f: np.ndarray, w: np.ndarray) -> float:
    return float(np.sum(f * w) / np.sum(w))


def variance_two_pass(f: np.ndarray, w: np.ndarray) -> float:
    f = np.asarray(f, float).ravel()
    w = np.asarray(w, float).ravel()
    tot = w.sum()
    m = np.dot(w, f) / tot
    return float(np.dot(w, (f - m) ** 2) / tot)


def variance_streaming(f: np.ndarray, w: np.ndarray) -> float:
    """Weighted one-pass (West) update of mean and second moment."""
    tot = 0.0
    m = 0.0
    s = 0.0
    for x, wt in zip(np.asarray(f, float).ravel(), np.asarray(w, float).ravel()):
        if wt == 0:
            continue
        tot += wt
        d = x - m
        m += wt / tot * d
        s += wt * d * (x - m)
    return s / tot if tot > 0 else 0.0


def cond_mean(space: ProductSpace, f: np.ndarray, axes) -> np.ndarray:
    """Expectation over the given axes with the others fixed (keepdims)."""
    out = f
    for a in sorted(axes):
        shape = [1] * space.n
        shape[a] = space.shape[a]
        out = np.sum(out * space.factors[a].reshape(shape), axis=a, keepdims=True)
    return out


def cond_var(space: ProductSpace, f: np.ndarray, axes) -> np.ndarray:
    """Variance over the given axes with the others fixed (keepdims)."""
    m = cond_mean(space, f, axes)
    return cond_mean(space, (f - m) ** 2, axes)


def expect(space: ProductSpace, g: np.ndarray) -> float:
    g = np.broadcast_to(g, space.shape)
    return float(np.sum(g * space.joint()))


def variance(space: ProductSpace, f: np.ndarray) -> float:
    return variance_two_pass(f, space.joint())


def _le(a: float, b: float, scale: float = 0.0) -> bool:
    """a <= b up to REL_TOL relative slack; `scale` (about max f^2) absorbs rounding when both vanish."""
    return a <= b + REL_TOL * max(abs(a), abs(b)) + 1e-14 * scale + 1e-300


# ---------------------------------------------------- variance convexity

@dataclass(frozen=True)
class ConvexityResult:
    lower_ok: bool
    upper_ok: bool
    var: float
    lower: float
    upper: float

    @property
    def slack_lower(self) -> float:
        return self.var - self.lower

    @property
    def slack_upper(self) -> float:
        return self.upper - self.var


def check_var_convexity(space: ProductSpace, f: np.ndarray) -> ConvexityResult:
    """nu1(Var_{23} f) <= Var f <= nu1(Var_{23} f) + nu2(Var_{13} f) for a three-block space."""
    if space.n != 3:
        raise ValueError("variance convexity needs exactly three blocks")
    f = np.asarray(f, float).reshape(space.shape)
    v = variance(space, f)
    a = expect(space, cond_var(space, f, (1, 2)))
    b = expect(space, cond_var(space, f, (0, 2)))
    sc = float(np.max(f * f))
    return ConvexityResult(_le(a, v, sc), _le(v, a + b, sc), v, a, a + b)


# --------------------------------------------------------------- two block

@dataclass(frozen=True)
class TwoBlockResult:
    ok: bool
    ratio: float
    var: float
    rhs: float


def two_block_rhs(space: ProductSpace, H: np.ndarray, f: np.ndarray) -> float:
    pH = float(np.dot(space.factors[0], H))
    ind = np.asarray(H, float).reshape(-1, 1)
    inner = cond_var(space, f, (0,)) + ind * cond_var(space, f, (1,))
    return 2.0 / pH * expect(space, inner)


def check_two_block(space: ProductSpace, H, f: np.ndarray) -> TwoBlockResult:
    """Var f <= 2 P(X1 in H)^-1 E(Var_1 f + 1_H(X1) Var_2 f)."""
    if space.n != 2:
        raise ValueError("two-block inequality needs two factors")
    H = np.asarray(H, bool)
    if float(np.dot(space.factors[0], H)) <= 0:
        raise EventNull("P(X1 in H) = 0")
    f = np.asarray(f, float).reshape(space.shape)
    v = variance(space, f)
    rhs = two_block_rhs(space, H, f)
    ratio = 0.0 if v == 0 else (math.inf if rhs == 0 else v / rhs)
    return TwoBlockResult(_le(v, rhs, float(np.max(f * f))), ratio, v, rhs)


# -------------------------------------------------------- quadratic forms

def covariance_matrix(p: np.ndarray) -> np.ndarray:
    """Matrix of f -> Var_p(f) for a probability vector p on the flattened space."""
    return np.diag(p) - np.outer(p, p)


def local_variance_matrix(space: ProductSpace, i: int, gate: np.ndarray | None = None) -> np.ndarray:
    """Matrix of f -> E(gate * Var_i f), gate a 0/1 tensor not depending on coordinate i."""
    N = space.size
    K = np.zeros((N, N))
    idx = np.arange(N).reshape(space.shape)
    wi = space.factors[i]
    block = np.diag(wi) - np.outer(wi, wi)
    joint = space.joint()
    moved = np.moveaxis(idx, i, -1).reshape(-1, space.shape[i])
    prob_rest = np.moveaxis(joint, i, -1).reshape(-1, space.shape[i]).sum(axis=1)
    g = None
    if gate is not None:
        g = np.moveaxis(np.broadcast_to(gate, space.shape), i, -1).reshape(-1, space.shape[i])[:, 0]
    for r, fiber in enumerate(moved):
        if g is not None and not g[r]:
            continue
        K[np.ix_(fiber, fiber)] += prob_rest[r] * block
    return K


@dataclass(frozen=True)
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int


def max_ratio(M: np.ndarray, K: np.ndarray, tol: float = 1e-8, max_iter: int = 100000,
              seed: int = 0) -> EigenResult:
    """sup_f f'Mf / f'Kf by power iteration on pinv(K) M (inf if M sees ker K)."""
    w, V = np.linalg.eigh(K)
    scale = max(1.0, float(np.abs(w).max()))
    null = V[:, w <= 1e-12 * scale]
    if null.size:
        Mn = null.T @ M @ null
        if np.abs(Mn).max() > 1e-10 * max(1.0, float(np.abs(M).max())):
            vals, vecs = np.linalg.eigh(Mn)
            return EigenResult(math.inf, null @ vecs[:, -1], 0)
    Kp = np.linalg.pinv(K, hermitian=True)
    A = Kp @ M
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(len(M))
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = A @ x
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return EigenResult(0.0, x, it)
        y /= nrm
        den = y @ K @ y
        new = (y @ M @ y) / den if den > 0 else 0.0
        x = y
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return EigenResult(float(new), x, it)
        lam = new
    return EigenResult(float(lam), x, max_iter)


def two_block_forms(space: ProductSpace, H) -> tuple[np.ndarray, np.ndarray]:
    """(Var form, right-hand form) of the two-block inequality."""
    H = np.asarray(H, bool)
    pH = float(np.dot(space.factors[0], H))
    M = covariance_matrix(space.joint().ravel())
    gate = H.reshape(-1, 1)
    K = local_variance_matrix(space, 0) + local_variance_matrix(space, 1, gate)
    return M, 2.0 / pH * K


# ------------------------------------------------------------ FA1f bound

CYCLE, LINE = "Cycle", "Line"


@dataclass(frozen=True)
class FacilitationSetup:
    n: int
    H: frozenset  # facilitating outcomes of a single coordinate
    kappa: int
    topology: str = CYCLE

    def blocks(self, i: int) -> list[list[int]]:
        """H_i as a union of blocks, each requiring all its coordinates to lie in H."""
        k, n = self.kappa, self.n
        after = [j % n for j in range(i + 1, i + k + 1)]
        before = [j % n for j in range(i - 1, i - k - 1, -1)]
        if self.topology == CYCLE:
            return [after, before]
        if i + k >= n:
            return [before]
        if i - k < 0:
            return [after]
        return [after, before]

    def holds(self, i: int, omega) -> bool:
        return any(all(omega[j] in self.H for j in b) for b in self.blocks(i))

    def mask(self, shape, i: int) -> np.ndarray:
        out = np.zeros(shape, bool)
        for st in itertools.product(*(range(s) for s in shape)):
            out[st] = self.holds(i, st)
        return out


def fa1f_hypothesis(nu_H: float, n: int, kappa: int) -> float:
    """(1 - nu(H)^kappa)^(n / (3 kappa)); the bound applies when this is < 1/16."""
    return (1.0 - nu_H ** kappa) ** (n / (3.0 * kappa))


@dataclass(frozen=True)
class FA1fResult:
    ok: bool
    lhs: float
    rhs: float
    constant_used: float
    min_feasible_K: float
    c: float


def fa1f_forms(space: ProductSpace, setup: FacilitationSetup):
    masks = [setup.mask(space.shape, i) for i in range(setup.n)]
    omega_H = np.logical_or.reduce(masks)
    pi = space.joint()
    P = float(np.sum(pi[omega_H]))
    if P <= 0:
        raise EventNull("P(Omega_H) = 0")
    p = np.where(omega_H, pi, 0.0).ravel() / P
    M = covariance_matrix(p)
    K = sum(local_variance_matrix(space, i, masks[i]) for i in range(setup.n))
    return M, K, omega_H.ravel(), P


def _check_space(space: ProductSpace, setup: FacilitationSetup):
    if space.n != setup.n:
        raise ValueError("setup size differs from the number of factors")
    if len({tuple(w) for w in space.factors}) != 1:
        raise ValueError("the FA1f bound needs identical factors")


def nu_of_H(space: ProductSpace, setup: FacilitationSetup) -> float:
    return float(sum(space.factors[0][a] for a in setup.H))


def check_fa1f_poincare(space: ProductSpace, setup: FacilitationSetup, f: np.ndarray,
                        c: float = 8.0) -> FA1fResult:
    """Var(f | Omega_H) <= (2/nu(H))^(c kappa) sum_i nu(1_{H_i} Var_i f)."""
    _check_space(space, setup)
    nu_H = nu_of_H(space, setup)
    if fa1f_hypothesis(nu_H, setup.n, setup.kappa) >= 1 / 16:
        raise HypothesisFails(f"(1-nu(H)^k)^(n/3k) = {fa1f_hypothesis(nu_H, setup.n, setup.kappa):.4g} >= 1/16")
    f = np.asarray(f, float).reshape(space.shape)
    masks = [setup.mask(space.shape, i) for i in range(setup.n)]
    omega_H = np.logical_or.reduce(masks)
    pi = space.joint()
    if not np.any(omega_H):
        raise EventNull("P(Omega_H) = 0")
    # both sides as sums of nonnegative terms, so constant f gives exact zeros
    lhs = variance_two_pass(f[omega_H], pi[omega_H])
    rhs = sum(expect(space, m * cond_var(space, f, (i,))) for i, m in enumerate(masks))
    Kc = (2.0 / nu_H) ** (c * setup.kappa)
    sc = float(np.max(f * f))
    need = 0.0 if lhs <= 1e-14 * sc + 1e-300 else (math.inf if rhs <= 0 else lhs / rhs)
    return FA1fResult(_le(lhs, Kc * rhs, sc), lhs, rhs, Kc, need, c)


def exponent_constant(K: float, nu_H: float, kappa: int) -> float:
    """c with (2/nu(H))^(c kappa) = K."""
    if K <= 1:
        return 0.0
    return math.log(K) / (kappa * math.log(2.0 / nu_H))


def fa1f_extremal(space: ProductSpace, setup: FacilitationSetup, tol: float = 1e-8) -> EigenResult:
    """Worst-case f for the FA1f bound (largest generalized eigenvalue)."""
    _check_space(space, setup)
    if space.size > DENSE_STATES:
        raise ValueError("extremal search limited to small spaces")
    M, K, _, _ = fa1f_forms(space, setup)
    return max_ratio(M, K, tol)


# ------------------------------------------------------------- CSV output

CSV_FIELDS = ("lemma", "n", "kappa", "topology", "nu_H", "min_feasible_K", "ok")


@dataclass
class InstanceRecord:
    lemma: str
    n: int
    kappa: int
    topology: str
    nu_H: float
    min_feasible_K: float
    ok: bool


def write_instances(records, fh=None) -> str:
    out = fh or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow([r.lemma, r.n, r.kappa, r.topology, f"{r.nu_H:.12g}", f"{r.min_feasible_K:.12g}", int(r.ok)])
    return out.getvalue() if fh is None else ""


def read_instances(text: str) -> list[InstanceRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [InstanceRecord(r["lemma"], int(r["n"]), int(r["kappa"]), r["topology"], float(r["nu_H"]),
                           float(r["min_feasible_K"]), r["ok"] == "1") for r in rows]


# --------------------------------------------------------- random suites

@dataclass
class SuiteSummary:
    lemma: str
    instances: int = 0
    violations: int = 0
    skipped: int = 0
    worst: float = 0.0  # largest lhs/rhs-type ratio or exponent constant seen
    records: list = field(default_factory=list)


def convexity_suite(rng: np.random.Generator, count: int = 1000) -> SuiteSummary:
    out = SuiteSummary("var_convexity")
    for _ in range(count):
        space = random_space(rng, rng.integers(1, 4, size=3))
        f = rng.standard_normal(space.shape)
        r = check_var_convexity(space, f)
        out.instances += 1
        out.violations += not (r.lower_ok and r.upper_ok)
        if r.upper > 0:
            out.worst = max(out.worst, r.var / r.upper)
    return out


def two_block_suite(rng: np.random.Generator, count: int = 1000) -> SuiteSummary:
    out = SuiteSummary("two_block")
    for _ in range(count):
        space = random_space(rng, rng.integers(2, 4, size=2))
        H = rng.random(space.shape[0]) < 0.5
        if not H.any():
            H[rng.integers(space.shape[0])] = True
        f = rng.standard_normal(space.shape)
        r = check_two_block(space, H, f)
        out.instances += 1
        out.violations += not r.ok
        out.worst = max(out.worst, r.ratio)
        out.records.append(InstanceRecord("two_block", 2, 0, "-", float(np.dot(space.factors[0], H)), r.ratio, r.ok))
    return out


def random_fa1f_instance(rng: np.random.Generator):
    """A random iid space and facilitation setup satisfying the inequality's hypothesis."""
    while True:
        m = int(rng.integers(2, 4))
        kappa = int(rng.integers(1, 3))
        topology = CYCLE if rng.random() < 0.5 else LINE
        n_max = max(kappa + 1, int(math.log(SUITE_STATES, m) + 1e-9))
        n = int(rng.integers(kappa + 1, n_max + 1))
        H = frozenset(int(a) for a in np.flatnonzero(rng.random(m) < 0.6))
        if not H or len(H) == m:
            continue
        w = rng.random(m)
        w[list(H)] += rng.random() * 6.0  # facilitating outcomes get most of the mass
        w /= w.sum()
        space = ProductSpace.iid(w, n)
        setup = FacilitationSetup(n, H, kappa, topology)
        if fa1f_hypothesis(nu_of_H(space, setup), n, kappa) < 1 / 16:
            return space, setup


def fa1f_suite(rng: np.random.Generator, count: int = 1000, c: float = 8.0,
               extremal: bool = True) -> SuiteSummary:
    """Random instances within the hypothesis; checks random f and the extremal f."""
    out = SuiteSummary("fa1f")
    for _ in range(count):
        space, setup = random_fa1f_instance(rng)
        nu_H = nu_of_H(space, setup)
        f = rng.standard_normal(space.shape)
        r = check_fa1f_poincare(space, setup, f, c)
        worst_K = r.min_feasible_K
        ok = r.ok
        if extremal:
            e = fa1f_extremal(space, setup)
            worst_K = max(worst_K, e.value)
            ok = ok and _le(e.value, r.constant_used)
        out.instances += 1
        out.violations += not ok
        out.worst = max(out.worst, exponent_constant(worst_K, nu_H, setup.kappa))
        out.records.append(InstanceRecord("fa1f", setup.n, setup.kappa, setup.topology, nu_H, worst_K, ok))
    return out
