"""Independent reference implementations used only by the tests."""
import heapq
import itertools
import math
from fractions import Fraction

import numpy as np
import scipy.linalg


def naive_closure(infected, sites, rules, torus=None):
    """Repeat-until-stable scan over all sites; torus=(x0, y0, w, h) wraps coordinates."""
    A = set(infected)
    sites = list(sites)
    member = set(sites)

    def norm(x, y):
        if torus is None:
            return (x, y)
        x0, y0, w, h = torus
        return (x0 + (x - x0) % w, y0 + (y - y0) % h)

    changed = True
    while changed:
        changed = False
        for x, y in sites:
            if (x, y) in A:
                continue
            for r in rules:
                cells = [norm(x + a, y + b) for a, b in r]
                if all(c in member and c in A for c in cells):
                    A.add((x, y))
                    changed = True
                    break
    return A


def grid_closure(infected, bbox, rules, wrap):
    """Synchronous full-grid scan with array shifts until nothing changes; returns the infected set."""
    x0, y0, w, h = bbox
    A = np.zeros((h, w), bool)
    for x, y in infected:
        A[y - y0, x - x0] = True

    def shifted(a, dx, dy):
        # out[y, x] = a[y + dy, x + dx], outside the box counts as healthy
        if wrap:
            return np.roll(a, (-dy, -dx), axis=(0, 1))
        out = np.zeros_like(a)
        ys, yd = (slice(dy, h), slice(0, h - dy)) if dy >= 0 else (slice(0, h + dy), slice(-dy, h))
        xs, xd = (slice(dx, w), slice(0, w - dx)) if dx >= 0 else (slice(0, w + dx), slice(-dx, w))
        if h - abs(dy) > 0 and w - abs(dx) > 0:
            out[yd, xd] = a[ys, xs]
        return out

    while True:
        new = A.copy()
        for r in rules:
            hit = np.ones_like(A)
            for a, b in r:
                hit &= shifted(A, a, b)
            new |= hit
        if np.array_equal(new, A):
            break
        A = new
    ys, xs = np.nonzero(A)
    return {(int(x) + x0, int(y) + y0) for x, y in zip(xs, ys)}


def naive_is_stable(u, rules):
    """u is stable iff no rule lies in the open half-plane {<x,u> < 0}."""
    return not any(all(a * u[0] + b * u[1] < 0 for a, b in r) for r in rules)


def bottleneck_tokens(n):
    """Minimax path (fewest simultaneous tokens) to any state holding a token at n, by Dijkstra."""
    target = 1 << (n - 1)
    best = {0: 0}
    heap = [(0, 0)]
    while heap:
        cost, s = heapq.heappop(heap)
        if s & target:
            return cost
        if cost > best.get(s, math.inf):
            continue
        nbrs = [s ^ 1] + [s ^ (1 << j) for j in range(1, n) if s >> (j - 1) & 1]
        for t in nbrs:
            c = max(cost, bin(t).count("1"))
            if c < best.get(t, math.inf):
                best[t] = c
                heapq.heappush(heap, (c, t))
    raise AssertionError


def run_probability(n, w, q):
    """P(some w consecutive successes among n Bernoulli(q)), by a run-length DP."""
    dist = [1.0] + [0.0] * (w - 1)  # current trailing run length < w
    done = 0.0
    for _ in range(n):
        new = [0.0] * w
        for r, p in enumerate(dist):
            new[0] += p * (1 - q)
            if r + 1 == w:
                done += p * q
            else:
                new[r + 1] += p * q
        dist = new
    return done


def dense_gamma(sys):
    """Largest generalized eigenvalue of (conditioned covariance, Dirichlet form), dense."""
    size = 1 << sys.n
    mu = sys.mu
    mask = sys.event_mask(sys.condition)
    pi = np.where(mask, mu, 0.0) / mu[mask].sum()
    C = np.diag(pi) - np.outer(pi, pi)
    K = np.zeros((size, size))
    q = sys.q
    c = sys.constraints
    for x in range(sys.n):
        b = 1 << x
        for s in range(size):
            if s & b or not c[x, s]:
                continue
            # Var_x f at s equals q(1-q)(f(s|b) - f(s))^2; weight mu(s) + mu(s|b) from both states
            wgt = q * (1 - q) * (mu[s] + mu[s | b])
            t = s | b
            K[s, s] += wgt
            K[t, t] += wgt
            K[s, t] -= wgt
            K[t, s] -= wgt
    # restrict to the orthogonal complement of constants (both forms vanish there)
    Q = scipy.linalg.null_space(np.ones((1, size)))
    vals = scipy.linalg.eigh(Q.T @ C @ Q, Q.T @ K @ Q, eigvals_only=True)
    return float(vals[-1])


def brute_variance_terms(weights_list, f):
    """Exact mean and variance by explicit enumeration with Fractions where possible."""
    states = list(itertools.product(*(range(len(w)) for w in weights_list)))
    probs = [math.prod(w[i] for w, i in zip(weights_list, s)) for s in states]
    m = sum(p * f[s] for p, s in zip(probs, states))
    v = sum(p * (f[s] - m) ** 2 for p, s in zip(probs, states))
    return m, v


def _sign(v):
    return (v > 0) - (v < 0)


def halfplane_member(hp, x, y):
    """Exact membership of a*x + b*y <= c + r*sqrt(n) (< when strict), by squaring."""
    a = Fraction(hp.a) * x + Fraction(hp.b) * y - Fraction(hp.c)
    r = Fraction(hp.r) if hp.n else Fraction(0)
    # sign of a - r*sqrt(n)
    sa, sb = _sign(a), _sign(r)
    if sa >= 0 >= sb:
        s = 0 if sa == sb == 0 else 1
    elif sa <= 0 <= sb:
        s = -1
    elif sa > 0:
        s = _sign(a * a - r * r * hp.n)
    else:
        s = _sign(r * r * hp.n - a * a)
    return s < 0 if hp.strict else s <= 0
