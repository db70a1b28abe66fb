"""Halving the last trapezoid of a right snail, and the type-i conditions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import BelowThreshold, NotTypeI
from ..family.directions import surd_sign
from .halfplane import lattice_points
from .snail import RIGHT, SnailSpec

DEFAULT_C = 8


def _r(spec: SnailSpec, j: int, coef=Fraction(1)):
    N = spec.qs.u(spec.k + j).norm2
    return [(coef * Fraction(spec.s[j], N), N)]


def _L(spec: SnailSpec, coef=Fraction(1)):
    N0 = spec.qs.u(0).norm2
    return [(coef * Fraction(spec.mu, spec.d), N0)]


def type_i_violations(hat: SnailSpec, ref: SnailSpec, i: int, C=DEFAULT_C) -> list[str]:
    """Conditions (a)-(d) of a type-i snail relative to the reference, plus admissibility."""
    if hat.qs != ref.qs or hat.R != ref.R:
        raise ValueError("snails must share the quasi-stable set and the radius")
    k2 = 2 * hat.k
    out = [f"admissible: {v}" for v in hat.violations()]
    if i + 1 < len(hat.s) and hat.s[i + 1] != 0:
        out.append(f"(a) r_{i + 1} = 0")
    if surd_sign(_r(ref, i) + _r(hat, i, -1)) < 0:
        out.append(f"(b) r_{i} <= reference r_{i}")
    slack = _r(ref, i, C) + _r(hat, i, -C)
    for l in range(i + 1, k2):
        slack += _r(ref, l, C)
    for j in range(i):
        diff = _r(ref, j) + _r(hat, j, -1)
        if surd_sign(diff) < 0 or surd_sign(slack + [(-c, n) for c, n in diff]) < 0:
            out.append(f"(c) 0 <= r_{j} difference <= C*slack")
    diff = _L(ref) + _L(hat, -1)
    if surd_sign(diff) < 0 or surd_sign(slack + [(-c, n) for c, n in diff]) < 0:
        out.append("(d) 0 <= L difference <= C*slack")
    return out


def is_type_i(hat: SnailSpec, ref: SnailSpec, i: int, C=DEFAULT_C) -> bool:
    return not type_i_violations(hat, ref, i, C)


@dataclass(frozen=True)
class Bisection:
    tilde: SnailSpec
    bar: SnailSpec
    x: tuple


def bisect_snail(hat: SnailSpec, ref: SnailSpec, i: int, C=DEFAULT_C, threshold: int = 1) -> Bisection:
    """Split off the upper half of the i-th trapezoid as the last trapezoid of a translated snail.

    x = v_{i+1} * floor(s_i / (2 <v_{i+k}, v_{i+1}>)) in lattice units; the
    first output keeps the lower half, the second is x + V(bar) with the
    shortened heights s_j - <v_{k+j}, x> and length min(mu, mu - <v_{k-1}, x>).
    """
    bad = type_i_violations(hat, ref, i, C)
    if bad:
        raise NotTypeI("; ".join(bad))
    qs, k = hat.qs, hat.k
    v_next, v_top = qs.u(i + 1), qs.u(i + k)
    step = v_top.dot(v_next)
    lam = hat.s[i] // (2 * step)
    if lam < threshold:
        raise BelowThreshold(f"r_{i} = {hat.s[i]} slices is too small to bisect")
    x = (v_next.x * lam, v_next.y * lam)
    n = len(hat.s)
    tilde_s = tuple(hat.s[j] if j < i else (v_top.dot(x) if j == i else 0) for j in range(n))
    bar_s = tuple(hat.s[j] - qs.u(k + j).dot(x) if j <= i else 0 for j in range(n))
    bar_mu = min(hat.mu, hat.mu - qs.u(k - 1).dot(x))
    tilde = SnailSpec(qs, hat.R, hat.mu, tilde_s, hat.delta, hat.w, RIGHT)
    bar = SnailSpec(qs, hat.R, bar_mu, bar_s, hat.delta, hat.w, RIGHT)
    return Bisection(tilde, bar, x)


def right_snail_sites(spec: SnailSpec, shift=(0, 0)) -> frozenset:
    pts = lattice_points(spec.right_halfplanes())
    if shift == (0, 0):
        return pts
    return frozenset((a + shift[0], b + shift[1]) for a, b in pts)


def last_trapezoid_sites(spec: SnailSpec, i: int, shift=(0, 0)) -> frozenset:
    pts = lattice_points(spec.trapezoid_halfplanes(i)) if spec.s[i] > 0 else frozenset()
    return frozenset((a + shift[0], b + shift[1]) for a, b in pts)


def bisection_identities(hat: SnailSpec, b: Bisection, i: int) -> tuple[bool, bool]:
    """(tilde V union bar V == hat V, hat V minus tilde V == bar T_i) as lattice-set equalities."""
    V_hat = right_snail_sites(hat)
    V_tilde = right_snail_sites(b.tilde)
    V_bar = right_snail_sites(b.bar, b.x)
    T_bar = last_trapezoid_sites(b.bar, i, b.x)
    return (V_tilde | V_bar) == V_hat, (V_hat - V_tilde) == T_bar
