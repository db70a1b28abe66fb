"""Exact half-planes ``a*x + b*y <= c + r*sqrt(n)`` and their lattice points."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..bootstrap.regions import Polygon
from ..family.directions import Direction, floor_surd


@dataclass(frozen=True)
class Rho:
    """rho_u = 1 / |v| for the primitive vector v of u, stored as |v|^2."""

    norm2: int

    @property
    def value(self) -> float:
        return 1.0 / math.sqrt(self.norm2)


def rho(u: Direction) -> Rho:
    return Rho(u.norm2)


@dataclass(frozen=True)
class HalfPlane:
    a: int
    b: int
    c: Fraction = Fraction(0)
    r: Fraction = Fraction(0)  # coefficient of sqrt(n)
    n: int = 0
    strict: bool = False

    @classmethod
    def of(cls, v, c=0, r=0, n=0, strict=False) -> "HalfPlane":
        return cls(int(v[0]), int(v[1]), Fraction(c), Fraction(r), int(n), strict)

    def int_bound(self) -> int:
        """Largest integer t with t <= bound (t < bound when strict)."""
        return floor_surd(self.c, self.r, self.n, self.strict)

    def translate(self, dx, dy) -> "HalfPlane":
        """The half-plane shifted by the (rational) vector (dx, dy)."""
        return HalfPlane(self.a, self.b, self.c + self.a * Fraction(dx) + self.b * Fraction(dy),
                         self.r, self.n, self.strict)

    def complement(self) -> "HalfPlane":
        """Closure-free complement: {a*x + b*y > bound} as (-a, -b) with strict flag flipped."""
        return HalfPlane(-self.a, -self.b, -self.c, -self.r, self.n, not self.strict)

    def reflect(self, v0, tau) -> "HalfPlane":
        """Preimage under y -> R y + tau*v0, R the reflection across the line orthogonal to v0."""
        N0 = v0[0] ** 2 + v0[1] ** 2
        d = self.a * v0[0] + self.b * v0[1]
        na = N0 * self.a - 2 * d * v0[0]
        nb = N0 * self.b - 2 * d * v0[1]
        g = math.gcd(na, nb)
        c = (N0 * (self.c - Fraction(tau) * d)) / g
        return HalfPlane(na // g, nb // g, c, N0 * self.r / g, self.n, self.strict)

    def integer_constraint(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.int_bound())

    def contains(self, x: int, y: int) -> bool:
        return self.a * x + self.b * y <= self.int_bound()


def polygon(hps) -> Polygon:
    return Polygon(tuple(h.integer_constraint() for h in hps))


def lattice_points(hps) -> frozenset:
    """Lattice points of a bounded intersection of half-planes."""
    poly = polygon(hps)
    if poly.bbox[2] == 0:
        return frozenset()
    return poly.site_set()


def lattice_difference(outer, inner) -> frozenset:
    """Lattice points of (intersection of outer) minus (intersection of inner).

    Computed as the union over i of outer intersected with the complement of
    inner[i]; each piece is bounded even when the inner intersection is not.
    """
    out = set()
    for h in inner:
        out |= lattice_points(list(outer) + [h.complement()])
    return frozenset(out)


def points_array(sites) -> np.ndarray:
    return np.array(sorted(sites, key=lambda p: (p[1], p[0])), dtype=np.int64).reshape(-1, 2)
