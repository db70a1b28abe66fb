"""Quasi-stable annuli and half-annuli."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..bootstrap.regions import SiteSet
from ..errors import DegenerateAnnulus
from ..family.quasistable import QuasiStableSet
from .halfplane import HalfPlane, lattice_difference, lattice_points


def snapped_radius(R: Fraction, norm2: int) -> int:
    """m = floor(R / rho) = floor(R * sqrt(norm2)), exactly."""
    R = Fraction(R)
    return math.isqrt(R.numerator ** 2 * norm2) // R.denominator


@dataclass(frozen=True)
class AnnulusSpec:
    qs: QuasiStableSet
    R: Fraction
    w: int

    def __post_init__(self):
        object.__setattr__(self, "R", Fraction(self.R))

    def m(self, i: int) -> int:
        return snapped_radius(self.R, self.qs.u(i).norm2)

    def outer(self, i: int) -> HalfPlane:
        """<x, u_i> <= R_i."""
        return HalfPlane.of(self.qs.u(i), self.m(i))

    def inner(self, i: int) -> HalfPlane:
        """<x, u_i> < R_i - w."""
        u = self.qs.u(i)
        return HalfPlane.of(u, self.m(i), -self.w, u.norm2, strict=True)

    def outer_all(self):
        return [self.outer(i) for i in range(len(self.qs))]

    def inner_all(self):
        return [self.inner(i) for i in range(len(self.qs))]

    def half_outer(self):
        k = self.qs.k
        return [self.outer(i) for i in range(-k, k + 1)]

    def half_inner(self):
        k = self.qs.k
        return [self.inner(i) for i in range(-k + 1, k)]

    def check(self):
        if self.w <= 0 or self.R <= 0:
            raise DegenerateAnnulus("R and w must be positive")
        if any(self.R ** 2 <= self.w ** 2 * u.norm2 for u in self.qs.directions):
            raise DegenerateAnnulus(f"R={self.R} must exceed w/rho_i={self.w}*|v_i| for every direction")


@dataclass(frozen=True)
class AnnulusSets:
    outer: frozenset
    A: frozenset
    A_int: frozenset
    HA: frozenset


def annulus_sets(spec: AnnulusSpec) -> AnnulusSets:
    spec.check()
    outer = lattice_points(spec.outer_all())
    inner = lattice_points(spec.inner_all())
    if not inner:
        raise DegenerateAnnulus("inner polygon has no lattice points")
    ha = lattice_difference(spec.half_outer(), spec.half_inner())
    return AnnulusSets(outer, outer - inner, inner, ha)


def build_annulus(spec: AnnulusSpec):
    """(A, A_int, HA) as site-set regions."""
    s = annulus_sets(spec)
    return SiteSet(s.A), SiteSet(s.A_int), SiteSet(s.HA)
