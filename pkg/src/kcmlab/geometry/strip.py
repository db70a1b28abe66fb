"""Infection of one boundary line of a thin trapezoid (the strip lemma), checked by closure."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..bootstrap.closure import closure
from ..bootstrap.regions import Configuration, SiteSet
from ..errors import BadPlacement
from ..family.directions import LineFrame, surd_sign
from ..family.family import UpdateFamily
from ..family.quasistable import QuasiStableSet
from .halfplane import HalfPlane, lattice_points


@dataclass(frozen=True)
class WConsecutive:
    """w consecutive infected sites on the top line, starting at `position` (centered if None)."""

    position: int | None = None


@dataclass(frozen=True)
class HelpingSets:
    """Copies of Z (relative sites) anchored at the given lattice sites of the top line."""

    placements: tuple
    Z: tuple = ((0, 0),)


def strip_halfplanes(qs: QuasiStableSet, i: int, w: int, r, top=Fraction(0)) -> list[HalfPlane]:
    """<x,u_{i-1}> <= r, <x,u_i> <= top, <x,u_{i+1}> <= r, <x,-u_i> <= w."""
    a, u, b = qs.u(i - 1), qs.u(i), qs.u(i + 1)
    return [
        HalfPlane.of(a, 0, r, a.norm2),
        HalfPlane.of(u, 0, top, u.norm2),
        HalfPlane.of(b, 0, r, b.norm2),
        HalfPlane.of((-u.x, -u.y), 0, w, u.norm2),
    ]


@dataclass
class StripGeometry:
    i: int
    w: int
    r: int
    Lam: frozenset
    Lam_bar: frozenset
    top: tuple  # lattice sites of the top line, sorted along it
    frame: LineFrame


def strip_geometry(qs: QuasiStableSet, i: int, w: int, r: int) -> StripGeometry:
    u = qs.u(i)
    Lam = lattice_points(strip_halfplanes(qs, i, w, r))
    Lam_bar = lattice_points(strip_halfplanes(qs, i, w, r, Fraction(w, 2)))
    fr = LineFrame(u)
    top = tuple(sorted((p for p in Lam if u.dot(p) == 0), key=lambda p: fr.to_sh(*p)[0]))
    return StripGeometry(i, w, r, Lam, Lam_bar, top, fr)


def far_from_ends(qs: QuasiStableSet, i: int, w: int, r: int, site) -> bool:
    """Euclidean distance >= w from both endpoints of the real top segment, decided exactly."""
    u = qs.u(i)
    fr = LineFrame(u)
    s, h = fr.to_sh(*site)
    if h != 0:
        return False
    Ni = u.norm2
    for nb in (qs.u(i - 1), qs.u(i + 1)):
        c = nb.dot(fr.t)
        if c == 0:
            continue
        # endpoint s_e = r*sqrt(N')/c; need s_e - s >= w/sqrt(Ni) when c > 0, the mirror otherwise
        sign = 1 if c > 0 else -1
        terms = [(sign * Fraction(r, c), nb.norm2), (-sign * s, 1), (Fraction(-w, Ni), Ni)]
        if surd_sign(terms) < 0:
            return False
    return True


def default_placements(qs: QuasiStableSet, i: int, w: int, r: int, Z, m: int, gap: int = 0) -> tuple:
    """m anchors on the top line, spaced by the span of Z plus one (plus gap), centred."""
    g = strip_geometry(qs, i, w, r)
    fr = g.frame
    spans = [fr.to_sh(*z)[0] for z in Z] or [0]
    step = max(spans) - min(spans) + 1 + gap
    mid = fr.to_sh(*g.top[len(g.top) // 2])[0]
    first = mid - (step * (m - 1)) // 2
    return tuple(fr.from_sh(first + j * step, 0) for j in range(m))


def verify_strip_lemma(i: int, w: int, r: int, mode, fam: UpdateFamily, qs: QuasiStableSet) -> bool:
    """Infect Lambda minus its top line plus the mode's sites; report whether the top line fills."""
    if r < w * w:
        raise ValueError(f"strip lemma needs r >= w^2 (r={r}, w={w})")
    g = strip_geometry(qs, i, w, r)
    top = set(g.top)
    seeds = set(g.Lam - top)
    if isinstance(mode, WConsecutive):
        pos = (len(g.top) - w) // 2 if mode.position is None else mode.position
        if pos < 0 or pos + w > len(g.top):
            raise BadPlacement(f"w-run at {pos} does not fit in {len(g.top)} sites")
        seeds |= set(g.top[pos:pos + w])
        region = g.Lam
    elif isinstance(mode, HelpingSets):
        anchors = [tuple(a) for a in mode.placements]
        if len(set(anchors)) != len(anchors):
            raise BadPlacement("placements are not distinct")
        for a in anchors:
            if a not in top:
                raise BadPlacement(f"placement {a} is not a lattice site of the top line")
            if not far_from_ends(qs, i, w, r, a):
                raise BadPlacement(f"placement {a} is closer than w={w} to an endpoint")
        region = g.Lam_bar
        for a in anchors:
            for z in mode.Z:
                p = (a[0] + z[0], a[1] + z[1])
                if p not in region:
                    raise BadPlacement(f"helping site {p} lies outside the enlarged trapezoid")
                seeds.add(p)
    else:
        raise TypeError(f"unknown mode {mode!r}")
    R = SiteSet(region)
    out = closure(Configuration.from_sites(R, seeds), fam)
    return all(out.is_infected(*p) for p in top)
