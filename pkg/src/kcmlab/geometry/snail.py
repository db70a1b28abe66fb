"""Snails: right/left snails, base, trapezoids and their slices."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..bootstrap.regions import SiteSet
from ..errors import NotAdmissible
from ..family.directions import Direction, LineFrame, floor_surd, surd_sign
from ..family.quasistable import QuasiStableSet
from .annulus import AnnulusSpec, annulus_sets
from .halfplane import HalfPlane, lattice_difference, lattice_points

RIGHT, LEFT, BOTH = "Right", "Left", "Both"


@dataclass(frozen=True)
class SnailSpec:
    """Snail parameters in snapped integer form.

    mu is L * <v0, v_{k-1}> / |v0| (so that the u_{k-1} side of the translated
    polygon passes through lattice sites) and s[i] = r_i / rho_{k+i} counts the
    slices of the i-th trapezoid.
    """

    qs: QuasiStableSet
    R: Fraction
    mu: int
    s: tuple
    delta: Fraction = Fraction(1, 5)
    w: int = 4
    side: str = BOTH

    def __post_init__(self):
        object.__setattr__(self, "R", Fraction(self.R))
        object.__setattr__(self, "delta", Fraction(self.delta))
        object.__setattr__(self, "s", tuple(int(v) for v in self.s))
        if len(self.s) != 2 * self.qs.k + 1:
            raise NotAdmissible(f"rbar must have 2k+1 = {2 * self.qs.k + 1} entries")

    @classmethod
    def from_reals(cls, qs, R, L, rbar, delta=Fraction(1, 5), w=4, side=BOTH) -> "SnailSpec":
        """Snap real L and heights down to the nearest admissible lattice values."""
        k = qs.k
        v0 = qs.u(0)
        d = v0.dot(qs.u(k - 1))
        L = Fraction(L)
        mu = floor_surd(0, L * d / v0.norm2, v0.norm2)
        s = tuple(floor_surd(0, Fraction(r), qs.u(k + i).norm2) for i, r in enumerate(rbar))
        return cls(qs, Fraction(R), mu, s, Fraction(delta), w, side)

    @property
    def k(self) -> int:
        return self.qs.k

    @property
    def d(self) -> int:
        """<v0, v_{k-1}>, the divisibility unit for mu."""
        return self.qs.u(0).dot(self.qs.u(self.k - 1))

    def m(self, i: int) -> int:
        return self.annulus.m(i)

    @property
    def annulus(self) -> AnnulusSpec:
        return AnnulusSpec(self.qs, self.R, self.w)

    def L_real(self) -> float:
        return self.mu * math.sqrt(self.qs.u(0).norm2) / self.d

    def r_real(self, i: int) -> float:
        return self.s[i] / math.sqrt(self.qs.u(self.k + i).norm2)

    def with_s(self, s, mu=None) -> "SnailSpec":
        return SnailSpec(self.qs, self.R, self.mu if mu is None else mu, tuple(s),
                         self.delta, self.w, self.side)

    def base(self) -> "SnailSpec":
        return self.with_s((0,) * len(self.s))

    # exact surd terms for the real quantities
    def _L_terms(self, coef=Fraction(1)):
        N0 = self.qs.u(0).norm2
        return [(coef * Fraction(self.mu, self.d), N0)]

    def _r_terms(self, i, coef=Fraction(1)):
        N = self.qs.u(self.k + i).norm2
        return [(coef * Fraction(self.s[i], N), N)]

    def violations(self) -> list[str]:
        out = []
        if self.mu <= 0:
            out.append("L > 0")
        if any(v < 0 for v in self.s):
            out.append("r_i >= 0")
        if self.s and self.s[-1] != 0:
            out.append("r_2k = 0")
        if surd_sign(self._L_terms(self.delta) + self._r_terms(0, Fraction(-1))) < 0:
            out.append("r_0 <= delta*L")
        for i in range(1, len(self.s)):
            if surd_sign(self._r_terms(i - 1, self.delta) + self._r_terms(i, Fraction(-1))) < 0:
                out.append(f"r_{i} <= delta*r_{i - 1}")
        return out

    def check(self):
        bad = self.violations()
        if bad:
            raise NotAdmissible("violated: " + ", ".join(bad))

    # half-plane descriptions
    def c_bound(self, i: int) -> Fraction:
        """Bound on <x, v_i> for i in the front (-k < i < k): m_i + L<u0,u_i>/rho_i."""
        v0 = self.qs.u(0)
        return self.m(i) + Fraction(self.mu * v0.dot(self.qs.u(i)), self.d)

    def right_halfplanes(self, s=None, mu=None) -> list[HalfPlane]:
        s = self.s if s is None else s
        spec = self if mu is None else self.with_s(self.s, mu)
        k = self.k
        hps = [HalfPlane.of(self.qs.u(i), spec.c_bound(i)) for i in range(-k + 1, k)]
        hps += [HalfPlane.of(self.qs.u(i), self.m(i) + s[i - k]) for i in range(k, 3 * k + 1)]
        return hps

    def trapezoid_halfplanes(self, i: int) -> list[HalfPlane]:
        k, qs = self.k, self.qs
        outer = HalfPlane.of(qs.u(k + i), self.m(k + i) + self.s[i])
        inner = HalfPlane.of(qs.u(k + i), self.m(k + i)).complement()
        prev = self.c_bound(k - 1) if i == 0 else self.m(k + i - 1) + self.s[i - 1]
        return [outer, inner, HalfPlane.of(qs.u(k + i - 1), prev),
                HalfPlane.of(qs.u(k + i + 1), self.m(k + i + 1))]

    @property
    def tau(self) -> Fraction:
        """L / |v0|: the mirror maps y to R y + tau * v0."""
        return Fraction(self.mu, self.d)

    def mirror(self, hps) -> list[HalfPlane]:
        v0 = self.qs.u(0)
        return [h.reflect(v0, self.tau) for h in hps]

    def shift_L(self, hps) -> list[HalfPlane]:
        v0 = self.qs.u(0)
        return [h.translate(self.tau * v0.x, self.tau * v0.y) for h in hps]


def mirror_direction(v: Direction, v0: Direction) -> Direction:
    N0 = v0.norm2
    d = v.dot(v0)
    return Direction.of(N0 * v.x - 2 * d * v0.x, N0 * v.y - 2 * d * v0.y)


@dataclass(frozen=True)
class Slice:
    """Lattice sites of a region on a common line, sorted along the line.

    ``positions`` are coordinates along the line in lattice steps oriented
    towards the clockwise successor of ``normal``; consecutive lattice sites
    differ by exactly 1.
    """

    tag: str
    i: int
    j: int
    normal: Direction
    sites: tuple
    positions: tuple

    @property
    def label(self) -> str:
        return f"{self.tag}[i={self.i},j={self.j}]"


def line_position(normal: Direction, x: int, y: int) -> int:
    return -LineFrame(normal).to_sh(x, y)[0]


def make_slice(tag, i, j, normal, sites) -> Slice:
    keyed = sorted((line_position(normal, *p), p) for p in sites)
    return Slice(tag, i, j, normal, tuple(p for _, p in keyed), tuple(s for s, _ in keyed))


def group_slices(tag, i, normal, sites) -> list[Slice]:
    """Group sites by <x, normal>, innermost line first."""
    by: dict[int, list] = {}
    for p in sites:
        by.setdefault(normal.dot(p), []).append(p)
    return [make_slice(tag, i, j + 1, normal, by[h]) for j, h in enumerate(sorted(by))]


@dataclass
class SnailRegions:
    spec: SnailSpec
    V: frozenset
    V_plus: frozenset
    V_minus: frozenset
    B: frozenset
    B_circ: frozenset
    A: frozenset
    A_int: frozenset
    HA_shift: frozenset
    T: dict = field(default_factory=dict)  # (i, "+"/"-") -> frozenset
    T_slices: dict = field(default_factory=dict)  # (i, sign) -> [Slice]
    B_slices: list = field(default_factory=list)  # [(j, {side i: Slice})]

    def region(self, name: str) -> SiteSet:
        return SiteSet(getattr(self, name))

    def parts(self) -> list[tuple[str, frozenset]]:
        """The product-structure parts; T_0^- is omitted when it equals T_0^+."""
        out = [("A", self.A), ("HA+Lu0", self.HA_shift), ("Aint", self.A_int), ("Bo", self.B_circ)]
        for (i, sg), t in sorted(self.T.items()):
            if sg == "-" and self.T.get((i, "+")) == t:
                continue
            out.append((f"T{i}{sg}", t))
        return out

    def partition_ok(self) -> bool:
        parts = [p for _, p in self.parts()]
        total = sum(len(p) for p in parts)
        union = frozenset().union(*parts)
        return total == len(union) and union == self.V

    def slice_partition_ok(self) -> bool:
        for key, t in self.T.items():
            sl = self.T_slices[key]
            if sum(len(s.sites) for s in sl) != len(t) or frozenset(p for s in sl for p in s.sites) != t:
                return False
        base = set()
        count = 0
        for _, sides in self.B_slices:
            pts = set(p for s in sides.values() for p in s.sites)
            count += len(pts)
            base |= pts
        return count == len(base) and base == set(self.B_circ)

    def tags(self) -> dict:
        """site -> (region tag, slice tag) for the geometry dump."""
        out = {}
        for p in self.A:
            out[p] = ("A", "-")
        for p in self.HA_shift:
            out[p] = ("HA", "-")
        for p in self.A_int:
            out[p] = ("Aint", "-")
        for j, sides in self.B_slices:
            for i, s in sides.items():
                for p in s.sites:
                    out.setdefault(p, ("Bo", f"SB[i={i},j={j}]"))
        for (i, sg), sl in sorted(self.T_slices.items(), key=lambda kv: (kv[0][1] == "-", kv[0][0])):
            for s in sl:
                for p in s.sites:
                    out.setdefault(p, (f"T{i}{sg}", f"ST{sg}[i={i},j={s.j}]"))
        return out

    def dump(self) -> str:
        """One "x y region-tag slice-tag" line per site, row-major."""
        tags = self.tags()
        lines = [f"{x} {y} {r} {s}" for (x, y), (r, s) in sorted(tags.items(), key=lambda kv: (kv[0][1], kv[0][0]))]
        return "\n".join(lines) + "\n"


def base_slices(spec: SnailSpec, B_circ) -> list:
    """Slices of the truncated base: translates of the front sides of the annulus along u0."""
    qs, k = spec.qs, spec.k
    v0 = qs.u(0)
    front = list(range(-k + 1, k))
    groups: dict[Fraction, dict[int, list]] = {}
    for p in B_circ:
        vals = {i: Fraction(qs.u(i).dot(p) - spec.m(i), v0.dot(qs.u(i))) for i in front}
        lam = max(vals.values())
        g = groups.setdefault(lam, {})
        for i in front:
            if vals[i] == lam:
                g.setdefault(i, []).append(p)
    out = []
    for j, lam in enumerate(sorted(groups)):
        out.append((j + 1, {i: make_slice("SB", i, j + 1, qs.u(i), pts)
                            for i, pts in sorted(groups[lam].items())}))
    return out


def build_snail(spec: SnailSpec) -> SnailRegions:
    spec.check()
    ann = annulus_sets(spec.annulus)
    k, qs = spec.k, spec.qs
    v0 = qs.u(0)
    right = spec.right_halfplanes()
    zeros = (0,) * len(spec.s)
    B = lattice_points(spec.right_halfplanes(zeros))
    V_plus = lattice_points(right)
    V_minus = lattice_points(spec.mirror(right))
    ha_out = spec.shift_L(spec.annulus.half_outer())
    ha_in = spec.shift_L(spec.annulus.half_inner())
    HA_shift = lattice_difference(ha_out, ha_in)
    B_circ = B - ann.outer - HA_shift
    T, T_slices = {}, {}
    for i in range(2 * k):
        if spec.s[i] <= 0:
            continue
        hps = spec.trapezoid_halfplanes(i)
        n = qs.u(k + i)
        if spec.side in (RIGHT, BOTH):
            T[(i, "+")] = lattice_points(hps)
            T_slices[(i, "+")] = group_slices("ST+", i, n, T[(i, "+")])
        if spec.side in (LEFT, BOTH):
            T[(i, "-")] = lattice_points(spec.mirror(hps))
            T_slices[(i, "-")] = group_slices("ST-", i, mirror_direction(n, v0), T[(i, "-")])
    if spec.side == RIGHT:
        V = V_plus
    elif spec.side == LEFT:
        V = V_minus
    else:
        V = V_plus | V_minus
    return SnailRegions(spec, V, V_plus, V_minus, B, B_circ, ann.A, ann.A_int, HA_shift,
                        T, T_slices, base_slices(spec, B_circ))
