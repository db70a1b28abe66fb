"""Exact rational directions on the unit circle.

A direction is stored as its primitive integer vector; all angular decisions
use integer dot and cross products.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Direction:
    x: int
    y: int

    def __post_init__(self):
        if self.x == 0 and self.y == 0:
            raise ValueError("zero vector is not a direction")
        if math.gcd(self.x, self.y) != 1:
            raise ValueError(f"({self.x},{self.y}) is not primitive")

    @classmethod
    def of(cls, x: int, y: int) -> "Direction":
        """Direction of an arbitrary nonzero integer vector."""
        g = math.gcd(x, y)
        if g == 0:
            raise ValueError("zero vector is not a direction")
        return cls(x // g, y // g)

    @property
    def vec(self) -> tuple[int, int]:
        return (self.x, self.y)

    @property
    def norm2(self) -> int:
        return self.x * self.x + self.y * self.y

    def dot(self, p) -> int:
        return self.x * p[0] + self.y * p[1]

    def cross(self, p) -> int:
        return self.x * p[1] - self.y * p[0]

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y)

    def rot_ccw(self) -> "Direction":
        return Direction(-self.y, self.x)

    def rot_cw(self) -> "Direction":
        return Direction(self.y, -self.x)

    def __getitem__(self, i):
        return (self.x, self.y)[i]

    def __iter__(self):
        yield self.x
        yield self.y

    def __repr__(self):
        return f"({self.x},{self.y})"

    def angle(self) -> float:
        """Floating angle in [0, 2pi); for display only."""
        a = math.atan2(self.y, self.x)
        return a if a >= 0 else a + 2 * math.pi


E1 = Direction(1, 0)
E2 = Direction(0, 1)
AXES = (E1, E2, -E1, -E2)


def dot(a, b) -> int:
    return a[0] * b[0] + a[1] * b[1]


def cross(a, b) -> int:
    return a[0] * b[1] - a[1] * b[0]


def _half(a) -> int:
    return 0 if (a[1] > 0 or (a[1] == 0 and a[0] > 0)) else 1


def ccw_cmp(a, b) -> int:
    """Compare angles measured counterclockwise from +x in [0, 2pi)."""
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    c = cross(a, b)
    return -1 if c > 0 else (1 if c < 0 else 0)


def angle_key(a):
    return functools.cmp_to_key(ccw_cmp)(a)


def relative(a, origin):
    """Coordinates of ``a`` in the frame (origin, rot_ccw(origin)), scaled by |origin|."""
    return (dot(a, origin), cross(origin, a))


def ccw_from(origin, a):
    """Sort key: counterclockwise angle of ``a`` measured from ``origin``."""
    return angle_key(relative(a, origin))


def cw_from(origin, a):
    """Sort key: clockwise angle of ``a`` measured from ``origin``."""
    r = relative(a, origin)
    return angle_key((r[0], -r[1]))


def sort_ccw(dirs, start=None):
    if start is None:
        return sorted(dirs, key=angle_key)
    return sorted(dirs, key=lambda d: ccw_from(start, d))


def sort_cw(dirs, start):
    return sorted(dirs, key=lambda d: cw_from(start, d))


def strictly_between_ccw(a, b, u) -> bool:
    """True iff u lies in the open ccw arc from a to b (a == b means the circle minus a)."""
    ra, rb = ccw_from(a, u), ccw_from(a, b)
    zero = ccw_from(a, a)
    if ra == zero:
        return False
    if ccw_from(a, b) == zero:
        return True
    return ra < rb


def in_closed_arc(start, end, u) -> bool:
    """True iff u lies in the closed ccw arc from start to end (start == end: full circle)."""
    if start == end:
        return True
    return ccw_from(start, u) <= ccw_from(start, end)


def gap_representative(a, b) -> Direction:
    """A direction strictly inside the open ccw gap from a to b (a != b)."""
    c = cross(a, b)
    if c > 0:
        return Direction.of(a[0] + b[0], a[1] + b[1])
    if c == 0:  # b == -a: the gap is a half circle
        return Direction.of(-a[1], a[0])
    return Direction.of(-(a[0] + b[0]), -(a[1] + b[1]))


def reflect(u, axis) -> Direction:
    """Reflection of direction u across the line spanned by ``axis``."""
    n2 = axis[0] ** 2 + axis[1] ** 2
    d = dot(u, axis)
    return Direction.of(2 * d * axis[0] - n2 * u[0], 2 * d * axis[1] - n2 * u[1])


def ext_gcd(a: int, b: int):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class LineFrame:
    """Unimodular coordinates adapted to a direction.

    A site x is written x = s*t + h*p where t = rot_ccw(v) spans the line
    orthogonal to v and <p, v> = 1, so h = <x, v> and H_v = {h < 0}.
    """

    v: Direction

    @functools.cached_property
    def t(self) -> tuple[int, int]:
        return (-self.v.y, self.v.x)

    @functools.cached_property
    def p(self) -> tuple[int, int]:
        _, a, b = ext_gcd(self.v.x, self.v.y)
        return (a, b)

    def to_sh(self, x, y) -> tuple[int, int]:
        px, py = self.p
        return (y * px - x * py, x * self.v.x + y * self.v.y)

    def from_sh(self, s, h) -> tuple[int, int]:
        return (s * self.t[0] + h * self.p[0], s * self.t[1] + h * self.p[1])


# --------------------------------------------------------- exact surd signs

def le_surd(a, c, coef, n: int) -> bool:
    """Exact test of ``a <= c + coef*sqrt(n)`` for rationals a, c, coef and n >= 0."""
    d = Fraction(a) - Fraction(c)
    coef = Fraction(coef)
    if coef >= 0:
        return d <= 0 or d * d <= coef * coef * n
    return d < 0 and d * d >= coef * coef * n


def lt_surd(a, c, coef, n: int) -> bool:
    """Exact test of ``a < c + coef*sqrt(n)``."""
    d = Fraction(a) - Fraction(c)
    coef = Fraction(coef)
    if coef >= 0:
        return d < 0 or d * d < coef * coef * n
    return d < 0 and d * d > coef * coef * n


def floor_surd(c, coef, n: int, strict: bool = False) -> int:
    """Largest integer a with a <= c + coef*sqrt(n) (or < when strict)."""
    test = lt_surd if strict else le_surd
    a = math.floor(float(c) + float(coef) * math.sqrt(n))
    while test(a + 1, c, coef, n):
        a += 1
    while not test(a, c, coef, n):
        a -= 1
    return a


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s**2 * f with f squarefree; returns (s, f)."""
    s, f, d = 1, 1, 2
    m = n
    while d * d <= m:
        while m % (d * d) == 0:
            m //= d * d
            s *= d
        if m % d == 0:
            m //= d
            f *= d
        d += 1
    return s, f * m


def surd_sign(terms) -> int:
    """Exact sign of sum(c * sqrt(n)) for (c, n) pairs with rational c and integer n >= 0.

    Terms are grouped by squarefree kernel; square roots of distinct squarefree
    integers are linearly independent over Q, so a nonzero grouped sum is never
    zero and a high-precision evaluation decides its sign.
    """
    from decimal import Decimal, localcontext

    groups: dict[int, Fraction] = {}
    for c, n in terms:
        if n == 0 or c == 0:
            continue
        s, f = _squarefree_split(n)
        groups[f] = groups.get(f, Fraction(0)) + Fraction(c) * s
    groups = {f: c for f, c in groups.items() if c != 0}
    if not groups:
        return 0
    if len(groups) == 1:
        (c,) = groups.values()
        return 1 if c > 0 else -1
    with localcontext() as ctx:
        ctx.prec = 80
        total = sum(
            (Decimal(c.numerator) / Decimal(c.denominator)) * Decimal(f).sqrt()
            for f, c in groups.items()
        )
    return 1 if total > 0 else -1
