"""Finite lattice regions and infection configurations.

Every region exposes a bounding box ``(x0, y0, w, h)`` and a boolean membership
mask over it, indexed ``[y - y0, x - x0]``; site enumeration is row-major
starting at the lexicographically least corner (increasing y, then x).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np


class Region:
    wraps = False

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        raise NotImplementedError

    @cached_property
    def mask(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def n_sites(self) -> int:
        return int(self.mask.sum())

    def contains(self, x: int, y: int) -> bool:
        x0, y0, w, h = self.bbox
        if self.wraps:
            return 0 <= x - x0 < w and 0 <= y - y0 < h
        c, r = x - x0, y - y0
        return 0 <= c < w and 0 <= r < h and bool(self.mask[r, c])

    def sites(self) -> np.ndarray:
        """(n, 2) array of member sites in row-major order."""
        x0, y0, _, _ = self.bbox
        rs, cs = np.nonzero(self.mask)
        return np.stack([cs + x0, rs + y0], axis=1).astype(np.int64)

    def site_set(self) -> frozenset:
        return frozenset(map(tuple, self.sites().tolist()))

    def index_of(self, x: int, y: int) -> tuple[int, int]:
        x0, y0, w, h = self.bbox
        if self.wraps:
            return (y - y0) % h, (x - x0) % w
        return y - y0, x - x0

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class Box(Region):
    x0: int
    y0: int
    w: int
    h: int

    @property
    def bbox(self):
        return (self.x0, self.y0, self.w, self.h)

    @cached_property
    def mask(self):
        return np.ones((self.h, self.w), dtype=bool)

    @classmethod
    def centered(cls, w: int, h: int | None = None) -> "Box":
        h = w if h is None else h
        return cls(-(w // 2), -(h // 2), w, h)

    def describe(self):
        return f"box:{self.x0}:{self.y0}:{self.w}:{self.h}"


@dataclass(frozen=True, eq=True)
class Torus(Region):
    w: int
    h: int
    wraps = True

    @property
    def bbox(self):
        return (0, 0, self.w, self.h)

    @cached_property
    def mask(self):
        return np.ones((self.h, self.w), dtype=bool)

    def describe(self):
        return f"torus:{self.w}:{self.h}"


def _bounded(constraints) -> bool:
    """Normals positively span the plane iff no closed half-plane contains them all."""
    from ..family.directions import Direction, cross, sort_ccw

    dirs = sort_ccw({Direction.of(a, b) for a, b, _ in constraints})
    if len(dirs) < 3:
        return False
    return all(cross(dirs[i], dirs[(i + 1) % len(dirs)]) > 0 for i in range(len(dirs)))


@dataclass(frozen=True, eq=True)
class Polygon(Region):
    """Lattice points of an intersection of integer half-planes a*x + b*y <= c."""

    constraints: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        for a, b, c in self.constraints:
            if not all(isinstance(v, (int, np.integer)) for v in (a, b, c)):
                raise TypeError("polygon constraints must be integers")
            if a == 0 and b == 0:
                raise ValueError("zero normal")
        if not _bounded(self.constraints):
            raise ValueError("polygon is unbounded")

    @cached_property
    def bbox(self):
        cons = self.constraints
        verts = []
        for i in range(len(cons)):
            a1, b1, c1 = cons[i]
            for j in range(i + 1, len(cons)):
                a2, b2, c2 = cons[j]
                det = a1 * b2 - a2 * b1
                if det == 0:
                    continue
                x = Fraction(c1 * b2 - c2 * b1, det)
                y = Fraction(a1 * c2 - a2 * c1, det)
                if all(a * x + b * y <= c for a, b, c in cons):
                    verts.append((x, y))
        if not verts:
            return (0, 0, 0, 0)
        import math

        xl = math.ceil(min(v[0] for v in verts))
        xh = math.floor(max(v[0] for v in verts))
        yl = math.ceil(min(v[1] for v in verts))
        yh = math.floor(max(v[1] for v in verts))
        if xl > xh or yl > yh:
            return (0, 0, 0, 0)
        return (xl, yl, xh - xl + 1, yh - yl + 1)

    @cached_property
    def mask(self):
        x0, y0, w, h = self.bbox
        if w == 0:
            return np.zeros((0, 0), dtype=bool)
        ys, xs = np.mgrid[y0:y0 + h, x0:x0 + w]
        m = np.ones((h, w), dtype=bool)
        for a, b, c in self.constraints:
            m &= a * xs + b * ys <= c
        return m

    def describe(self):
        return "polygon:" + ";".join(f"{a},{b},{c}" for a, b, c in self.constraints)


class SiteSet(Region):
    """An explicit finite set of sites (unions of polygons, for instance)."""

    def __init__(self, sites):
        pts = sorted({(int(x), int(y)) for x, y in sites}, key=lambda p: (p[1], p[0]))
        self._sites = tuple(pts)

    def __eq__(self, other):
        return isinstance(other, SiteSet) and self._sites == other._sites

    def __hash__(self):
        return hash(self._sites)

    @cached_property
    def bbox(self):
        if not self._sites:
            return (0, 0, 0, 0)
        xs = [p[0] for p in self._sites]
        ys = [p[1] for p in self._sites]
        return (min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)

    @cached_property
    def mask(self):
        x0, y0, w, h = self.bbox
        m = np.zeros((h, w), dtype=bool)
        for x, y in self._sites:
            m[y - y0, x - x0] = True
        return m

    def describe(self):
        return f"sites:{len(self._sites)}"


# ------------------------------------------------------------ configuration

class Configuration:
    """Infection state on a region; internally True = infected.

    I/O uses the convention omega_x = 0 iff x is infected.
    """

    def __init__(self, region: Region, infected: np.ndarray | None = None):
        self.region = region
        m = region.mask
        if infected is None:
            infected = np.zeros(m.shape, dtype=bool)
        infected = np.asarray(infected, dtype=bool)
        if infected.shape != m.shape:
            raise ValueError(f"grid shape {infected.shape} does not match region {m.shape}")
        self.grid = infected & m

    @classmethod
    def from_sites(cls, region: Region, sites) -> "Configuration":
        g = np.zeros(region.mask.shape, dtype=bool)
        for x, y in sites:
            if not region.contains(x, y):
                raise ValueError(f"site ({x},{y}) outside region")
            g[region.index_of(x, y)] = True
        return cls(region, g)

    @classmethod
    def full(cls, region: Region) -> "Configuration":
        return cls(region, region.mask.copy())

    @classmethod
    def from_omega(cls, region: Region, omega: np.ndarray) -> "Configuration":
        return cls(region, np.asarray(omega) == 0)

    def omega(self) -> np.ndarray:
        """Omega array: 0 infected, 1 healthy (outside the region: 1)."""
        return np.where(self.grid, 0, 1).astype(np.uint8)

    def infected_sites(self) -> frozenset:
        x0, y0, _, _ = self.region.bbox
        rs, cs = np.nonzero(self.grid)
        return frozenset(zip((cs + x0).tolist(), (rs + y0).tolist()))

    def is_infected(self, x: int, y: int) -> bool:
        if not self.region.contains(x, y):
            raise ValueError(f"site ({x},{y}) outside region")
        return bool(self.grid[self.region.index_of(x, y)])

    @property
    def count(self) -> int:
        return int(self.grid.sum())

    def copy(self) -> "Configuration":
        return Configuration(self.region, self.grid.copy())

    def __eq__(self, other):
        return (
            isinstance(other, Configuration)
            and self.region == other.region
            and np.array_equal(self.grid, other.grid)
        )

    def __le__(self, other):
        return np.all(~self.grid | other.grid)

    def __repr__(self):
        return f"Configuration({self.region.describe()}, infected={self.count})"

    # ---- text grid: header "x0 y0 w h", then rows from the top (largest y) down
    def to_text(self) -> str:
        x0, y0, w, h = self.region.bbox
        lines = [f"{x0} {y0} {w} {h}"]
        for r in range(h - 1, -1, -1):
            lines.append("".join("o" if v else "." for v in self.grid[r]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, region: Region | None = None) -> "Configuration":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        x0, y0, w, h = (int(v) for v in lines[0].split())
        rows = lines[1:]
        if len(rows) != h or any(len(r) != w for r in rows):
            raise ValueError("grid does not match header")
        g = np.array([[ch == "o" for ch in row] for row in reversed(rows)], dtype=bool).reshape(h, w)
        bad = set("".join(rows)) - {"o", "."}
        if bad:
            raise ValueError(f"unexpected characters {sorted(bad)}")
        if region is None:
            region = Box(x0, y0, w, h)
        elif region.bbox != (x0, y0, w, h):
            raise ValueError("header does not match region")
        return cls(region, g)

    # ---- binary bitmap
    MAGIC = b"KCB1"

    def to_bytes(self, healthy_bits: bool = True) -> bytes:
        """16-byte header (magic, width, height, convention flag) then packed rows.

        Bits are little-endian within each byte, rows in increasing y.  With the
        omega convention a set bit means healthy (omega = 1).
        """
        _, _, w, h = self.region.bbox
        bits = ~self.grid if healthy_bits else self.grid
        payload = np.packbits(bits.reshape(-1), bitorder="little").tobytes()
        return self.MAGIC + struct.pack("<III", w, h, 1 if healthy_bits else 0) + payload

    @classmethod
    def from_bytes(cls, data: bytes, region: Region) -> "Configuration":
        if data[:4] != cls.MAGIC:
            raise ValueError("bad magic")
        w, h, flag = struct.unpack("<III", data[4:16])
        if (w, h) != region.bbox[2:]:
            raise ValueError("size does not match region")
        bits = np.unpackbits(np.frombuffer(data[16:], dtype=np.uint8), bitorder="little")
        bits = bits[: w * h].reshape(h, w).astype(bool)
        return cls(region, ~bits if flag else bits)
