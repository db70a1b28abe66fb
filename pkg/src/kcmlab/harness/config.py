"""Flat ``key = value`` experiment configuration."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

from ..errors import ConfigError, FamilyError
from ..family.family import ZOO_TEXT, UpdateFamily, parse_family, zoo

MODES = ("analyze", "bootstrap-tau", "kcm-tau", "geometry", "verify", "fit", "event-prob")
EVENTS = ("G(T)", "G(Bo)", "SG(B)", "SG(V)")


@dataclass
class ExperimentConfig:
    mode: str = "analyze"
    family: str = "two_neighbour"  # zoo name or path to a family file
    q: tuple = (0.2,)
    trials: int = 1
    master_seed: int = 0
    # lattice region for kcm-tau: "torus:WxH" or "box:WxH" (centred on the origin)
    region: str = "torus:64x64"
    boundary: str = "healthy"  # healthy | infected
    t_max: float = 1000.0
    box_start: int = 64
    box_cap: int = 4096
    # snail geometry (geometry, verify, event-prob)
    u0: tuple = (-1, 0)
    R: tuple = (8,)
    L: str = "60"
    rbar: tuple = ("10", "2", "0")
    delta: str = "1/5"
    w: int = 4
    side: str = "Both"
    event: str = "SG(V)"
    input: str = ""
    output: str = ""

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ConfigError("mode", f"{self.mode!r} is not one of {', '.join(MODES)}")
        if not self.q or any(not 0 < q < 1 for q in self.q):
            raise ConfigError("q", "probabilities must lie in (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.boundary not in ("healthy", "infected"):
            raise ConfigError("boundary", "must be healthy or infected")
        if self.t_max < 0:
            raise ConfigError("t_max", "must be nonnegative")
        if self.box_start < 1 or self.box_cap < self.box_start:
            raise ConfigError("box_cap", "need 1 <= box_start <= box_cap")
        if self.w < 1:
            raise ConfigError("w", "must be positive")
        if not self.R or any(r <= 0 for r in self.R):
            raise ConfigError("R", "radii must be positive")
        if self.side not in ("Right", "Left", "Both"):
            raise ConfigError("side", "must be Right, Left or Both")
        if self.event not in EVENTS:
            raise ConfigError("event", f"must be one of {', '.join(EVENTS)}")
        if self.mode == "fit" and not self.input:
            raise ConfigError("input", "fit needs a TauSample CSV")
        parse_region(self.region)
        for name in ("L", "delta"):
            _fraction(name, getattr(self, name))
        for r in self.rbar:
            _fraction("rbar", r)
        return self

    def load_family(self) -> UpdateFamily:
        if self.family in ZOO_TEXT:
            return zoo(self.family)
        path = Path(self.family)
        if not path.is_file():
            raise ConfigError("family", f"{self.family!r} is neither a zoo name nor a file")
        try:
            return parse_family(path.read_text(encoding="utf-8"), path.stem)
        except FamilyError as e:
            raise ConfigError("family", str(e)) from e

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"


def _fraction(name, text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(name, f"{text!r} is not a number") from None


def parse_region(text: str):
    """'torus:WxH' or 'box:WxH' to (kind, W, H)."""
    try:
        kind, dims = text.split(":")
        wh = dims.lower().split("x")
        W, H = int(wh[0]), int(wh[-1])
    except (ValueError, IndexError):
        raise ConfigError("region", f"{text!r} is not torus:WxH or box:WxH") from None
    if kind not in ("torus", "box") or W < 1 or H < 1 or len(wh) > 2:
        raise ConfigError("region", f"{text!r} is not torus:WxH or box:WxH")
    return kind, W, H


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_ALIASES = {"master-seed": "master_seed", "seed": "master_seed", "t-max": "t_max",
            "box-start": "box_start", "box-cap": "box_cap", "r": "rbar"}


def _convert(name: str, raw: str):
    default = _FIELDS[name].default
    raw = raw.strip()
    try:
        if name == "q":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if name == "R":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if name in ("u0",):
            a, b = (int(x) for x in raw.split(","))
            return (a, b)
        if name == "rbar":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(name, f"cannot parse {raw!r}") from None


def canonical_key(key: str) -> str:
    key = key.strip()
    key = _ALIASES.get(key, key).replace("-", "_")
    if key not in _FIELDS:
        raise ConfigError(key, "unknown configuration key")
    return key


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse config text; '#' starts a comment, lists are comma separated."""
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected key = value, got {line!r}")
        key, raw = line.split("=", 1)
        key = canonical_key(key)
        values[key] = _convert(key, raw)
    for key, raw in (overrides or {}).items():
        key = canonical_key(key)
        values[key] = _convert(key, raw) if isinstance(raw, str) else raw
    return ExperimentConfig(**values).validate()


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config", str(e)) from None
    return parse_config(text, overrides)
