"""Infection-time samples shared by the bootstrap and KCM engines."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TauSample:
    tau: float | None  # None when truncated
    truncated: bool
    seed: int
    q: float
    region: str
    family: str = ""
    ring_count: int = 0  # KCM clock rings
    box: int = 0  # final bootstrap box side
    t_max: float | None = None

    @property
    def finite(self) -> bool:
        return not self.truncated and self.tau is not None
