from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["ConditionReport", "GridSpec", "REPORT_VERSION", "to_jsonable", "plateaus"]

REPORT_VERSION = "1.0"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``n_points`` offsets on ``[lo, hi]``."""

    lo: float
    hi: float
    n_points: int = 41

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("grid bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.n_points < 3:
            raise ValueError("grid needs at least 3 points")

    @classmethod
    def symmetric(cls, u_max: float, n_points: int = 41) -> "GridSpec":
        return cls(-abs(u_max), abs(u_max), n_points)

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_points)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


@dataclass
class ConditionReport:
    """Verdicts and witness values for one hypothesis.

    ``verdicts`` holds one boolean per grid point (or per step); ``holds`` is
    their conjunction over ``region`` unless the condition defines its own
    summary (documented by the checker that built the report).
    """

    condition: str
    region: Any
    verdicts: np.ndarray
    witnesses: dict
    holds: bool
    parameters: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def violations(self):
        """Witness entries at the points where the condition fails."""
        bad = ~np.asarray(self.verdicts, dtype=bool)
        return {k: np.asarray(v)[bad] for k, v in self.witnesses.items()
                if np.ndim(v) == 1 and len(v) == len(bad)}

    def to_dict(self) -> dict:
        return to_jsonable({
            "spec_version": REPORT_VERSION,
            "condition": self.condition,
            "region": self.region,
            "verdict": self.holds,
            "verdicts": self.verdicts,
            "witnesses": self.witnesses,
            "parameters": self.parameters,
            "notes": self.notes,
        })

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def plateaus(partial_sums, tol: float = 0.01) -> bool:
    """True when the last quartile adds less than ``tol`` times the final total."""
    s = np.asarray(partial_sums, dtype=np.float64)
    if s.size == 0:
        return True
    q = s[(3 * s.size) // 4 - 1] if s.size >= 4 else 0.0
    total = s[-1]
    return bool(s[-1] - q <= tol * abs(total))
