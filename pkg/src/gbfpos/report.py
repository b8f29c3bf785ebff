"""Check results and the small numerical helpers shared by all checks."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

__all__ = ["TOL_EQ", "TOL_CONE", "CheckResult", "deviation", "check_rng", "sort_results"]

TOL_EQ = 1e-9
TOL_CONE = 1e-10


@dataclass
class CheckResult:
    check: str
    target: str
    max_deviation: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"check": self.check, "target": self.target,
                "max_deviation": float(self.max_deviation), "pass": bool(self.passed),
                "details": _plain(self.details)}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(np.real(obj)), float(np.imag(obj))]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def deviation(lhs, rhs) -> tuple[float, float]:
    """Maximum absolute difference and the scale used for relative tolerance."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    if lhs.size == 0:
        return 0.0, 1.0
    dev = float(np.max(np.abs(lhs - rhs)))
    scale = max(1.0, float(np.max(np.abs(rhs))))
    return dev, scale


def result(check: str, target: str, dev: float, scale: float, tol: float,
           **details) -> CheckResult:
    return CheckResult(check, target, dev, bool(dev <= tol * scale), details)


def check_rng(check: str, target: str, seed: int = 0) -> np.random.Generator:
    """Deterministic generator per (check, target) so reports are reproducible."""
    return np.random.default_rng([seed, zlib.crc32(f"{check}|{target}".encode())])


def sort_results(results) -> list[CheckResult]:
    return sorted(results, key=lambda r: (r.check, r.target))
