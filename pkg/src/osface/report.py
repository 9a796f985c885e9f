"""Verification records produced by every ``check_*`` function."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one numerical identity check at one sample point.

    ``passed`` is always ``residual <= tolerance``; it is derived, never set.
    """

    check_name: str
    lhs: complex
    rhs: complex
    residual: float
    tolerance: float
    params: Mapping[str, Any] = field(default_factory=dict)
    elapsed_micros: int = 0

    def __post_init__(self):
        object.__setattr__(self, "residual", float(self.residual))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        if not self.residual >= 0:
            raise ValueError(f"residual must be non-negative, got {self.residual!r}")

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def with_tolerance(self, tolerance: float) -> VerificationReport:
        return dataclasses.replace(self, tolerance=float(tolerance))

    def with_params(self, **extra) -> VerificationReport:
        return dataclasses.replace(self, params={**self.params, **extra})

    def to_record(self) -> dict:
        return {
            "check_name": self.check_name,
            "params": _jsonable(self.params),
            "lhs": complex_pair(self.lhs),
            "rhs": complex_pair(self.rhs),
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "elapsed_micros": int(self.elapsed_micros),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, allow_nan=True)


def complex_pair(z) -> list[float]:
    z = complex(z)
    # +0.0 normalizes negative zero so identical values serialize identically
    return [z.real + 0.0, z.imag + 0.0]


def _jsonable(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return complex_pair(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def relative_residual(difference, *magnitudes, zero_tolerance: float = 0.0) -> float:
    """``|difference|`` scaled by the largest participating magnitude.

    Falls back to the absolute value when every magnitude is below
    ``zero_tolerance``.
    """
    diff = float(np.max(np.abs(difference)))
    scale = max((float(np.max(np.abs(m))) for m in magnitudes), default=0.0)
    if scale < zero_tolerance or scale == 0.0:
        return diff
    return diff / scale
