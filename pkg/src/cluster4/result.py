"""Scalar analysis results with propagated one-sigma errors."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class AnalysisResult:
    """A point estimate plus its propagated standard error."""

    value: float
    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def to_json_dict(self) -> dict:
        return {"value": float(self.value), "sigma": float(self.sigma)}

    def __str__(self) -> str:
        return f"{self.value:+.4f} ± {self.sigma:.4f}"
