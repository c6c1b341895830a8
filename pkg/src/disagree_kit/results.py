"""Shared result record for the approximate disagreement estimators."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class DisagreementEstimate:
    """An estimated disagreement (or Kemeny) value with its provenance:
    method tag, error parameters, seed, optional per-node contributions
    for the nodes the estimator touched, and method diagnostics."""

    method: str
    value: float
    params: dict
    seed: int | None = None
    wall_time_s: float = 0.0
    per_node: dict[int, float] | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "delta_hat": self.value,
            "params": dict(self.params),
            "wall_time_s": self.wall_time_s,
        }
        if self.diagnostics:
            out["diagnostics"] = dict(self.diagnostics)
        return out
