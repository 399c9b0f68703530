"""
Health Parameters Module
========================

Parameters of the per-tick health update and the hospital state machine.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from ..environment.world import RecoveryTable
from ..exceptions import ConfigurationError, ExposureError
from ..population.synthesis import GROUP_NAMES


@dataclass(frozen=True)
class HealthParams:
    """
    Attributes:
        alpha: Loss rate per tick, 0 < alpha < 1
        eta: Age-group multiplier of the loss, keyed young/active/old
        h_max: Nominal health at the start
        threshold: PM10 (µg/m³) at or above which health is lost
        at_risk_below: Health strictly below this is at risk
        adaptive_capacity: Ceiling recovery may restore health to
        road_multiplier: Factor applied to background PM10 on road cells
        recovery: Recovery per tick by land-price grade
        hospital_stay: Ticks spent in hospital
        discharge_health: Health on discharge
        seed_decrement: Loss applied on exceedance while health equals h_max
    """
    alpha: float = 0.0043
    eta: Mapping[str, float] = field(default_factory=lambda: {g: 1.0 for g in GROUP_NAMES})
    h_max: float = 300.0
    threshold: float = 100.0
    at_risk_below: float = 100.0
    adaptive_capacity: float = 100.0
    road_multiplier: float = 1.5
    recovery: RecoveryTable = field(default_factory=RecoveryTable.default)
    hospital_stay: int = 28
    discharge_health: float = 100.0
    seed_decrement: float = 1.0

    def __post_init__(self):
        missing = [g for g in GROUP_NAMES if g not in self.eta]
        if missing:
            raise ConfigurationError(f"eta missing for groups {missing}")
        object.__setattr__(self, "eta", {g: float(self.eta[g]) for g in GROUP_NAMES})

        if not 0 < self.alpha < 1:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if any(v <= 0 for v in self.eta.values()):
            raise ConfigurationError(f"eta must be > 0 for every group, got {self.eta}")
        if self.h_max <= 0:
            raise ConfigurationError(f"h_max must be > 0, got {self.h_max}")
        if not 0 < self.adaptive_capacity <= self.h_max:
            raise ConfigurationError(
                f"adaptive_capacity must lie in (0, h_max={self.h_max}], got {self.adaptive_capacity}"
            )
        if self.threshold < 0:
            raise ConfigurationError(f"threshold must be >= 0, got {self.threshold}")
        if self.road_multiplier < 1:
            raise ConfigurationError(f"road_multiplier must be >= 1, got {self.road_multiplier}")
        if self.hospital_stay < 1:
            raise ConfigurationError(f"hospital_stay must be >= 1 tick, got {self.hospital_stay}")
        if not 0 < self.discharge_health <= self.h_max:
            raise ConfigurationError(f"discharge_health must lie in (0, h_max], got {self.discharge_health}")
        if self.seed_decrement <= 0:
            raise ConfigurationError(f"seed_decrement must be > 0, got {self.seed_decrement}")

    @classmethod
    def from_config(cls, config) -> "HealthParams":
        """Build from the `health` config section."""
        section = config.get("health", {}) or {}
        table = RecoveryTable.from_config(config)
        try:
            return cls(
                alpha=float(section.get("alpha", 0.0043)),
                eta=dict(section.get("eta") or {g: 1.0 for g in GROUP_NAMES}),
                h_max=float(section.get("h_max", 300)),
                threshold=float(section.get("threshold", 100)),
                at_risk_below=float(section.get("at_risk_below", 100)),
                adaptive_capacity=float(section.get("adaptive_capacity", 100)),
                road_multiplier=float(section.get("road_multiplier", 1.5)),
                recovery=table,
                hospital_stay=int(section.get("hospital_stay", 28)),
                discharge_health=float(section.get("discharge_health", 100)),
                seed_decrement=float(section.get("seed_decrement", 1.0)),
            )
        except ExposureError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"invalid health section: {e}") from e

    def eta_vector(self) -> Tuple[float, float, float]:
        """eta in young, active, old order."""
        return tuple(self.eta[g] for g in GROUP_NAMES)

    def eta_array(self) -> np.ndarray:
        return np.array(self.eta_vector(), dtype=float)

    def to_dict(self) -> Dict[str, object]:
        return {
            "alpha": self.alpha,
            "eta": dict(self.eta),
            "h_max": self.h_max,
            "threshold": self.threshold,
            "at_risk_below": self.at_risk_below,
            "adaptive_capacity": self.adaptive_capacity,
            "road_multiplier": self.road_multiplier,
            "recovery": list(self.recovery.rates),
            "hospital_stay": self.hospital_stay,
            "discharge_health": self.discharge_health,
            "seed_decrement": self.seed_decrement,
        }
