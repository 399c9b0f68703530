"""
Health Update Module
====================

Per-tick nominal-health update.

While exposed to PM10 at or above the threshold, an agent loses
alpha * eta * (h_max - h): the further below h_max, the faster the loss. An
agent still at h_max has no deficit to grow from, so its first exposed tick
takes a fixed seed decrement instead. Below the adaptive capacity the agent
recovers by the rate of its home cell's price grade, never past the capacity.
"""

from typing import Optional

import numpy as np

from ..population.synthesis import AgentGroup
from .params import HealthParams


def update_health(h: float, pm10: float, params: HealthParams, grade: Optional[int] = None,
                  group: AgentGroup = AgentGroup.ACTIVE) -> float:
    """
    Health after one tick.

    Args:
        h: Current health, 0 <= h <= h_max
        pm10: Exposure this tick (µg/m³)
        params: Health parameters
        grade: Price grade of the home cell; None recovers nothing
        group: Age group selecting eta

    Returns:
        New health in [0, h_max]
    """
    recovery = params.recovery.rate(grade) if grade else 0.0
    eta = params.eta[AgentGroup(group).value]
    new = update_health_array(np.array([h], dtype=float), np.array([pm10], dtype=float),
                              np.array([eta]), np.array([recovery]), params)
    return float(new[0])


def update_health_array(h: np.ndarray, pm10: np.ndarray, eta: np.ndarray,
                        recovery: np.ndarray, params: HealthParams) -> np.ndarray:
    """
    Vectorised update_health over agents.

    Args:
        h: Health per agent
        pm10: Exposure per agent
        eta: eta per agent
        recovery: Recovery rate per agent (already looked up from the grade)
        params: Health parameters

    Returns:
        New health array
    """
    deficit = params.h_max - h
    r = np.where(h < params.adaptive_capacity, recovery, 0.0)
    exposed = pm10 >= params.threshold

    declined = np.where(deficit <= 0, h - params.seed_decrement, h - params.alpha * eta * deficit + r)
    new = np.where(exposed, declined, h + r)

    # recovery never lifts health past the adaptive capacity
    rose = new > h
    new = np.where(rose, np.minimum(new, params.adaptive_capacity), new)
    return np.clip(new, 0.0, params.h_max)
