"""
Simulation State Module
=======================

Struct-of-arrays state of one run. Every per-agent attribute is a numpy array
indexed by agent id; cells are global ids of the Region.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..environment.world import Region
from ..exceptions import ConfigurationError, UndefinedRateError, ValidationError
from ..pollution.series import HOME, TickSeries, WORK
from ..population.census import AGE_BINS
from ..population.synthesis import AgentGroup, AgentSpec
from .params import HealthParams

ACTIVE = "active"
HOSPITALIZED = "hospitalized"


@dataclass
class ModelInputs:
    """Everything a run needs apart from parameters and seed."""
    region: Region
    agents: List[AgentSpec]
    series: Dict[str, TickSeries]

    def background(self) -> np.ndarray:
        """(district, tick) matrix of background PM10 in region district order."""
        missing = [d for d in self.region.districts if d not in self.series]
        if missing:
            raise ConfigurationError(f"no pollution series for districts {missing}")
        lengths = {len(self.series[d]) for d in self.region.districts}
        if len(lengths) != 1:
            raise ValidationError(f"district tick series differ in length: {sorted(lengths)}")
        return np.vstack([self.series[d].values for d in self.region.districts])

    @property
    def tick0_kind(self) -> str:
        return self.series[self.region.districts[0]].tick0_kind


@dataclass
class AgentState:
    """Read-only view of one agent at the current tick."""
    spec: AgentSpec
    health: float
    status: str
    remaining_ticks: int
    admissions: int
    current_cell: int

    @property
    def hospitalized(self) -> bool:
        return self.status == HOSPITALIZED


class SimState:
    """Mutable state of a single run."""

    def __init__(self, inputs: ModelInputs, params: HealthParams, seed: int = 0,
                 max_ticks: int = 8764, young_radius: float = 3, old_radius: float = 1):
        if max_ticks < 1:
            raise ConfigurationError(f"max_ticks must be >= 1, got {max_ticks}")
        self.region = inputs.region
        self.specs = list(inputs.agents)
        self.params = params
        self.max_ticks = int(max_ticks)
        self.tick = 0
        self.rng = np.random.default_rng(seed)
        self.background = inputs.background()
        self.tick0_kind = inputs.tick0_kind
        self.road_factor = np.where(self.region.is_road, params.road_multiplier, 1.0)

        n = len(self.specs)
        self.group = np.array([a.group.code for a in self.specs], dtype=np.int8)
        self.age_bin = np.array([AGE_BINS.index(a.age_bin) for a in self.specs], dtype=np.int64)
        self.district = np.array([self.region.district_index(a.district_id) for a in self.specs],
                                 dtype=np.int64)
        self.assessed = np.array([not a.cross_district for a in self.specs], dtype=bool)
        self.home = np.array([self._home_id(a) for a in self.specs], dtype=np.int64)
        self.work = np.array([self._work_id(a) for a in self.specs], dtype=np.int64)
        self.current = self.home.copy()

        self.health = np.full(n, params.h_max, dtype=float)
        self.remaining = np.zeros(n, dtype=np.int64)
        self.admissions = np.zeros(n, dtype=np.int64)

        self.eta = params.eta_array()[self.group]
        self.recovery = params.recovery.as_array()[self._home_grades()]

        radius = {AgentGroup.YOUNG.code: young_radius, AgentGroup.OLD.code: old_radius}
        self.mobile = np.flatnonzero(np.isin(self.group, list(radius)))
        self.candidates, self.n_candidates = self._day_candidates(radius)

    def _home_id(self, agent: AgentSpec) -> int:
        if agent.home_cell is None:
            raise ValidationError(f"agent {agent.id} has no home cell; assign locations first")
        return self.region.global_id(agent.district_id, agent.home_cell)

    def _work_id(self, agent: AgentSpec) -> int:
        if agent.work_cell is None or agent.work_district not in self.region.worlds:
            return -1
        return self.region.global_id(agent.work_district, agent.work_cell)

    def _home_grades(self) -> np.ndarray:
        grades = self.region.price_grade[self.home]
        if (grades > self.params.recovery.grades).any():
            raise ConfigurationError(
                f"price grades up to {int(grades.max())} but the recovery table has {self.params.recovery.grades}"
            )
        return grades

    def _day_candidates(self, radius: Dict[int, float]):
        """Padded global ids of the walkable cells each mobile agent may visit."""
        rows = []
        for i in self.mobile:
            spec = self.specs[i]
            world = self.region.worlds[spec.district_id]
            local = world.neighbors_flat(spec.home_cell, radius[int(self.group[i])])
            if len(local) == 0:
                local = np.array([spec.home_cell])
            rows.append(local + self.region.offsets[spec.district_id])
        width = max((len(r) for r in rows), default=1)
        candidates = np.full((len(rows), width), -1, dtype=np.int64)
        counts = np.zeros(len(rows), dtype=np.int64)
        for k, r in enumerate(rows):
            candidates[k, :len(r)] = r
            counts[k] = len(r)
        return candidates, counts

    @property
    def n_agents(self) -> int:
        return len(self.specs)

    @property
    def hospitalized(self) -> np.ndarray:
        return self.remaining > 0

    def kind_of(self, tick: Optional[int] = None) -> str:
        """Work or home, alternating from the series' first tick."""
        t = self.tick if tick is None else tick
        if t % 2 == 0:
            return self.tick0_kind
        return HOME if self.tick0_kind == WORK else WORK

    def at_risk_mask(self) -> np.ndarray:
        """Health below the at-risk level, or in hospital."""
        return (self.health < self.params.at_risk_below) | self.hospitalized

    def at_risk_rate(self) -> float:
        """Share of the assessed population at risk."""
        total = int(self.assessed.sum())
        if total == 0:
            raise UndefinedRateError("at-risk rate is undefined: no assessed agents")
        return float((self.at_risk_mask() & self.assessed).sum()) / total

    def agent(self, i: int) -> AgentState:
        return AgentState(
            spec=self.specs[i],
            health=float(self.health[i]),
            status=HOSPITALIZED if self.remaining[i] > 0 else ACTIVE,
            remaining_ticks=int(self.remaining[i]),
            admissions=int(self.admissions[i]),
            current_cell=int(self.current[i]),
        )

    def __repr__(self) -> str:
        return f"SimState(tick={self.tick}, agents={self.n_agents}, region={self.region!r})"
