"""Builders for tiny in-memory worlds, agents and pollution series."""

from datetime import date

import numpy as np

from src.dynamics.params import HealthParams
from src.environment.world import LandClass, RecoveryTable, build_world
from src.pollution.series import TickSeries, observed_tick_count
from src.population.synthesis import AgentSpec, group_of

OBSERVED_TICKS = observed_tick_count(date(2010, 1, 1), 6)


def residential_world(district="d", size=5, grade=1):
    cover = np.full((size, size), int(LandClass.RESIDENTIAL))
    price = np.full((size, size), grade)
    return build_world(cover, price, district)


def constant_ticks(district="d", value=200.0, n=OBSERVED_TICKS):
    return TickSeries(district, np.full(n, float(value)))


def home_agent(agent_id, age=40, district="d", home_cell=0, work_cell=None, cross_district=False):
    label = "85+" if age >= 85 else f"{age // 5 * 5}-{age // 5 * 5 + 4}"
    return AgentSpec(
        id=agent_id,
        age=age,
        age_bin=label,
        group=group_of(age),
        district_id=district,
        home_cell=home_cell,
        work_cell=work_cell,
        work_district=district if work_cell is not None else None,
        cross_district=cross_district,
    )


def zero_recovery(**overrides):
    return HealthParams(recovery=RecoveryTable((0.0,)), **overrides)
