"""
Synthetic Population Module
===========================

Draws the sampled agent population from census counts.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..exceptions import ValidationError
from .census import AGE_BINS, CensusTable, bin_bounds

logger = logging.getLogger(__name__)


class AgentGroup(str, Enum):
    """Movement group; the order fixes the integer code used by the engine."""
    YOUNG = "young"
    ACTIVE = "active"
    OLD = "old"

    @property
    def code(self) -> int:
        return GROUPS.index(self)


GROUPS = (AgentGroup.YOUNG, AgentGroup.ACTIVE, AgentGroup.OLD)
GROUP_NAMES = tuple(g.value for g in GROUPS)


def group_of(age: int) -> AgentGroup:
    """Young below 15, active 15-64, old from 65."""
    if age < 0:
        raise ValidationError(f"age must be >= 0, got {age}")
    if age < 15:
        return AgentGroup.YOUNG
    if age < 65:
        return AgentGroup.ACTIVE
    return AgentGroup.OLD


@dataclass(frozen=True)
class AgentSpec:
    """
    Static description of one agent.

    Cells are flat indices (row * ncols + col) into the world of the district
    they belong to: `home_cell` into `district_id`, `work_cell` into
    `work_district`.
    """
    id: int
    age: int
    age_bin: str
    group: AgentGroup
    district_id: str
    home_cell: Optional[int] = None
    work_cell: Optional[int] = None
    work_district: Optional[str] = None
    cross_district: bool = False


def _stochastic_round(expected: float, rng: np.random.Generator) -> int:
    # rounding first keeps exact multiples (1000 * 0.05) from landing just below an integer
    expected = round(expected, 9)
    whole = int(np.floor(expected))
    return whole + int(rng.random() < expected - whole)


def synthesize(census: CensusTable, rate: float = 0.05, seed: int = 0,
               oldest_age: int = 99) -> List[AgentSpec]:
    """
    Sample agents from the census.

    Each (district, age bin) yields count * rate agents, the fractional part
    rounded up with that probability. Ages are uniform within the bin.

    Args:
        census: Census counts
        rate: Sampling rate, 0 < rate <= 1
        seed: Seed; districts draw from child streams in sorted order
        oldest_age: Upper age of the open 85+ bin

    Returns:
        Agents without locations, ids 0..n-1
    """
    if not 0 < rate <= 1:
        raise ValidationError(f"sample rate must lie in (0, 1], got {rate}")
    if census.is_empty():
        raise ValidationError("census is empty")

    districts = census.districts
    streams = np.random.SeedSequence(seed).spawn(len(districts))

    agents: List[AgentSpec] = []
    for district, stream in zip(districts, streams):
        rng = np.random.default_rng(stream)
        bins = census.counts[district]
        for label in AGE_BINS:
            n = _stochastic_round(bins.get(label, 0) * rate, rng)
            lo, hi = bin_bounds(label, oldest_age)
            for age in rng.integers(lo, hi + 1, size=n):
                agents.append(AgentSpec(
                    id=len(agents),
                    age=int(age),
                    age_bin=label,
                    group=group_of(int(age)),
                    district_id=district,
                ))

    logger.info("Synthesized %d agents from %d census persons (rate %.3f)",
                len(agents), census.total(), rate)
    return agents


def group_counts(agents: Iterable[AgentSpec]) -> dict:
    """Agent count per group name."""
    counts = {name: 0 for name in GROUP_NAMES}
    for agent in agents:
        counts[agent.group.value] += 1
    return counts


def agents_frame(agents: Sequence[AgentSpec], worlds: Optional[dict] = None) -> pd.DataFrame:
    """
    Tabulate agents, one row each.

    Args:
        agents: Agent list
        worlds: Optional district -> World; adds home/work (col, row) columns

    Returns:
        DataFrame
    """
    rows = []
    for a in agents:
        row = {
            "id": a.id,
            "district": a.district_id,
            "age": a.age,
            "age_bin": a.age_bin,
            "group": a.group.value,
            "home_cell": a.home_cell,
            "work_district": a.work_district,
            "work_cell": a.work_cell,
            "cross_district": a.cross_district,
        }
        if worlds is not None:
            home = worlds[a.district_id].coords(a.home_cell) if a.home_cell is not None else (None, None)
            work = (worlds[a.work_district].coords(a.work_cell)
                    if a.work_cell is not None and a.work_district in worlds else (None, None))
            row.update(home_col=home[0], home_row=home[1], work_col=work[0], work_row=work[1])
        rows.append(row)
    return pd.DataFrame(rows)
