"""
Location Assignment Module
==========================

Places agents on home cells and gives active agents a work cell chosen
through the origin-destination matrix.
"""

import logging
from dataclasses import replace
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np

from ..environment.world import World
from ..exceptions import ConfigurationError, ValidationError
from .census import ODMatrix
from .synthesis import AgentGroup, AgentSpec

logger = logging.getLogger(__name__)


def assign_locations(agents: Sequence[AgentSpec], worlds: Union[World, Mapping[str, World]],
                     od: ODMatrix, seed: int = 0) -> List[AgentSpec]:
    """
    Assign home cells to every agent and work cells to active agents.

    Homes are uniform over the Residential cells of the agent's district. An
    active agent draws a destination district from its home district's OD row;
    the work cell is uniform over the walkable cells of that district. Agents
    commuting to another district are flagged cross-district; those whose
    destination lies outside `worlds` get no work cell.

    Args:
        agents: Agents from synthesize()
        worlds: One World, or district id -> World
        od: Origin-destination trips
        seed: Seed; districts draw from child streams in sorted order

    Returns:
        New agent list, same order and ids
    """
    if isinstance(worlds, World):
        worlds = {worlds.district_id: worlds}

    by_district: Dict[str, List[int]] = {}
    for i, agent in enumerate(agents):
        by_district.setdefault(agent.district_id, []).append(i)

    unknown = sorted(set(by_district) - set(worlds))
    if unknown:
        raise ConfigurationError(f"agents live in districts without a world: {unknown}")

    districts = sorted(by_district)
    # every populated district needs an OD row, whether or not its sample drew active agents
    od_rows = {district: od.destinations(district) for district in districts}
    streams = np.random.SeedSequence(seed).spawn(len(districts))
    placed = list(agents)

    for district, stream in zip(districts, streams):
        rng = np.random.default_rng(stream)
        world = worlds[district]
        members = by_district[district]

        if len(world.residential_index) == 0:
            raise ValidationError(f"{district}: world has no Residential cell to house agents")
        homes = world.residential_index[rng.integers(0, len(world.residential_index), size=len(members))]

        active = [i for i in members if agents[i].group is AgentGroup.ACTIVE]
        work: Dict[int, tuple] = {}
        if active:
            names, probs = od_rows[district]
            choice = rng.choice(len(names), size=len(active), p=probs)
            for j, dest in enumerate(names):
                chosen = [active[k] for k in np.flatnonzero(choice == j)]
                if not chosen:
                    continue
                if dest not in worlds:
                    work.update({i: (None, dest) for i in chosen})
                    continue
                walkable = worlds[dest].walkable_index
                if len(walkable) == 0:
                    raise ConfigurationError(f"destination district {dest!r} has no walkable cell")
                cells = walkable[rng.integers(0, len(walkable), size=len(chosen))]
                work.update({i: (int(c), dest) for i, c in zip(chosen, cells)})

        for i, home in zip(members, homes):
            work_cell, work_district = work.get(i, (None, None))
            placed[i] = replace(
                agents[i],
                home_cell=int(home),
                work_cell=work_cell,
                work_district=work_district,
                cross_district=work_district is not None and work_district != district,
            )

        crossing = sum(placed[i].cross_district for i in members)
        logger.debug("%s: placed %d agents, %d commute out", district, len(members), crossing)

    return placed
