"""Shared fixtures for the exposure toolkit tests."""

import numpy as np
import pytest

from src.config_loader import Config
from src.dynamics.model import ExposureModel
from src.dynamics.state import ModelInputs
from src.environment.world import Region
from src.pollution.series import TickSeries
from src.population.census import CensusTable, ODMatrix

from .helpers import OBSERVED_TICKS, constant_ticks, residential_world


@pytest.fixture
def make_inputs():
    """Inputs for hand-placed agents on one district (all residential unless a world is given)."""

    def _make(agents, value=200.0, n=OBSERVED_TICKS, world=None):
        world = world or residential_world()
        values = np.full(n, float(value)) if np.isscalar(value) else value
        series = TickSeries(world.district_id, values)
        return ModelInputs(region=Region(world), agents=list(agents), series={world.district_id: series})

    return _make


@pytest.fixture
def small_model():
    """
    ExposureModel on preloaded data: one 5 x 5 residential district, 40
    working-age and 40 older residents commuting within the district,
    constant PM10 of 200 and no recovery.
    """

    def _make(health=None, **sections):
        data = {
            "population": {"sample_rate": 1.0},
            "health": {"alpha": 0.1, "recovery": [0.0], **(health or {})},
            "experiments": {"replicates": 1, "seed_base": 0, "jobs": 1},
        }
        data.update(sections)
        return ExposureModel(
            Config.from_dict(data),
            worlds={"d": residential_world()},
            base_series={"d": constant_ticks()},
            census=CensusTable({"d": {"20-24": 40, "70-74": 40}}),
            od=ODMatrix({"d": {"d": 1.0}}),
        )

    return _make
