"""
Exposure Model Module
=====================

Wires configured inputs (rasters, census, OD matrix, pollution series) into
seeded simulation runs.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config_loader import Config
from ..environment.raster import load_raster
from ..environment.world import Region, World, build_world
from ..exceptions import ConfigurationError
from ..pollution.aggregation import aggregate_to_ticks
from ..pollution.imputation import impute
from ..pollution.projection import project
from ..pollution.series import TickSeries, load_hourly_csv, load_tick_csv
from ..population.census import CensusTable, ODMatrix, load_census_csv, load_od_csv
from ..population.locations import assign_locations
from ..population.synthesis import AgentSpec, synthesize
from .engine import RunResult, simulate
from .params import HealthParams
from .state import ModelInputs

logger = logging.getLogger(__name__)


def stream_seeds(seed: int) -> Tuple[int, int, int]:
    """Independent seeds for synthesis, location assignment and movement."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(int(c.generate_state(1)[0]) for c in children)


class ExposureModel:
    """Loads the configured inputs once and runs seeded simulations on them."""

    def __init__(self, config: Config, worlds: Optional[Dict[str, World]] = None,
                 base_series: Optional[Dict[str, TickSeries]] = None,
                 census: Optional[CensusTable] = None, od: Optional[ODMatrix] = None):
        """
        Initialize the model.

        Args:
            config: Configuration object
            worlds: Preloaded district worlds (otherwise read from `data.districts`)
            base_series: Preloaded observed tick series per district
            census: Preloaded census table
            od: Preloaded OD matrix
        """
        self.config = config
        self._worlds = worlds
        self._base_series = base_series
        self._census = census
        self._od = od
        self.input_files: List[Path] = []
        self.warnings: List[str] = []

    def _district_path(self, district: str, key: str) -> Path:
        entry = self.config.districts.get(district) or {}
        if not entry.get(key):
            raise ConfigurationError(f"data.districts.{district}.{key} is not set")
        path = self.config.resolve_path(entry[key])
        if not path.exists():
            raise ConfigurationError(f"{key} file for {district} not found: {path}")
        self.input_files.append(path)
        return path

    def _input_path(self, key: str) -> Path:
        path = self.config.get_path(key)
        if not path.exists():
            raise ConfigurationError(f"{key} file not found: {path}")
        self.input_files.append(path)
        return path

    def load_worlds(self) -> Dict[str, World]:
        """Build every configured district world."""
        if self._worlds is None:
            districts = sorted(self.config.districts)
            if not districts:
                raise ConfigurationError("no districts configured under data.districts")
            kind = self.config.get("environment.price_raster_kind", "grade")
            grades = int(self.config.get("environment.price_grades", 5))
            cell_size = float(self.config.get("environment.cell_size", 30))
            worlds = {}
            for district in districts:
                cover = load_raster(self._district_path(district, "land_cover"), cell_size)
                price = load_raster(self._district_path(district, "land_price"), cell_size)
                worlds[district] = build_world(cover, price, district, price_kind=kind, grades=grades)
                self.warnings.extend(worlds[district].warnings)
            self._worlds = worlds
        return self._worlds

    def load_base_series(self) -> Dict[str, TickSeries]:
        """Observed tick series per district, imputed and aggregated when hourly."""
        if self._base_series is None:
            kind = self.config.get("pollution.input_kind", "hourly")
            series = {}
            for district in sorted(self.config.districts):
                path = self._district_path(district, "pollution")
                if kind == "hourly":
                    hourly = load_hourly_csv(path, district)
                    filled = impute(
                        hourly,
                        long_gap_hours=int(self.config.get("pollution.long_gap_hours", 168)),
                        max_missing_fraction=float(self.config.get("pollution.max_missing_fraction", 0.5)),
                    )
                    series[district] = aggregate_to_ticks(filled)
                elif kind == "ticks":
                    start = self.config.get("pollution.start_date", "2010-01-01")
                    series[district] = load_tick_csv(path, district, start=start)
                else:
                    raise ConfigurationError(f"pollution.input_kind must be hourly or ticks, got {kind!r}")
            self._base_series = series
        return self._base_series

    def load_population_inputs(self) -> Tuple[CensusTable, ODMatrix]:
        if self._census is None:
            self._census = load_census_csv(self._input_path("data.census"))
        if self._od is None:
            self._od = load_od_csv(self._input_path("data.od_matrix"))
        return self._census, self._od

    def projected_series(self) -> Dict[str, TickSeries]:
        """Base series projected over the horizon under `pollution.scenario`."""
        scenario = str(self.config.get("pollution.scenario", "bau"))
        rate = float(self.config.get("pollution.inc_rate", 0.03))
        years = int(self.config.get("pollution.observed_years", 6))
        return {d: project(s, scenario, rate, years) for d, s in self.load_base_series().items()}

    def prepare(self) -> "ExposureModel":
        """Load every input now, so copies sent to worker processes carry them."""
        self.load_worlds()
        self.load_base_series()
        self.load_population_inputs()
        return self

    def params(self) -> HealthParams:
        return HealthParams.from_config(self.config)

    def variant(self, overrides: Dict[str, Any]) -> "ExposureModel":
        """Model on the same loaded inputs with some config keys replaced."""
        clone = ExposureModel(
            self.config.with_overrides(overrides),
            worlds=self.load_worlds(),
            base_series=self.load_base_series(),
            census=self._census,
            od=self._od,
        )
        clone.input_files = list(self.input_files)
        clone.warnings = list(self.warnings)
        return clone

    def agents(self, seed: int) -> List[AgentSpec]:
        """Synthetic population placed on the worlds."""
        census, od = self.load_population_inputs()
        worlds = self.load_worlds()
        outside = sorted(set(census.districts) - set(worlds))
        if outside:
            raise ConfigurationError(f"census districts without a world: {outside}")
        synth_seed, place_seed, _ = stream_seeds(seed)
        agents = synthesize(
            census,
            rate=float(self.config.get("population.sample_rate", 0.05)),
            seed=synth_seed,
            oldest_age=int(self.config.get("population.oldest_age", 99)),
        )
        return assign_locations(agents, worlds, od, seed=place_seed)

    def inputs(self, seed: int) -> ModelInputs:
        return ModelInputs(
            region=Region(self.load_worlds()),
            agents=self.agents(seed),
            series=self.projected_series(),
        )

    def run(self, seed: Optional[int] = None, params: Optional[HealthParams] = None,
            max_ticks: Optional[int] = None, detailed: bool = True, snapshot: bool = False,
            track: Sequence[int] = ()) -> RunResult:
        """
        One seeded run.

        Args:
            seed: Run seed (defaults to the configured seed)
            params: Health parameters (defaults to the `health` section)
            max_ticks: Horizon (defaults to `simulation.max_ticks`)
            detailed: Record mean health and band counts
            snapshot: Keep the final per-agent table
            track: Agent ids whose health is recorded every tick

        Returns:
            RunResult
        """
        seed = self.config.seed if seed is None else int(seed)
        _, _, move_seed = stream_seeds(seed)
        result = simulate(
            self.inputs(seed),
            params or self.params(),
            seed=move_seed,
            max_ticks=max_ticks or self.config.max_ticks,
            young_radius=float(self.config.get("population.young_radius", 3)),
            old_radius=float(self.config.get("population.old_radius", 1)),
            track=track,
            detailed=detailed,
            snapshot=snapshot,
        )
        result.seed = seed
        return result

    def __repr__(self) -> str:
        return f"ExposureModel(project='{self.config.project_name}')"


def run(config: Config) -> RunResult:
    """Run the configured model once with the configured seed."""
    return ExposureModel(config).run(snapshot=True)
