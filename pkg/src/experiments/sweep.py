"""
OFAT Sweep Module
=================

One-factor-at-a-time sensitivity of the at-risk trajectory to alpha and the
road multiplier.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from ..config_loader import Config
from ..dynamics.model import ExposureModel
from ..exceptions import ConfigurationError
from .replicates import ReplicateSummary, _as_model, summarise_jobs

logger = logging.getLogger(__name__)

DEFAULT_ALPHA_GRID = [round(0.001 * i, 3) for i in range(1, 11)]
DEFAULT_ROAD_GRID = [1.0, 1.5, 2.0]


@dataclass
class SweepSpec:
    """Grids to sweep over a base configuration."""
    config: Config
    alpha_grid: List[float] = field(default_factory=lambda: list(DEFAULT_ALPHA_GRID))
    road_grid: List[float] = field(default_factory=lambda: list(DEFAULT_ROAD_GRID))
    replicates: int = 20
    seed_base: int = 1000

    def __post_init__(self):
        if not self.alpha_grid or not self.road_grid:
            raise ConfigurationError("sweep grids must not be empty")
        if self.replicates < 1:
            raise ConfigurationError(f"replicates must be >= 1, got {self.replicates}")
        self.alpha_grid = [float(a) for a in self.alpha_grid]
        self.road_grid = [float(r) for r in self.road_grid]

    @classmethod
    def from_config(cls, config: Config) -> "SweepSpec":
        """Read `experiments.sweep`, `experiments.replicates` and `experiments.seed_base`."""
        return cls(
            config=config,
            alpha_grid=list(config.get("experiments.sweep.alpha_grid") or DEFAULT_ALPHA_GRID),
            road_grid=list(config.get("experiments.sweep.road_grid") or DEFAULT_ROAD_GRID),
            replicates=int(config.get("experiments.replicates", 20)),
            seed_base=int(config.get("experiments.seed_base", 1000)),
        )

    @property
    def cells(self) -> List[Tuple[float, float]]:
        return [(a, r) for r in self.road_grid for a in self.alpha_grid]


@dataclass
class SweepResult:
    """Averaged trajectories keyed by (alpha, road_multiplier)."""
    spec: SweepSpec
    cells: Dict[Tuple[float, float], ReplicateSummary]

    def __len__(self) -> int:
        return len(self.cells)

    def frame(self) -> pd.DataFrame:
        """Long form: alpha, road, tick, mean_rate, min, max."""
        frames = []
        for (alpha, road), summary in self.cells.items():
            cell = summary.frame()
            cell.insert(0, "road", road)
            cell.insert(0, "alpha", alpha)
            frames.append(cell)
        return pd.concat(frames, ignore_index=True)

    def final_rates(self) -> pd.DataFrame:
        """Final mean at-risk rate, alpha down the rows and road across the columns."""
        rows = [{"alpha": a, "road": r, "final_mean_rate": s.final_mean_rate}
                for (a, r), s in self.cells.items()]
        return pd.DataFrame(rows).pivot(index="alpha", columns="road", values="final_mean_rate")

    def save(self, output_dir: Path) -> Path:
        output_dir.mkdir(parents=True, exist_ok=True)
        path = output_dir / "sweep.csv"
        self.frame().to_csv(path, index=False)
        return path


def ofat_sweep(spec: SweepSpec, model: Optional[Union[ExposureModel, Config]] = None,
               jobs: Optional[int] = None, max_ticks: Optional[int] = None) -> SweepResult:
    """
    Run replicate averages for every (alpha, road multiplier) pair.

    Args:
        spec: Sweep grids and replicate settings
        model: Model to run on (defaults to one built from spec.config)
        jobs: Worker processes (defaults to `experiments.jobs`)
        max_ticks: Horizon override

    Returns:
        SweepResult with |alpha_grid| x |road_grid| cells
    """
    model = _as_model(model if model is not None else spec.config)
    base = model.params()

    batch = []
    for alpha, road in spec.cells:
        params = replace(base, alpha=alpha, road_multiplier=road)
        batch.extend(((alpha, road), params, spec.seed_base + i) for i in range(spec.replicates))

    logger.info("Sweep: %d cells x %d replicates", len(spec.cells), spec.replicates)
    summaries = summarise_jobs(model, batch, max_ticks, jobs or spec.config.jobs, desc="Sweep")
    return SweepResult(spec=spec, cells={cell: summaries[cell] for cell in spec.cells})
