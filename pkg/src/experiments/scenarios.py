"""
Scenario Matrix Module
======================

Pollution trend (BAU, INC) crossed with adaptive capacity (AC100, AC200).
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import pandas as pd

from ..config_loader import Config
from ..dynamics.model import ExposureModel
from ..exceptions import ConfigurationError
from ..pollution.projection import SCENARIOS
from .replicates import ReplicateSummary, _as_model, summarise_jobs

logger = logging.getLogger(__name__)


@dataclass
class ScenarioResult:
    """Replicate summaries keyed by (pollution scenario, adaptive capacity)."""
    cells: Dict[Tuple[str, float], ReplicateSummary]

    def frame(self) -> pd.DataFrame:
        """Long form: scenario, ac, tick, group, mean_rate."""
        frames = []
        for (scenario, ac), summary in self.cells.items():
            cell = summary.group_frame()
            cell.insert(0, "ac", ac)
            cell.insert(0, "scenario", scenario)
            frames.append(cell)
        return pd.concat(frames, ignore_index=True)

    def summary_frame(self) -> pd.DataFrame:
        rows = []
        for (scenario, ac), s in self.cells.items():
            rows.append({
                "scenario": scenario,
                "ac": ac,
                "final_mean_rate": s.final_mean_rate,
                "onset_tick": s.onset_tick(),
                "surge_tick": s.surge_tick(),
                "final_tick": max(s.final_ticks),
                "all_at_risk_runs": sum(c == "all_at_risk" for c in s.stop_causes),
                "replicates": len(s.seeds),
            })
        return pd.DataFrame(rows)

    def save(self, output_dir: Path) -> Tuple[Path, Path]:
        output_dir.mkdir(parents=True, exist_ok=True)
        curves = output_dir / "scenarios.csv"
        summary = output_dir / "scenarios_summary.csv"
        self.frame().to_csv(curves, index=False)
        self.summary_frame().to_csv(summary, index=False)
        return curves, summary


def scenario_matrix(source: Union[Config, ExposureModel], pollution: Optional[Sequence[str]] = None,
                    capacities: Optional[Sequence[float]] = None, replicates: Optional[int] = None,
                    seed_base: Optional[int] = None, jobs: Optional[int] = None,
                    max_ticks: Optional[int] = None) -> ScenarioResult:
    """
    Run every (pollution scenario, adaptive capacity) pair on paired seeds.

    Args:
        source: Config or ExposureModel
        pollution: Scenario names (defaults to `experiments.scenarios.pollution`)
        capacities: Adaptive capacities (defaults to `experiments.scenarios.adaptive_capacity`)
        replicates: Replicates per cell (defaults to `experiments.replicates`)
        seed_base: First seed (defaults to `experiments.seed_base`)
        jobs: Worker processes
        max_ticks: Horizon override

    Returns:
        ScenarioResult
    """
    model = _as_model(source)
    config = model.config
    pollution = list(pollution or config.get("experiments.scenarios.pollution") or SCENARIOS)
    capacities = [float(c) for c in (capacities or config.get("experiments.scenarios.adaptive_capacity")
                                     or (100, 200))]
    replicates = int(replicates or config.get("experiments.replicates", 20))
    seed_base = int(config.get("experiments.seed_base", 1000) if seed_base is None else seed_base)

    unknown = [p for p in pollution if p.lower() not in SCENARIOS]
    if unknown:
        raise ConfigurationError(f"unknown pollution scenarios {unknown}; expected {SCENARIOS}")

    cells: Dict[Tuple[str, float], ReplicateSummary] = {}
    for scenario in pollution:
        variant = model.variant({"pollution.scenario": scenario})
        base = variant.params()
        batch = []
        for ac in capacities:
            params = replace(base, adaptive_capacity=ac)
            batch.extend(((scenario, ac), params, seed_base + i) for i in range(replicates))
        summaries = summarise_jobs(variant, batch, max_ticks, jobs or config.jobs,
                                   desc=f"Scenario {scenario}")
        cells.update({(scenario, ac): summaries[(scenario, ac)] for ac in capacities})
        for ac in capacities:
            logger.info("%s AC%g: final mean at-risk %.4f", scenario, ac, cells[(scenario, ac)].final_mean_rate)

    return ScenarioResult(cells=cells)
