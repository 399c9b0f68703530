"""
Calibration Module
==================

Exhaustive grid search of alpha and per-group eta against observed hospital
admissions per age bin.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from ..config_loader import Config
from ..csv_io import numeric_column, read_table
from ..dynamics.model import ExposureModel
from ..exceptions import CalibrationFailedError, ConfigurationError, ExposureError, ValidationError
from ..population.census import parse_age_bin
from ..population.synthesis import GROUP_NAMES
from .replicates import _as_model, replicate_average

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObservedPatients:
    """Admissions per age bin, already scaled to the sampled population."""
    counts: Dict[str, float]

    def __post_init__(self):
        if not self.counts:
            raise ValidationError("observed patients table is empty")
        canonical = {}
        for label, count in self.counts.items():
            if count < 0:
                raise ValidationError(f"observed count for {label} is negative")
            canonical[parse_age_bin(label)] = float(count)
        object.__setattr__(self, "counts", canonical)

    @property
    def bins(self) -> List[str]:
        return list(self.counts)


def load_observed_csv(path: Union[str, Path]) -> ObservedPatients:
    """Read `age_bin,count` rows."""
    df = read_table(path, ("age_bin", "count"), dtype={"age_bin": str})
    counts = numeric_column(df, "count", path)
    return ObservedPatients(dict(zip(df["age_bin"], counts.tolist())))


@dataclass
class Candidate:
    alpha: float
    eta: Tuple[float, float, float]
    objective: float
    modelled: Dict[str, float]

    @property
    def sort_key(self):
        return (self.objective, self.alpha, self.eta)


@dataclass
class CalibrationResult:
    """Best candidate and its per-bin comparison."""
    alpha: float
    eta: Dict[str, float]
    objective: float
    observed: ObservedPatients
    modelled: Dict[str, float]
    candidates: List[Candidate] = field(default_factory=list)

    def frame(self) -> pd.DataFrame:
        """age_bin, observed, modelled, diff (modelled - observed)."""
        rows = [
            {"age_bin": b, "observed": obs, "modelled": self.modelled[b], "diff": self.modelled[b] - obs}
            for b, obs in self.observed.counts.items()
        ]
        return pd.DataFrame(rows, columns=["age_bin", "observed", "modelled", "diff"])

    def candidates_frame(self) -> pd.DataFrame:
        rows = [
            {"alpha": c.alpha, **{f"eta_{g}": e for g, e in zip(GROUP_NAMES, c.eta)}, "objective": c.objective}
            for c in self.candidates
        ]
        return pd.DataFrame(rows)

    def save(self, output_dir: Path) -> Tuple[Path, Path]:
        output_dir.mkdir(parents=True, exist_ok=True)
        table = output_dir / "calibration.csv"
        grid = output_dir / "calibration_candidates.csv"
        self.frame().to_csv(table, index=False)
        self.candidates_frame().to_csv(grid, index=False)
        return table, grid


def l1_objective(modelled: Mapping[str, float], observed: ObservedPatients) -> float:
    """Sum over observed bins of |modelled - observed|."""
    return float(sum(abs(modelled.get(b, 0.0) - obs) for b, obs in observed.counts.items()))


def calibrate(source: Union[Config, ExposureModel], alphas: Sequence[float],
              eta_grids: Mapping[str, Sequence[float]], observed: ObservedPatients,
              replicates: Optional[int] = None, seed_base: Optional[int] = None,
              jobs: Optional[int] = None, max_ticks: Optional[int] = None) -> CalibrationResult:
    """
    Pick the (alpha, eta) whose mean admissions per age bin best match `observed`.

    Every combination of `alphas` and the per-group eta grids is run with the
    same replicate seeds. Ties go to the smaller alpha, then to the
    lexicographically smaller (young, active, old) eta.

    Args:
        source: Config or ExposureModel
        alphas: Candidate alphas
        eta_grids: Candidate etas per group name
        observed: Observed admissions per age bin
        replicates: Replicates per candidate
        seed_base: First replicate seed
        jobs: Worker processes
        max_ticks: Horizon override

    Returns:
        CalibrationResult
    """
    if not alphas:
        raise ConfigurationError("no candidate alphas")
    missing = [g for g in GROUP_NAMES if not eta_grids.get(g)]
    if missing:
        raise ConfigurationError(f"no candidate eta for groups {missing}")

    model = _as_model(source)
    base = model.params()
    etas = list(itertools.product(*(eta_grids[g] for g in GROUP_NAMES)))

    candidates: List[Candidate] = []
    for alpha in alphas:
        for eta in etas:
            try:
                params = replace(base, alpha=float(alpha), eta=dict(zip(GROUP_NAMES, eta)))
                summary = replicate_average(model, replicates, seed_base, params=params,
                                            jobs=jobs, max_ticks=max_ticks)
            except ExposureError as e:
                logger.warning("Candidate alpha=%s eta=%s failed: %s", alpha, eta, e)
                continue
            modelled = summary.admissions
            candidates.append(Candidate(
                alpha=float(alpha),
                eta=tuple(float(e) for e in eta),
                objective=l1_objective(modelled, observed),
                modelled=modelled,
            ))

    if not candidates:
        raise CalibrationFailedError(f"none of {len(alphas) * len(etas)} candidates completed")

    best = min(candidates, key=lambda c: c.sort_key)
    logger.info("Calibrated alpha=%s eta=%s objective=%.4f", best.alpha, best.eta, best.objective)
    return CalibrationResult(
        alpha=best.alpha,
        eta=dict(zip(GROUP_NAMES, best.eta)),
        objective=best.objective,
        observed=observed,
        modelled=best.modelled,
        candidates=candidates,
    )
