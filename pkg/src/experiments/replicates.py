"""
Replicates Module
=================

Runs batches of seeded simulations, serially or on a process pool, and
averages their at-risk trajectories.
"""

import logging
import warnings
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..config_loader import Config
from ..dynamics.engine import RunResult, onset_tick, surge_tick
from ..dynamics.model import ExposureModel
from ..dynamics.params import HealthParams
from ..exceptions import ReplicateError, ValidationError
from ..population.census import AGE_BINS
from ..population.synthesis import GROUP_NAMES

logger = logging.getLogger(__name__)

# (key, params, seed): key groups replicates that belong together
Job = Tuple[object, HealthParams, int]

_WORKER: Dict[str, object] = {}


def _init_worker(model: ExposureModel, max_ticks: Optional[int]) -> None:
    _WORKER["model"] = model
    _WORKER["max_ticks"] = max_ticks


def _run_job(job: Job) -> Tuple[object, RunResult]:
    key, params, seed = job
    model: ExposureModel = _WORKER["model"]
    try:
        result = model.run(seed=seed, params=params, max_ticks=_WORKER["max_ticks"], detailed=False)
    except Exception as e:
        raise ReplicateError(seed, e) from e
    return key, result.compact()


def run_jobs(model: ExposureModel, jobs: Sequence[Job], max_ticks: Optional[int] = None,
             processes: int = 1, desc: str = "Replicates") -> Iterator[Tuple[object, RunResult]]:
    """
    Run every job and yield (key, result) in job order.

    Args:
        model: Model the jobs run on
        jobs: (key, params, seed) triples
        max_ticks: Horizon override
        processes: Worker processes; 1 runs in this process
        desc: Progress bar label

    Yields:
        (key, compact RunResult)
    """
    model.prepare()
    bar = dict(total=len(jobs), desc=desc, disable=None, leave=False)
    if processes <= 1 or len(jobs) <= 1:
        _init_worker(model, max_ticks)
        try:
            for job in tqdm(jobs, **bar):
                yield _run_job(job)
        finally:
            _WORKER.clear()
        return

    with Pool(processes=min(processes, len(jobs)), initializer=_init_worker,
              initargs=(model, max_ticks)) as pool:
        for item in tqdm(pool.imap(_run_job, jobs), **bar):
            yield item


def _forward_fill(rows: List[np.ndarray], horizon: int) -> np.ndarray:
    """Stack per-run arrays, repeating each run's last row up to `horizon`."""
    out = []
    for row in rows:
        if len(row) < horizon:
            pad = np.repeat(row[-1:], horizon - len(row), axis=0)
            row = np.concatenate([row, pad])
        out.append(row)
    return np.stack(out)


@dataclass
class ReplicateSummary:
    """
    Averaged outcome of replicate runs.

    Runs that stopped early keep their last state up to the longest run, so a
    run that ended with everyone at risk stays at 1.0.
    """
    seeds: List[int]
    mean_rate: np.ndarray
    min_rate: np.ndarray
    max_rate: np.ndarray
    group_mean: Dict[str, np.ndarray]
    stop_causes: List[str]
    final_ticks: List[int]
    admissions: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_results(cls, results: Sequence[RunResult]) -> "ReplicateSummary":
        if not results:
            raise ValidationError("no replicate results to summarise")
        horizon = max(r.n_ticks for r in results)
        rates = _forward_fill([r.rates for r in results], horizon)
        group_rates = _forward_fill([r.group_rates for r in results], horizon)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            group_mean = {
                name: np.nanmean(group_rates[:, :, g], axis=0)
                for g, name in enumerate(GROUP_NAMES)
                if any(r.assessed[g] > 0 for r in results)
            }
        return cls(
            seeds=[r.seed for r in results],
            mean_rate=rates.mean(axis=0),
            min_rate=rates.min(axis=0),
            max_rate=rates.max(axis=0),
            group_mean=group_mean,
            stop_causes=[r.stop_cause for r in results],
            final_ticks=[r.final_tick for r in results],
            admissions={b: float(np.mean([r.admissions[b] for r in results])) for b in AGE_BINS},
        )

    @property
    def n_ticks(self) -> int:
        return len(self.mean_rate)

    @property
    def final_mean_rate(self) -> float:
        return float(self.mean_rate[-1])

    @property
    def envelope_width(self) -> np.ndarray:
        return self.max_rate - self.min_rate

    def onset_tick(self) -> Optional[int]:
        return onset_tick(self.mean_rate)

    def surge_tick(self) -> Optional[int]:
        return surge_tick(self.mean_rate)

    def frame(self) -> pd.DataFrame:
        """tick, mean_rate, min, max"""
        return pd.DataFrame({
            "tick": np.arange(self.n_ticks),
            "mean_rate": self.mean_rate,
            "min": self.min_rate,
            "max": self.max_rate,
        })

    def group_frame(self) -> pd.DataFrame:
        """Long form tick, group, mean_rate including group 'all'."""
        ticks = np.arange(self.n_ticks)
        frames = [pd.DataFrame({"tick": ticks, "group": name, "mean_rate": rates})
                  for name, rates in self.group_mean.items()]
        frames.append(pd.DataFrame({"tick": ticks, "group": "all", "mean_rate": self.mean_rate}))
        return pd.concat(frames, ignore_index=True)


def _as_model(source: Union[Config, ExposureModel]) -> ExposureModel:
    return source if isinstance(source, ExposureModel) else ExposureModel(source)


def replicate_average(source: Union[Config, ExposureModel], n: Optional[int] = None,
                      seed_base: Optional[int] = None, params: Optional[HealthParams] = None,
                      jobs: Optional[int] = None, max_ticks: Optional[int] = None) -> ReplicateSummary:
    """
    Average `n` runs seeded seed_base + 0 .. n-1.

    Args:
        source: Config or ExposureModel
        n: Replicates (defaults to `experiments.replicates`)
        seed_base: First seed (defaults to `experiments.seed_base`)
        params: Health parameters (defaults to the config's)
        jobs: Worker processes (defaults to `experiments.jobs`)
        max_ticks: Horizon override

    Returns:
        ReplicateSummary
    """
    model = _as_model(source)
    config = model.config
    n = int(config.get("experiments.replicates", 20)) if n is None else int(n)
    seed_base = int(config.get("experiments.seed_base", 1000)) if seed_base is None else int(seed_base)
    if n < 1:
        raise ValidationError(f"replicates must be >= 1, got {n}")
    params = params or model.params()

    batch = [(i, params, seed_base + i) for i in range(n)]
    results = [r for _, r in run_jobs(model, batch, max_ticks, jobs or config.jobs)]
    summary = ReplicateSummary.from_results(results)
    logger.info("%d replicates: final mean at-risk %.4f (envelope %.4f)",
                n, summary.final_mean_rate, float(summary.envelope_width[-1]))
    return summary


def summarise_jobs(model: ExposureModel, batch: Sequence[Job], max_ticks: Optional[int],
                   processes: int, desc: str) -> Dict[object, ReplicateSummary]:
    """Run a mixed batch and summarise the replicates of each key."""
    grouped: Dict[object, List[RunResult]] = {}
    for key, result in run_jobs(model, batch, max_ticks, processes, desc):
        grouped.setdefault(key, []).append(result)
    return {key: ReplicateSummary.from_results(results) for key, results in grouped.items()}

