"""
Simulation Engine Module
========================

Tick loop of one run: move, expose, update health, hospitalize, record.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from ..exceptions import ConfigurationError, UndefinedRateError, ValidationError
from ..pollution.series import HOME, WORK
from ..population.census import AGE_BINS
from ..population.synthesis import GROUP_NAMES
from .health import update_health_array
from .params import HealthParams
from .state import ModelInputs, SimState

logger = logging.getLogger(__name__)

STOP_MAX_TICKS = "max_ticks"
STOP_ALL_AT_RISK = "all_at_risk"

BANDS = ("green", "purple", "red")
PURPLE_BELOW = 200.0
ONSET_LEVEL = 0.05


def move(state: SimState, tick_kind: str) -> SimState:
    """
    Place agents for the tick.

    Home ticks send everyone home. On work ticks active agents go to their work
    cell (home when they have none), young and old agents to a random walkable
    cell near home. Agents in hospital stay where they are.
    """
    free = ~state.hospitalized
    if tick_kind == HOME:
        state.current = np.where(free, state.home, state.current)
        return state
    if tick_kind != WORK:
        raise ValidationError(f"tick kind must be work or home, got {tick_kind!r}")

    target = np.where(state.work >= 0, state.work, state.home)
    if len(state.mobile):
        # one draw per mobile agent in id order, hospitalized or not
        picks = np.floor(state.rng.random(len(state.mobile)) * state.n_candidates).astype(np.int64)
        target[state.mobile] = state.candidates[np.arange(len(state.mobile)), picks]
    state.current = np.where(free, target, state.current)
    return state


def exposure(state: SimState) -> np.ndarray:
    """PM10 at every agent's current cell for the current tick."""
    background = state.background[:, state.tick]
    cells = state.current
    return background[state.region.district_of_cell[cells]] * state.road_factor[cells]


def hospitalize_check(state: SimState) -> SimState:
    """
    Advance the hospital state machine by one tick.

    Patients count down their stay and are discharged at `discharge_health`
    when it runs out. Anyone else at health 0 is admitted for `hospital_stay`
    ticks.
    """
    params = state.params
    inside = state.remaining > 0
    state.remaining[inside] -= 1
    discharged = inside & (state.remaining == 0)
    state.health[discharged] = params.discharge_health

    admit = ~inside & (state.health <= 0)
    state.health[admit] = 0.0
    state.remaining[admit] = params.hospital_stay
    state.admissions[admit] += 1
    return state


def at_risk_rate(state: SimState) -> float:
    """Share of assessed agents at risk (health below the level, or in hospital)."""
    return state.at_risk_rate()


class _Recorder:
    """Per-tick statistics, preallocated for the full horizon."""

    def __init__(self, state: SimState, track: Sequence[int], detailed: bool):
        n = state.max_ticks
        self.at_risk = np.zeros((n, len(GROUP_NAMES)), dtype=np.int32)
        self.detailed = detailed
        self.mean_health = np.zeros(n) if detailed else None
        self.bands = np.zeros((n, len(BANDS)), dtype=np.int32) if detailed else None
        self.track = np.asarray(track, dtype=np.int64)
        self.tracked = np.zeros((n, len(self.track))) if len(self.track) else None
        self.last_at_risk = 0

    def record(self, state: SimState) -> None:
        t = state.tick
        assessed = state.assessed
        risky = state.at_risk_mask() & assessed
        self.at_risk[t] = np.bincount(state.group[risky], minlength=len(GROUP_NAMES))
        if self.detailed:
            health = state.health[assessed]
            self.mean_health[t] = health.mean() if len(health) else np.nan
            self.bands[t] = band_counts(health, state.params.at_risk_below)
        if self.tracked is not None:
            self.tracked[t] = state.health[self.track]
        self.last_at_risk = int(risky.sum())


def band_counts(health: np.ndarray, red_below: float = 100.0) -> np.ndarray:
    """Agents per colour band: green >= 200, purple below 200, red below `red_below`."""
    red = health < red_below
    purple = (health < PURPLE_BELOW) & ~red
    return np.array([int((~red & ~purple).sum()), int(purple.sum()), int(red.sum())])


def health_band(health: np.ndarray, red_below: float = 100.0) -> np.ndarray:
    return np.where(health < red_below, "red", np.where(health < PURPLE_BELOW, "purple", "green"))


def step(state: SimState, recorder: Optional[_Recorder] = None) -> SimState:
    """
    Advance one tick: resolve the tick kind, move, expose, update health,
    hospitalize, record, advance the clock.
    """
    if state.tick >= state.max_ticks:
        raise ValidationError(f"tick {state.tick} is at the horizon {state.max_ticks}")
    if state.tick >= state.background.shape[1]:
        raise ConfigurationError(
            f"pollution series exhausted at tick {state.tick} ({state.background.shape[1]} ticks)"
        )

    move(state, state.kind_of())
    pm10 = exposure(state)

    free = ~state.hospitalized
    state.health[free] = update_health_array(
        state.health[free], pm10[free], state.eta[free], state.recovery[free], state.params
    )
    hospitalize_check(state)

    if recorder is not None:
        recorder.record(state)
    state.tick += 1
    return state


@dataclass
class RunResult:
    """
    Outcome of one run.

    `at_risk` holds at-risk counts per tick and group (young, active, old) of
    the assessed population; `assessed` the group sizes. `admissions` counts
    hospital admissions of assessed agents per age bin.
    """
    stop_cause: str
    final_tick: int
    at_risk: np.ndarray
    assessed: np.ndarray
    admissions: Dict[str, int]
    district_stats: Dict[str, Dict[str, int]] = field(default_factory=dict)
    mean_health: Optional[np.ndarray] = None
    bands: Optional[np.ndarray] = None
    tracked: Optional[np.ndarray] = None
    agents: Optional[pd.DataFrame] = None
    seed: Optional[int] = None

    @property
    def n_ticks(self) -> int:
        return len(self.at_risk)

    @property
    def assessed_total(self) -> int:
        return int(self.assessed.sum())

    @property
    def at_risk_total(self) -> np.ndarray:
        return self.at_risk.sum(axis=1)

    @property
    def rates(self) -> np.ndarray:
        """Overall at-risk rate per tick."""
        return self.at_risk_total / self.assessed_total

    @property
    def group_rates(self) -> np.ndarray:
        """(tick, group) rates; NaN for groups without assessed agents."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.assessed > 0, self.at_risk / np.maximum(self.assessed, 1), np.nan)

    @property
    def final_rate(self) -> float:
        return float(self.rates[-1]) if self.n_ticks else 0.0

    def onset_tick(self, level: float = ONSET_LEVEL) -> Optional[int]:
        return onset_tick(self.rates, level)

    def surge_tick(self) -> Optional[int]:
        return surge_tick(self.rates)

    def compact(self) -> "RunResult":
        """Copy without the detailed per-tick extras and the agent snapshot."""
        return replace(self, mean_health=None, bands=None, tracked=None, agents=None)

    def trajectory_frame(self) -> pd.DataFrame:
        """Long form: tick, group, at_risk_count, at_risk_rate (group 'all' included)."""
        ticks = np.arange(self.n_ticks)
        frames = []
        for g, name in enumerate(GROUP_NAMES):
            if self.assessed[g] == 0:
                continue
            frames.append(pd.DataFrame({
                "tick": ticks,
                "group": name,
                "at_risk_count": self.at_risk[:, g].astype(np.int64),
                "at_risk_rate": self.at_risk[:, g] / self.assessed[g],
            }))
        frames.append(pd.DataFrame({
            "tick": ticks,
            "group": "all",
            "at_risk_count": self.at_risk_total.astype(np.int64),
            "at_risk_rate": self.rates,
        }))
        return pd.concat(frames, ignore_index=True).sort_values(["tick", "group"], kind="stable")

    def admissions_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"age_bin": list(AGE_BINS), "count": [self.admissions[b] for b in AGE_BINS]})

    def health_frame(self) -> pd.DataFrame:
        """Mean health and band counts per tick (detailed runs only)."""
        if self.mean_health is None:
            raise ValidationError("run was not recorded in detail")
        frame = pd.DataFrame({"tick": np.arange(self.n_ticks), "mean_health": self.mean_health})
        for b, name in enumerate(BANDS):
            frame[name] = self.bands[:, b]
        return frame

    def district_frame(self) -> pd.DataFrame:
        rows = [
            {"district": d, **stats,
             "at_risk_rate": stats["at_risk"] / stats["assessed"] if stats["assessed"] else float("nan")}
            for d, stats in sorted(self.district_stats.items())
        ]
        return pd.DataFrame(rows, columns=["district", "assessed", "at_risk", "admissions", "at_risk_rate"])


def onset_tick(rates: np.ndarray, level: float = ONSET_LEVEL) -> Optional[int]:
    """First tick the rate reaches `level`."""
    hits = np.flatnonzero(np.asarray(rates) >= level)
    return int(hits[0]) if len(hits) else None


def surge_tick(rates: np.ndarray) -> Optional[int]:
    """Tick of the largest single-tick rise of the rate."""
    rates = np.asarray(rates, dtype=float)
    if len(rates) == 0:
        return None
    rises = np.diff(rates, prepend=0.0)
    if rises.max() <= 0:
        return None
    return int(np.argmax(rises))


def _district_stats(state: SimState) -> Dict[str, Dict[str, int]]:
    risky = state.at_risk_mask()
    stats = {}
    for k, district in enumerate(state.region.districts):
        members = (state.district == k) & state.assessed
        stats[district] = {
            "assessed": int(members.sum()),
            "at_risk": int((members & risky).sum()),
            "admissions": int(state.admissions[members].sum()),
        }
    return stats


def _snapshot(state: SimState) -> pd.DataFrame:
    return pd.DataFrame({
        "id": [a.id for a in state.specs],
        "district": [a.district_id for a in state.specs],
        "age_bin": [a.age_bin for a in state.specs],
        "group": [a.group.value for a in state.specs],
        "cross_district": ~state.assessed,
        "health": state.health,
        "band": health_band(state.health, state.params.at_risk_below),
        "hospitalized": state.hospitalized,
        "admissions": state.admissions,
    })


def simulate(inputs: ModelInputs, params: HealthParams, seed: int = 0, max_ticks: int = 8764,
             young_radius: float = 3, old_radius: float = 1, track: Sequence[int] = (),
             detailed: bool = True, snapshot: bool = False) -> RunResult:
    """
    Run until the horizon or until every assessed agent is at risk.

    Args:
        inputs: Region, placed agents and tick series
        params: Health parameters
        seed: Seed of the movement stream
        max_ticks: Horizon in ticks
        young_radius: Day radius of young agents (cells)
        old_radius: Day radius of old agents (cells)
        track: Agent ids whose health is recorded every tick
        detailed: Record mean health and band counts
        snapshot: Keep a final per-agent table

    Returns:
        RunResult
    """
    state = SimState(inputs, params, seed=seed, max_ticks=max_ticks,
                     young_radius=young_radius, old_radius=old_radius)
    if state.background.shape[1] < max_ticks:
        raise ConfigurationError(
            f"pollution series covers {state.background.shape[1]} ticks, horizon is {max_ticks}"
        )
    assessed_total = int(state.assessed.sum())
    if assessed_total == 0:
        raise UndefinedRateError("no assessed agents: every agent commutes out of the region")

    recorder = _Recorder(state, track, detailed)
    stop_cause = STOP_MAX_TICKS
    while state.tick < max_ticks:
        step(state, recorder)
        if recorder.last_at_risk == assessed_total:
            stop_cause = STOP_ALL_AT_RISK
            break

    n = state.tick
    assessed = np.bincount(state.group[state.assessed], minlength=len(GROUP_NAMES))
    admitted = np.bincount(state.age_bin[state.assessed], weights=state.admissions[state.assessed],
                           minlength=len(AGE_BINS))

    logger.debug("Run seed=%s stopped at tick %d (%s), final rate %.4f",
                 seed, n, stop_cause, recorder.at_risk[n - 1].sum() / assessed_total)

    return RunResult(
        stop_cause=stop_cause,
        final_tick=n,
        at_risk=recorder.at_risk[:n],
        assessed=assessed,
        admissions={b: int(c) for b, c in zip(AGE_BINS, admitted)},
        district_stats=_district_stats(state),
        mean_health=recorder.mean_health[:n] if detailed else None,
        bands=recorder.bands[:n] if detailed else None,
        tracked=recorder.tracked[:n] if recorder.tracked is not None else None,
        agents=_snapshot(state) if snapshot else None,
        seed=seed,
    )
