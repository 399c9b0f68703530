"""
Pollution Series Module
=======================

Hourly station series, half-day tick series and the season calendar that
maps ticks onto meteorological seasons.
"""

import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from ..csv_io import numeric_column, read_table
from ..exceptions import TableParseError, ValidationError

logger = logging.getLogger(__name__)

WORK = "work"
HOME = "home"

SEASON_LABELS = ("winter", "spring", "summer", "autumn")
# month (1-12) -> position in SEASON_LABELS
_SEASON_OF_MONTH = np.array([0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 0])  # Jan..Dec


def _check_values(values: np.ndarray, allow_missing: bool, what: str) -> None:
    present = values[~np.isnan(values)] if allow_missing else values
    if not allow_missing and np.isnan(values).any():
        raise ValidationError(f"{what} contains missing values")
    if not np.isfinite(present).all():
        raise ValidationError(f"{what} contains non-finite values")
    if (present < 0).any():
        raise ValidationError(f"{what} contains negative concentrations")


@dataclass(frozen=True)
class HourlySeries:
    """Hourly PM10 (µg/m³) for one district; NaN marks a missing observation."""
    district_id: str
    start: pd.Timestamp
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        _check_values(values, allow_missing=True, what=f"hourly series {self.district_id}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", pd.Timestamp(self.start))

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def missing_fraction(self) -> float:
        return float(self.missing.mean()) if len(self.values) else 1.0

    @property
    def is_complete(self) -> bool:
        return not self.missing.any()

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TickSeries:
    """One PM10 value per half-day tick; tick 0 falls on `start`."""
    district_id: str
    values: np.ndarray = field(repr=False)
    tick0_kind: str = WORK
    start: date = date(2010, 1, 1)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        _check_values(values, allow_missing=False, what=f"tick series {self.district_id}")
        if self.tick0_kind not in (WORK, HOME):
            raise ValidationError(f"tick0_kind must be 'work' or 'home', got {self.tick0_kind!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start", pd.Timestamp(self.start).date())

    def kinds(self) -> np.ndarray:
        """Tick kind per tick, alternating from tick0_kind."""
        other = HOME if self.tick0_kind == WORK else WORK
        kinds = np.empty(len(self.values), dtype=object)
        kinds[0::2] = self.tick0_kind
        kinds[1::2] = other
        return kinds

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class SeasonCalendar:
    """Year index, season block index and season label for every tick."""
    year_index: np.ndarray
    season_index: np.ndarray
    season_label: np.ndarray

    @classmethod
    def build(cls, start: date, n_ticks: int, cycle_ticks: Optional[int] = None,
              cycle_years: int = 0) -> "SeasonCalendar":
        """
        Build the calendar for `n_ticks` half-day ticks starting on `start`.

        Args:
            start: Calendar day of tick 0 (a work tick)
            n_ticks: Number of ticks
            cycle_ticks: When set, ticks beyond this length reuse the dates of the
                first cycle (replicated projections); year index advances by
                `cycle_years` per cycle
            cycle_years: Years covered by one cycle

        Returns:
            SeasonCalendar
        """
        ticks = np.arange(n_ticks)
        if cycle_ticks:
            base_ticks = ticks % cycle_ticks
            cycle_no = ticks // cycle_ticks
        else:
            base_ticks = ticks
            cycle_no = np.zeros(n_ticks, dtype=int)

        days = pd.Timestamp(start) + pd.to_timedelta(base_ticks // 2, unit="D")
        years = np.asarray(days.year) - pd.Timestamp(start).year + cycle_no * cycle_years
        seasons = _SEASON_OF_MONTH[np.asarray(days.month) - 1]

        # a new block starts wherever the label changes
        changes = np.zeros(n_ticks, dtype=int)
        if n_ticks > 1:
            changes[1:] = seasons[1:] != seasons[:-1]
        season_index = np.cumsum(changes)

        labels = np.array(SEASON_LABELS, dtype=object)[seasons]
        return cls(year_index=years.astype(int), season_index=season_index, season_label=labels)

    def __len__(self) -> int:
        return len(self.season_index)

    @property
    def n_seasons(self) -> int:
        return int(self.season_index[-1]) + 1 if len(self.season_index) else 0

    def season_means(self, values: np.ndarray) -> np.ndarray:
        """Mean of `values` per season block."""
        sums = np.bincount(self.season_index, weights=values, minlength=self.n_seasons)
        counts = np.bincount(self.season_index, minlength=self.n_seasons)
        return sums / counts


def observed_tick_count(start: date, years: int) -> int:
    """Number of half-day ticks in `years` calendar years from `start`."""
    begin = pd.Timestamp(start)
    end = begin + pd.DateOffset(years=years)
    return 2 * int((end - begin).days)


def load_hourly_csv(path: Union[str, Path], district_id: Optional[str] = None) -> HourlySeries:
    """
    Load an hourly station CSV with columns `timestamp,pm10`.

    Rows absent from the file become missing hours, so the series always spans
    every hour between the first and last timestamp.

    Args:
        path: CSV path
        district_id: District id; defaults to the file stem

    Returns:
        HourlySeries
    """
    path = Path(path)
    df = read_table(path, ("timestamp", "pm10"))
    if df.empty:
        raise TableParseError("no rows", path)

    try:
        stamps = pd.to_datetime(df["timestamp"])
    except (ValueError, TypeError) as e:
        raise TableParseError(f"bad timestamp: {e}", path) from e
    pm10 = numeric_column(df, "pm10", path, allow_missing=True)

    series = pd.Series(pm10, index=stamps).sort_index()
    if series.index.has_duplicates:
        raise ValidationError(f"{path}: duplicate timestamps")

    full_index = pd.date_range(series.index[0], series.index[-1], freq=pd.Timedelta(hours=1))
    if not series.index.isin(full_index).all():
        raise ValidationError(f"{path}: timestamps are not on whole hours")
    series = series.reindex(full_index)

    gap_rows = int(series.isna().sum())
    logger.debug("Loaded %s: %d hours, %d missing", path.name, len(series), gap_rows)

    return HourlySeries(
        district_id=district_id or path.stem,
        start=full_index[0],
        values=series.to_numpy(),
    )


def save_tick_csv(series: TickSeries, path: Union[str, Path]) -> Path:
    """Write a tick series as `tick,kind,pm10`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame({
        "tick": np.arange(len(series)),
        "kind": series.kinds(),
        "pm10": series.values,
    })
    df.to_csv(path, index=False)
    return path


def load_tick_csv(path: Union[str, Path], district_id: Optional[str] = None,
                  start: date = date(2010, 1, 1)) -> TickSeries:
    """Read a `tick,kind,pm10` CSV written by save_tick_csv."""
    path = Path(path)
    df = read_table(path, ("tick", "kind", "pm10"))
    ticks = numeric_column(df, "tick", path, integer=True)
    pm10 = numeric_column(df, "pm10", path)
    order = np.argsort(ticks, kind="stable")
    if not (ticks[order] == np.arange(len(df))).all():
        raise TableParseError("ticks must run 0..n-1 without gaps", path)
    kinds = df["kind"].to_numpy()[order]
    return TickSeries(
        district_id=district_id or path.stem,
        values=pm10[order],
        tick0_kind=str(kinds[0]) if len(kinds) else WORK,
        start=start,
    )
