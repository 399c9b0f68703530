"""
Fixture Generator Module
========================

Synthetic, Seoul-like inputs so the whole pipeline runs without licensed
data: per-district land-cover and land-price grids, a census table, an OD
matrix, six years of hourly PM10 with a share of hours masked, and a project
config tying them together.
"""

import logging
from datetime import date
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
import yaml
from scipy.signal import lfilter

from ..config_loader import SCHEMA_VERSION
from ..environment.raster import write_raster
from ..environment.world import LandClass, price_grades
from ..exceptions import ValidationError
from ..pollution.aggregation import aggregate_to_ticks
from ..pollution.series import HourlySeries, save_tick_csv
from ..population.census import AGE_BINS

logger = logging.getLogger(__name__)

DEFAULT_DISTRICTS = ("gangnam", "gwanak")
ROAD_SPACING = 8
MISSING_FRACTION = 0.0215

# relative weight of each census age bin, 5-9 first
_AGE_PROFILE = np.array([4.1, 4.4, 4.9, 6.6, 7.9, 8.0, 8.3, 8.6, 8.4, 8.2, 8.0, 7.1, 5.6, 4.3, 3.2, 2.1, 2.3])


def _land_cover(size: int, rng: np.random.Generator) -> np.ndarray:
    cover = rng.choice(
        [int(LandClass.RESIDENTIAL), int(LandClass.COMMERCIAL), int(LandClass.OTHER)],
        p=[0.62, 0.2, 0.18],
        size=(size, size),
    )
    cover[::ROAD_SPACING, :] = int(LandClass.TRAFFIC)
    cover[:, ::ROAD_SPACING] = int(LandClass.TRAFFIC)
    if not (cover == LandClass.RESIDENTIAL).any():
        cover[1, 1] = int(LandClass.RESIDENTIAL)
    return cover


def _price_grade_raster(cover: np.ndarray, rng: np.random.Generator, grades: int,
                        nodata: int) -> np.ndarray:
    """Grades rise towards one corner of the district, with noise."""
    rows, cols = np.indices(cover.shape)
    gradient = (rows + cols) / max(1, sum(cover.shape) - 2)
    prices = gradient + rng.normal(0.0, 0.15, size=cover.shape)
    residential = cover == LandClass.RESIDENTIAL
    grade = price_grades(prices, residential, grades)
    return np.where(residential, grade, nodata)


def hourly_pm10(start: date, years: int, rng: np.random.Generator, level: float = 48.0,
                constant: Optional[float] = None) -> pd.Series:
    """
    Hourly PM10 with a winter-spring high, a spring dust peak, a daily cycle
    and AR(1) noise.
    """
    begin = pd.Timestamp(start)
    index = pd.date_range(begin, begin + pd.DateOffset(years=years), freq=pd.Timedelta(hours=1),
                          inclusive="left")
    if constant is not None:
        return pd.Series(float(constant), index=index)

    doy = index.dayofyear.to_numpy()
    hod = index.hour.to_numpy()
    seasonal = 18.0 * np.cos(2 * np.pi * (doy - 15) / 365.25)
    dust = 45.0 * np.exp(-(((doy - 95) / 12.0) ** 2))
    diurnal = 7.0 * np.sin(2 * np.pi * (hod - 7) / 24.0)
    noise = lfilter([1.0], [1.0, -0.92], rng.normal(0.0, 5.0, size=len(index)))
    return pd.Series(np.clip(level + seasonal + dust + diurnal + noise, 1.0, None), index=index)


def mask_hours(values: pd.Series, fraction: float, rng: np.random.Generator) -> pd.Series:
    """Copy of `values` with round(fraction * n) random hours set missing."""
    masked = values.copy()
    n_missing = int(round(fraction * len(values)))
    masked.iloc[rng.choice(len(values), size=n_missing, replace=False)] = np.nan
    return masked


def write_hourly_csv(series: pd.Series, path: Path) -> Path:
    frame = pd.DataFrame({
        "timestamp": series.index.strftime("%Y-%m-%dT%H:%M:%S"),
        "pm10": series.to_numpy(),
    })
    frame.to_csv(path, index=False, na_rep="", float_format="%.3f")
    return path


def census_table(districts: Sequence[str], population: int, rng: np.random.Generator) -> pd.DataFrame:
    """district,age_bin,count with `population` persons per district."""
    weights = _AGE_PROFILE / _AGE_PROFILE.sum()
    rows = []
    for district in districts:
        jitter = weights * rng.uniform(0.9, 1.1, size=len(weights))
        counts = np.round(population * jitter / jitter.sum()).astype(int)
        rows.extend({"district": district, "age_bin": b, "count": int(c)} for b, c in zip(AGE_BINS, counts))
    return pd.DataFrame(rows)


def od_table(districts: Sequence[str], rng: np.random.Generator, outside: str = "outside") -> pd.DataFrame:
    """Most trips stay home, the rest go to the other districts or leave the region."""
    rows = []
    for origin in districts:
        rows.append({"origin": origin, "destination": origin, "trips": int(rng.integers(6000, 8000))})
        for dest in districts:
            if dest != origin:
                rows.append({"origin": origin, "destination": dest, "trips": int(rng.integers(1500, 2500))})
        rows.append({"origin": origin, "destination": outside, "trips": int(rng.integers(500, 1000))})
    return pd.DataFrame(rows)


def generate_fixtures(output_dir: Union[str, Path], districts: Sequence[str] = DEFAULT_DISTRICTS,
                      size: int = 60, population: int = 100_000, seed: int = 7, years: int = 6,
                      start: date = date(2010, 1, 1), missing_fraction: float = MISSING_FRACTION,
                      input_kind: str = "hourly", constant_pm10: Optional[float] = None,
                      grades: int = 5) -> Path:
    """
    Write a complete synthetic input set and its project config.

    Args:
        output_dir: Destination directory
        districts: District ids
        size: Grid side length in cells
        population: Census persons per district (5% of 2 x 100,000 gives ~10k agents)
        seed: Generator seed
        years: Observed years of pollution
        start: First day of the pollution record
        missing_fraction: Share of hourly values masked
        input_kind: "hourly" writes station CSVs, "ticks" writes aggregated tick CSVs
        constant_pm10: Use a constant pollution level instead of the synthetic signal
        grades: Land-price grades

    Returns:
        Path to the written config.yaml
    """
    if size < 2:
        raise ValidationError(f"grid size must be >= 2, got {size}")
    if input_kind not in ("hourly", "ticks"):
        raise ValidationError(f"input_kind must be hourly or ticks, got {input_kind!r}")

    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    nodata = -9999

    entries: Dict[str, Dict[str, str]] = {}
    for k, district in enumerate(sorted(districts)):
        cover = _land_cover(size, rng)
        grade = _price_grade_raster(cover, rng, grades, nodata)
        write_raster(out / f"{district}_landcover.asc", cover, nodata_value=nodata)
        write_raster(out / f"{district}_landprice.asc", grade, nodata_value=nodata)

        hourly = hourly_pm10(start, years, rng, level=48.0 + 4.0 * k, constant=constant_pm10)
        if input_kind == "hourly":
            pollution = write_hourly_csv(mask_hours(hourly, missing_fraction, rng), out / f"pm10_{district}.csv")
        else:
            ticks = aggregate_to_ticks(HourlySeries(district, hourly.index[0], hourly.to_numpy()))
            pollution = save_tick_csv(ticks, out / f"pm10_{district}_ticks.csv")

        entries[district] = {
            "land_cover": f"{district}_landcover.asc",
            "land_price": f"{district}_landprice.asc",
            "pollution": pollution.name,
        }

    census_table(sorted(districts), population, rng).to_csv(out / "census.csv", index=False)
    od_table(sorted(districts), rng).to_csv(out / "od.csv", index=False)

    config = {
        "schema_version": SCHEMA_VERSION,
        "project": {"name": "synthetic-seoul", "description": "Generated fixture"},
        "data": {"districts": entries, "census": "census.csv", "od_matrix": "od.csv"},
        "pollution": {"input_kind": input_kind, "start_date": str(start), "observed_years": years},
        "environment": {"price_grades": grades},
    }
    config_path = out / "config.yaml"
    with open(config_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config, f, sort_keys=False)

    logger.info("Wrote fixtures for %s to %s", ", ".join(sorted(districts)), out)
    return config_path
