"""
Census Module
=============

Five-year census counts per district and the origin-destination trip matrix.
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..csv_io import numeric_column, read_table
from ..exceptions import ConfigurationError, TableParseError, ValidationError

AGE_BINS: Tuple[str, ...] = tuple(f"{lo}-{lo + 4}" for lo in range(5, 85, 5)) + ("85+",)
_BIN_PATTERN = re.compile(r"^\s*(\d+)\s*(?:-\s*(\d+)|\+|\s*ov(?:er)?)\s*$")


def parse_age_bin(label: str) -> str:
    """
    Normalise an age-bin label ("05-09", "85+", "85 over") to its canonical form.

    Raises:
        ValidationError: label is not one of the census bins
    """
    match = _BIN_PATTERN.match(str(label))
    if not match:
        raise ValidationError(f"Unrecognised age bin {label!r}")
    lo = int(match.group(1))
    canonical = f"{lo}-{int(match.group(2))}" if match.group(2) else f"{lo}+"
    if canonical not in AGE_BINS:
        raise ValidationError(f"Age bin {label!r} is not one of {AGE_BINS}")
    return canonical


def bin_bounds(label: str, oldest_age: int = 99) -> Tuple[int, int]:
    """Inclusive (lowest, highest) age of a canonical bin."""
    if label.endswith("+"):
        return int(label[:-1]), oldest_age
    lo, hi = label.split("-")
    return int(lo), int(hi)


@dataclass(frozen=True)
class CensusTable:
    """Population count per district and age bin."""
    counts: Dict[str, Dict[str, int]]

    def __post_init__(self):
        for district, bins in self.counts.items():
            for label, count in bins.items():
                if label not in AGE_BINS:
                    raise ValidationError(f"{district}: unknown age bin {label!r}")
                if count < 0:
                    raise ValidationError(f"{district}: negative count for {label}")

    @property
    def districts(self) -> List[str]:
        return sorted(self.counts)

    def total(self, district: Optional[str] = None) -> int:
        districts = [district] if district else self.districts
        return int(sum(sum(self.counts.get(d, {}).values()) for d in districts))

    def is_empty(self) -> bool:
        return self.total() == 0


@dataclass(frozen=True)
class ODMatrix:
    """Daily trips from an origin district to each destination district."""
    trips: Dict[str, Dict[str, float]]

    def __post_init__(self):
        for origin, row in self.trips.items():
            for dest, count in row.items():
                if count < 0 or not np.isfinite(count):
                    raise ValidationError(f"OD trips {origin}->{dest} must be finite and >= 0")

    def destinations(self, origin: str) -> Tuple[List[str], np.ndarray]:
        """
        Destination districts of `origin` and their selection probabilities.

        Raises:
            ConfigurationError: origin has no trips
        """
        row = self.trips.get(origin, {})
        names = sorted(row)
        weights = np.array([row[d] for d in names], dtype=float)
        if not names or weights.sum() <= 0:
            raise ConfigurationError(f"OD row for district {origin!r} has no trips")
        return names, weights / weights.sum()


def load_census_csv(path: Union[str, Path]) -> CensusTable:
    """Read `district,age_bin,count` rows."""
    df = read_table(path, ("district", "age_bin", "count"), dtype={"district": str, "age_bin": str})
    values = numeric_column(df, "count", path, integer=True)

    counts: Dict[str, Dict[str, int]] = {}
    for line, (district, age_bin, count) in enumerate(zip(df["district"], df["age_bin"], values), start=2):
        try:
            label = parse_age_bin(age_bin)
        except ValidationError as e:
            raise TableParseError(str(e), path, line=line) from e
        bins = counts.setdefault(str(district), {})
        bins[label] = bins.get(label, 0) + int(count)
    return CensusTable(counts)


def load_od_csv(path: Union[str, Path]) -> ODMatrix:
    """Read `origin,destination,trips` rows."""
    df = read_table(path, ("origin", "destination", "trips"), dtype={"origin": str, "destination": str})
    values = numeric_column(df, "trips", path)

    trips: Dict[str, Dict[str, float]] = {}
    for origin, dest, count in zip(df["origin"], df["destination"], values):
        dests = trips.setdefault(str(origin), {})
        dests[str(dest)] = dests.get(str(dest), 0.0) + float(count)
    return ODMatrix(trips)
