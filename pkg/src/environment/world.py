"""
World Module
============

Per-district grid world built from land-cover and land-price rasters.

Cells of class Residential (110), Commercial (120) and Traffic (150) are
walkable; Traffic cells are roads. Everything else is Other and never holds
an agent.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple, Union

import numpy as np

from ..exceptions import ValidationError
from ..manifest import checksums
from .raster import EXPECTED_CELL_SIZE, Raster

logger = logging.getLogger(__name__)


class LandClass(IntEnum):
    OTHER = 0
    RESIDENTIAL = 110
    COMMERCIAL = 120
    TRAFFIC = 150


WALKABLE_CLASSES = (LandClass.RESIDENTIAL, LandClass.COMMERCIAL, LandClass.TRAFFIC)


@dataclass(frozen=True)
class Cell:
    """One 30 m x 30 m grid patch."""
    col: int
    row: int
    land_class: LandClass
    is_road: bool
    price_grade: Optional[int]
    district_id: str

    @property
    def walkable(self) -> bool:
        return self.land_class in WALKABLE_CLASSES


@dataclass(frozen=True)
class RecoveryTable:
    """Per-tick health recovery (H_recov) by land-price grade, grade 1 first."""
    rates: Tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if not rates:
            raise ValidationError("Recovery table needs at least one grade")
        if any(r < 0 or not np.isfinite(r) for r in rates):
            raise ValidationError(f"Recovery rates must be finite and non-negative: {rates}")
        if any(b < a for a, b in zip(rates, rates[1:])):
            raise ValidationError(f"Recovery rates must not decrease with grade: {rates}")
        object.__setattr__(self, "rates", rates)

    @classmethod
    def default(cls, grades: int = 5) -> "RecoveryTable":
        """Illustrative table: grade g recovers 0.1 * g per tick."""
        return cls(tuple(round(0.1 * g, 10) for g in range(1, grades + 1)))

    @classmethod
    def from_config(cls, config) -> "RecoveryTable":
        """`health.recovery`, or the default table for `environment.price_grades`."""
        rates = config.get("health.recovery")
        if rates:
            return cls(tuple(rates))
        return cls.default(int(config.get("environment.price_grades", 5)))

    @property
    def grades(self) -> int:
        return len(self.rates)

    def rate(self, grade: int) -> float:
        if not 1 <= grade <= self.grades:
            raise ValidationError(f"Price grade {grade} outside 1..{self.grades}")
        return self.rates[grade - 1]

    def as_array(self) -> np.ndarray:
        """Lookup array indexed by grade; index 0 (no grade) recovers nothing."""
        return np.concatenate([[0.0], np.asarray(self.rates, dtype=float)])


def price_grades(prices: np.ndarray, residential: np.ndarray, grades: int = 5) -> np.ndarray:
    """
    Quantile grades 1..G of residential land prices.

    Args:
        prices: Price per cell (NaN where unknown)
        residential: Mask of cells to grade
        grades: Number of grades G

    Returns:
        Integer array, 0 outside `residential`
    """
    out = np.zeros(prices.shape, dtype=np.int64)
    sample = prices[residential]
    if sample.size == 0:
        return out
    edges = np.quantile(sample, np.linspace(0.0, 1.0, grades + 1)[1:-1])
    out[residential] = np.searchsorted(edges, sample, side="right") + 1
    return out


@lru_cache(maxsize=32)
def disk_offsets(radius: float) -> np.ndarray:
    """(d_row, d_col) offsets with Euclidean length <= radius, in row-major order."""
    reach = int(np.floor(radius))
    offsets = [
        (dr, dc)
        for dr in range(-reach, reach + 1)
        for dc in range(-reach, reach + 1)
        if dr * dr + dc * dc <= radius * radius
    ]
    return np.array(offsets, dtype=np.int64).reshape(-1, 2)


class World:
    """Immutable grid of cells for one district."""

    def __init__(self, district_id: str, land_class: np.ndarray, price_grade: np.ndarray,
                 cell_size: float = EXPECTED_CELL_SIZE, warnings: Optional[List[str]] = None):
        if land_class.ndim != 2 or land_class.size == 0:
            raise ValidationError(f"{district_id}: grid must be 2-D and non-empty")
        self.district_id = district_id
        self.cell_size = cell_size
        self.warnings = list(warnings or [])

        self.land_class = land_class.astype(np.int64)
        self.price_grade = price_grade.astype(np.int64)
        self.is_road = self.land_class == LandClass.TRAFFIC
        self.walkable = np.isin(self.land_class, [int(c) for c in WALKABLE_CLASSES])
        for arr in (self.land_class, self.price_grade, self.is_road, self.walkable):
            arr.setflags(write=False)

        self.walkable_index = np.flatnonzero(self.walkable)
        self.residential_index = np.flatnonzero(self.land_class == LandClass.RESIDENTIAL)

    @property
    def shape(self) -> Tuple[int, int]:
        """(nrows, ncols)"""
        return self.land_class.shape

    @property
    def n_cells(self) -> int:
        return self.land_class.size

    def flat(self, col: int, row: int) -> int:
        return row * self.shape[1] + col

    def coords(self, flat_index: int) -> Tuple[int, int]:
        """(col, row) of a flat index."""
        row, col = divmod(int(flat_index), self.shape[1])
        return col, row

    def cell(self, col: int, row: int) -> Cell:
        land = LandClass(int(self.land_class[row, col]))
        grade = int(self.price_grade[row, col])
        return Cell(
            col=col,
            row=row,
            land_class=land,
            is_road=bool(self.is_road[row, col]),
            price_grade=grade if grade > 0 else None,
            district_id=self.district_id,
        )

    def walkable_cells(self) -> List[Cell]:
        return [self.cell(*self.coords(i)) for i in self.walkable_index]

    def neighbors_flat(self, flat_index: int, radius: float) -> np.ndarray:
        """Flat indices of walkable cells within `radius` (Euclidean, cell units)."""
        if radius < 0:
            raise ValidationError(f"radius must be >= 0, got {radius}")
        nrows, ncols = self.shape
        row, col = divmod(int(flat_index), ncols)
        offsets = disk_offsets(float(radius))
        rows = row + offsets[:, 0]
        cols = col + offsets[:, 1]
        inside = (rows >= 0) & (rows < nrows) & (cols >= 0) & (cols < ncols)
        rows, cols = rows[inside], cols[inside]
        keep = self.walkable[rows, cols]
        return rows[keep] * ncols + cols[keep]

    def neighbors_within(self, cell: Union[Cell, Tuple[int, int]], radius: float) -> Set[Tuple[int, int]]:
        """
        Walkable cells within Euclidean distance `radius` of `cell`.

        Args:
            cell: Cell or (col, row)
            radius: Radius in cell units (r >= 0)

        Returns:
            Set of (col, row), including the cell itself when walkable
        """
        col, row = (cell.col, cell.row) if isinstance(cell, Cell) else cell
        return {self.coords(i) for i in self.neighbors_flat(self.flat(col, row), radius)}

    def manifest(self) -> Dict[str, Any]:
        """Counts per land class and grade, grid shape."""
        counts = {c.name.lower(): int((self.land_class == c).sum()) for c in LandClass}
        grades, grade_counts = np.unique(
            self.price_grade.ravel()[self.residential_index], return_counts=True
        )
        return {
            "district_id": self.district_id,
            "nrows": int(self.shape[0]),
            "ncols": int(self.shape[1]),
            "cell_size": self.cell_size,
            "class_counts": counts,
            "walkable": int(len(self.walkable_index)),
            "roads": int(self.is_road.sum()),
            "residential_grades": {int(g): int(n) for g, n in zip(grades, grade_counts)},
            "warnings": list(self.warnings),
        }

    def __repr__(self) -> str:
        return f"World(district='{self.district_id}', shape={self.shape}, walkable={len(self.walkable_index)})"


def _as_grid(source: Union[Raster, np.ndarray]) -> Tuple[np.ndarray, np.ndarray, List[str], float]:
    if isinstance(source, Raster):
        return source.values, source.nodata, list(source.warnings), source.cell_size
    values = np.asarray(source)
    return values, np.zeros(values.shape, dtype=bool), [], EXPECTED_CELL_SIZE


def build_world(land_cover: Union[Raster, np.ndarray], land_price: Union[Raster, np.ndarray],
                district_id: str, price_kind: str = "grade", grades: int = 5) -> World:
    """
    Build a district world from its rasters.

    Args:
        land_cover: Land-cover codes (110/120/150, anything else is Other)
        land_price: Land-price grades 1..G, or prices when price_kind == "price"
        district_id: District identifier
        price_kind: "grade" or "price"
        grades: Number of price grades G

    Returns:
        World
    """
    cover, cover_nodata, warnings, cell_size = _as_grid(land_cover)
    price, price_nodata, price_warnings, _ = _as_grid(land_price)
    warnings.extend(w for w in price_warnings if w not in warnings)

    if cover.shape != price.shape:
        raise ValidationError(
            f"{district_id}: land-cover {cover.shape} and land-price {price.shape} rasters differ in size"
        )

    known = np.isin(cover, [int(c) for c in WALKABLE_CLASSES]) & ~cover_nodata
    land_class = np.where(known, cover, int(LandClass.OTHER))
    residential = land_class == LandClass.RESIDENTIAL

    unpriced = residential & price_nodata
    if unpriced.any():
        row, col = np.argwhere(unpriced)[0]
        raise ValidationError(
            f"{district_id}: {int(unpriced.sum())} residential cells without a land price "
            f"(first at col={col}, row={row})"
        )

    if price_kind == "grade":
        grade = np.where(price_nodata, 0, price).astype(np.int64)
        bad = residential & ((grade < 1) | (grade > grades))
        if bad.any():
            raise ValidationError(
                f"{district_id}: residential grades must lie in 1..{grades}, found {sorted(set(grade[bad].tolist()))[:5]}"
            )
        grade = np.where((grade >= 1) & (grade <= grades), grade, 0)
    elif price_kind == "price":
        prices = np.where(price_nodata, np.nan, price.astype(float))
        grade = price_grades(prices, residential, grades)
    else:
        raise ValidationError(f"price_kind must be 'grade' or 'price', got {price_kind!r}")

    world = World(district_id, land_class, grade, cell_size=cell_size, warnings=warnings)
    logger.info("Built %r", world)
    return world


def cell_pm10(cell: Cell, background: float, road_multiplier: float) -> float:
    """PM10 at a cell: road cells see `road_multiplier` times the background."""
    return background * road_multiplier if cell.is_road else background


def world_manifest(world: World, inputs: Iterable[Path] = ()) -> Dict[str, Any]:
    """World manifest plus SHA-256 checksums of the rasters it was built from."""
    manifest = world.manifest()
    manifest["input_checksums"] = checksums(Path(p) for p in inputs)
    return manifest


class Region:
    """
    The modelled districts side by side, addressed through one global cell id.

    District worlds are laid out in sorted district order; a cell's global id is
    its district offset plus its flat index.
    """

    def __init__(self, worlds: Union[World, Dict[str, World]]):
        if isinstance(worlds, World):
            worlds = {worlds.district_id: worlds}
        if not worlds:
            raise ValidationError("a region needs at least one district world")
        self.districts: List[str] = sorted(worlds)
        self.worlds: Dict[str, World] = {d: worlds[d] for d in self.districts}

        sizes = np.array([self.worlds[d].n_cells for d in self.districts], dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.offsets: Dict[str, int] = {d: int(s) for d, s in zip(self.districts, starts)}
        self.n_cells = int(sizes.sum())

        self.district_of_cell = np.repeat(np.arange(len(self.districts)), sizes)
        self.is_road = np.concatenate([self.worlds[d].is_road.ravel() for d in self.districts])
        self.price_grade = np.concatenate([self.worlds[d].price_grade.ravel() for d in self.districts])
        self.land_class = np.concatenate([self.worlds[d].land_class.ravel() for d in self.districts])

    def district_index(self, district: str) -> int:
        return self.districts.index(district)

    def global_id(self, district: str, flat_index: int) -> int:
        return self.offsets[district] + int(flat_index)

    def locate(self, global_id: int) -> Tuple[str, int, int]:
        """(district, col, row) of a global cell id."""
        district = self.districts[int(self.district_of_cell[global_id])]
        col, row = self.worlds[district].coords(int(global_id) - self.offsets[district])
        return district, col, row

    def __repr__(self) -> str:
        return f"Region(districts={self.districts}, cells={self.n_cells})"
