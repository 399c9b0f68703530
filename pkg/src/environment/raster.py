"""
Raster Module
=============

Reads and writes ESRI ASCII grids (`*.asc`) holding integer codes
(land-cover classes, land-price grades or prices).
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ..exceptions import RasterParseError

logger = logging.getLogger(__name__)

EXPECTED_CELL_SIZE = 30.0

_REQUIRED_KEYS = ("ncols", "nrows", "cellsize")
_CORNER_KEYS = {"xllcorner": "xllcorner", "xllcenter": "xllcorner",
                "yllcorner": "yllcorner", "yllcenter": "yllcorner"}


@dataclass
class Raster:
    """Dense integer grid; `nodata` marks cells without a value."""
    values: np.ndarray
    nodata: np.ndarray
    header: Dict[str, float]
    source: Optional[Path] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def shape(self):
        return self.values.shape

    @property
    def cell_size(self) -> float:
        return float(self.header.get("cellsize", EXPECTED_CELL_SIZE))


def _parse_header_line(parts: List[str], line_no: int):
    if len(parts) != 2:
        raise RasterParseError(f"header line must be 'key value', got {' '.join(parts)!r}", line_no)
    key = parts[0].lower()
    try:
        value = float(parts[1])
    except ValueError:
        raise RasterParseError(f"header value for {key} is not numeric: {parts[1]!r}", line_no)
    return key, value


def load_raster(source: Union[str, Path], expected_cell_size: float = EXPECTED_CELL_SIZE) -> Raster:
    """
    Parse an ESRI ASCII grid.

    Args:
        source: Path to the `.asc` file
        expected_cell_size: Cell size that does not raise a warning

    Returns:
        Raster with NODATA cells flagged in `nodata`
    """
    path = Path(source)
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()

    header: Dict[str, float] = {}
    line_no = 0
    while line_no < len(lines):
        parts = lines[line_no].split()
        if not parts:
            line_no += 1
            continue
        if not parts[0][0].isalpha():
            break
        key, value = _parse_header_line(parts, line_no + 1)
        header[_CORNER_KEYS.get(key, key)] = value
        line_no += 1

    for key in _REQUIRED_KEYS:
        if key not in header:
            raise RasterParseError(f"missing header key {key!r}", line_no + 1)

    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    if ncols <= 0 or nrows <= 0 or ncols != header["ncols"] or nrows != header["nrows"]:
        raise RasterParseError(f"invalid grid size {header['ncols']} x {header['nrows']}")

    nodata_value = header.get("nodata_value")
    values = np.zeros((nrows, ncols), dtype=np.int64)
    row = 0
    for idx in range(line_no, len(lines)):
        parts = lines[idx].split()
        if not parts:
            continue
        if row >= nrows:
            raise RasterParseError(f"more than nrows={nrows} data rows", idx + 1)
        if len(parts) != ncols:
            raise RasterParseError(f"row {row} has {len(parts)} values, ncols={ncols}", idx + 1)
        try:
            numbers = [float(p) for p in parts]
        except ValueError:
            raise RasterParseError(f"row {row} holds a non-numeric cell", idx + 1)
        if any(n != int(n) for n in numbers):
            raise RasterParseError(f"row {row} holds a non-integer cell", idx + 1)
        values[row] = np.array(numbers, dtype=np.int64)
        row += 1

    if row != nrows:
        raise RasterParseError(f"expected {nrows} data rows, found {row}", len(lines))

    nodata = values == int(nodata_value) if nodata_value is not None else np.zeros_like(values, dtype=bool)
    raster = Raster(values=values, nodata=nodata, header=header, source=path)

    if raster.cell_size != expected_cell_size:
        note = f"{path.name}: cellsize {raster.cell_size:g} differs from {expected_cell_size:g} m"
        raster.warnings.append(note)
        logger.warning(note)

    return raster


def write_raster(path: Union[str, Path], values: np.ndarray, cell_size: float = EXPECTED_CELL_SIZE,
                 nodata_value: int = -9999, xllcorner: float = 0.0, yllcorner: float = 0.0) -> Path:
    """Write an integer grid as an ESRI ASCII grid."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values, dtype=np.int64)
    nrows, ncols = values.shape
    header = [
        f"ncols {ncols}",
        f"nrows {nrows}",
        f"xllcorner {xllcorner:g}",
        f"yllcorner {yllcorner:g}",
        f"cellsize {cell_size:g}",
        f"NODATA_value {nodata_value}",
    ]
    body = [" ".join(str(v) for v in row) for row in values]
    path.write_text("\n".join(header + body) + "\n", encoding="utf-8")
    return path
