"""CSV input tables: parse errors and bad cells become TableParseError with file and line."""

from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd

from .exceptions import TableParseError


def read_table(path: Union[str, Path], columns: Iterable[str],
               dtype: Optional[Dict[str, type]] = None) -> pd.DataFrame:
    """
    Read a CSV and check that it has the required columns.

    Args:
        path: CSV path
        columns: Column names that must be present
        dtype: Column dtypes passed to pandas

    Returns:
        DataFrame with the file's rows

    Raises:
        TableParseError: unreadable file, empty file or missing columns
    """
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=dtype)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError, ValueError) as e:
        raise TableParseError(f"cannot parse CSV: {e}", path) from e

    missing = set(columns) - set(df.columns)
    if missing:
        raise TableParseError(f"missing columns {sorted(missing)}", path)
    return df


def numeric_column(df: pd.DataFrame, column: str, path: Union[str, Path],
                   integer: bool = False, allow_missing: bool = False) -> np.ndarray:
    """
    Convert one column to floats, naming the first offending line on failure.

    Line numbers count the header as line 1.
    """
    values = pd.to_numeric(df[column], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if allow_missing:
        bad &= df[column].notna().to_numpy()
    if integer:
        bad |= np.isfinite(values) & (values != np.round(values))
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        kind = "a whole number" if integer else "a number"
        raise TableParseError(f"{column} {df[column].iloc[row]!r} is not {kind}", path, line=row + 2)
    return values
