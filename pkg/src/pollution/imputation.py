"""
Imputation Module
=================

Fills missing hourly PM10 observations.

Short gaps are filled with the smoothed level of a local-level state-space
model. Two fits compete: random-walk level plus observation noise with both
variances fitted by maximum likelihood, and the same model with the
observation variance held at zero, whose smoothed level across a gap is the
straight line between the bracketing observations. A slice of observed hours
is hidden from the fit, and the noisy fit is kept only when it predicts those
hours clearly better. Hours inside gaps longer than `long_gap_hours` take the
value of the same hour one week earlier.
"""

import logging
import warnings
from dataclasses import replace
from typing import Optional

import numpy as np
from statsmodels.tsa.statespace.structural import UnobservedComponents

from ..exceptions import UnusableSeriesError
from .series import HourlySeries

logger = logging.getLogger(__name__)

HOURS_PER_WEEK = 168
HOLDOUT_STRIDE = 10
MIN_HOLDOUT = 10
# held-out MSE the noisy fit must undercut, relative to the zero-noise fit
NOISY_FIT_MARGIN = 0.9


def impute(series: HourlySeries, long_gap_hours: int = HOURS_PER_WEEK,
           max_missing_fraction: float = 0.5) -> HourlySeries:
    """
    Return a complete copy of `series`.

    Observed hours are never changed; a complete series is returned as is.

    Args:
        series: Hourly series with NaN gaps
        long_gap_hours: Gaps longer than this use seasonal-naive fill
        max_missing_fraction: Refuse series missing at least this share

    Returns:
        HourlySeries without missing values
    """
    values = series.values
    missing = np.isnan(values)
    if not missing.any():
        return series

    n_present = int((~missing).sum())
    if n_present < 2:
        raise UnusableSeriesError(
            f"{series.district_id}: {n_present} observed hours, at least 2 needed"
        )
    if missing.mean() >= max_missing_fraction:
        raise UnusableSeriesError(
            f"{series.district_id}: {missing.mean():.1%} of hours missing "
            f"(limit {max_missing_fraction:.0%})"
        )

    present = values[~missing]
    if np.ptp(present) == 0:
        # no innovation to estimate: the smoother returns the constant
        estimate = np.full(len(values), present[0])
    else:
        estimate = np.clip(_select_level(values, series.district_id), 0.0, None)

    filled = np.where(missing, estimate, values)

    long_gaps = _long_gap_mask(missing, long_gap_hours)
    if long_gaps.any():
        _seasonal_naive_fill(filled, long_gaps)
        logger.info("%s: %d hours in gaps longer than %d h filled from the previous week",
                    series.district_id, int(long_gaps.sum()), long_gap_hours)

    logger.info("%s: imputed %d of %d hours (%.2f%%)", series.district_id,
                int(missing.sum()), len(values), 100.0 * missing.mean())
    return replace(series, values=filled)


def random_walk_level(values: np.ndarray) -> np.ndarray:
    """
    Smoothed level of a random walk observed without noise.

    Inside a gap this is the line between the neighbouring observations;
    before the first and after the last observation it stays flat.
    """
    observed = np.flatnonzero(~np.isnan(values))
    return np.interp(np.arange(len(values)), observed, values[observed])


def holdout_hours(values: np.ndarray) -> np.ndarray:
    """Every `HOLDOUT_STRIDE`-th observed hour, first and last excluded."""
    observed = np.flatnonzero(~np.isnan(values))[1:-1]
    return observed[::HOLDOUT_STRIDE]


def _select_level(values: np.ndarray, district_id: str = "") -> np.ndarray:
    """Noisy local-level fit if it wins on held-out hours, else the zero-noise level."""
    rw_level = random_walk_level(values)
    held = holdout_hours(values)
    if len(held) < MIN_HOLDOUT:
        return rw_level

    masked = values.copy()
    masked[held] = np.nan
    noisy = _local_level_smooth(masked)
    if noisy is None:
        return rw_level

    truth = values[held]
    noisy_mse = float(np.mean((noisy[held] - truth) ** 2))
    rw_mse = float(np.mean((random_walk_level(masked)[held] - truth) ** 2))
    if noisy_mse < NOISY_FIT_MARGIN * rw_mse:
        logger.debug("%s: noisy local level kept (held-out MSE %.3f vs %.3f)",
                     district_id, noisy_mse, rw_mse)
        return noisy
    logger.debug("%s: zero-noise local level kept (held-out MSE %.3f vs %.3f)",
                 district_id, rw_mse, noisy_mse)
    return rw_level


def _local_level_smooth(values: np.ndarray) -> Optional[np.ndarray]:
    """Smoothed level of a local-level model fitted by maximum likelihood; None if degenerate."""
    model = UnobservedComponents(values, level="local level")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = model.fit(disp=False)
    smoothed = np.asarray(result.smoothed_state[0], dtype=float)

    if not np.isfinite(smoothed).all():
        logger.warning("Local-level smoother did not converge")
        return None
    return smoothed


def _long_gap_mask(missing: np.ndarray, long_gap_hours: int) -> np.ndarray:
    """Mark hours belonging to runs of missing values longer than `long_gap_hours`."""
    mask = np.zeros(len(missing), dtype=bool)
    padded = np.concatenate(([False], missing, [False])).astype(int)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    for start, end in zip(starts, ends):
        if end - start > long_gap_hours:
            mask[start:end] = True
    return mask


def _seasonal_naive_fill(filled: np.ndarray, mask: np.ndarray) -> None:
    """Same hour of the previous week; the following week at the head of the series."""
    n = len(filled)
    for t in np.flatnonzero(mask):
        if t >= HOURS_PER_WEEK:
            filled[t] = filled[t - HOURS_PER_WEEK]
        elif t + HOURS_PER_WEEK < n:
            filled[t] = filled[t + HOURS_PER_WEEK]
