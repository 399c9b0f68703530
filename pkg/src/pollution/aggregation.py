"""
Aggregation Module
==================

Groups a complete hourly series into half-day ticks.

Day d contributes a work tick (mean of 09:00-19:00, 11 hours) followed by a
home tick (mean of 20:00 on day d through 08:00 on day d+1, 13 hours). The
home tick of the last day only has its four evening hours.
"""

import numpy as np

from ..exceptions import MustImputeFirstError, ValidationError
from .series import HourlySeries, TickSeries, WORK

WORK_HOURS = slice(9, 20)
EVENING_HOURS = slice(20, 24)
MORNING_HOURS = slice(0, 9)


def aggregate_to_ticks(series: HourlySeries) -> TickSeries:
    """
    Aggregate a complete hourly series to alternating work/home ticks.

    Args:
        series: Imputed hourly series starting at 00:00

    Returns:
        TickSeries with two ticks per day, the first a work tick
    """
    if not series.is_complete:
        raise MustImputeFirstError(
            f"{series.district_id}: series has {int(series.missing.sum())} missing hours; impute first"
        )
    if series.start.hour != 0 or series.start.minute != 0:
        raise ValidationError(f"{series.district_id}: series must start at 00:00, got {series.start}")
    if len(series) == 0 or len(series) % 24:
        raise ValidationError(f"{series.district_id}: series must cover whole days ({len(series)} hours)")

    days = series.values.reshape(-1, 24)
    n_days = days.shape[0]

    work = days[:, WORK_HOURS].mean(axis=1)

    evening = days[:, EVENING_HOURS].sum(axis=1)
    home = np.empty(n_days)
    home[:-1] = (evening[:-1] + days[1:, MORNING_HOURS].sum(axis=1)) / 13.0
    home[-1] = days[-1, EVENING_HOURS].mean()

    ticks = np.empty(2 * n_days)
    ticks[0::2] = work
    ticks[1::2] = home

    return TickSeries(
        district_id=series.district_id,
        values=ticks,
        tick0_kind=WORK,
        start=series.start.date(),
    )
