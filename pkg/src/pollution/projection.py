"""
Projection Module
=================

Extends an observed tick series to the full simulation horizon.

- BAU: the observed years replicate themselves unchanged.
- INC: the replicated years are scaled season by season, compounding by
  `rate` for every season that starts inside the projected span.
"""

import logging
from dataclasses import replace

import numpy as np

from ..exceptions import ConfigurationError, ValidationError
from .series import SeasonCalendar, TickSeries, observed_tick_count

logger = logging.getLogger(__name__)

SCENARIOS = ("bau", "inc")


def _check_base(base: TickSeries, observed_years: int) -> int:
    expected = observed_tick_count(base.start, observed_years)
    if len(base) != expected:
        raise ValidationError(
            f"{base.district_id}: base has {len(base)} ticks, "
            f"{observed_years} years from {base.start} need {expected}"
        )
    return expected


def projection_calendar(base: TickSeries, observed_years: int = 6) -> SeasonCalendar:
    """Season calendar of the doubled horizon, reusing the observed dates."""
    n = len(base)
    return SeasonCalendar.build(base.start, 2 * n, cycle_ticks=n, cycle_years=observed_years)


def projected_season_numbers(calendar: SeasonCalendar, base_length: int) -> np.ndarray:
    """
    Season number k per tick: 0 for the observed span and for the tail of a
    season already running when the projection starts, then 1, 2, ... for each
    season starting inside the projected span.
    """
    season = calendar.season_index
    first_full = season[base_length]
    if season[base_length - 1] == season[base_length]:
        first_full += 1
    k = season - first_full + 1
    k[:base_length] = 0
    return np.clip(k, 0, None)


def project_bau(base: TickSeries, observed_years: int = 6) -> TickSeries:
    """
    Replicate the observed years once.

    Args:
        base: Tick series covering exactly `observed_years`
        observed_years: Length of the observed span in years

    Returns:
        TickSeries of twice the length
    """
    _check_base(base, observed_years)
    return replace(base, values=np.concatenate([base.values, base.values]))


def project_inc(base: TickSeries, rate: float = 0.03, observed_years: int = 6) -> TickSeries:
    """
    Replicate the observed years and compound the projected seasons upward.

    Every tick of the k-th projected season is multiplied by (1 + rate)^k.

    Args:
        base: Tick series covering exactly `observed_years`
        rate: Growth per season (> -1)
        observed_years: Length of the observed span in years

    Returns:
        TickSeries of twice the length
    """
    if not rate > -1:
        raise ValidationError(f"INC rate must be > -1, got {rate}")
    n = _check_base(base, observed_years)

    calendar = projection_calendar(base, observed_years)
    k = projected_season_numbers(calendar, n)
    factors = np.power(1.0 + rate, k)

    values = np.concatenate([base.values, base.values]) * factors
    logger.debug("%s: INC projection over %d seasons, final factor %.4f",
                 base.district_id, int(k.max()), float(factors[-1]))
    return replace(base, values=values)


def project(base: TickSeries, scenario: str, rate: float = 0.03, observed_years: int = 6) -> TickSeries:
    """Dispatch to the named pollution scenario."""
    scenario = scenario.lower()
    if scenario == "bau":
        return project_bau(base, observed_years)
    if scenario == "inc":
        return project_inc(base, rate, observed_years)
    raise ConfigurationError(f"Unknown pollution scenario {scenario!r}; expected one of {SCENARIOS}")
