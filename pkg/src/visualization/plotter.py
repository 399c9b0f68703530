"""
Plotter Module
==============

Line charts of at-risk trajectories, written as self-contained SVG.

Understands the CSV layouts written by `run` (trajectory.csv), `sweep`
(sweep.csv) and `scenarios` (scenarios.csv).
"""

from pathlib import Path
from typing import List, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..config_loader import Config  # noqa: E402
from ..exceptions import PlotSchemaError  # noqa: E402

TRAJECTORY = "trajectory"
SWEEP = "sweep"
SCENARIOS = "scenarios"

_SCHEMAS = [
    (SCENARIOS, {"scenario", "ac", "tick", "group", "mean_rate"}),
    (SWEEP, {"alpha", "road", "tick", "mean_rate"}),
    (TRAJECTORY, {"tick", "group", "at_risk_rate"}),
]

Series = Tuple[str, np.ndarray, np.ndarray]


def detect_schema(df: pd.DataFrame) -> str:
    """Name of the CSV layout, judged by its columns."""
    columns = set(df.columns)
    for name, required in _SCHEMAS:
        if required <= columns:
            return name
    raise PlotSchemaError(f"unknown CSV schema with columns {sorted(columns)}")


class Plotter:
    """Creates at-risk line charts."""

    def __init__(self, config: Config):
        """
        Initialize the plotter.

        Args:
            config: Configuration object
        """
        self.config = config
        self._setup_style()

    def _setup_style(self):
        colors = self.config.get("output.colors", {}) or {}
        self.colors = {
            "primary": colors.get("primary", "#2E86AB"),
            "background": colors.get("background", "#FFFFFF"),
        }
        self.series_colors = list(colors.get("series") or ["#2E86AB", "#A23B72", "#F18F01", "#4ECDC4"])
        width = float(self.config.get("output.figure_width", 800))
        height = float(self.config.get("output.figure_height", 500))
        self.figsize = (width / 100.0, height / 100.0)

        plt.rcParams.update({
            "svg.hashsalt": "pm10-exposure",
            "svg.fonttype": "none",
            "font.size": 10,
            "axes.titlesize": 12,
            "axes.labelsize": 10,
            "legend.fontsize": 9,
        })

    def series_from_frame(self, df: pd.DataFrame) -> Tuple[str, List[Series]]:
        """Split a result table into labelled (tick, rate) series."""
        schema = detect_schema(df)
        series: List[Series] = []
        if schema == TRAJECTORY:
            for group, part in df.groupby("group", sort=True):
                part = part.sort_values("tick")
                series.append((str(group), part["tick"].to_numpy(), part["at_risk_rate"].to_numpy()))
        elif schema == SWEEP:
            for (alpha, road), part in df.groupby(["alpha", "road"], sort=True):
                part = part.sort_values("tick")
                series.append((f"alpha={alpha:g} road={road:g}", part["tick"].to_numpy(),
                               part["mean_rate"].to_numpy()))
        else:
            overall = df[df["group"] == "all"]
            for (scenario, ac), part in overall.groupby(["scenario", "ac"], sort=True):
                part = part.sort_values("tick")
                series.append((f"{str(scenario).upper()} AC{float(ac):g}", part["tick"].to_numpy(),
                               part["mean_rate"].to_numpy()))
        return schema, series

    def plot_series(self, series: List[Series], output_path: Path, title: str = "") -> Path:
        """
        Draw one line per series.

        Lines are tagged `series-<i>` and legend labels `legend-entry-<i>` in
        the SVG.

        Args:
            series: (label, ticks, rates) triples; empty draws axes only
            output_path: SVG destination
            title: Chart title

        Returns:
            Path to the SVG
        """
        fig, ax = plt.subplots(figsize=self.figsize)
        fig.patch.set_facecolor(self.colors["background"])

        for i, (label, ticks, rates) in enumerate(series):
            (line,) = ax.plot(ticks, rates, label=label, linewidth=1.2,
                              color=self.series_colors[i % len(self.series_colors)])
            line.set_gid(f"series-{i}")

        ax.set_xlabel("Tick (half day)")
        ax.set_ylabel("Population at risk")
        ax.set_ylim(0, 1)
        if not series:
            ax.set_xlim(0, 1)
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)

        if series:
            legend = ax.legend(loc="upper left", frameon=False)
            for i, text in enumerate(legend.get_texts()):
                text.set_gid(f"legend-entry-{i}")

        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(output_path, format="svg", bbox_inches="tight", metadata={"Date": None})
        plt.close(fig)
        return output_path

    def plot_csv(self, csv_path: Union[str, Path], output_path: Union[str, Path]) -> Path:
        """
        Plot a run, sweep or scenario CSV.

        Returns:
            Path to the SVG
        """
        try:
            df = pd.read_csv(csv_path)
        except pd.errors.EmptyDataError as e:
            raise PlotSchemaError(f"{csv_path} has no header") from e
        schema, series = self.series_from_frame(df)
        titles = {
            TRAJECTORY: "At-risk population by group",
            SWEEP: "Sensitivity of the at-risk population",
            SCENARIOS: "At-risk population by scenario",
        }
        return self.plot_series(series, Path(output_path), titles[schema])
