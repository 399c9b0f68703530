import re

import numpy as np
import pandas as pd
import pytest

from src.config_loader import Config
from src.exceptions import PlotSchemaError
from src.visualization.plotter import SCENARIOS, SWEEP, TRAJECTORY, Plotter, detect_schema


def trajectory_csv(path, ticks=20):
    t = np.arange(ticks)
    rate = np.minimum(1.0, t / (ticks - 1)) ** 2
    frame = pd.concat([
        pd.DataFrame({"tick": t, "group": "all", "at_risk_count": 0, "at_risk_rate": rate}),
        pd.DataFrame({"tick": t, "group": "old", "at_risk_count": 0, "at_risk_rate": rate / 2}),
    ])
    frame.to_csv(path, index=False)
    return path


def scenarios_csv(path, ticks=10):
    rows = []
    for scenario in ("bau", "inc"):
        for ac in (100, 200):
            for group in ("active", "all"):
                for t in range(ticks):
                    rows.append({"scenario": scenario, "ac": ac, "tick": t, "group": group,
                                 "mean_rate": t / ticks})
    pd.DataFrame(rows).to_csv(path, index=False)
    return path


def series_points(svg_text, index):
    start = svg_text.index(f'id="series-{index}"')
    block = svg_text[start:svg_text.index("</g>", start)]
    coords = re.findall(r"[ML]\s+(-?[\d.]+)\s+(-?[\d.]+)", block)
    return [(float(x), float(y)) for x, y in coords]


@pytest.fixture
def plotter():
    return Plotter(Config())


class TestSchema:
    def test_detect_layouts(self):
        assert detect_schema(pd.DataFrame(columns=["tick", "group", "at_risk_count", "at_risk_rate"])) == TRAJECTORY
        assert detect_schema(pd.DataFrame(columns=["alpha", "road", "tick", "mean_rate", "min", "max"])) == SWEEP
        assert detect_schema(pd.DataFrame(columns=["scenario", "ac", "tick", "group", "mean_rate"])) == SCENARIOS

    def test_unknown_layout(self):
        with pytest.raises(PlotSchemaError):
            detect_schema(pd.DataFrame(columns=["x", "y"]))


class TestPlotter:
    def test_one_line_per_group(self, plotter, tmp_path):
        svg = plotter.plot_csv(trajectory_csv(tmp_path / "trajectory.csv"), tmp_path / "trajectory.svg")

        text = svg.read_text(encoding="utf-8")
        assert text.count('id="legend-entry-') == 2
        assert 'id="series-0"' in text and 'id="series-1"' in text

    def test_rising_rate_draws_a_rising_line(self, plotter, tmp_path):
        svg = plotter.plot_csv(trajectory_csv(tmp_path / "trajectory.csv"), tmp_path / "trajectory.svg")

        points = series_points(svg.read_text(encoding="utf-8"), 0)
        xs = [x for x, _ in points]
        ys = [y for _, y in points]
        assert len(points) > 2
        assert xs == sorted(xs)
        # SVG y grows downwards
        assert ys == sorted(ys, reverse=True)

    def test_scenario_chart_has_four_entries(self, plotter, tmp_path):
        svg = plotter.plot_csv(scenarios_csv(tmp_path / "scenarios.csv"), tmp_path / "scenarios.svg")

        text = svg.read_text(encoding="utf-8")
        assert text.count('id="legend-entry-') == 4
        assert "BAU AC100" in text
        assert "INC AC200" in text

    def test_header_only_draws_empty_axes(self, plotter, tmp_path):
        csv = tmp_path / "empty.csv"
        csv.write_text("tick,group,at_risk_count,at_risk_rate\n", encoding="utf-8")

        svg = plotter.plot_csv(csv, tmp_path / "empty.svg")

        text = svg.read_text(encoding="utf-8")
        assert text.startswith("<?xml")
        assert 'id="series-0"' not in text

    def test_file_without_header(self, plotter, tmp_path):
        csv = tmp_path / "blank.csv"
        csv.write_text("", encoding="utf-8")

        with pytest.raises(PlotSchemaError):
            plotter.plot_csv(csv, tmp_path / "blank.svg")

    def test_same_input_same_bytes(self, plotter, tmp_path):
        csv = trajectory_csv(tmp_path / "trajectory.csv")

        first = plotter.plot_csv(csv, tmp_path / "a.svg").read_bytes()
        second = plotter.plot_csv(csv, tmp_path / "b.svg").read_bytes()

        assert first == second
