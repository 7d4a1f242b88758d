import xml.etree.ElementTree as ET

import numpy as np
import pytest

from alloc_arena.env import EnvConfig
from alloc_arena.harness import ExperimentConfig, run_experiment
from alloc_arena.plots import line_chart_svg

NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    out = tmp_path_factory.mktemp("plots")
    env = EnvConfig(n_types=4, n_units=40, horizon=60, seed=2)
    run_experiment(ExperimentConfig(env=env, n_sims=2, output_dir=str(out), workers=1))
    return out


@pytest.mark.parametrize("name", ["coverage.svg", "mse.svg", "probabilities.svg"])
def test_valid_xml(outdir, name):
    root = ET.parse(outdir / name).getroot()
    assert root.tag == NS + "svg"


def test_one_polyline_per_strategy(outdir):
    root = ET.parse(outdir / "coverage.svg").getroot()
    labels = [p.get("data-label") for p in root.iter(NS + "polyline") if p.get("class") == "series"]
    assert sorted(labels) == sorted(["static", "rolling_lagrangian", "rl", "oracle"])


def test_shift_markers(outdir):
    root = ET.parse(outdir / "coverage.svg").getroot()
    xs = [float(m.get("x1")) for m in root.iter(NS + "line") if m.get("class") == "marker"]
    assert len(xs) == 3 and xs == sorted(xs)
    # evenly spaced steps 30, 40, 50 map to evenly spaced pixels
    assert xs[1] - xs[0] == pytest.approx(xs[2] - xs[1], abs=0.2)


def test_probability_plot_has_every_type(outdir):
    root = ET.parse(outdir / "probabilities.svg").getroot()
    assert len([p for p in root.iter(NS + "polyline")]) == 4


def test_labels_are_escaped():
    svg = line_chart_svg({"a<b": (np.arange(3), np.arange(3.0))}, "t & u", "x", "y")
    root = ET.fromstring(svg)
    assert [p.get("data-label") for p in root.iter(NS + "polyline")] == ["a<b"]


def test_nan_points_are_skipped():
    svg = line_chart_svg({"s": (np.arange(3), np.array([1.0, np.nan, 2.0]))}, "t", "x", "y")
    pts = next(ET.fromstring(svg).iter(NS + "polyline")).get("points").split()
    assert len(pts) == 2
