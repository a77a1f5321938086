import json
import math
import pathlib

import numpy as np
import pytest

import reefmap

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "tests" / "fixtures"
SCENARIO = ROOT / "data" / "example_scenario.json"


def tilted_plane(theta_deg, extent=12.0):
    t = math.tan(math.radians(theta_deg))
    v = np.array([[0, 0, 0], [extent, 0, t * extent], [extent, extent, t * extent], [0, extent, 0]], float)
    return reefmap.TriangleMesh(v, np.array([[0, 1, 2], [0, 2, 3]]))


def test_footprint_and_plan():
    w, length = reefmap.footprint_dims(2.0, 120.0, 58.0)
    assert w == pytest.approx(6.928203, abs=1e-6)
    assert length == pytest.approx(2.217236, abs=1e-6)
    plan = reefmap.plan_lawnmower((0, 0, 12, 12), overlap=0.2)
    assert plan["tracks"] == 3
    with pytest.raises(reefmap.PreconditionError):
        reefmap.plan_lawnmower((0, 0, 12, 12), overlap=1.0)


@pytest.mark.parametrize("theta", [0.0, 30.0, 60.0])
def test_rugosity_tilt(theta):
    grid = reefmap.rugosity_grid(tilted_plane(theta), cell_size=0.5)
    values = grid.values()
    assert values.shape == (24, 24)
    assert np.allclose(values, 1.0 / math.cos(math.radians(theta)), atol=1e-9)


def test_mesh_loading_and_errors():
    mesh = reefmap.load_mesh(FIXTURES / "flat_plane.ply")
    assert mesh.surface_area == pytest.approx(144.0)
    assert reefmap.parse_ply(mesh.to_ply(binary=True)) == mesh
    with pytest.raises(reefmap.IndexError) as err:
        reefmap.load_mesh(FIXTURES / "bad_index.ply")
    assert isinstance(err.value, reefmap.ReefmapError)
    assert isinstance(err.value, ValueError)
    with pytest.raises(reefmap.TruncationError):
        reefmap.load_mesh(FIXTURES / "truncated_binary.ply")


def test_evaluate_identity_and_fixture():
    gts = {0: [(0.3, 0.3, 0.2, 0.2), (0.7, 0.7, 0.2, 0.2)], 1: [(0.5, 0.5, 0.3, 0.3)]}
    same = {k: [b + (0.9,) for b in v] for k, v in gts.items()}
    assert reefmap.evaluate(same, gts)["map50"] == pytest.approx(1.0)
    preds = {
        0: [(0.31, 0.3, 0.2, 0.2, 0.9), (0.1, 0.9, 0.1, 0.1, 0.6), (0.7, 0.72, 0.2, 0.2, 0.4)],
        1: [(0.5, 0.55, 0.3, 0.3, 0.8), (0.5, 0.5, 0.3, 0.3, 0.3)],
    }
    r = reefmap.evaluate(preds, gts)
    assert round(r["map50"], 6) == 0.916667
    assert (r["tp"], r["fp"], r["fn"]) == (3, 2, 0)
    assert reefmap.evaluate({5: []}, gts) is None


def test_annotation_sampling():
    frames = reefmap.sample_annotation_frames(13236, 6.0)
    assert len(frames) == 332
    assert frames[:5] == [0, 6, 114, 120, 126]


def test_grid_round_trip_and_correlation():
    values = np.array([[1.0, 2.0, np.nan], [4.0, 3.0, 6.0]])
    grid = reefmap.Grid(values, (0.0, 0.0), 0.5)
    back = reefmap.Grid.from_csv(grid.to_csv())
    assert np.array_equal(np.isnan(back.values()), np.isnan(values))
    c = reefmap.correlate(grid, back)
    assert c["n"] == 5
    assert c["spearman"] == pytest.approx(1.0)
    other = reefmap.Grid(np.ones((3, 3)), (0.0, 0.0), 0.5)
    with pytest.raises(reefmap.ShapeError):
        reefmap.correlate(grid, other)


def test_end_to_end_scenario():
    text = SCENARIO.read_text()
    a = reefmap.run_end_to_end(text, threads=2)
    b = reefmap.run_end_to_end(text, threads=1)
    assert a["frames"] == b["frames"] > 0
    assert np.array_equal(a["abundance"].values(), b["abundance"].values(), equal_nan=True)
    x, y, _ = a["peaks"][0]
    assert math.hypot(x + 3.5, y + 7.0) < 1.5
    bad = json.loads(text)
    bad["survey"]["overlap"] = 1.5
    with pytest.raises(reefmap.ConfigError, match="survey.overlap"):
        reefmap.run_end_to_end(json.dumps(bad))
