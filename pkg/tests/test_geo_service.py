import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import config
from models.domain import WeightMatrix
from services.errors import GeometryError
from services.geo_service import (
    gravity_weights,
    isolated_areas,
    pairwise_distances,
    read_weights_csv,
    write_weights_csv,
)


def _gravity_oracle(pop, d, a, b):
    n = len(pop)
    w = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                w[i][j] = (pop[i] * pop[j]) ** b / d[i][j] ** a
    return np.array(w)


def test_planar_distance():
    d = pairwise_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert d[0, 1] == pytest.approx(5.0)
    assert d[1, 0] == d[0, 1]
    assert d[0, 0] == 0.0


def test_identical_points_have_zero_distance():
    d = pairwise_distances(np.array([[1.0, 2.0], [1.0, 2.0]]))
    assert d[0, 1] == 0.0


def test_haversine_quarter_meridian():
    d = pairwise_distances(np.array([[0.0, 0.0], [0.0, 90.0]]), metric="haversine")
    assert d[0, 1] == pytest.approx(config.EARTH_RADIUS_KM * math.pi / 2, rel=1e-9)


def test_distance_errors():
    with pytest.raises(GeometryError, match="Non-finite"):
        pairwise_distances(np.array([[0.0, 0.0], [np.nan, 1.0]]))
    with pytest.raises(GeometryError):
        pairwise_distances(np.array([[0.0, 0.0], [1.0, 1.0]]), metric="manhattan")


def test_gravity_examples():
    d = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert gravity_weights(np.array([1.0, 1.0]), d).w[0, 1] == pytest.approx(1.0)
    d = np.array([[0.0, 2.0], [2.0, 0.0]])
    w = gravity_weights(np.array([2.0, 3.0]), d, a=2.0, b=1.0).w
    assert w[0, 1] == pytest.approx(1.5)
    assert w[0, 0] == 0.0


def test_coincident_areas_rejected():
    d = pairwise_distances(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(GeometryError, match="coincident"):
        gravity_weights(np.ones(3), d)


@pytest.mark.parametrize("seed", range(10))
def test_gravity_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 11))
    coords = rng.uniform(0, 50, size=(n, 2))
    pop = rng.uniform(10, 1000, size=n)
    a, b = rng.uniform(0.5, 2.0, size=2)
    d = pairwise_distances(coords)
    w = gravity_weights(pop, d, a, b).w
    np.testing.assert_allclose(w, _gravity_oracle(pop.tolist(), d.tolist(), a, b), rtol=1e-10, atol=0)
    assert np.array_equal(w, w.T)
    assert np.all(np.diag(w) == 0)


def test_population_scaling():
    rng = np.random.default_rng(3)
    d = pairwise_distances(rng.uniform(0, 10, size=(5, 2)))
    pop = rng.uniform(1, 100, size=5)
    base = gravity_weights(pop, d, a=1.0, b=0.5).w
    scaled = gravity_weights(pop * 4.0, d, a=1.0, b=0.5).w
    np.testing.assert_allclose(scaled, base * 4.0 ** (2 * 0.5), rtol=1e-12)


def test_weights_file_round_trip(tmp_path):
    d = pairwise_distances(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]))
    weights = gravity_weights(np.array([1.0, 2.0, 3.0]), d)
    path = str(tmp_path / "w.csv")
    write_weights_csv(weights, path)
    assert np.array_equal(read_weights_csv(path, 3).w, weights.w)


def test_weights_file_validation(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("0,1\n2,0\n", encoding="utf-8")
    with pytest.raises(GeometryError, match="symmetric"):
        read_weights_csv(str(path), 2)
    with pytest.raises(GeometryError, match="3x3"):
        read_weights_csv(str(path), 3)
    path.write_text("5,1\n1,5\n", encoding="utf-8")
    assert np.all(np.diag(read_weights_csv(str(path), 2).w) == 0)


def test_ragged_weights_file(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("0,1\n1,0,2\n", encoding="utf-8")
    with pytest.raises(GeometryError, match="Line 2"):
        read_weights_csv(str(path), 2)


def test_isolated_areas():
    w = WeightMatrix(w=np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))
    assert isolated_areas(w).tolist() == [2]
