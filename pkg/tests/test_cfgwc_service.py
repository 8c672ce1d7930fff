import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from models.domain import Centers, ContextVector, Dataset, PartitionMatrix, WeightMatrix
from models.run_config import CfgwcConfig, DatasetSchema
from services.cfgwc_service import (
    cfgwc_memberships,
    cfgwc_run,
    convergence_delta,
    objective,
    simpf_adjust,
)
from services.context_service import context_f1
from services.dataset_service import extract_context, load_csv
from services.errors import ClusteringError
from services.fcm_service import fcm_run, hard_labels
from services.geo_service import pairwise_distances, spatial_weights


def _dataset(features, coords=None, populations=None) -> Dataset:
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features[:, None]
    n = features.shape[0]
    if coords is None:
        coords = np.column_stack([np.arange(n, dtype=float), np.zeros(n)])
    return Dataset(
        ids=[f"a{k}" for k in range(n)],
        features=features,
        feature_names=[f"x{d}" for d in range(features.shape[1])],
        coords=coords,
        populations=np.ones(n) if populations is None else populations,
    )


def _random_instance(seed: int, n: int = 12, r: int = 2):
    rng = np.random.default_rng(seed)
    ds = _dataset(
        rng.normal(size=(n, r)),
        coords=rng.uniform(0, 10, size=(n, 2)),
        populations=rng.uniform(1, 50, size=n),
    )
    f = ContextVector(f=rng.uniform(0.05, 1.0, size=n), method="random")
    return ds, f, spatial_weights(ds)


def _simpf_oracle(u, w, f, alpha, beta):
    n, c = len(u), len(u[0])
    out = []
    for k in range(n):
        strength = sum(w[k][i] for i in range(n) if i != k)
        row = []
        for j in range(c):
            s = sum(w[k][i] * u[i][j] for i in range(n) if i != k)
            row.append(alpha * u[k][j] + beta * s / strength)
        total = sum(row)
        out.append([v * f[k] / total for v in row])
    return np.array(out)


def _objective_oracle(x, u, v, m):
    total = 0.0
    for k in range(len(x)):
        for j in range(len(v)):
            d2 = sum((x[k][d] - v[j][d]) ** 2 for d in range(len(x[k])))
            total += u[k][j] ** m * d2
    return total


def test_memberships_scale_with_context():
    centers = Centers(v=np.array([[0.0], [3.0]]))
    ds = _dataset([1.0, 1.5])
    f = ContextVector(f=np.array([0.5, 0.9]), method="file")
    u = cfgwc_memberships(ds, centers, f, 2.0).u
    np.testing.assert_allclose(u[0], [0.4, 0.1], atol=1e-12)
    np.testing.assert_allclose(u[1], [0.45, 0.45], atol=1e-12)


def test_memberships_equidistant_and_on_center():
    centers = Centers(v=np.array([[1.0, 0.0], [-0.5, np.sqrt(3) / 2], [-0.5, -np.sqrt(3) / 2]]))
    ds = _dataset([[0.0, 0.0], [-0.5, np.sqrt(3) / 2]])
    f = ContextVector(f=np.array([0.9, 0.6]), method="file")
    u = cfgwc_memberships(ds, centers, f, 2.0).u
    np.testing.assert_allclose(u[0], [0.3, 0.3, 0.3], atol=1e-12)
    assert u[1].tolist() == [0.0, 0.6, 0.0]


def test_simpf_beta_zero_is_identity():
    ds, f, weights = _random_instance(0)
    partition = PartitionMatrix(u=np.full((ds.N, 3), 1 / 3) * f.f[:, None], row_target=f.f)
    assert simpf_adjust(partition, weights, f, 1.0, 0.0) is partition


def test_simpf_pure_neighbour_swaps_rows():
    f = ContextVector(f=np.array([0.8, 0.8]), method="file")
    partition = PartitionMatrix(u=np.array([[0.6, 0.2], [0.1, 0.7]]), row_target=f.f)
    weights = WeightMatrix(w=np.array([[0.0, 2.0], [2.0, 0.0]]))
    adjusted = simpf_adjust(partition, weights, f, 0.0, 1.0).u
    np.testing.assert_allclose(adjusted, [[0.1, 0.7], [0.6, 0.2]], atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_simpf_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n, c = int(rng.integers(3, 11)), int(rng.integers(2, 5))
    f = rng.uniform(0.1, 1.0, size=n)
    raw = rng.uniform(0.01, 1, size=(n, c))
    u = raw / raw.sum(axis=1, keepdims=True) * f[:, None]
    w = rng.uniform(0.1, 5, size=(n, n))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 0.0)
    adjusted = simpf_adjust(
        PartitionMatrix(u=u, row_target=f), WeightMatrix(w=w), ContextVector(f=f, method="file"), 0.7, 0.3
    ).u
    np.testing.assert_allclose(adjusted, _simpf_oracle(u.tolist(), w.tolist(), f.tolist(), 0.7, 0.3),
                               atol=1e-12, rtol=0)


def test_simpf_keeps_rows_in_range():
    for seed in range(50):
        ds, f, weights = _random_instance(seed)
        raw = np.random.default_rng(seed).uniform(size=(ds.N, 3))
        u = raw / raw.sum(axis=1, keepdims=True) * f.f[:, None]
        adjusted = simpf_adjust(PartitionMatrix(u=u, row_target=f.f), weights, f, 0.6, 0.4)
        assert np.all((adjusted.u >= 0) & (adjusted.u <= 1))
        assert adjusted.row_sum_violation() < 1e-9


def test_simpf_isolated_area_keeps_own_row():
    f = ContextVector(f=np.array([0.5, 0.5, 0.9]), method="file")
    u = np.array([[0.3, 0.2], [0.1, 0.4], [0.6, 0.3]])
    weights = WeightMatrix(w=np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))
    adjusted = simpf_adjust(PartitionMatrix(u=u, row_target=f.f), weights, f, 0.7, 0.3).u
    np.testing.assert_allclose(adjusted[2], u[2], atol=1e-12)


def test_simpf_rejects_bad_mixing():
    ds, f, weights = _random_instance(1)
    partition = PartitionMatrix(u=np.full((ds.N, 2), 0.5) * f.f[:, None], row_target=f.f)
    with pytest.raises(ClusteringError, match="alpha \\+ beta"):
        simpf_adjust(partition, weights, f, 0.7, 0.4)


def test_objective_examples():
    ds = _dataset([0.0, 5.0])
    crisp = PartitionMatrix(u=np.eye(2), row_target=np.ones(2))
    assert objective(ds, crisp, Centers(v=np.array([[0.0], [5.0]])), 2.0) == 0.0
    one = PartitionMatrix(u=np.array([[1.0]]), row_target=np.ones(1))
    assert objective(_dataset([2.0]), one, Centers(v=np.array([[0.0]])), 2.0) == pytest.approx(4.0)


@pytest.mark.parametrize("seed", range(10))
def test_objective_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n, c, r = int(rng.integers(2, 11)), int(rng.integers(2, 5)), int(rng.integers(1, 4))
    x = rng.normal(size=(n, r))
    u = rng.uniform(size=(n, c))
    v = rng.normal(size=(c, r))
    value = objective(x, PartitionMatrix(u=u, row_target=u.sum(axis=1)), Centers(v=v), 2.0)
    assert value == pytest.approx(_objective_oracle(x.tolist(), u.tolist(), v.tolist(), 2.0), rel=1e-10)


def test_convergence_delta():
    a = PartitionMatrix(u=np.array([[0.5, 0.5], [0.2, 0.8]]), row_target=np.ones(2))
    b = PartitionMatrix(u=np.array([[0.5, 0.5], [0.5, 0.8]]), row_target=np.ones(2))
    assert convergence_delta(a, a) == 0.0
    assert convergence_delta(a, b) == pytest.approx(0.3)
    with pytest.raises(ClusteringError, match="shape mismatch"):
        convergence_delta(a, PartitionMatrix(u=np.ones((2, 3)), row_target=np.full(2, 3.0)))


@pytest.mark.parametrize("seed", range(5))
def test_reduces_to_fcm(seed):
    ds, _, weights = _random_instance(seed)
    ones = ContextVector(f=np.ones(ds.N), method="none")
    cfg = CfgwcConfig(c=3, beta=0.0, seed=seed)
    cfgwc = cfgwc_run(ds, ones, weights, cfg)
    fcm = fcm_run(ds, 3, seed=seed)
    assert np.array_equal(cfgwc.partition.u, fcm.partition.u)
    assert np.array_equal(cfgwc.centers.v, fcm.centers.v)
    assert cfgwc.objective_trace == fcm.objective_trace


@pytest.mark.parametrize("seed", range(20))
def test_descent_without_spatial_term(seed):
    ds, f, weights = _random_instance(200 + seed)
    result = cfgwc_run(ds, f, weights, CfgwcConfig(c=3, beta=0.0, seed=seed))
    trace = result.objective_trace
    for prev, cur in zip(trace, trace[1:]):
        assert cur <= prev + 1e-10 * max(1.0, abs(prev))
    assert result.max_constraint_violation < 1e-9


@pytest.mark.parametrize("seed", range(20))
def test_survey_converges(survey_path, seed):
    ds = load_csv(str(survey_path), DatasetSchema(id_column="Name"))
    f = context_f1(extract_context(ds, "Income"), 3, seed=seed)
    result = cfgwc_run(ds, f, spatial_weights(ds), CfgwcConfig(seed=seed))
    assert result.converged
    assert result.iterations <= 300
    assert result.max_constraint_violation < 1e-9
    np.testing.assert_allclose(result.partition.u.sum(axis=1), f.f, atol=1e-9)


def test_hard_assignment_ignores_uniform_context_scale():
    ds, _, weights = _random_instance(7, n=20)
    full = ContextVector(f=np.ones(ds.N), method="none")
    half = ContextVector(f=np.full(ds.N, 0.5), method="file")
    cfg = CfgwcConfig(c=3, beta=0.0, eps=1e-9, seed=4)
    a = cfgwc_run(ds, full, weights, cfg)
    b = cfgwc_run(ds, half, weights, cfg)
    assert np.array_equal(hard_labels(a.partition), hard_labels(b.partition))


def test_isolated_area_warning():
    ds = _dataset([0.0, 1.0, 2.0, 10.0])
    f = ContextVector(f=np.ones(4), method="none")
    w = np.ones((4, 4))
    w[3, :] = w[:, 3] = 0.0
    np.fill_diagonal(w, 0.0)
    result = cfgwc_run(ds, f, WeightMatrix(w=w), CfgwcConfig(c=2, seed=0))
    assert any("isolated" in warning and "a3" in warning for warning in result.warnings)


def test_size_mismatch():
    ds = _dataset([0.0, 1.0, 2.0])
    weights = WeightMatrix(w=1.0 - np.eye(3))
    with pytest.raises(ClusteringError):
        cfgwc_run(ds, ContextVector(f=np.ones(2), method="none"), weights, CfgwcConfig(c=2))
    d = pairwise_distances(np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(ClusteringError):
        cfgwc_run(ds, ContextVector(f=np.ones(3), method="none"), WeightMatrix(w=d), CfgwcConfig(c=2))
