"""
Geo Service
Pairwise area distances and the gravity-model spatial weight matrix
w_ij = (pop_i * pop_j)^b / d_ij^a.
"""
import csv
import os

import numpy as np
from scipy.spatial.distance import cdist

import config
from models.domain import Dataset, WeightMatrix
from services.errors import GeometryError
from services.logger_service import log_info, log_warning


def _haversine_km(coords: np.ndarray) -> np.ndarray:
    lon = np.radians(coords[:, 0])
    lat = np.radians(coords[:, 1])
    dlon = lon[:, None] - lon[None, :]
    dlat = lat[:, None] - lat[None, :]
    h = np.sin(dlat / 2) ** 2 + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlon / 2) ** 2
    return 2 * config.EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def pairwise_distances(coords: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """N x N distances; haversine expects (lon, lat) in degrees and returns km."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise GeometryError(f"coords must be N x 2, got shape {coords.shape}")
    if coords.shape[0] < 2:
        raise GeometryError("pairwise_distances needs at least 2 areas")
    if not np.all(np.isfinite(coords)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(coords), axis=1))[0])
        raise GeometryError(f"Non-finite coordinates for area {bad}")

    if metric == "euclidean":
        d = cdist(coords, coords, metric="euclidean")
    elif metric == "haversine":
        d = _haversine_km(coords)
    else:
        raise GeometryError(f"Unknown distance metric '{metric}'")
    # exact symmetry and zero diagonal
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    return d


def gravity_weights(populations: np.ndarray, distances: np.ndarray, a: float = config.DEFAULT_GRAVITY_A,
                    b: float = config.DEFAULT_GRAVITY_B) -> WeightMatrix:
    """Spatial influence weights of the gravity model, zero on the diagonal."""
    populations = np.asarray(populations, dtype=float)
    distances = np.asarray(distances, dtype=float)
    n = populations.shape[0]
    if distances.shape != (n, n):
        raise GeometryError(f"distances must be {n}x{n}, got {distances.shape}")
    if np.any(populations <= 0):
        raise GeometryError("populations must be strictly positive")

    off_diagonal = ~np.eye(n, dtype=bool)
    coincident = np.argwhere((distances <= 0) & off_diagonal)
    if coincident.size:
        i, j = coincident[0]
        raise GeometryError(
            f"Areas {i} and {j} are coincident (distance 0); jitter their coordinates or merge them"
        )

    mass = np.outer(populations, populations) ** b
    safe = np.where(off_diagonal, distances, 1.0)
    w = np.where(off_diagonal, mass / safe ** a, 0.0)
    if not np.all(np.isfinite(w)):
        raise GeometryError("Gravity weights overflowed; rescale populations or exponents")
    return WeightMatrix(w=w)


def spatial_weights(dataset: Dataset, metric: str = "euclidean", a: float = config.DEFAULT_GRAVITY_A,
                    b: float = config.DEFAULT_GRAVITY_B) -> WeightMatrix:
    distances = pairwise_distances(dataset.coords, metric)
    weights = gravity_weights(dataset.populations, distances, a, b)
    log_info("GEO", f"Gravity weights for N={dataset.N} ({metric}, a={a}, b={b})")
    return weights


def isolated_areas(weights: WeightMatrix) -> np.ndarray:
    """Indices of areas with no off-diagonal weight."""
    w = weights.w.copy()
    np.fill_diagonal(w, 0.0)
    return np.flatnonzero(w.sum(axis=1) <= 0)


def write_weights_csv(weights: WeightMatrix, path: str) -> None:
    """Row-major, header-less N x N matrix."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in weights.w:
            writer.writerow([repr(float(v)) for v in row])


def read_weights_csv(path: str, n: int) -> WeightMatrix:
    """Import an externally computed N x N weight matrix."""
    if not os.path.exists(path):
        raise GeometryError(f"Weight matrix file not found: {path}")
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            if not any(cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise GeometryError(f"Non-numeric weight on line {line_no} of {path}")
            if len(rows[-1]) != len(rows[0]):
                raise GeometryError(
                    f"Line {line_no} of {path} has {len(rows[-1])} weights, expected {len(rows[0])}"
                )
    w =np.array(rows, dtype=float) if rows else np.empty((0, 0))
    if w.shape != (n, n):
        raise GeometryError(f"Weight matrix must be {n}x{n}, got {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise GeometryError("Weight matrix entries must be finite and non-negative")
    if not np.allclose(w, w.T, rtol=0, atol=1e-9):
        raise GeometryError("Weight matrix must be symmetric")
    if np.any(np.diag(w) != 0):
        log_warning("GEO", "Imported weight matrix has a non-zero diagonal; zeroing it")
        np.fill_diagonal(w, 0.0)
    return WeightMatrix(w=w)
