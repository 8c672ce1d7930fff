"""
FCM Service
Fuzzy c-means and the shared alternating loop used by the context-constrained
variant. Plain FCM is the special case where every row target is 1.
"""
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

import config
from models.domain import Centers, ClusteringResult, ContextSeries, Dataset, PartitionMatrix
from services.errors import ClusteringError, DegenerateClusterError
from services.logger_service import log_info, log_iteration, log_warning

DataLike = Union[Dataset, ContextSeries, np.ndarray]


def as_matrix(data: DataLike) -> np.ndarray:
    """Feature matrix of a Dataset, a ContextSeries or a raw array (1-D becomes one column)."""
    if isinstance(data, Dataset):
        return data.features
    if isinstance(data, ContextSeries):
        return data.values[:, None]
    x = np.asarray(data, dtype=float)
    return x[:, None] if x.ndim == 1 else x


def _check_m(m: float):
    if not m > 1:
        raise ClusteringError(f"fuzzifier m must be > 1, got {m}")


def init_partition(n: int, c: int, row_target: np.ndarray, seed: int) -> PartitionMatrix:
    """Random rows of c uniform positives rescaled to their row targets."""
    if c < 2:
        raise ClusteringError(f"cluster count c must be >= 2, got {c}")
    if n < c:
        raise ClusteringError(f"need at least c={c} points, got {n}")
    row_target = np.asarray(row_target, dtype=float)
    if row_target.shape != (n,):
        raise ClusteringError(f"row_target must have length {n}, got {row_target.shape}")
    if np.any(row_target <= 0):
        bad = int(np.flatnonzero(row_target <= 0)[0])
        raise ClusteringError(f"row target at point {bad} is {row_target[bad]}; targets must be > 0")
    if np.any(row_target > 1 + config.ROW_SUM_TOL):
        raise ClusteringError("row targets must not exceed 1")

    rng = np.random.default_rng(seed)
    raw = 1.0 - rng.random((n, c))  # (0, 1]
    u = raw / raw.sum(axis=1, keepdims=True) * row_target[:, None]
    return PartitionMatrix(u=u, row_target=row_target)


def update_centers(data: DataLike, partition: PartitionMatrix, m: float) -> Centers:
    """V_j = sum_k u_kj^m X_k / sum_k u_kj^m."""
    _check_m(m)
    x = as_matrix(data)
    weights = partition.u ** m
    mass = weights.sum(axis=0)
    empty = np.flatnonzero(mass <= 0)
    if empty.size:
        raise DegenerateClusterError(f"cluster {int(empty[0])} has zero total membership weight")
    return Centers(v=(weights.T @ x) / mass[:, None])


def constrained_memberships(data: DataLike, centers: Centers, m: float, row_target: np.ndarray) -> PartitionMatrix:
    """
    u_kj = f_k / sum_i (|X_k - V_j| / |X_k - V_i|)^(2/(m-1)).
    A point sitting on centers gets its whole target split equally among them.
    """
    _check_m(m)
    x = as_matrix(data)
    row_target = np.asarray(row_target, dtype=float)
    d = cdist(x, centers.v, metric="euclidean")
    power = 2.0 / (m - 1.0)

    u = np.empty_like(d)
    on_center = d == 0
    hit = on_center.any(axis=1)
    regular = ~hit
    if regular.any():
        dr = d[regular]
        with np.errstate(over="ignore"):
            ratios = (dr[:, :, None] / dr[:, None, :]) ** power
        u[regular] = row_target[regular, None] / ratios.sum(axis=2)
    if hit.any():
        share = on_center[hit].astype(float)
        u[hit] = row_target[hit, None] * share / share.sum(axis=1, keepdims=True)
    return PartitionMatrix(u=u, row_target=row_target)


def update_memberships(data: DataLike, centers: Centers, m: float) -> PartitionMatrix:
    """Plain FCM membership update (all row targets 1)."""
    return constrained_memberships(data, centers, m, np.ones(as_matrix(data).shape[0]))


def objective(data: DataLike, partition: PartitionMatrix, centers: Centers, m: float) -> float:
    """J = sum_k sum_j u_kj^m |X_k - V_j|^2."""
    d2 = cdist(as_matrix(data), centers.v, metric="sqeuclidean")
    return float(np.sum(partition.u ** m * d2))


def convergence_delta(u_new: PartitionMatrix, u_old: PartitionMatrix) -> float:
    """Max absolute entrywise difference."""
    if u_new.u.shape != u_old.u.shape:
        raise ClusteringError(f"shape mismatch: {u_new.u.shape} vs {u_old.u.shape}")
    return float(np.max(np.abs(u_new.u - u_old.u)))


def alternate(data: DataLike, row_target: np.ndarray, c: int, m: float, eps: float, max_iter: int, seed: int,
              adjust: Optional[Callable[[PartitionMatrix], PartitionMatrix]] = None,
              module: str = "FCM") -> ClusteringResult:
    """
    Alternate center and membership updates from a random start until the
    partition moves less than eps or max_iter is reached. ``adjust`` is applied
    to every fresh partition before the convergence test.
    """
    _check_m(m)
    if eps <= 0:
        raise ClusteringError(f"eps must be > 0, got {eps}")
    x = as_matrix(data)
    u = init_partition(x.shape[0], c, row_target, seed)
    violation = u.row_sum_violation()

    trace = []
    converged = False
    for t in range(1, max_iter + 1):
        centers = update_centers(x, u, m)
        fresh = constrained_memberships(x, centers, m, u.row_target)
        violation = max(violation, fresh.row_sum_violation())
        if adjust is not None:
            fresh = adjust(fresh)
            violation = max(violation, fresh.row_sum_violation())
        trace.append(objective(x, fresh, centers, m))
        delta = convergence_delta(fresh, u)
        log_iteration(module, t, trace[-1], delta)
        u = fresh
        if delta < eps:
            converged = True
            break

    if converged:
        log_info(module, f"Converged after {len(trace)} iterations (J={trace[-1]:.6g})")
    else:
        log_warning(module, f"No convergence within max_iter={max_iter}")

    return ClusteringResult(
        partition=u,
        centers=update_centers(x, u, m),
        objective_trace=trace,
        iterations=len(trace),
        converged=converged,
        max_constraint_violation=violation,
    )


def fcm_run(data: DataLike, c: int, m: float = config.DEFAULT_M, eps: float = config.DEFAULT_EPS,
            max_iter: int = config.DEFAULT_MAX_ITER, seed: int = 0) -> ClusteringResult:
    """Standard fuzzy c-means; accepts one-column inputs such as a context series."""
    n = as_matrix(data).shape[0]
    return alternate(data, np.ones(n), c, m, eps, max_iter, seed, module="FCM")


def align_clusters(centers: Centers, reference: Centers) -> np.ndarray:
    """Permutation ``perm`` with centers.v[perm[j]] matched to reference.v[j]
    at minimal total center distance."""
    if centers.v.shape != reference.v.shape:
        raise ClusteringError(f"center shapes differ: {centers.v.shape} vs {reference.v.shape}")
    _, perm = linear_sum_assignment(cdist(reference.v, centers.v))
    return perm


def hard_labels(partition: PartitionMatrix) -> np.ndarray:
    return np.argmax(partition.u, axis=1)
