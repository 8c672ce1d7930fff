"""
CFGWC Service
Context-constrained fuzzy geographically weighted clustering: memberships
constrained to sum to each point's context value, adjusted after every
update by the gravity-weighted memberships of the other areas.
"""
from dataclasses import replace

import numpy as np

import config
from models.domain import Centers, ClusteringResult, ContextVector, Dataset, PartitionMatrix, WeightMatrix
from models.run_config import CfgwcConfig
from services.errors import ClusteringError
from services.fcm_service import alternate, constrained_memberships, convergence_delta, objective
from services.geo_service import isolated_areas
from services.logger_service import log_info, log_warning

__all__ = [
    "cfgwc_memberships",
    "simpf_adjust",
    "objective",
    "convergence_delta",
    "cfgwc_run",
]


def cfgwc_memberships(dataset: Dataset, centers: Centers, f: ContextVector, m: float) -> PartitionMatrix:
    """Membership update with row k summing to f_k."""
    return constrained_memberships(dataset, centers, m, f.f)


def simpf_adjust(partition: PartitionMatrix, weights: WeightMatrix, f: ContextVector, alpha: float,
                 beta: float) -> PartitionMatrix:
    """
    u'_k = alpha * u_k + beta * (weighted average of the other areas' rows),
    then rescaled so row k sums to f_k. Areas with no neighbour weight keep
    only their own row.
    """
    if abs(alpha + beta - 1.0) > config.ALPHA_BETA_TOL:
        raise ClusteringError(f"alpha + beta must equal 1 (got {alpha} + {beta})")
    n = partition.N
    if weights.w.shape != (n, n):
        raise ClusteringError(f"weights must be {n}x{n}, got {weights.w.shape}")
    if beta == 0:
        return partition

    u = partition.u
    w = np.array(weights.w, copy=True)
    np.fill_diagonal(w, 0.0)
    strength = w.sum(axis=1)
    connected = strength > 0

    neighbours = np.zeros_like(u)
    neighbours[connected] = (w[connected] @ u) / strength[connected, None]

    blended = alpha * u + beta * neighbours
    totals = blended.sum(axis=1)
    empty = totals <= 0
    if empty.any():
        blended[empty] = u[empty]
        totals[empty] = u[empty].sum(axis=1)
    adjusted = blended * (f.f / totals)[:, None]
    return PartitionMatrix(u=adjusted, row_target=f.f)


def cfgwc_run(dataset: Dataset, f: ContextVector, weights: WeightMatrix, cfg: CfgwcConfig) -> ClusteringResult:
    """Initialise with rows summing to f, then iterate centers, constrained
    memberships and the spatial adjustment until convergence."""
    if len(f) != dataset.N:
        raise ClusteringError(f"context has {len(f)} values for {dataset.N} points")
    if weights.N != dataset.N:
        raise ClusteringError(f"weight matrix is {weights.N}x{weights.N} for {dataset.N} points")

    warnings = []
    if cfg.beta > 0:
        isolated = isolated_areas(weights)
        if isolated.size:
            ids = [dataset.ids[i] for i in isolated]
            warnings.append(f"isolated areas without neighbour weight: {ids}")
            log_warning("CFGWC", warnings[-1])

    adjust = None
    if cfg.beta > 0:
        def adjust(partition: PartitionMatrix) -> PartitionMatrix:
            return simpf_adjust(partition, weights, f, cfg.alpha, cfg.beta)

    log_info(
        "CFGWC",
        f"Run c={cfg.c} m={cfg.m} alpha={cfg.alpha} beta={cfg.beta} eps={cfg.eps} seed={cfg.seed}",
    )
    result = alternate(dataset, f.f, cfg.c, cfg.m, cfg.eps, cfg.max_iter, cfg.seed, adjust=adjust, module="CFGWC")
    return replace(result, warnings=result.warnings + warnings)
