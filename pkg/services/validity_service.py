"""
Validity Service
IFV spatial cluster-validity index (larger is better):

  IFV = (1/C) sum_j { (1/N) sum_k u_kj^2 * (log2 C - (1/N) sum_k log2 u_kj)^2 } * SD_max / sigma_bar
"""
import numpy as np
from scipy.spatial.distance import cdist, pdist

import config
from models.domain import Centers, PartitionMatrix
from models.results import IfvReport
from services.errors import ValidityError
from services.fcm_service import DataLike, as_matrix
from services.logger_service import log_warning


def sd_max(centers: Centers) -> float:
    """Largest squared distance between two centers."""
    if centers.C < 2:
        raise ValidityError(f"SD_max needs at least 2 centers, got {centers.C}")
    return float(np.max(pdist(centers.v, metric="sqeuclidean")))


def sigma_bar(data: DataLike, centers: Centers) -> float:
    """Mean over clusters of the mean squared point-to-center distance."""
    return float(np.mean(cdist(as_matrix(data), centers.v, metric="sqeuclidean")))


def ifv(data: DataLike, partition: PartitionMatrix, centers: Centers) -> IfvReport:
    """IFV on the memberships as given (rows may sum to f_k < 1). Zero
    memberships are clamped so log2 stays defined."""
    c = partition.C
    if c < 2:
        raise ValidityError(f"IFV needs C >= 2, got {c}")
    if centers.C != c:
        raise ValidityError(f"partition has {c} clusters but there are {centers.C} centers")

    clamped = int(np.sum(partition.u < config.IFV_CLAMP))
    u = np.maximum(partition.u, config.IFV_CLAMP)
    entropy = (np.log2(c) - np.mean(np.log2(u), axis=0)) ** 2
    terms = np.mean(u ** 2, axis=0) * entropy

    separation = sd_max(centers)
    scatter = sigma_bar(data, centers)
    degenerate_centers = separation == 0
    degenerate_scatter = scatter == 0
    if degenerate_scatter:
        log_warning("VALIDITY", "sigma_bar is 0 (points coincide with all centers); IFV reported as 0")
        value = 0.0
    else:
        value = float(np.mean(terms)) * separation / scatter
    if degenerate_centers:
        log_warning("VALIDITY", "all centers coincide (SD_max = 0); IFV is 0")
    if clamped:
        log_warning("VALIDITY", f"{clamped} zero memberships clamped to {config.IFV_CLAMP}; IFV is clamp-sensitive")

    return IfvReport(
        ifv=value,
        sd_max=separation,
        sigma_bar=scatter,
        per_cluster_terms=[float(t) for t in terms],
        clamped_entries=clamped,
        clamp_sensitive=clamped > 0,
        degenerate_centers=degenerate_centers,
        degenerate_scatter=degenerate_scatter,
    )
