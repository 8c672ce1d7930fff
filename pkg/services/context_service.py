"""
Context Service
Generators for the per-point context values f_k in (0, 1]:
  f1     - membership in a chosen cluster of an FCM run on the context attribute
  f2     - sigmoid of a Gaussian of the z-scored context attribute
  random - uniform baseline
  file   - user supplied values
"""
import csv
import math
import os
from typing import Union

import numpy as np

import config
from models.domain import ContextSeries, ContextVector, Dataset
from models.run_config import CfgwcConfig, ContextSection
from services.dataset_service import extract_context
from services.errors import ContextError
from services.fcm_service import fcm_run
from services.logger_service import log_debug, log_info, log_warning

F2_FLOOR = float(np.nextafter(0.5, 1.0))

Target = Union[str, int]


def _select_column(centers: np.ndarray, target: Target, c: int) -> int:
    order = np.argsort(centers, kind="stable")
    if target == "highest":
        return int(order[-1])
    if target == "lowest":
        return int(order[0])
    if isinstance(target, (int, np.integer)) and not isinstance(target, bool):
        if not 0 <= target < c:
            raise ContextError(f"target rank {target} outside 0..{c - 1}")
        return int(order[target])
    raise ContextError(f"Unknown f1 target '{target}' (use highest, lowest, rowmax or a rank)")


def context_f1(series: ContextSeries, c: int, target: Target = "highest", m: float = config.DEFAULT_M,
               eps: float = config.DEFAULT_EPS, max_iter: int = config.DEFAULT_MAX_ITER,
               seed: int = 0) -> ContextVector:
    """
    Cluster the context attribute alone with FCM and take each point's
    membership in the selected context cluster. ``rowmax`` takes each row's
    largest membership instead of a fixed column.
    """
    result = fcm_run(series, c, m=m, eps=eps, max_iter=max_iter, seed=seed)
    u = result.partition.u
    centers = result.centers.v[:, 0]
    if result.partition.row_sum_violation() > config.ROW_SUM_TOL:
        raise ContextError("context FCM partition rows do not sum to 1")

    metadata = {
        "column": series.name,
        "target": target,
        "centers": sorted(float(v) for v in centers),
        "iterations": result.iterations,
        "converged": result.converged,
        # distance evaluations: one per point, cluster and iteration
        "evaluations": result.iterations * u.shape[0] * c,
    }
    if target == "rowmax":
        raw = u.max(axis=1)
    else:
        column = _select_column(centers, target, c)
        raw = u[:, column]
        metadata["cluster_index"] = column
        metadata["center_value"] = float(centers[column])

    f = np.clip(raw, config.F1_CLAMP, 1.0)
    metadata["clamped"] = int(np.sum(raw < config.F1_CLAMP))
    if metadata["clamped"]:
        log_warning("CONTEXT", f"f1: {metadata['clamped']} context values clamped to {config.F1_CLAMP}")
    return ContextVector(f=f, method="f1", metadata=metadata)


def context_f2(series: ContextSeries) -> ContextVector:
    """f_k = 1 / (1 + exp(-exp(-(y_k - mu)^2 / sigma^2))) with the population standard deviation."""
    y = series.values
    if y.shape[0] < 2:
        raise ContextError("f2 needs at least 2 context values")
    mu = float(np.mean(y))
    sigma = float(np.std(y))
    if sigma == 0:
        raise ContextError(f"context column '{series.name}' is constant (sigma = 0)")
    gaussian = np.exp(-((y - mu) / sigma) ** 2)
    # far outliers round to exactly 0.5 once z^2 exceeds ~37
    f = np.maximum(1.0 / (1.0 + np.exp(-gaussian)), F2_FLOOR)
    return ContextVector(
        f=f,
        method="f2",
        metadata={"column": series.name, "mu": mu, "sigma": sigma, "evaluations": int(y.shape[0])},
    )


def context_random(n: int, seed: int) -> ContextVector:
    """Uniform context values on (low, 1]."""
    if n < 2:
        raise ContextError(f"random context needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    f = 1.0 - rng.uniform(0.0, 1.0 - config.RANDOM_CONTEXT_LOW, size=n)
    return ContextVector(f=f, method="random", metadata={"seed": int(seed), "low": config.RANDOM_CONTEXT_LOW})


def context_from_file(path: str) -> ContextVector:
    """One value per line (or a single CSV column, optional header line)."""
    if not os.path.exists(path):
        raise ContextError(f"Context file not found: {path}")
    values = []
    with open(path, "r", encoding="utf-8-sig", newline="") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            cells = [cell.strip() for cell in row if cell.strip()]
            if not cells:
                continue
            if len(cells) > 1:
                raise ContextError(f"Line {line_no}: expected a single value, got {len(cells)}")
            try:
                value = float(cells[0])
            except ValueError:
                if line_no == 1:
                    log_debug("CONTEXT", f"Skipping header '{cells[0]}' in {path}")
                    continue
                raise ContextError(f"Line {line_no}: non-numeric context value '{cells[0]}'")
            if not math.isfinite(value) or not 0 < value <= 1:
                raise ContextError(f"Line {line_no}: context value {cells[0]} outside (0, 1]")
            values.append(value)
    if not values:
        raise ContextError(f"Context file {path} holds no values")
    return ContextVector(f=np.array(values), method="file", metadata={"path": os.path.basename(path)})


def build_context(section: ContextSection, dataset: Dataset, column: str, clustering: CfgwcConfig,
                  seed: int) -> ContextVector:
    """Context vector for a pipeline run, sized and checked against the dataset."""
    if section.method == "f1":
        vector = context_f1(
            extract_context(dataset, column),
            clustering.c,
            target=section.target,
            m=section.m or clustering.m,
            eps=section.eps or clustering.eps,
            max_iter=section.max_iter or clustering.max_iter,
            seed=seed,
        )
    elif section.method == "f2":
        vector = context_f2(extract_context(dataset, column))
    elif section.method == "random":
        vector = context_random(dataset.N, seed)
    elif section.method == "file":
        vector = context_from_file(section.path)
    else:
        vector = ContextVector(f=np.ones(dataset.N), method="none")

    if len(vector) != dataset.N:
        raise ContextError(f"context has {len(vector)} values but the dataset has {dataset.N} points")
    log_info("CONTEXT", f"Context '{vector.method}' built: mean f={float(np.mean(vector.f)):.4f}")
    return vector
