"""Immutable numpy-backed records shared by the clustering services."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


def _frozen(array, dtype=float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    ids: List[str]
    features: np.ndarray  # N x r
    feature_names: List[str]
    coords: np.ndarray  # N x 2
    populations: np.ndarray  # N
    coord_system: str = "planar"
    encodings: Dict[str, Dict[str, float]] = field(default_factory=dict)
    synthetic_population: bool = False
    synthetic_coords: bool = False
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "ids", list(self.ids))
        object.__setattr__(self, "feature_names", list(self.feature_names))
        object.__setattr__(self, "features", _frozen(self.features))
        object.__setattr__(self, "coords", _frozen(self.coords))
        object.__setattr__(self, "populations", _frozen(self.populations))
        if self.labels is not None:
            object.__setattr__(self, "labels", _frozen(self.labels, dtype=int))

    @property
    def N(self) -> int:
        return self.features.shape[0]

    @property
    def r(self) -> int:
        return self.features.shape[1]

    @property
    def synthetic_geography(self) -> bool:
        return self.synthetic_population or self.synthetic_coords


@dataclass(frozen=True)
class ContextSeries:
    values: np.ndarray
    name: str

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))


@dataclass(frozen=True)
class ContextVector:
    f: np.ndarray
    method: str  # f1 | f2 | random | file | none
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "f", _frozen(self.f))

    def __len__(self) -> int:
        return self.f.shape[0]


@dataclass(frozen=True)
class WeightMatrix:
    w: np.ndarray  # N x N, zero diagonal

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w))

    @property
    def N(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class PartitionMatrix:
    u: np.ndarray  # N x C
    row_target: np.ndarray  # N

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u))
        object.__setattr__(self, "row_target", _frozen(self.row_target))

    @property
    def N(self) -> int:
        return self.u.shape[0]

    @property
    def C(self) -> int:
        return self.u.shape[1]

    def row_sum_violation(self) -> float:
        """Largest |sum_j u_kj - row_target_k|."""
        return float(np.max(np.abs(self.u.sum(axis=1) - self.row_target)))


@dataclass(frozen=True)
class Centers:
    v: np.ndarray  # C x r

    def __post_init__(self):
        object.__setattr__(self, "v", _frozen(self.v))

    @property
    def C(self) -> int:
        return self.v.shape[0]


@dataclass(frozen=True)
class ClusteringResult:
    partition: PartitionMatrix
    centers: Centers
    objective_trace: List[float]
    iterations: int
    converged: bool
    max_constraint_violation: float = 0.0
    warnings: List[str] = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")
