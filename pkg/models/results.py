"""Pydantic models for reports serialized into run artifacts."""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class IfvReport(BaseModel):
    ifv: float
    sd_max: float
    sigma_bar: float
    per_cluster_terms: List[float]
    clamped_entries: int = 0
    clamp_sensitive: bool = False
    degenerate_centers: bool = False
    degenerate_scatter: bool = False


class ContextSummary(BaseModel):
    method: str
    metadata: Dict[str, Any] = Field(default_factory=dict)


class RunSummary(BaseModel):
    config: Dict[str, Any]
    n_points: int
    n_features: int
    feature_names: List[str]
    context: ContextSummary
    iterations: int
    converged: bool
    final_objective: float
    max_constraint_violation: float
    ifv: IfvReport
    wall_clock_ms: float
    warnings: List[str] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)


class MethodStats(BaseModel):
    method: str
    ifv_values: List[float]
    median: float
    min: float
    max: float
    # largest |sum_j u_kj - f_k| over every run of the method
    max_constraint_violation: float = 0.0


class ComparisonReport(BaseModel):
    seeds: List[int]
    methods: List[MethodStats]
    # wins[a][b]: number of seeds where IFV(a) > IFV(b)
    pairwise_wins: Optional[Dict[str, Dict[str, int]]] = None
    warnings: List[str] = Field(default_factory=list)

    def stats_for(self, method: str) -> MethodStats:
        return next(s for s in self.methods if s.method == method)
