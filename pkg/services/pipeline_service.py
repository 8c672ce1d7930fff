"""
Pipeline Service
Orchestrates load -> context -> weights -> cluster -> validate -> export for a
run configuration, multi-seed method comparisons, and synthetic data export.
"""
import json
import os
import shutil
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

import config
from models.domain import ClusteringResult, ContextVector, Dataset, WeightMatrix
from models.results import ComparisonReport, ContextSummary, IfvReport, MethodStats, RunSummary
from models.run_config import FeatureSpec, RunConfig
from services.cfgwc_service import cfgwc_run
from services.context_service import build_context
from services.dataset_service import generate_synthetic, load_csv, normalize_features, write_csv
from services.errors import ConfigError
from services.export_service import (
    comparison_table,
    emit_geojson,
    write_centers_csv,
    write_json,
    write_memberships_csv,
    write_xlsx,
)
from services.fcm_service import fcm_run
from services.geo_service import read_weights_csv, spatial_weights, write_weights_csv
from services.logger_service import log_info, log_run, log_warning
from services.validity_service import ifv

SUMMARY_FILE = "summary.json"
SYNTHETIC_GEOGRAPHY_WARNING = "synthetic geography: population and/or coordinates defaulted"


@dataclass(frozen=True)
class RunOutcome:
    context: ContextVector
    result: ClusteringResult
    report: IfvReport
    warnings: List[str]
    weights: Optional[WeightMatrix] = None


def _resolve(base: Path, value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    path = Path(value)
    return str(path if path.is_absolute() else base / path)


def load_run_config(path: str) -> RunConfig:
    """Parse and validate a JSON run configuration; relative paths resolve
    against the configuration file's directory."""
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}")
    try:
        cfg = RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}: {e}")

    base = Path(path).resolve().parent
    cfg.data.path = _resolve(base, cfg.data.path)
    cfg.context.path = _resolve(base, cfg.context.path)
    cfg.geo.weights_path = _resolve(base, cfg.geo.weights_path)
    cfg.output.dir = _resolve(base, cfg.output.dir)
    return cfg


def prepare_dataset(cfg: RunConfig) -> Dataset:
    section = cfg.data
    if section.synthetic is not None:
        spec = section.synthetic
        dataset = generate_synthetic(spec.n_areas, spec.n_clusters, spec.feature, spec.geo, seed=spec.seed)
    else:
        dataset = load_csv(section.path, section.data_schema)
    if section.normalize:
        dataset = normalize_features(dataset)
    return dataset


def execute(cfg: RunConfig, dataset: Dataset, seed: int, method: Optional[str] = None) -> RunOutcome:
    """One clustering run; ``method`` overrides the configured context method."""
    clustering = cfg.clustering.model_copy(update={"seed": config.derive_seed(seed, "clustering")})
    section = cfg.context if method is None else cfg.context.model_copy(update={"method": method})
    warnings: List[str] = []
    if dataset.synthetic_geography:
        warnings.append(SYNTHETIC_GEOGRAPHY_WARNING)

    weights = None
    if clustering.algorithm == "fcm":
        if section.method != "none":
            log_warning("PIPELINE", f"algorithm 'fcm' ignores context method '{section.method}'")
        context = ContextVector(f=np.ones(dataset.N), method="none")
        result = fcm_run(dataset, clustering.c, clustering.m, clustering.eps, clustering.max_iter, clustering.seed)
    else:
        context = build_context(section, dataset, cfg.data.context_column, clustering,
                                config.derive_seed(seed, "context"))
        if cfg.geo.weights_path:
            weights = read_weights_csv(cfg.geo.weights_path, dataset.N)
        else:
            weights = spatial_weights(dataset, cfg.geo.metric, clustering.a, clustering.b)
        result = cfgwc_run(dataset, context, weights, clustering)

    clamped = context.metadata.get("clamped", 0)
    if clamped:
        warnings.append(f"context clamp: {clamped} f1 values raised to {config.F1_CLAMP}")
    warnings.extend(result.warnings)
    if not result.converged:
        warnings.append(f"no convergence within max_iter={clustering.max_iter}")

    report = ifv(dataset, result.partition, result.centers)
    if report.clamp_sensitive:
        warnings.append(f"IFV clamp: {report.clamped_entries} zero memberships clamped to {config.IFV_CLAMP}")
    if report.degenerate_centers:
        warnings.append("IFV degenerate: all centers coincide")
    if report.degenerate_scatter:
        warnings.append("IFV degenerate: zero scatter")
    return RunOutcome(context=context, result=result, report=report, warnings=warnings, weights=weights)


def _staging_dir(out_dir: Path) -> Path:
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    return Path(tempfile.mkdtemp(prefix=f".{out_dir.name}-", dir=str(out_dir.parent)))


def _publish(staging: Path, out_dir: Path) -> None:
    if out_dir.exists():
        if not (out_dir / SUMMARY_FILE).exists():
            raise ConfigError(f"Output directory {out_dir} exists and does not hold a previous run")
        shutil.rmtree(out_dir)
    os.replace(staging, out_dir)


def run(config_path: str) -> RunSummary:
    """Full pipeline for one configuration; artifacts appear only on success."""
    started = time.perf_counter()
    cfg = load_run_config(config_path)
    dataset = prepare_dataset(cfg)
    outcome = execute(cfg, dataset, cfg.seed)
    result = outcome.result
    decimals = cfg.output.decimals

    out_dir = Path(cfg.output.dir)
    staging = _staging_dir(out_dir)
    try:
        artifacts = ["memberships.csv", "centers.csv"]
        write_memberships_csv(dataset, result.partition, outcome.context, str(staging / "memberships.csv"), decimals)
        write_centers_csv(result.centers, dataset.feature_names, str(staging / "centers.csv"), decimals)
        if cfg.output.geojson:
            emit_geojson(dataset, result.partition, outcome.context, str(staging / "result.geojson"), decimals)
            artifacts.append("result.geojson")
        if cfg.geo.export_weights and outcome.weights is not None:
            write_weights_csv(outcome.weights, str(staging / "weights.csv"))
            artifacts.append("weights.csv")

        summary = RunSummary(
            config=cfg.model_dump(mode="json", by_alias=True),
            n_points=dataset.N,
            n_features=dataset.r,
            feature_names=dataset.feature_names,
            context=ContextSummary(
                method=outcome.context.method,
                metadata={**outcome.context.metadata, "encodings": dataset.encodings},
            ),
            iterations=result.iterations,
            converged=result.converged,
            final_objective=result.objective,
            max_constraint_violation=result.max_constraint_violation,
            ifv=outcome.report,
            wall_clock_ms=0.0,
            warnings=outcome.warnings,
            artifacts=artifacts + [SUMMARY_FILE],
        )
        if cfg.output.xlsx:
            if write_xlsx(dataset, result.partition, result.centers, outcome.context,
                          summary.model_dump(mode="json"), str(staging / "results.xlsx")):
                summary.artifacts.append("results.xlsx")
        for warning in summary.warnings:
            log_warning("PIPELINE", warning)
        summary.wall_clock_ms = (time.perf_counter() - started) * 1000
        write_json(summary.model_dump_json(indent=2), str(staging / SUMMARY_FILE))
        _publish(staging, out_dir)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise

    log_run("RUN", f"{config_path} -> {out_dir} IFV={outcome.report.ifv:.6f}")
    return summary


def _method_stats(method: str, values: List[float], violations: List[float]) -> MethodStats:
    arr = np.asarray(values, dtype=float)
    return MethodStats(method=method, ifv_values=values, median=float(np.median(arr)),
                       min=float(arr.min()), max=float(arr.max()),
                       max_constraint_violation=float(max(violations)))


def compare(config_path: str, seeds: Optional[int] = None, write: bool = True) -> ComparisonReport:
    """Run every configured context method over paired seeds and summarise IFV."""
    cfg = load_run_config(config_path)
    n_seeds = cfg.compare.seeds if seeds is None else seeds
    if n_seeds < 1:
        raise ConfigError(f"seeds must be >= 1, got {n_seeds}")
    methods = list(dict.fromkeys(cfg.compare.methods))
    if not methods:
        raise ConfigError("compare needs at least one method")

    dataset = prepare_dataset(cfg)
    seed_list = [cfg.seed + i for i in range(n_seeds)]
    values: Dict[Tuple[str, int], float] = {}
    violations: Dict[Tuple[str, int], float] = {}
    warnings: List[str] = []

    with ThreadPoolExecutor(max_workers=max(1, config.MAX_WORKERS)) as executor:
        futures = {
            executor.submit(execute, cfg, dataset, seed, method): (method, seed)
            for method in methods
            for seed in seed_list
        }
        for future in as_completed(futures):
            method, seed = futures[future]
            outcome = future.result()
            values[(method, seed)] = outcome.report.ifv
            violations[(method, seed)] = outcome.result.max_constraint_violation
            if not outcome.result.converged:
                warnings.append(f"{method} seed {seed}: no convergence")

    stats = [
        _method_stats(m, [values[(m, s)] for s in seed_list], [violations[(m, s)] for s in seed_list])
        for m in methods
    ]
    wins = None
    if len(methods) > 1:
        wins = {
            a: {b: sum(values[(a, s)] > values[(b, s)] for s in seed_list) for b in methods if b != a}
            for a in methods
        }
    report = ComparisonReport(seeds=seed_list, methods=stats, pairwise_wins=wins, warnings=sorted(warnings))
    log_info("PIPELINE", "IFV comparison\n" + comparison_table([s.model_dump() for s in stats]))

    if write:
        out_dir = Path(cfg.output.dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".comparison-", suffix=".json", dir=str(out_dir))
        os.close(fd)
        write_json(report.model_dump_json(indent=2), tmp)
        os.replace(tmp, out_dir / "comparison.json")
    log_run("COMPARE", f"{len(methods)} methods x {n_seeds} seeds")
    return report


def synth(n_areas: int, n_clusters: int, output: str, n_features: int = 3, separation: float = 10.0,
          seed: int = 0) -> Dataset:
    """Generate a synthetic dataset and write it as CSV with its blob labels."""
    dataset = generate_synthetic(
        n_areas, n_clusters, FeatureSpec(n_features=n_features, separation=separation), seed=seed
    )
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    write_csv(dataset, output, decimals=None, include_labels=True)
    log_run("SYNTH", f"{n_areas} areas, {n_clusters} blobs -> {output}")
    return dataset
