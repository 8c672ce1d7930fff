"""
Dataset Service
Loads geo-demographic tables, encodes categorical attributes and generates
synthetic benchmark datasets.
"""
import csv
import math
import os
from typing import Dict, List, Optional, Sequence

import numpy as np

import config
from models.domain import ContextSeries, Dataset
from models.run_config import DatasetSchema, FeatureSpec, GeoSpec
from services.errors import DatasetError
from services.logger_service import log_info, log_warning


def categorical_mapping(values: Sequence[str]) -> Dict[str, float]:
    """Distinct strings mapped to 1.0, 2.0, ... in order of first appearance."""
    mapping: Dict[str, float] = {}
    for value in values:
        if value not in mapping:
            mapping[value] = float(len(mapping) + 1)
    return mapping


def encode_categoricals(values: Sequence[str]) -> np.ndarray:
    """Ordinal first-appearance coding of a categorical column."""
    if len(values) == 0:
        raise DatasetError("Cannot encode an empty categorical column")
    mapping = categorical_mapping(values)
    return np.array([mapping[v] for v in values], dtype=float)


def _parse_number(cell: str) -> Optional[float]:
    try:
        value = float(cell)
    except ValueError:
        return None
    return value


def grid_coordinates(n: int) -> np.ndarray:
    """Unit-grid positions by row index, filled row by row."""
    side = max(1, math.ceil(math.sqrt(n)))
    idx = np.arange(n)
    return np.column_stack([idx % side, idx // side]).astype(float)


def _read_rows(path: str):
    if not os.path.exists(path):
        raise DatasetError(f"Data file not found: {path}")
    with open(path, "r", encoding="utf-8-sig", newline="") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"Data file is empty: {path}")
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    if len(set(header)) != len(header):
        raise DatasetError(f"Duplicate column names in header of {path}")
    for idx, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DatasetError(
                f"Row {idx} has {len(row)} cells but the header has {len(header)} columns"
            )
    return header, rows


def _resolve_roles(header: List[str], schema: DatasetSchema) -> List[str]:
    required = [schema.id_column]
    if schema.population_column:
        required.append(schema.population_column)
    if schema.coord_columns:
        required.extend(schema.coord_columns)
    for name in required + list(schema.feature_columns or []) + list(schema.exclude_columns):
        if name not in header:
            raise DatasetError(f"Column '{name}' not found in header {header}")

    if schema.feature_columns:
        features = list(schema.feature_columns)
    else:
        claimed = set(required) | set(schema.exclude_columns)
        features = [h for h in header if h not in claimed]
    if not features:
        raise DatasetError("Schema leaves no feature columns")
    return features


def _column(rows, header, name: str) -> List[str]:
    col = header.index(name)
    values = []
    for idx, row in enumerate(rows, start=1):
        cell = row[col].strip()
        if cell == "":
            raise DatasetError(f"Missing value at row {idx}, column '{name}'")
        values.append(cell)
    return values


def _numeric_column(values: List[str], name: str) -> np.ndarray:
    out = np.empty(len(values), dtype=float)
    for idx, cell in enumerate(values, start=1):
        number = _parse_number(cell)
        if number is None:
            raise DatasetError(f"Unparseable value '{cell}' at row {idx}, column '{name}'")
        if not math.isfinite(number):
            raise DatasetError(f"Non-finite value '{cell}' at row {idx}, column '{name}'")
        out[idx - 1] = number
    return out


def load_csv(path: str, schema: DatasetSchema) -> Dataset:
    """
    Load a geo-demographic CSV into a Dataset.
    Categorical feature columns are encoded by first appearance; missing
    cells are rejected with their row and column.
    """
    header, rows = _read_rows(path)
    feature_names = _resolve_roles(header, schema)

    if len(rows) < 2:
        raise DatasetError(f"Dataset needs at least 2 rows (N >= 2), found {len(rows)}")

    ids = _column(rows, header, schema.id_column)
    seen = set()
    for idx, pid in enumerate(ids, start=1):
        if pid in seen:
            raise DatasetError(f"Duplicate id '{pid}' at row {idx}")
        seen.add(pid)

    explicit_categoricals = set(schema.categorical_columns or [])
    encodings: Dict[str, Dict[str, float]] = {}
    columns = []
    for name in feature_names:
        values = _column(rows, header, name)
        parsed = [_parse_number(v) for v in values]
        is_categorical = name in explicit_categoricals or all(p is None for p in parsed)
        if is_categorical:
            encodings[name] = categorical_mapping(values)
            columns.append(encode_categoricals(values))
            log_info("DATASET", f"Encoded categorical column '{name}': {encodings[name]}")
        else:
            columns.append(_numeric_column(values, name))
    features = np.column_stack(columns)

    synthetic_population = schema.population_column is None
    if synthetic_population:
        populations = np.ones(len(rows))
    else:
        populations = _numeric_column(_column(rows, header, schema.population_column), schema.population_column)
        bad = np.flatnonzero(populations <= 0)
        if bad.size:
            raise DatasetError(
                f"Population must be positive: row {bad[0] + 1}, column '{schema.population_column}'"
            )

    synthetic_coords = schema.coord_columns is None
    if synthetic_coords:
        coords = grid_coordinates(len(rows))
    else:
        coords = np.column_stack([_numeric_column(_column(rows, header, c), c) for c in schema.coord_columns])

    if synthetic_population or synthetic_coords:
        log_warning(
            "DATASET",
            "Geography defaulted (population=1.0 and/or unit-grid coordinates by row index)",
        )

    dataset = Dataset(
        ids=ids,
        features=features,
        feature_names=feature_names,
        coords=coords,
        populations=populations,
        coord_system=schema.coord_system,
        encodings=encodings,
        synthetic_population=synthetic_population,
        synthetic_coords=synthetic_coords,
    )
    log_info("DATASET", f"Loaded {path}: N={dataset.N}, r={dataset.r}")
    return dataset


def write_csv(dataset: Dataset, path: str, decimals: Optional[int] = config.CSV_DECIMALS,
              include_labels: bool = False) -> None:
    """Write a Dataset as CSV (id, features, population, x, y[, blob]).

    ``decimals=None`` writes full round-trip precision.
    """
    def fmt(value: float) -> str:
        return repr(float(value)) if decimals is None else f"{value:.{decimals}f}"

    header = ["id"] + dataset.feature_names + ["population", "x", "y"]
    labels = dataset.labels if include_labels else None
    if labels is not None:
        header.append("blob")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for k in range(dataset.N):
            row = [dataset.ids[k]]
            row += [fmt(v) for v in dataset.features[k]]
            row += [fmt(dataset.populations[k]), fmt(dataset.coords[k, 0]), fmt(dataset.coords[k, 1])]
            if labels is not None:
                row.append(str(int(labels[k])))
            writer.writerow(row)


def written_schema(include_labels: bool = False) -> DatasetSchema:
    """Schema matching the layout produced by write_csv."""
    return DatasetSchema(
        id_column="id",
        population_column="population",
        coord_columns=("x", "y"),
        exclude_columns=["blob"] if include_labels else [],
    )


def extract_context(dataset: Dataset, column: str) -> ContextSeries:
    """Raw values of one feature column, in dataset row order."""
    if column not in dataset.feature_names:
        raise DatasetError(f"Unknown context column '{column}'; features are {dataset.feature_names}")
    values = dataset.features[:, dataset.feature_names.index(column)]
    return ContextSeries(values=values, name=column)


def normalize_features(dataset: Dataset) -> Dataset:
    """Min-max scale every feature into [0, 1]; constant columns become 0."""
    low = dataset.features.min(axis=0)
    span = dataset.features.max(axis=0) - low
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (dataset.features - low) / safe, 0.0)
    return Dataset(
        ids=dataset.ids,
        features=scaled,
        feature_names=dataset.feature_names,
        coords=dataset.coords,
        populations=dataset.populations,
        coord_system=dataset.coord_system,
        encodings=dataset.encodings,
        synthetic_population=dataset.synthetic_population,
        synthetic_coords=dataset.synthetic_coords,
        labels=dataset.labels,
    )


def _cluster_sizes(n_areas: int, proportions: np.ndarray) -> np.ndarray:
    raw = proportions / proportions.sum() * n_areas
    sizes = np.floor(raw).astype(int)
    remainder = n_areas - sizes.sum()
    for j in np.argsort(-(raw - sizes), kind="stable")[:remainder]:
        sizes[j] += 1
    # every blob keeps at least one area
    for j in np.flatnonzero(sizes == 0):
        donor = int(np.argmax(sizes))
        sizes[donor] -= 1
        sizes[j] += 1
    return sizes


def generate_synthetic(n_areas: int, n_clusters: int, feature_spec: Optional[FeatureSpec] = None,
                       geo_spec: Optional[GeoSpec] = None, seed: int = 0) -> Dataset:
    """
    Draw n_areas points from n_clusters Gaussian feature blobs, each blob
    placed in its own geographic region so spatial proximity follows
    feature similarity.
    """
    if n_clusters < 2:
        raise DatasetError(f"n_clusters must be >= 2, got {n_clusters}")
    if n_areas < n_clusters:
        raise DatasetError(f"n_areas ({n_areas}) must be >= n_clusters ({n_clusters})")
    feature_spec = feature_spec or FeatureSpec()
    geo_spec = geo_spec or GeoSpec()
    r = feature_spec.n_features
    rng = np.random.default_rng(seed)

    if feature_spec.means is not None:
        means = np.asarray(feature_spec.means, dtype=float)
        if means.shape != (n_clusters, r):
            raise DatasetError(f"feature means must be {n_clusters}x{r}, got {means.shape}")
    else:
        j, d = np.meshgrid(np.arange(n_clusters), np.arange(r), indexing="ij")
        means = feature_spec.separation * ((j + d) % n_clusters)
    spreads = np.asarray(feature_spec.spreads or [1.0] * n_clusters, dtype=float)
    proportions = np.asarray(feature_spec.proportions or [1.0] * n_clusters, dtype=float)
    if spreads.shape != (n_clusters,) or np.any(spreads < 0):
        raise DatasetError("feature spreads must be one non-negative value per cluster")
    if proportions.shape != (n_clusters,) or np.any(proportions <= 0):
        raise DatasetError("cluster proportions must be one positive value per cluster")

    sizes = _cluster_sizes(n_areas, proportions)
    labels = rng.permutation(np.repeat(np.arange(n_clusters), sizes))
    features = means[labels] + rng.normal(size=(n_areas, r)) * spreads[labels][:, None]

    angles = 2 * np.pi * np.arange(n_clusters) / n_clusters
    middle = geo_spec.extent / 2
    regions = np.column_stack([middle + geo_spec.extent / 3 * np.cos(angles),
                               middle + geo_spec.extent / 3 * np.sin(angles)])
    coords = regions[labels] + rng.normal(scale=geo_spec.region_spread, size=(n_areas, 2))

    low, high = geo_spec.population_range
    populations = rng.uniform(low, high, size=n_areas)

    width = len(str(n_areas))
    return Dataset(
        ids=[f"A{k:0{width}d}" for k in range(n_areas)],
        features=features,
        feature_names=[f"attr{d + 1}" for d in range(r)],
        coords=coords,
        populations=populations,
        labels=labels,
    )
