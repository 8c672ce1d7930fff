"""Pydantic models for run configuration files."""
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

import config


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DatasetSchema(_Section):
    """Column roles of a geo-demographic CSV file."""

    id_column: str
    feature_columns: Optional[List[str]] = None
    categorical_columns: Optional[List[str]] = None
    exclude_columns: List[str] = Field(default_factory=list)
    population_column: Optional[str] = None
    coord_columns: Optional[Tuple[str, str]] = None
    coord_system: Literal["planar", "lonlat"] = "planar"

    @classmethod
    def parse_mapping(cls, text: str) -> "DatasetSchema":
        """Parse ``id=Name, population=Pop, coords=X,Y, features=A;B``.

        ``context=...`` is accepted and ignored here (the context column lives
        in the data section).
        """
        values = {}
        pending_key = None
        for token in [t.strip() for t in text.split(",") if t.strip()]:
            if "=" not in token:
                # continuation of a comma-separated value such as coords=X,Y
                if pending_key != "coords":
                    raise ValueError(f"Malformed schema token: '{token}'")
                values["coords"].append(token)
                continue
            key, value = [p.strip() for p in token.split("=", 1)]
            pending_key = key
            values[key] = [value] if key == "coords" else value

        kwargs = {}
        if "id" not in values:
            raise ValueError("Schema mapping must name the id column (id=...)")
        kwargs["id_column"] = values.pop("id")
        if "population" in values:
            kwargs["population_column"] = values.pop("population")
        if "coords" in values:
            coords = values.pop("coords")
            if len(coords) != 2:
                raise ValueError("coords= must name exactly two columns")
            kwargs["coord_columns"] = tuple(coords)
        if "features" in values:
            kwargs["feature_columns"] = [c.strip() for c in values.pop("features").split(";")]
        if "categorical" in values:
            kwargs["categorical_columns"] = [c.strip() for c in values.pop("categorical").split(";")]
        if "exclude" in values:
            kwargs["exclude_columns"] = [c.strip() for c in values.pop("exclude").split(";")]
        if "coord_system" in values:
            kwargs["coord_system"] = values.pop("coord_system")
        values.pop("context", None)
        if values:
            raise ValueError(f"Unknown schema roles: {sorted(values)}")
        return cls(**kwargs)


class FeatureSpec(_Section):
    n_features: int = Field(3, ge=1)
    means: Optional[List[List[float]]] = None  # per cluster, length n_features
    spreads: Optional[List[float]] = None  # per cluster standard deviation
    proportions: Optional[List[float]] = None  # per cluster share of the areas
    separation: float = Field(10.0, gt=0)


class GeoSpec(_Section):
    extent: float = Field(100.0, gt=0)
    region_spread: float = Field(5.0, gt=0)
    population_range: Tuple[float, float] = (100.0, 10000.0)

    @field_validator("population_range")
    @classmethod
    def _positive_range(cls, value):
        low, high = value
        if not 0 < low <= high:
            raise ValueError("population_range must satisfy 0 < low <= high")
        return value


class SyntheticSpec(_Section):
    n_areas: int
    n_clusters: int
    seed: int = 0
    feature: FeatureSpec = Field(default_factory=FeatureSpec)
    geo: GeoSpec = Field(default_factory=GeoSpec)


class DataSection(_Section):
    path: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    data_schema: Optional[DatasetSchema] = Field(None, alias="schema")
    context_column: str
    normalize: bool = False

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @field_validator("data_schema", mode="before")
    @classmethod
    def _schema_from_text(cls, value):
        if isinstance(value, str):
            return DatasetSchema.parse_mapping(value)
        return value

    @model_validator(mode="after")
    def _one_source(self):
        if (self.path is None) == (self.synthetic is None):
            raise ValueError("data section needs exactly one of 'path' or 'synthetic'")
        if self.path is not None and self.data_schema is None:
            raise ValueError("data section with 'path' needs a 'schema'")
        return self


ContextMethod = Literal["f1", "f2", "random", "file", "none"]


class ContextSection(_Section):
    method: ContextMethod = "f1"
    target: Union[Literal["highest", "lowest", "rowmax"], int] = "highest"
    path: Optional[str] = None
    # FCM parameters for f1; None falls back to the clustering section
    m: Optional[float] = Field(None, gt=1)
    eps: Optional[float] = Field(None, gt=0)
    max_iter: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _file_needs_path(self):
        if self.method == "file" and not self.path:
            raise ValueError("context method 'file' needs a 'path'")
        return self


class GeoSection(_Section):
    metric: Literal["euclidean", "haversine"] = "euclidean"
    weights_path: Optional[str] = None
    export_weights: bool = False


class CfgwcConfig(_Section):
    algorithm: Literal["cfgwc", "fcm"] = "cfgwc"
    c: int = Field(3, ge=2)
    m: float = Field(config.DEFAULT_M, gt=1)
    alpha: float = Field(config.DEFAULT_ALPHA, ge=0, le=1)
    beta: float = Field(config.DEFAULT_BETA, ge=0, le=1)
    a: float = config.DEFAULT_GRAVITY_A
    b: float = config.DEFAULT_GRAVITY_B
    eps: float = Field(config.DEFAULT_EPS, gt=0)
    max_iter: int = Field(config.DEFAULT_MAX_ITER, ge=1)
    seed: int = 0

    @model_validator(mode="before")
    @classmethod
    def _complete_mixing(cls, data):
        # Supplying only one of alpha/beta implies the other through alpha + beta = 1
        if isinstance(data, dict):
            if "beta" in data and "alpha" not in data:
                data = {**data, "alpha": 1.0 - float(data["beta"])}
            elif "alpha" in data and "beta" not in data:
                data = {**data, "beta": 1.0 - float(data["alpha"])}
        return data

    @model_validator(mode="after")
    def _mixing_sums_to_one(self):
        if abs(self.alpha + self.beta - 1.0) > config.ALPHA_BETA_TOL:
            raise ValueError(f"alpha + beta must equal 1 (got {self.alpha} + {self.beta})")
        return self


class OutputSection(_Section):
    dir: str = "output"
    geojson: bool = True
    xlsx: bool = False
    decimals: int = Field(config.CSV_DECIMALS, ge=0, le=17)


class CompareSection(_Section):
    methods: List[Literal["f1", "f2", "random"]] = Field(default_factory=lambda: ["f1", "f2", "random"])
    seeds: int = Field(20, ge=1)


class RunConfig(_Section):
    seed: int = 0
    data: DataSection
    context: ContextSection = Field(default_factory=ContextSection)
    geo: GeoSection = Field(default_factory=GeoSection)
    clustering: CfgwcConfig = Field(default_factory=CfgwcConfig)
    output: OutputSection = Field(default_factory=OutputSection)
    compare: CompareSection = Field(default_factory=CompareSection)
