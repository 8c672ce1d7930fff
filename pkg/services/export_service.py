"""
Export Service
Writers for run artifacts: memberships/centers CSV, GeoJSON, JSON summaries
and an optional Excel workbook.
"""
import csv
import json
from typing import Any, Dict, List

try:
    from openpyxl import Workbook
    from openpyxl.styles import Font
except ImportError:
    Workbook = None

import config
from models.domain import Centers, ContextVector, Dataset, PartitionMatrix
from services.fcm_service import hard_labels
from services.logger_service import log_artifact, log_warning


def _fmt(value: float, decimals: int) -> str:
    return f"{value:.{decimals}f}"


def membership_rows(dataset: Dataset, partition: PartitionMatrix, context: ContextVector) -> List[List[Any]]:
    labels = hard_labels(partition) + 1
    rows = []
    for k in range(dataset.N):
        rows.append([dataset.ids[k], *partition.u[k].tolist(), float(context.f[k]), int(labels[k])])
    return rows


def write_memberships_csv(dataset: Dataset, partition: PartitionMatrix, context: ContextVector, path: str,
                          decimals: int = config.CSV_DECIMALS) -> None:
    """id, u_1..u_C, f, cluster (1-based argmax)."""
    header = ["id"] + [f"u_{j + 1}" for j in range(partition.C)] + ["f", "cluster"]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in membership_rows(dataset, partition, context):
            pid, *values, cluster = row
            writer.writerow([pid] + [_fmt(v, decimals) for v in values] + [cluster])
    log_artifact(path, f"{dataset.N} rows")


def write_centers_csv(centers: Centers, feature_names: List[str], path: str,
                      decimals: int = config.CSV_DECIMALS) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["cluster"] + list(feature_names))
        for j, center in enumerate(centers.v, start=1):
            writer.writerow([j] + [_fmt(v, decimals) for v in center])
    log_artifact(path, f"{centers.C} centers")


def build_feature_collection(dataset: Dataset, partition: PartitionMatrix, context: ContextVector,
                             decimals: int = config.CSV_DECIMALS) -> Dict[str, Any]:
    """GeoJSON FeatureCollection with one Point per area."""
    labels = hard_labels(partition) + 1
    features = []
    for k in range(dataset.N):
        properties: Dict[str, Any] = {"id": dataset.ids[k], "cluster": int(labels[k])}
        for j in range(partition.C):
            properties[f"membership_{j + 1}"] = round(float(partition.u[k, j]), decimals)
        properties["f"] = round(float(context.f[k]), decimals)
        if dataset.synthetic_coords:
            properties["synthetic_geometry"] = True
        features.append({
            "type": "Feature",
            "geometry": {
                "type": "Point",
                "coordinates": [float(dataset.coords[k, 0]), float(dataset.coords[k, 1])],
            },
            "properties": properties,
        })
    return {"type": "FeatureCollection", "features": features}


def emit_geojson(dataset: Dataset, partition: PartitionMatrix, context: ContextVector, path: str,
                 decimals: int = config.CSV_DECIMALS) -> None:
    collection = build_feature_collection(dataset, partition, context, decimals)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(collection, f, indent=2)
        f.write("\n")
    log_artifact(path, f"{len(collection['features'])} features")


def write_json(payload: str, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(payload)
        f.write("\n")
    log_artifact(path)


def write_xlsx(dataset: Dataset, partition: PartitionMatrix, centers: Centers, context: ContextVector,
               summary: Dict[str, Any], path: str) -> bool:
    """Workbook with Memberships, Centers and Summary sheets."""
    if not Workbook:
        log_warning("EXPORT", "openpyxl not installed. Skipping Excel export.")
        return False

    wb = Workbook()
    bold = Font(bold=True)

    ws_m = wb.active
    ws_m.title = "Memberships"
    ws_m.append(["id"] + [f"u_{j + 1}" for j in range(partition.C)] + ["f", "cluster"])
    for row in membership_rows(dataset, partition, context):
        ws_m.append(row)

    ws_c = wb.create_sheet("Centers")
    ws_c.append(["cluster"] + dataset.feature_names)
    for j, center in enumerate(centers.v, start=1):
        ws_c.append([j] + center.tolist())

    ws_s = wb.create_sheet("Summary")
    ws_s.append(["key", "value"])
    for key, value in summary.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value)
        ws_s.append([key, value])

    for ws in (ws_m, ws_c, ws_s):
        for cell in ws[1]:
            cell.font = bold

    wb.save(path)
    log_artifact(path, "workbook")
    return True


def comparison_table(rows: List[Dict[str, Any]]) -> str:
    """Plain-text table of per-method IFV statistics."""
    lines = [f"{'method':<8} {'median':>12} {'min':>12} {'max':>12}"]
    for row in rows:
        lines.append(
            f"{row['method']:<8} {row['median']:>12.6f} {row['min']:>12.6f} {row['max']:>12.6f}"
        )
    return "\n".join(lines)
