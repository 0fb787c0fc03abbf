"""CSV and JSON emission of measurement records."""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from importlib import metadata
from pathlib import Path
from typing import Iterable, Sequence

from ..elements import MeasureKind, MeasurementRecord
from ..errors import DomainError

CSV_HEADER = "label,time_us,n,population"
POPULATION_FLOOR = 1e-12
NORM_AUDIT_TOL = 1e-8
SIMULATOR_NOTES = [
    "measurements are non-destructive snapshots of the simulated state",
    "readout infidelity, photon-number dependent T1 shortening and hardware confirmation protocols are not modeled",
]


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def fmt(x: float) -> str:
    """Twelve significant digits, always with a decimal point or exponent."""
    s = f"{float(x):.12g}"
    if s in ("nan", "inf", "-inf") or any(c in s for c in ".e"):
        return s
    return s + ".0"


def csv_text(records: Sequence[MeasurementRecord], floor: float = POPULATION_FLOOR) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        if r.kind is not MeasureKind.POPULATIONS or r.populations is None:
            continue
        t = fmt(r.time_cursor)
        for n, p in enumerate(r.populations):
            if p >= floor:
                buf.write(f"{r.label},{t},{n},{fmt(p)}\n")
    return buf.getvalue()


def write_atomic(path, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def emit_csv(records: Sequence[MeasurementRecord], path, floor: float = POPULATION_FLOOR) -> Path:
    if not records:
        raise DomainError("no records to write")
    return write_atomic(path, csv_text(records, floor))


def norm_audit(records: Iterable[MeasurementRecord], unitary: bool = True) -> dict:
    norms = [r.norm for r in records]
    if not norms:
        return {"min": None, "max": None, "max_deviation": None, "within_bounds": True}
    dev = max(abs(n - 1.0) for n in norms)
    return {
        "min": min(norms),
        "max": max(norms),
        "max_deviation": dev,
        "tolerance": NORM_AUDIT_TOL,
        "within_bounds": (dev <= NORM_AUDIT_TOL) if unitary else True,
    }


def _clean(obj):
    """JSON-safe conversion: numpy scalars to float, non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
        if isinstance(obj, complex):
            return _clean(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def record_summary(r: MeasurementRecord) -> dict:
    return {
        "label": r.label,
        "kind": r.kind.value,
        "time_us": r.time_cursor,
        "mean": r.mean,
        "variance": r.variance,
        "norm": r.norm,
    }


def json_text(meta: dict, records: Sequence[MeasurementRecord], unitary: bool = True) -> str:
    doc = {
        "version": package_version(),
        **meta,
        "records": [record_summary(r) for r in records],
        "norm_audit": norm_audit(records, unitary),
        "notes": SIMULATOR_NOTES,
    }
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def emit_json(meta: dict, records: Sequence[MeasurementRecord], path, unitary: bool = True) -> Path:
    return write_atomic(path, json_text(meta, records, unitary))


def read_points_csv(path) -> list[tuple[float, float]]:
    """Two numeric columns; a non-numeric first row is treated as a header."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                if i == 0 or not rows:
                    continue
                raise DomainError(f"{path}: bad row {i + 1}: {line!r}")
    return rows
