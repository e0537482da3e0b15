"""
Result Writers
Atomic CSV, JSON and binary snapshot output for every command.
"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


def encode_value(value: Any) -> Any:
    """Strict-JSON form: numpy scalars unwrapped, non-finite floats as strings"""
    if isinstance(value, dict):
        return {str(k): encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return [encode_value(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def decode_value(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: decode_value(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode_value(v) for v in value]
    if isinstance(value, str) and value in _NONFINITE:
        return _NONFINITE[value]
    return value


def atomic_write_bytes(target: Path, payload: bytes) -> None:
    """Write to a temp file in the target directory, then rename over the target"""
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "wb") as f:
            f.write(payload)
        os.replace(temp_name, target)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise


def csv_text(rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> str:
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k)) for k in columns})
    return buffer.getvalue()


def _csv_cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def read_json(path: Path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return decode_value(json.load(f))


class ResultWriter:
    """Writes one command's outputs into a directory, honoring the configured formats"""

    def __init__(self, out_dir: str, formats: Sequence[str] = ("csv", "json")):
        self.out_dir = Path(out_dir)
        self.formats = tuple(formats)
        self.written: List[Path] = []

    def write_json(self, name: str, payload: Dict[str, Any], force: bool = False) -> Optional[Path]:
        if "json" not in self.formats and not force:
            return None
        document = {"schema_version": SCHEMA_VERSION, **payload}
        text = json.dumps(encode_value(document), indent=2, sort_keys=False, allow_nan=False)
        return self._emit(self.out_dir / f"{name}.json", (text + "\n").encode("utf-8"))

    def write_csv(self, name: str, rows: Sequence[Dict[str, Any]],
                  columns: Optional[List[str]] = None) -> Optional[Path]:
        if "csv" not in self.formats:
            return None
        if not rows:
            logger.warning("no rows to save for %s", name)
            return None
        return self._emit(self.out_dir / f"{name}.csv", csv_text(rows, columns).encode("utf-8"))

    def write_snapshot(self, name: str, values: np.ndarray, sidecar: Dict[str, Any]) -> Path:
        """Little-endian float64 field dump plus a JSON sidecar describing it"""
        data = np.ascontiguousarray(values, dtype="<f8").tobytes()
        path = self._emit(self.out_dir / f"{name}.bin", data)
        self.write_json(name, {"dtype": "float64", "byte_order": "little", **sidecar}, force=True)
        return path

    def _emit(self, path: Path, payload: bytes) -> Path:
        atomic_write_bytes(path, payload)
        self.written.append(path)
        logger.info("saved %s (%d bytes)", path, len(payload))
        return path
