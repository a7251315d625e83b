"""
Reporting - Deterministic CSV and JSON files for run reports
"""

import csv
import json
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, List, Union

import numpy as np
from loguru import logger

from .exceptions import ReportError

if TYPE_CHECKING:
    from .scenarios import RunReport


def _jsonable(obj: Any) -> Any:
    """Convert enum values and numpy scalars/arrays for JSON serialization"""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return json.dumps(_jsonable(value))
    return str(value)


def report_json(report: "RunReport") -> str:
    """Top-level {schema_version, inputs, outputs, checks}; key order is fixed by the report"""
    return json.dumps(_jsonable(report.to_dict()), indent=2, ensure_ascii=False) + "\n"


def report_columns(report: "RunReport") -> List[str]:
    if report.columns:
        return list(report.columns)
    return list(report.rows[0]) if report.rows else []


def write_csv(report: "RunReport", path: Path) -> Path:
    """Header row plus one row per report row, in the report's column order"""
    columns = report_columns(report)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\r\n")
        writer.writerow(columns)
        for row in report.rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
    return path


def write_json(report: "RunReport", path: Path) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(report_json(report))
    return path


def emit(report: "RunReport", fmt: str, base_path: Union[str, Path]) -> List[Path]:
    """
    Write a report as CSV or JSON next to `base_path` (extension added)

    Args:
        report: the run report
        fmt: "csv" or "json"
        base_path: output path without extension; parent directories are created

    Returns:
        paths written

    Raises:
        ReportError: unknown format or the file cannot be written (message names the path)
    """
    if fmt not in ("csv", "json"):
        raise ReportError(f"unknown report format {fmt!r}")
    path = Path(base_path).with_suffix(f".{fmt}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        written = write_csv(report, path) if fmt == "csv" else write_json(report, path)
    except OSError as e:
        logger.error(f"Failed to write report {path}: {e}")
        raise ReportError(f"cannot write {path}: {e}", str(path))
    logger.info(f"Report written: {written}")
    return [written]
