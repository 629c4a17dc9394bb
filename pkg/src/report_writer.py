"""
Report writer
Writes experiment tables as CSV and summaries as JSON with byte-stable formatting
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """Shortest round-trip representation; non-finite values as inf, -inf, nan"""
    return repr(float(value))


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def to_jsonable(value: Any) -> Any:
    """Plain JSON value; numpy scalars and arrays are converted and non-finite floats become strings"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_float(value)
    if isinstance(value, Path):
        return value.as_posix()
    return value


class ReportWriter:
    """Writes self-describing CSV tables and JSON documents into one output directory"""

    def __init__(self, out_dir, config_hash: str):
        """
        Initialize the writer

        Args:
            out_dir: Output directory, created if missing
            config_hash: sha256 of the canonical experiment config, embedded in every file
        """
        self.out_dir = Path(out_dir)
        self.config_hash = config_hash
        self.written: List[Path] = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def write_csv(self, name: str, rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None) -> Path:
        """
        Write a table as RFC-4180 CSV with CRLF line ends

        The first column is config_hash; further columns follow `columns` or
        the order in which keys first appear in the rows.

        Args:
            name: File name within the output directory
            rows: Table rows
            columns: Column order

        Returns:
            Path written
        """
        rows = list(rows)
        if columns is None:
            columns = []
            for row in rows:
                columns.extend(k for k in row if k not in columns)
        header = ["config_hash", *columns]
        path = self.out_dir / name
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
                writer.writerow(header)
                for row in rows:
                    writer.writerow([self.config_hash, *(_cell(row.get(c)) for c in columns)])
        except OSError as e:
            raise ReportWriterError(f"cannot write {path}: {e}") from e
        logger.info("wrote %s (%d rows)", path, len(rows))
        self.written.append(path)
        return path

    def write_json(self, name: str, document: Dict[str, Any], columns: Optional[Dict[str, Sequence[str]]] = None) -> Path:
        """
        Write a JSON document with sorted keys, UTF-8 and a trailing newline

        Args:
            name: File name within the output directory
            document: Content
            columns: Column schema of companion CSV files, keyed by file name

        Returns:
            Path written
        """
        doc = dict(document)
        doc["config_hash"] = self.config_hash
        if columns:
            doc["columns"] = {k: list(v) for k, v in columns.items()}
        path = self.out_dir / name
        try:
            text = json.dumps(to_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
        except (TypeError, ValueError) as e:
            raise ReportWriterError(f"{name}: document is not serializable: {e}") from e
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text + "\n")
        except OSError as e:
            raise ReportWriterError(f"cannot write {path}: {e}") from e
        logger.info("wrote %s", path)
        self.written.append(path)
        return path

    def csv_columns(self, path: Path) -> List[str]:
        """Header of a CSV file written by this writer"""
        with open(path, encoding="utf-8", newline="") as f:
            return next(csv.reader(f))


COORDINATES = ("x", "y", "z", "t")


def coordinate_names(n: int) -> List[str]:
    """Column names of the first n coordinates"""
    if not 1 <= n <= len(COORDINATES):
        raise ReportWriterError(f"no coordinate names for dimension {n}")
    return list(COORDINATES[:n])


def boundary_rows(points: np.ndarray) -> List[Dict[str, float]]:
    """Rows (x, y[, z, t]) of boundary samples"""
    names = coordinate_names(points.shape[1])
    return [dict(zip(names, map(float, p))) for p in points]


class ReportWriterError(Exception):
    """Exception raised for errors while writing reports."""
    pass
