"""Reading and writing result tables (CSV / Excel) and JSON records."""

import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Any, Optional

import pandas as pd

from config import CSV_FLOAT_FORMAT

TIMESTAMP_FIELD = "generated_at"


def _ensure_parent(output_path: str) -> None:
    output_dir = os.path.dirname(output_path)
    if output_dir and not os.path.exists(output_dir):
        os.makedirs(output_dir)


def load_table(file_path: str) -> pd.DataFrame:
    """
    Load a CSV or Excel table into a pandas DataFrame.

    Args:
        file_path: Path to a .csv or .xlsx file

    Returns:
        DataFrame containing the table

    Raises:
        FileNotFoundError: If the file doesn't exist
        OSError: If the file can't be read
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"Table file not found: {file_path}")

    try:
        if file_path.endswith(".xlsx"):
            return pd.read_excel(file_path, engine='openpyxl')
        return pd.read_csv(file_path)
    except Exception as e:
        raise OSError(f"Failed to read table {file_path}: {e}") from e


def write_table(df: pd.DataFrame, output_path: Optional[str] = None) -> None:
    """
    Write a DataFrame as CSV (17 significant digits) or Excel.

    Args:
        df: DataFrame to save
        output_path: Target file; .xlsx selects Excel, anything else CSV.
            None writes CSV to stdout.

    Raises:
        OSError: If the file can't be saved
    """
    if output_path is None:
        df.to_csv(sys.stdout, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return

    _ensure_parent(output_path)
    try:
        if output_path.endswith(".xlsx"):
            df.to_excel(output_path, engine='openpyxl', index=False)
        else:
            df.to_csv(output_path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except Exception as e:
        raise OSError(f"Failed to save table {output_path}: {e}") from e


def _clean(value: Any) -> Any:
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):  # numpy scalars
        return _clean(value.item())
    return value


def make_record(command: str, config: dict, result: Any) -> dict:
    """JSON record with the command, the echoed config, a timestamp and the result."""
    return {
        "command": command,
        "config": _clean(config),
        TIMESTAMP_FIELD: datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "result": _clean(result),
    }


def dump_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_record(record: dict, output_path: Optional[str] = None) -> None:
    """Write a JSON record to a file or stdout."""
    text = dump_record(record)
    if output_path is None:
        sys.stdout.write(text)
        return
    _ensure_parent(output_path)
    with open(output_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def load_record(file_path: str) -> dict:
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"JSON record not found: {file_path}")
    with open(file_path, encoding="utf-8") as f:
        return json.load(f)


def records_match(first: dict, second: dict) -> bool:
    """True when two records agree on everything except the timestamp."""
    def strip(record: dict) -> dict:
        return {k: v for k, v in record.items() if k != TIMESTAMP_FIELD}

    return strip(first) == strip(second)
