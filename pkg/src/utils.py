"""
Utility Functions Module
File output helpers shared by the runner: atomic CSV/JSON writes, Excel
export and number formatting
"""

import json
import logging
import math
import os
import tempfile
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

import config

logger = logging.getLogger(__name__)


def _atomic_write(filepath: str, write) -> str:
    """Write through a temporary file in the target folder, then rename over filepath"""
    directory = os.path.dirname(os.path.abspath(filepath))
    os.makedirs(directory, exist_ok=True)

    handle, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(filepath))
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
            write(stream)
        os.replace(temp_path, filepath)
    except BaseException:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise
    return filepath


def write_csv(frame: pd.DataFrame, filepath: str) -> str:
    """
    Save a DataFrame as CSV with full round-trip precision

    Args:
        frame: Table to write (index is dropped)
        filepath: Destination path

    Returns:
        The path written
    """
    _atomic_write(
        filepath,
        lambda stream: frame.to_csv(
            stream, index=False, float_format=config.CSV_FLOAT_FORMAT, na_rep=""
        ),
    )
    logger.info(f"Saved {len(frame)} rows to {filepath}")
    return filepath


def json_ready(value: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers and non-finite floats for JSON"""
    if isinstance(value, dict):
        return {str(key): json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(item) for item in value]
    if isinstance(value, np.ndarray):
        return json_ready(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


def write_json(data: Dict, filepath: str) -> str:
    """Save a dictionary as sorted, indented JSON"""
    text = json.dumps(json_ready(data), indent=2, sort_keys=True) + "\n"
    _atomic_write(filepath, lambda stream: stream.write(text))
    logger.info(f"Saved {filepath}")
    return filepath


def save_to_excel(
    data: Dict[str, pd.DataFrame],
    filename: str,
    output_dir: str = config.EXPORTS_DIR,
) -> Optional[str]:
    """
    Save multiple DataFrames to Excel with multiple sheets

    Args:
        data: Dictionary mapping sheet_name -> DataFrame
        filename: Output filename
        output_dir: Output directory

    Returns:
        File path, or None if the workbook could not be written
    """
    os.makedirs(output_dir, exist_ok=True)
    filepath = os.path.join(output_dir, filename)

    try:
        with pd.ExcelWriter(filepath, engine="openpyxl") as writer:
            for sheet_name, df in data.items():
                # Excel limits sheet names to 31 characters
                df.to_excel(writer, sheet_name=sheet_name[:31], index=False)

        logger.info(f"Saved Excel file: {filepath}")
        return filepath

    except Exception as e:
        logger.error(f"Error saving Excel file: {e}")
        return None


def format_time(value: float, decimals: int = 4) -> str:
    """Time scale for display; infinite scales read 'unbounded'"""
    if math.isinf(value):
        return "unbounded"
    return f"{value:.{decimals}f}"


def format_probability(value: float, decimals: int = 5) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    return f"{value:.{decimals}f}"


def max_drift(values: pd.Series) -> float:
    """Largest deviation of a series from its first entry"""
    values = values.dropna()
    if values.empty:
        return float("nan")
    return float((values - values.iloc[0]).abs().max())
