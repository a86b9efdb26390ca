"""CSV tables with a ``#`` comment header recording the run configuration."""
from __future__ import annotations

import logging
from collections.abc import Mapping
from pathlib import Path

import pandas as pd

logger = logging.getLogger(__name__)

# enough digits to round-trip a double
FLOAT_FORMAT = "%.17g"


def _header_value(value: object) -> str:
    if isinstance(value, (tuple, list)):
        return " ".join(_header_value(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_header(items: Mapping[str, object]) -> str:
    return "".join(f"# {key} = {_header_value(value)}\n" for key, value in items.items())


def write_table(directory: str | Path, name: str, frame: pd.DataFrame, header: Mapping[str, object]) -> Path:
    """Write ``frame`` to ``<directory>/<name>.csv`` below the header comments."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.csv"
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(format_header({"table": name, **header}))
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote table", extra={"table": name, "path": str(path), "rows": len(frame)})
    return path


def read_table(path: str | Path) -> tuple[dict[str, str], pd.DataFrame]:
    """Header items and data of a file written by ``write_table``."""
    path = Path(path)
    header: dict[str, str] = {}
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition("=")
            header[key.strip()] = value.strip()
    return header, pd.read_csv(path, comment="#", float_precision="round_trip")


__all__ = ["FLOAT_FORMAT", "format_header", "read_table", "write_table"]
