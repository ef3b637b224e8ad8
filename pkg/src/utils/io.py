"""File I/O utilities: atomic writes, JSON and CSV."""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import pandas as pd

logger = logging.getLogger(__name__)


def atomic_write_bytes(path: Union[str, Path], payload: bytes) -> Path:
    """
    Write bytes through a temporary sibling file and rename it into place.

    A failure part-way leaves no file at `path`.

    Args:
        path: Destination file
        payload: Bytes to write

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: Union[str, Path], obj: Any) -> Path:
    """Write an object as indented JSON (keys in insertion order)."""
    path = atomic_write_text(path, json.dumps(obj, indent=2) + "\n")
    logger.info(f"Wrote {path}")
    return path


def read_json(path: Union[str, Path]) -> Any:
    """
    Read a JSON file.

    Raises:
        FileNotFoundError: If file doesn't exist
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return json.loads(path.read_text(encoding="utf-8"))


def write_csv(df: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write a DataFrame as CSV without the index."""
    path = atomic_write_text(path, df.to_csv(index=False))
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    return pd.read_csv(path)
