"""JSON Exporter."""

import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Optional

import numpy as np

from atloss.core.models import MetricValue
from atloss.utils.files import atomic_write

logger = logging.getLogger(__name__)


def _jsonable(value: Any) -> Any:
    if isinstance(value, MetricValue):
        return value.to_json()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def export_json(
    records: Iterable[dict], output_path: Path, metadata: Optional[dict] = None
) -> None:
    """
    Exports report records to JSON.

    Args:
        records: Report rows
        output_path: Output JSON file path
        metadata: Additional metadata (optional)
    """
    rows: List[dict] = [_jsonable(r) for r in records]
    output = {
        "metadata": _jsonable(metadata or {}),
        "records": rows,
    }

    with atomic_write(output_path) as f:
        json.dump(output, f, indent=2, ensure_ascii=False)
        f.write("\n")

    logger.info(f"JSON exported: {output_path}")
