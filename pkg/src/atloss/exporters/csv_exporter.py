"""CSV reports. Floats are written with repr() so they round-trip exactly."""

import csv
import logging
from pathlib import Path
from typing import Any, Iterable, Sequence

from atloss.core.metrics import MetricRow
from atloss.core.models import MetricValue
from atloss.core.trainer import EpochRecord
from atloss.utils.files import atomic_write

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["threshold", "lead_time", "csi", "hss", "pod", "far", "mae", "psnr", "excluded"]
EPOCH_COLUMNS = ["epoch", "tau", "train_loss", "val_csi", "val_hss", "val_pod", "val_far"]


def format_cell(value: Any) -> str:
    """Text for one CSV cell."""
    if isinstance(value, MetricValue):
        return value.to_csv()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_records(records: Iterable[dict], output_path: Path, columns: Sequence[str]) -> None:
    """
    Writes dict records in the given column order.

    Args:
        records: Rows; missing keys become empty cells.
        output_path: Output CSV file path.
        columns: Header, in order.
    """
    with atomic_write(output_path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow([format_cell(record.get(c)) for c in columns])

    logger.info(f"CSV exported: {output_path}")


def metric_row_record(row: MetricRow) -> dict:
    return {c: getattr(row, c) for c in METRIC_COLUMNS}


def epoch_record(record: EpochRecord) -> dict:
    return {c: getattr(record, c) for c in EPOCH_COLUMNS}


def export_metric_rows(rows: Iterable[MetricRow], output_path: Path) -> None:
    """Verification rows: threshold, lead_time, csi, hss, pod, far, mae, psnr, excluded."""
    export_records((metric_row_record(r) for r in rows), output_path, METRIC_COLUMNS)


def export_epoch_log(log: Iterable[EpochRecord], output_path: Path) -> None:
    """Per-epoch training log; tau is empty for baseline losses."""
    export_records((epoch_record(r) for r in log), output_path, EPOCH_COLUMNS)
