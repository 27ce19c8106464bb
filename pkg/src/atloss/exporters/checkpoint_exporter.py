"""Model checkpoint writer."""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from atloss.nn.model import CnnModel
from atloss.utils.files import atomic_write

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"ATCK"
CHECKPOINT_VERSION = 1
# magic, version, metadata length, parameter count
CHECKPOINT_HEADER = struct.Struct("<4sHII")


def export_checkpoint(model: CnnModel, output_path: Path, metadata: dict | None = None) -> None:
    """
    Writes model parameters in declaration order.

    Layout: header, UTF-8 JSON block (model config + metadata), then per
    parameter: name length (u16), name, ndim (u8), dims (u32 each), and the
    values as little-endian float32.
    """
    params = model.parameters()
    info = json.dumps(
        {"model": model.config(), "metadata": metadata or {}}, sort_keys=True
    ).encode("utf-8")
    with atomic_write(output_path, "wb") as f:
        f.write(CHECKPOINT_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(info), len(params)))
        f.write(info)
        for name, value in params.items():
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", value.ndim))
            f.write(struct.pack(f"<{value.ndim}I", *value.shape))
            f.write(np.ascontiguousarray(value, dtype="<f4").tobytes())

    logger.info(f"Checkpoint exported: {output_path}")
