"""Model checkpoint reader."""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from atloss.core.exceptions import InvalidInputError
from atloss.exporters.checkpoint_exporter import (
    CHECKPOINT_HEADER,
    CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
)
from atloss.nn.model import CnnModel

logger = logging.getLogger(__name__)


def read_checkpoint(path: Path) -> tuple[CnnModel, dict]:
    """
    Rebuilds a CnnModel from a checkpoint.

    Returns:
        (model, metadata)
    """
    data = Path(path).read_bytes()
    try:
        magic, version, info_len, count = CHECKPOINT_HEADER.unpack_from(data)
        if magic != CHECKPOINT_MAGIC:
            raise InvalidInputError(f"{path}: not a checkpoint (magic {magic!r})")
        if version != CHECKPOINT_VERSION:
            raise InvalidInputError(f"{path}: unsupported checkpoint version {version}")
        offset = CHECKPOINT_HEADER.size
        info = json.loads(data[offset : offset + info_len].decode("utf-8"))
        offset += info_len

        params: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", data, offset)
            offset += 2
            name = data[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", data, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", data, offset)
            offset += 4 * ndim
            size = int(np.prod(shape)) if ndim else 1
            raw = data[offset : offset + 4 * size]
            if len(raw) != 4 * size:
                raise InvalidInputError(f"{path}: truncated parameter {name}")
            params[name] = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)
            offset += 4 * size
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"{path}: corrupt checkpoint ({e})") from e

    model = CnnModel(**info["model"])
    model.load_parameters(params)
    logger.debug(f"Loaded checkpoint {path} with {count} parameters")
    return model, info.get("metadata", {})
