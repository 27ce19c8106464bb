"""Static PNG plots of fields with cells at or above theta outlined."""

import logging
from pathlib import Path

import numpy as np

from atloss.core.exceptions import AtLossError
from atloss.utils.files import atomic_write

logger = logging.getLogger(__name__)


def export_field_plot(
    fields: dict[str, np.ndarray],
    theta: float,
    output_path: Path,
    title: str | None = None,
) -> None:
    """
    One panel per field, sharing a color scale; exceedance cells are contoured.

    Requires the 'plots' extra (matplotlib).
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as e:
        raise AtLossError("plots need matplotlib: pip install 'atloss[plots]'") from e

    vmax = max(float(np.max(v)) for v in fields.values()) or 1.0
    fig, axes = plt.subplots(1, len(fields), figsize=(4 * len(fields), 4), squeeze=False)
    for ax, (label, values) in zip(axes[0], fields.items()):
        image = ax.imshow(values, cmap="Blues", vmin=0.0, vmax=vmax, origin="upper")
        exceed = (values >= theta).astype(float)
        if 0.0 < exceed.mean() < 1.0:
            ax.contour(exceed, levels=[0.5], colors="red", linewidths=0.8)
        ax.set_title(label)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.colorbar(image, ax=axes[0].tolist(), label="mm/h", shrink=0.8)
    if title:
        fig.suptitle(f"{title} (outlined: >= {theta:g} mm/h)")

    with atomic_write(output_path, "wb") as f:
        fig.savefig(f, format="png", dpi=100)
    plt.close(fig)
    logger.info(f"Plot exported: {output_path}")
