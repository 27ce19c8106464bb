"""atloss - threshold-aware training loss for precipitation nowcasting."""

__version__ = "0.1.0"
