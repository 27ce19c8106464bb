"""Tests for logging helpers."""

import logging

from atloss.utils.logging import attach_run_log, format_duration, setup_logging


def test_format_duration():
    assert format_duration(5.4) == "00:05"
    assert format_duration(125) == "02:05"
    assert format_duration(3725) == "01:02:05"


def test_run_log_attached_once(tmp_path):
    setup_logging()
    path = attach_run_log(tmp_path)
    attach_run_log(tmp_path)
    file_handlers = [h for h in logging.getLogger().handlers if isinstance(h, logging.FileHandler)]
    assert len(file_handlers) == 1

    logging.getLogger("atloss.test").info("epoch 1 done")
    file_handlers[0].flush()
    assert "epoch 1 done" in path.read_text()
    setup_logging()
