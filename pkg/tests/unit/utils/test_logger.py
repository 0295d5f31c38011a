import json
import logging
import os
import sys
import tempfile
import unittest
from logging.handlers import RotatingFileHandler
from unittest.mock import patch

from src.utils.logger import (
    RunContext,
    RunIDFilter,
    get_logger,
    get_run_id,
    setup_logging,
    setup_logging_from_env,
)


class TestSetupLogging(unittest.TestCase):
    """Tests for setup_logging function."""

    def setUp(self):
        logging.root.handlers = []
        logging.root.setLevel(logging.WARNING)

    def tearDown(self):
        logging.root.handlers = []

    def test_setup_logging_default_level(self):
        setup_logging()
        self.assertEqual(logging.root.level, logging.INFO)
        handlers = logging.root.handlers
        self.assertEqual(len(handlers), 1)
        self.assertIs(handlers[0].stream, sys.stderr)

    def test_setup_logging_custom_level(self):
        setup_logging(level=logging.DEBUG)
        self.assertEqual(logging.root.level, logging.DEBUG)
        setup_logging(level=logging.WARNING)
        self.assertEqual(logging.root.level, logging.WARNING)
        self.assertEqual(len(logging.root.handlers), 1)

    def test_setup_logging_with_file(self):
        with tempfile.NamedTemporaryFile(mode="w", delete=False, suffix=".log") as tmp_file:
            log_file_path = tmp_file.name

        try:
            setup_logging(log_file=log_file_path)
            file_handlers = [h for h in logging.root.handlers if isinstance(h, RotatingFileHandler)]
            self.assertEqual(len(file_handlers), 1)
            self.assertEqual(file_handlers[0].baseFilename, log_file_path)
            for handler in file_handlers:
                handler.close()
        finally:
            if os.path.exists(log_file_path):
                os.unlink(log_file_path)

    def test_json_format(self):
        setup_logging(json_format=True)
        handler = logging.root.handlers[0]
        record = logging.LogRecord("solver", logging.INFO, __file__, 1, "bracket found", None, None)
        handler.filter(record)
        payload = json.loads(handler.format(record))
        self.assertEqual(payload["message"], "bracket found")
        self.assertEqual(payload["run_id"], "none")
        self.assertEqual(payload["command"], "-")

    def test_from_env(self):
        env = {"REVINT_LOG_LEVEL": "WARNING", "REVINT_LOG_JSON": "0"}
        with patch.dict("os.environ", env, clear=True):
            setup_logging_from_env()
            self.assertEqual(logging.root.level, logging.WARNING)
            setup_logging_from_env("debug")
            self.assertEqual(logging.root.level, logging.DEBUG)
        self.assertEqual(logging.getLogger("src.integrator").level, logging.INFO)
        logging.getLogger("src.integrator").setLevel(logging.NOTSET)

    def test_module_levels(self):
        setup_logging(module_levels={"src.integrator": logging.ERROR})
        self.assertEqual(logging.getLogger("src.integrator").level, logging.ERROR)
        logging.getLogger("src.integrator").setLevel(logging.NOTSET)


class TestRunContext(unittest.TestCase):
    def test_sets_and_resets(self):
        self.assertIsNone(get_run_id())
        with RunContext("abc123"):
            self.assertEqual(get_run_id(), "abc123")
            with RunContext("inner"):
                self.assertEqual(get_run_id(), "inner")
            self.assertEqual(get_run_id(), "abc123")
        self.assertIsNone(get_run_id())

    def test_filter_tags_records(self):
        record = logging.LogRecord("x", logging.INFO, __file__, 1, "msg", None, None)
        with RunContext("run-1", "solve"):
            self.assertTrue(RunIDFilter().filter(record))
        self.assertEqual(record.run_id, "run-1")
        self.assertEqual(record.command, "solve")


def test_get_logger_name():
    assert get_logger("src.cli").name == "src.cli"
