"""Tests for console formatting and the shared logger."""

import logging
import os
import sys
import unittest

import pandas as pd

# Add parent directory to path so we can import modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from utils.formatting import format_header, format_table
from utils.logger import LOG_FORMAT, logger, setup_logger


class TestFormatting(unittest.TestCase):

    def test_header_with_subtitle(self):
        lines = format_header("Fit", "n=400, p=40", width=20).split("\n")
        self.assertEqual(lines[1], "=" * 20)
        self.assertEqual(lines[2].strip(), "Fit")
        self.assertEqual(lines[3].strip(), "n=400, p=40")
        self.assertEqual(lines[4], "=" * 20)

    def test_header_without_subtitle(self):
        lines = format_header("Frontier", width=30).split("\n")
        self.assertEqual(len(lines), 5)
        self.assertEqual(len(lines[2]), 30)

    def test_table_elides_long_frames(self):
        text = format_table(pd.DataFrame({"x": range(100)}), max_rows=10)
        self.assertLess(len(text.splitlines()), 20)


class TestLogger(unittest.TestCase):

    def test_single_stderr_handler(self):
        self.assertIs(setup_logger("hdlogit"), logger)
        self.assertEqual(len(logger.handlers), 1)
        handler = logger.handlers[0]
        self.assertIsInstance(handler, logging.StreamHandler)
        self.assertIsNot(handler.stream, sys.stdout)
        self.assertFalse(logger.propagate)

    def test_format_names_the_process(self):
        self.assertIn("%(processName)s", LOG_FORMAT)
        record = logging.LogRecord("hdlogit", logging.INFO, __file__, 1, "fit done", None, None)
        line = logger.handlers[0].formatter.format(record)
        self.assertTrue(line.startswith("[INFO]"))
        self.assertIn("MainProcess - fit done", line)


if __name__ == '__main__':
    unittest.main()
