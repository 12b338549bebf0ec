import logging
import math
import os
import tempfile
import unittest

from src.utils.errors import ConfigError, DegeneratePairError, NoBeatingError
from src.utils.utils import *

# Run in terminal to get per test breakdown: python -m unittest -v tests/utils/test_utils.py


class TestUtils(unittest.TestCase):
    def test_format_number_keeps_every_digit(self):
        self.assertEqual(format_number(0.1), "0.10000000000000001")
        self.assertEqual(float(format_number(math.pi)), math.pi)
        self.assertEqual(format_number(2.0), "2")
        self.assertEqual(format_number(math.inf), "inf")

    def test_format_row(self):
        self.assertEqual(format_row([None, True, 3, "ok", 0.5]), ["", "True", "3", "ok", "0.5"])

    def test_create_directory_if_not_exists(self):
        with tempfile.TemporaryDirectory() as directory:
            nested = os.path.join(directory, "a", "b")
            create_directory_if_not_exists(nested)
            self.assertTrue(os.path.isdir(nested))
            create_directory_if_not_exists(nested)
            self.assertTrue(os.path.isdir(nested))

    def test_configure_logging_levels(self):
        for verbosity, level in ((-1, logging.WARNING), (0, logging.INFO), (2, logging.DEBUG)):
            configure_logging(verbosity)
            self.assertEqual(logging.getLogger().level, level)
        configure_logging(-1)


class TestErrors(unittest.TestCase):
    def test_config_error_message_names_field_and_line(self):
        self.assertEqual(str(ConfigError("Bad value", field="well.a", line=4)), "Bad value [field 'well.a', line 4]")
        self.assertEqual(str(ConfigError("Bad value", field="mix")), "Bad value [field 'mix']")
        self.assertEqual(str(ConfigError("Bad value")), "Bad value")

    def test_no_beating_error_carries_an_infinite_period(self):
        self.assertEqual(NoBeatingError("flat").period, math.inf)

    def test_degenerate_pair_error_carries_the_midpoint(self):
        error = DegeneratePairError("too close", midpoint=1e4, delta_upper_bound=1e-12)
        self.assertEqual(error.bracket, (1e4, 1e4))
        self.assertEqual(error.delta_upper_bound, 1e-12)


if __name__ == "__main__":
    unittest.main()
