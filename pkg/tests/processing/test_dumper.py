import os
import tempfile
import unittest

from src.processing.dumper import *
from src.processing.loader import Loader
from src.processing.preprocessor import Preprocessor

# Run in terminal to get per test breakdown: python -m unittest -v tests/processing/test_dumper.py


class TestDumper(unittest.TestCase):
    def setUp(self):
        self.preprocessor = Preprocessor.from_presets_file()

    def _reload(self, text):
        return self.preprocessor.create_run_config(Loader.load_config_string(text))

    def test_to_yaml_string_reloads_to_an_equal_configuration(self):
        for preset in ("figure4", "figure5_sigma03", "linear_asymmetric", "blowup_sigma12"):
            run_config = self.preprocessor.create_run_config(preset=preset)
            self.assertEqual(self._reload(Dumper(run_config).to_yaml_string()), run_config, preset)

    def test_to_yaml_string_of_a_complex_coefficient(self):
        raw = Loader.load_config_data("example_configs/linear_asymmetric.yaml")
        run_config = self.preprocessor.create_run_config(raw)
        text = Dumper(run_config).to_yaml_string()
        self.assertIn("beta: !complex [0.0, 0.7071067811865476]", text)
        self.assertEqual(self._reload(text), run_config)

    def test_to_yaml_string_is_canonical(self):
        run_config = self.preprocessor.create_run_config(preset="figure3")
        text = Dumper(run_config).to_yaml_string()
        self.assertTrue(text.startswith("!RunConfig\nname: \"figure3\"\nscenario: linear_symmetric\n"))
        self.assertEqual(Dumper(self._reload(text)).to_yaml_string(), text)

    def test_number_formatting(self):
        self.assertEqual(Dumper._number(None), "null")
        self.assertEqual(Dumper._number(0.5), "0.5")
        self.assertEqual(Dumper._number(1e6), "1000000.0")
        self.assertEqual(Dumper._number(1e-10), "1.0e-10")
        self.assertEqual(Dumper._number(1e20), "1.0e+20")
        self.assertEqual(Dumper._number(float("inf")), ".inf")

    def test_dump_writes_the_destination_file(self):
        run_config = self.preprocessor.create_run_config(preset="figure4")
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "canonical.yaml")
            Dumper(run_config, path).dump()
            reloaded = self.preprocessor.create_run_config(Loader.load_config_data(path))
        self.assertEqual(reloaded, run_config)

    def test_dump_when_there_is_no_destination(self):
        run_config = self.preprocessor.create_run_config(preset="figure4")
        with self.assertRaises(ValueError):
            Dumper(run_config).dump()


if __name__ == "__main__":
    unittest.main()
