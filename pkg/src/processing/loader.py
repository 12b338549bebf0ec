from typing import Dict

import yaml

from src.processing.lab_config_loader import LabConfigLoader
from src.utils.errors import ConfigError


class Loader:
    """The Loader uses the custom loader 'LabConfigLoader' to load experiment settings from YAML."""

    @staticmethod
    def load_config_data(config_path: str) -> Dict:
        """Parses and loads the data from a YAML configuration file.

        Args:
            config_path (str): Path to a YAML configuration file.

        Returns:
            (dict): The loaded data, as line-tracking mappings.
        """
        try:
            with open(config_path) as file:
                return Loader._parse(file, source=config_path)
        except OSError as error:
            raise ConfigError(f"Cannot read configuration file '{config_path}': {error.strerror}")

    @staticmethod
    def load_config_string(text: str) -> Dict:
        return Loader._parse(text, source="<string>")

    @staticmethod
    def _parse(stream, source: str) -> Dict:
        try:
            config_data = yaml.load(stream, Loader=LabConfigLoader)
        except yaml.MarkedYAMLError as error:
            line = error.problem_mark.line + 1 if error.problem_mark is not None else None
            raise ConfigError(f"Invalid YAML in {source}: {error.problem}", field="<yaml>", line=line)
        if config_data is None:
            raise ConfigError(f"The configuration {source} is empty")
        if not isinstance(config_data, dict):
            raise ConfigError(f"The configuration {source} must be a mapping")
        return config_data
