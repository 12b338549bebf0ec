import math
import os
from typing import Any, Dict, Hashable, Optional

import yaml

MAPPING_TAGS = ("!RunConfig", "!Well", "!Mix", "!Nonlinearity", "!Solver", "!Outputs")


class TrackedMapping(dict):
    """A dict that remembers the source line of the mapping and of each of its keys (1-based)."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.line: Optional[int] = None
        self.tag: Optional[str] = None
        self.lines: Dict[Hashable, int] = {}

    def line_of(self, key: Hashable) -> Optional[int]:
        return self.lines.get(key, self.line)


class LabConfigLoader(yaml.SafeLoader):
    """Loader with constructors for the laboratory tags (e.g. !RunConfig) and line-tracking mappings."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.add_constructor("tag:yaml.org,2002:map", self._construct_tracked_mapping)
        for tag in MAPPING_TAGS:
            self.add_constructor(tag, self._construct_tracked_mapping)
        self.add_constructor("!sqrt", self._construct_sqrt)
        self.add_constructor("!complex", self._construct_complex)

    @staticmethod
    def _construct_tracked_mapping(loader: yaml.Loader, node: yaml.MappingNode) -> TrackedMapping:
        loader.flatten_mapping(node)
        mapping = TrackedMapping()
        mapping.line = node.start_mark.line + 1
        if node.tag.startswith("!"):
            mapping.tag = node.tag[1:]
        for key_node, value_node in node.value:
            key = loader.construct_object(key_node, deep=True)
            mapping[key] = loader.construct_object(value_node, deep=True)
            mapping.lines[key] = key_node.start_mark.line + 1
        return mapping

    @staticmethod
    def _construct_sqrt(loader: yaml.Loader, node: yaml.ScalarNode) -> float:
        text = loader.construct_scalar(node)
        try:
            value = float(text)
        except ValueError:
            raise yaml.constructor.ConstructorError(
                None, None, f"!sqrt expects a number, got {text!r}", node.start_mark
            )
        if value < 0:
            raise yaml.constructor.ConstructorError(
                None, None, f"!sqrt expects a non-negative number, got {text!r}", node.start_mark
            )
        return math.sqrt(value)

    @staticmethod
    def _construct_complex(loader: yaml.Loader, node: yaml.SequenceNode) -> complex:
        parts = loader.construct_sequence(node, deep=True)
        if len(parts) != 2:
            raise yaml.constructor.ConstructorError(
                None, None, "!complex expects [real, imag]", node.start_mark
            )
        try:
            return complex(float(parts[0]), float(parts[1]))
        except (TypeError, ValueError):
            raise yaml.constructor.ConstructorError(
                None, None, f"!complex expects two numbers, got {parts!r}", node.start_mark
            )


def lab_config_loader_example():
    import pprint

    config_path = os.path.join("example_configs", "figure4.yaml")
    with open(config_path) as file:
        config_data = yaml.load(file, Loader=LabConfigLoader)

    print("* Entire configuration data:")
    pprint.pprint(config_data)

    print("\n* Source lines of the well settings:")
    pprint.pprint(config_data["well"].lines)


if __name__ == "__main__":
    lab_config_loader_example()
