import json
import math
from typing import Any, Iterable, Optional

from src.structures.run_config import RunConfig


class Dumper:
    """Writes a RunConfig back as tagged YAML; loading the text again gives an equal RunConfig.

    Keys come out in a fixed order and floats in repr form. Each section method takes the nesting level of
    its own key and indents its children one level deeper.
    """

    def __init__(self, run_config: RunConfig, destination_file_path: Optional[str] = None) -> None:
        self.run_config = run_config
        self.destination_file_path = destination_file_path

    def dump(self) -> None:
        if self.destination_file_path is None:
            raise ValueError("The dumper was created without a destination file path.")
        with open(self.destination_file_path, "w") as file:
            file.write(self.to_yaml_string())

    def to_yaml_string(self) -> str:
        return self._get_complete_config_str(level=0)

    def _get_complete_config_str(self, level: int) -> str:
        config = self.run_config
        result = self._indent("!RunConfig", level) + "\n"
        if config.name is not None:
            result += self._indent(f"name: {self._text(config.name)}", level) + "\n"
        result += self._indent(f"scenario: {config.scenario.value}", level) + "\n"
        result += self._get_well_str(level)
        result += self._get_mix_str(level)
        result += self._get_nonlinearity_str(level)
        result += self._get_solver_str(level)
        result += self._get_outputs_str(level)
        result += self._indent(
            f"suppression_threshold: {self._number(config.suppression_threshold)}", level
        ) + "\n"
        return result

    def _get_section_str(self, title: str, tag: str, entries: Iterable, level: int) -> str:
        result = self._indent(f"{title}: !{tag}", level) + "\n"
        for key, value in entries:
            result += self._indent(f"{key}: {value}", level + 1) + "\n"
        return result

    def _get_well_str(self, level: int) -> str:
        well = self.run_config.well
        entries = [(key, self._number(getattr(well, key))) for key in ("a", "gamma1", "gamma2")]
        return self._get_section_str("well", "Well", entries, level)

    def _get_mix_str(self, level: int) -> str:
        entries = [
            ("alpha", self._coefficient(self.run_config.mix_alpha)),
            ("beta", self._coefficient(self.run_config.mix_beta)),
        ]
        return self._get_section_str("mix", "Mix", entries, level)

    def _get_nonlinearity_str(self, level: int) -> str:
        nonlinearity = self.run_config.nonlinearity
        entries = [
            ("initial_strength", self._number(nonlinearity.initial_strength)),
            ("sigma", self._number(nonlinearity.sigma)),
        ]
        return self._get_section_str("nonlinearity", "Nonlinearity", entries, level)

    def _get_solver_str(self, level: int) -> str:
        solver = self.run_config.solver
        entries = [
            (key, self._number(getattr(solver, key)))
            for key in ("dt", "t_final", "dt_per_period", "periods", "fixed_point_tol")
        ]
        entries.append(("max_inner_iter", str(solver.max_inner_iter)))
        entries.append(("blowup_threshold", self._number(solver.blowup_threshold)))
        return self._get_section_str("solver", "Solver", entries, level)

    def _get_outputs_str(self, level: int) -> str:
        outputs = self.run_config.outputs
        periods = ", ".join(self._number(p) for p in outputs.snapshot_periods)
        entries = [
            ("directory", self._text(outputs.directory)),
            ("snapshots", self._flag(outputs.snapshots)),
            ("snapshot_periods", f"[{periods}]"),
            ("figures", self._flag(outputs.figures)),
        ]
        return self._get_section_str("outputs", "Outputs", entries, level)

    @staticmethod
    def _number(value: Optional[float]) -> str:
        """A YAML 1.1 float that reads back to the same double."""
        if value is None:
            return "null"
        value = float(value)
        if math.isnan(value):
            return ".nan"
        if math.isinf(value):
            return ".inf" if value > 0 else "-.inf"
        text = repr(value)
        if "e" in text:
            mantissa, exponent = text.split("e")
            if "." not in mantissa:
                mantissa += ".0"
            if exponent[0] not in "+-":
                exponent = "+" + exponent
            text = f"{mantissa}e{exponent}"
        return text

    @classmethod
    def _coefficient(cls, value: Any) -> str:
        value = complex(value)
        if value.imag == 0:
            return cls._number(value.real)
        return f"!complex [{cls._number(value.real)}, {cls._number(value.imag)}]"

    @staticmethod
    def _text(value: str) -> str:
        return json.dumps(value)

    @staticmethod
    def _flag(value: bool) -> str:
        return "true" if value else "false"

    @staticmethod
    def _indent(element: str, level: int) -> str:
        return "  " * level + element


def dumper_example() -> None:
    from src.processing.loader import Loader
    from src.processing.preprocessor import Preprocessor

    preprocessor = Preprocessor.from_presets_file()
    run_config = preprocessor.create_run_config(preset="figure4")
    print(Dumper(run_config).to_yaml_string())

    destination_path = "example_configs/auto_canonical_figure4.yaml"
    Dumper(run_config, destination_path).dump()
    reloaded = preprocessor.create_run_config(Loader.load_config_data(destination_path))
    print(f"* Round trip equal: {reloaded == run_config}")


if __name__ == "__main__":
    dumper_example()
