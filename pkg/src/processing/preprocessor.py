import logging
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from src.processing.lab_config_loader import TrackedMapping
from src.processing.loader import Loader
from src.structures.run_config import (
    NonlinearSetup,
    OutputOptions,
    RunConfig,
    Scenario,
    SolverSettings,
)
from src.structures.well_config import WellConfig
from src.utils.errors import ConfigError, DomainError

log = logging.getLogger(__name__)

_MISSING = object()


class Preprocessor:
    """The Preprocessor turns raw YAML data, a named preset and command-line overrides into a RunConfig.

    Note:
        - Sources are merged in the order preset, file, overrides; nested sections merge key by key.
        - Overrides use dotted keys, e.g. {"nonlinearity.sigma": 0.7, "well.a": 4.0, "mix": (a, b)}.
        - Validation errors carry the field path and, when it came from a file, the line.
    """

    PRESETS_FILE_PATH = "src/definitions/scenario_presets.yaml"

    DEFAULT_DT_PER_PERIOD = 2000
    DEFAULT_PERIODS = 6
    DEFAULT_FIXED_POINT_TOL = 1e-10
    DEFAULT_MAX_INNER_ITER = 200
    DEFAULT_BLOWUP_THRESHOLD = 1e6
    DEFAULT_SUPPRESSION_THRESHOLD = 0.5
    DEFAULT_OUTPUT_DIRECTORY = "results"
    DEFAULT_SNAPSHOT_PERIODS = (0.0, 0.25, 0.5)

    TOP_LEVEL_KEYS = (
        "preset",
        "name",
        "scenario",
        "well",
        "mix",
        "nonlinearity",
        "solver",
        "outputs",
        "suppression_threshold",
    )
    SECTION_KEYS = {
        "well": ("a", "gamma1", "gamma2"),
        "mix": ("alpha", "beta"),
        "nonlinearity": ("initial_strength", "sigma"),
        "solver": (
            "dt",
            "t_final",
            "dt_per_period",
            "periods",
            "fixed_point_tol",
            "max_inner_iter",
            "blowup_threshold",
        ),
        "outputs": ("directory", "snapshots", "snapshot_periods", "figures"),
    }

    def __init__(self, presets: Optional[Mapping[str, Mapping]] = None) -> None:
        self.presets = dict(presets or {})

    @classmethod
    def from_presets_file(cls, presets_path: Optional[str] = None) -> "Preprocessor":
        return cls(Loader.load_config_data(presets_path or cls.PRESETS_FILE_PATH))

    @property
    def preset_names(self) -> Tuple[str, ...]:
        return tuple(self.presets.keys())

    def create_run_config(
        self,
        raw: Optional[Mapping] = None,
        preset: Optional[str] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> RunConfig:
        """Merges the sources and validates the result.

        Args:
            raw (dict or None): Data loaded from a configuration file.
            preset (str or None): Name of a preset; a 'preset' key inside raw is used when None.
            overrides (dict or None): Dotted-key overrides from the command line.

        Returns:
            (RunConfig): The validated configuration.
        """
        raw = raw if raw is not None else TrackedMapping()
        preset = preset if preset is not None else raw.get("preset")
        merged = TrackedMapping()
        if preset is not None:
            if preset not in self.presets:
                raise ConfigError(
                    f"Unknown preset '{preset}'; known presets: {', '.join(self.preset_names)}",
                    field="preset",
                    line=self._line_of(raw, "preset"),
                )
            merged = self._merge(merged, self.presets[preset], keep_lines=False)
            if merged.get("name") is None:
                merged["name"] = preset
        merged = self._merge(merged, {k: v for k, v in raw.items() if k != "preset"}, source=raw)
        for path, value in (overrides or {}).items():
            self._apply_override(merged, path, value)
        run_config = self._build(merged)
        log.debug(f"Built run configuration '{run_config.name}' ({run_config.scenario.value})")
        return run_config

    @classmethod
    def _merge(
        cls,
        base: Mapping,
        update: Mapping,
        keep_lines: bool = True,
        source: Optional[Mapping] = None,
    ) -> TrackedMapping:
        source = source if source is not None else update
        result = TrackedMapping(base)
        if isinstance(base, TrackedMapping):
            result.lines.update(base.lines)
            result.line = base.line
        if keep_lines and isinstance(source, TrackedMapping):
            result.line = source.line
        for key, value in update.items():
            current = result.get(key)
            if isinstance(value, Mapping) and isinstance(current, Mapping):
                result[key] = cls._merge(current, value, keep_lines=keep_lines)
            elif isinstance(value, Mapping):
                result[key] = cls._merge(TrackedMapping(), value, keep_lines=keep_lines)
            else:
                result[key] = value
            line = source.lines.get(key) if keep_lines and isinstance(source, TrackedMapping) else None
            if line is not None:
                result.lines[key] = line
            else:
                result.lines.pop(key, None)
        return result

    @staticmethod
    def _apply_override(merged: TrackedMapping, path: str, value: Any) -> None:
        *sections, key = path.split(".")
        target = merged
        for section in sections:
            nested = target.get(section)
            if not isinstance(nested, Mapping):
                nested = TrackedMapping()
                target[section] = nested
            target = nested
        target[key] = value
        if isinstance(target, TrackedMapping):
            target.lines.pop(key, None)

    @staticmethod
    def _line_of(mapping: Any, key: str) -> Optional[int]:
        if isinstance(mapping, TrackedMapping):
            return mapping.line_of(key)
        return None

    def _line_of_field(self, merged: Mapping, field: Optional[str]) -> Optional[int]:
        if field is None:
            return None
        mapping, line = merged, None
        for part in field.split("."):
            if not isinstance(mapping, Mapping):
                break
            line = self._line_of(mapping, part) or line
            mapping = mapping.get(part)
        return line

    def _check_keys(self, mapping: Mapping, allowed: Iterable[str], prefix: str) -> None:
        for key in mapping:
            if key not in allowed:
                field = f"{prefix}{key}"
                raise ConfigError(
                    f"Unknown setting '{field}'", field=field, line=self._line_of(mapping, key)
                )

    def _section(self, merged: Mapping, name: str, required: bool = False) -> Mapping:
        section = merged.get(name)
        if section is None:
            if required:
                raise ConfigError(f"Missing section '{name}'", field=name, line=self._line_of(merged, name))
            return TrackedMapping()
        if name == "mix" and isinstance(section, (list, tuple)):
            if len(section) != 2:
                raise ConfigError("The mix needs exactly two coefficients", field="mix")
            return TrackedMapping(alpha=section[0], beta=section[1])
        if not isinstance(section, Mapping):
            raise ConfigError(
                f"Section '{name}' must be a mapping", field=name, line=self._line_of(merged, name)
            )
        self._check_keys(section, self.SECTION_KEYS[name], f"{name}.")
        return section

    def _number(self, mapping: Mapping, key: str, field: str, default: Any = _MISSING) -> Optional[float]:
        value = mapping.get(key, _MISSING)
        if value is _MISSING or value is None:
            if default is _MISSING:
                raise ConfigError(f"Missing setting '{field}'", field=field, line=self._line_of(mapping, key))
            return default
        if isinstance(value, bool):
            raise ConfigError(f"'{field}' must be a number, got {value!r}", field=field, line=self._line_of(mapping, key))
        if isinstance(value, (int, float)):
            return float(value)
        try:
            return float(str(value))
        except ValueError:
            raise ConfigError(
                f"'{field}' must be a number, got {value!r}", field=field, line=self._line_of(mapping, key)
            )

    def _positive(self, mapping: Mapping, key: str, field: str, default: Any = _MISSING) -> Optional[float]:
        value = self._number(mapping, key, field, default)
        if value is not None and not value > 0:
            raise ConfigError(f"'{field}' must be positive, got {value!r}", field=field, line=self._line_of(mapping, key))
        return value

    def _coefficient(self, mapping: Mapping, key: str) -> complex:
        field = f"mix.{key}"
        value = mapping.get(key)
        if isinstance(value, complex):
            return value
        if isinstance(value, Mapping) and set(value) == {"re", "im"}:
            return complex(self._number(value, "re", field), self._number(value, "im", field))
        number = self._number(mapping, key, field)
        return number

    def _flag(self, mapping: Mapping, key: str, field: str, default: bool) -> bool:
        value = mapping.get(key, default)
        if not isinstance(value, bool):
            raise ConfigError(f"'{field}' must be true or false, got {value!r}", field=field, line=self._line_of(mapping, key))
        return value

    def _build(self, merged: Mapping) -> RunConfig:
        self._check_keys(merged, self.TOP_LEVEL_KEYS, "")
        scenario_text = merged.get("scenario")
        try:
            scenario = Scenario(scenario_text)
        except ValueError:
            known = ", ".join(s.value for s in Scenario)
            raise ConfigError(
                f"Unknown scenario {scenario_text!r}; expected one of {known}",
                field="scenario",
                line=self._line_of(merged, "scenario"),
            )

        well_section = self._section(merged, "well", required=True)
        try:
            well = WellConfig(
                a=self._number(well_section, "a", "well.a"),
                gamma1=self._number(well_section, "gamma1", "well.gamma1"),
                gamma2=self._number(well_section, "gamma2", "well.gamma2"),
            )
        except DomainError as error:
            raise ConfigError(str(error), field="well", line=self._line_of(merged, "well"))

        mix_section = self._section(merged, "mix", required=True)
        mix = (self._coefficient(mix_section, "alpha"), self._coefficient(mix_section, "beta"))

        nl_section = self._section(merged, "nonlinearity")
        sigma = self._number(nl_section, "sigma", "nonlinearity.sigma", 0.0)
        if sigma < 0:
            raise ConfigError(
                f"'nonlinearity.sigma' must be >= 0, got {sigma!r}",
                field="nonlinearity.sigma",
                line=self._line_of(nl_section, "sigma"),
            )
        nonlinearity = NonlinearSetup(
            initial_strength=self._number(nl_section, "initial_strength", "nonlinearity.initial_strength", None),
            sigma=sigma,
        )

        solver = self._build_solver(self._section(merged, "solver"))
        outputs = self._build_outputs(self._section(merged, "outputs"))

        threshold = self._positive(
            merged, "suppression_threshold", "suppression_threshold", self.DEFAULT_SUPPRESSION_THRESHOLD
        )
        if threshold > 1:
            raise ConfigError(
                f"'suppression_threshold' must lie in (0, 1], got {threshold!r}",
                field="suppression_threshold",
                line=self._line_of(merged, "suppression_threshold"),
            )
        name = merged.get("name")
        try:
            return RunConfig(
                scenario=scenario,
                well=well,
                mix=mix,
                nonlinearity=nonlinearity,
                solver=solver,
                outputs=outputs,
                suppression_threshold=threshold,
                name=None if name is None else str(name),
            )
        except ConfigError as error:
            if error.line is not None:
                raise
            raise ConfigError(
                error.message, field=error.field, line=self._line_of_field(merged, error.field)
            )

    def _build_solver(self, section: Mapping) -> SolverSettings:
        dt = self._positive(section, "dt", "solver.dt", None)
        t_final = self._positive(section, "t_final", "solver.t_final", None)
        dt_per_period = self._positive(section, "dt_per_period", "solver.dt_per_period", None)
        periods = self._positive(section, "periods", "solver.periods", None)
        if dt is None and dt_per_period is None:
            dt_per_period = float(self.DEFAULT_DT_PER_PERIOD)
        if t_final is None and periods is None:
            periods = float(self.DEFAULT_PERIODS)
        if dt is not None:
            dt_per_period = None
        if t_final is not None:
            periods = None
        if dt is not None and t_final is not None and dt > t_final:
            raise ConfigError(
                f"'solver.dt' ({dt!r}) exceeds 'solver.t_final' ({t_final!r})",
                field="solver.dt",
                line=self._line_of(section, "dt"),
            )
        max_inner_iter = section.get("max_inner_iter", self.DEFAULT_MAX_INNER_ITER)
        if isinstance(max_inner_iter, bool) or not isinstance(max_inner_iter, int) or max_inner_iter < 1:
            raise ConfigError(
                f"'solver.max_inner_iter' must be a positive integer, got {max_inner_iter!r}",
                field="solver.max_inner_iter",
                line=self._line_of(section, "max_inner_iter"),
            )
        return SolverSettings(
            dt=dt,
            t_final=t_final,
            dt_per_period=dt_per_period,
            periods=periods,
            fixed_point_tol=self._positive(
                section, "fixed_point_tol", "solver.fixed_point_tol", self.DEFAULT_FIXED_POINT_TOL
            ),
            max_inner_iter=max_inner_iter,
            blowup_threshold=self._positive(
                section, "blowup_threshold", "solver.blowup_threshold", self.DEFAULT_BLOWUP_THRESHOLD
            ),
        )

    def _build_outputs(self, section: Mapping) -> OutputOptions:
        directory = section.get("directory", self.DEFAULT_OUTPUT_DIRECTORY)
        if not isinstance(directory, str) or directory == "":
            raise ConfigError(
                f"'outputs.directory' must be a non-empty path, got {directory!r}",
                field="outputs.directory",
                line=self._line_of(section, "directory"),
            )
        periods = section.get("snapshot_periods", self.DEFAULT_SNAPSHOT_PERIODS)
        if not isinstance(periods, (list, tuple)):
            raise ConfigError(
                "'outputs.snapshot_periods' must be a list of numbers",
                field="outputs.snapshot_periods",
                line=self._line_of(section, "snapshot_periods"),
            )
        snapshot_periods = []
        for value in periods:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                raise ConfigError(
                    f"Snapshot times must be non-negative numbers of periods, got {value!r}",
                    field="outputs.snapshot_periods",
                    line=self._line_of(section, "snapshot_periods"),
                )
            snapshot_periods.append(float(value))
        return OutputOptions(
            directory=directory,
            snapshots=self._flag(section, "snapshots", "outputs.snapshots", False),
            snapshot_periods=tuple(snapshot_periods),
            figures=self._flag(section, "figures", "outputs.figures", False),
        )


def preprocessor_example() -> None:
    import pprint

    preprocessor = Preprocessor.from_presets_file()
    print(f"* Presets: {', '.join(preprocessor.preset_names)}")

    raw = Loader.load_config_data("example_configs/figure5_sigma07.yaml")
    run_config = preprocessor.create_run_config(raw, overrides={"nonlinearity.sigma": 0.9})
    print("\n* Resolved configuration:")
    pprint.pprint(run_config.to_dict())


if __name__ == "__main__":
    preprocessor_example()
