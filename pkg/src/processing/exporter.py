import csv
import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from src.structures.charge_trajectory import ChargeTrajectory
from src.structures.grid_function import GridFunction
from src.utils.utils import create_directory_if_not_exists, format_row

log = logging.getLogger(__name__)

CHARGES_COLUMNS = ("t", "re_q1", "im_q1", "abs2_q1", "re_q2", "im_q2", "abs2_q2", "inner_iters", "residual")
STRENGTHS_COLUMNS = ("t", "gamma_left", "gamma_right")
EIGENFUNCTIONS_COLUMNS = ("x", "phi_f", "phi_e")
SNAPSHOT_COLUMNS = ("x", "re_psi", "im_psi", "abs2_psi")
SWEEP_COLUMNS = (
    "value",
    "delta_lambda",
    "period",
    "suppression_time",
    "mass_drift",
    "max_inner_iters",
    "status",
)


def to_json_compatible(value: Any) -> Any:
    """Recursively converts numpy scalars, arrays, complex and non-finite numbers into plain JSON values."""
    if isinstance(value, Mapping):
        return {str(key): to_json_compatible(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_json_compatible(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_json_compatible(value.real), "im": to_json_compatible(value.imag)}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


class Exporter:
    """Writes run artifacts (CSV tables and JSON reports) into one output directory.

    Note:
        - Numbers in CSV files carry 17 significant digits; data files hold no wall-clock information.
    """

    def __init__(self, directory: str) -> None:
        self.directory = directory
        create_directory_if_not_exists(directory)

    def path(self, file_name: str) -> str:
        return os.path.join(self.directory, file_name)

    def write_table(self, file_name: str, columns: Sequence[str], rows: Iterable[Iterable]) -> str:
        path = self.path(file_name)
        with open(path, "w", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow(format_row(row))
        log.debug(f"Wrote {path}")
        return path

    def write_json(self, file_name: str, payload: Mapping) -> str:
        path = self.path(file_name)
        with open(path, "w") as file:
            json.dump(to_json_compatible(payload), file, indent=2, allow_nan=False)
            file.write("\n")
        log.debug(f"Wrote {path}")
        return path

    def write_charges(self, traj: ChargeTrajectory) -> str:
        rows = zip(
            traj.times,
            traj.q1.real,
            traj.q1.imag,
            np.abs(traj.q1) ** 2,
            traj.q2.real,
            traj.q2.imag,
            np.abs(traj.q2) ** 2,
            (int(n) for n in traj.inner_iters),
            traj.residuals,
        )
        return self.write_table("charges.csv", CHARGES_COLUMNS, rows)

    def write_strengths(self, times: npt.NDArray, left: npt.NDArray, right: npt.NDArray) -> str:
        return self.write_table("strengths.csv", STRENGTHS_COLUMNS, zip(times, left, right))

    def write_eigenfunctions(self, grid: npt.NDArray, phi_f: npt.NDArray, phi_e: npt.NDArray) -> str:
        return self.write_table("eigenfunctions.csv", EIGENFUNCTIONS_COLUMNS, zip(grid, phi_f, phi_e))

    def write_snapshot(self, gf: GridFunction, index: int) -> str:
        rows = zip(gf.grid, gf.values.real, gf.values.imag, gf.density)
        return self.write_table(f"snapshot_{index}.csv", SNAPSHOT_COLUMNS, rows)

    def write_sweep_summary(self, rows: List[Dict[str, Any]]) -> str:
        return self.write_table(
            "sweep_summary.csv",
            SWEEP_COLUMNS,
            ([row.get(column) for column in SWEEP_COLUMNS] for row in rows),
        )
