import dataclasses
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core import spectral
from src.core.charges import (
    effective_gamma,
    linear_exact_charges,
    solve_charges,
    time_dependent_strengths,
)
from src.core.dynamics import (
    beating_period,
    default_grid,
    mass_drift,
    measured_period,
    population_imbalance,
    reconstruct,
    suppression_report,
    window_exchanges,
)
from src.core.freeprop import free_evolve_amplitude
from src.core.visualiser import Visualiser
from src.processing.exporter import Exporter
from src.structures.bound_state import BoundState, EigenPair
from src.structures.initial_state import InitialState
from src.structures.nonlinearity import Nonlinearity
from src.structures.run_config import RunConfig, Scenario
from src.utils.errors import (
    BeatingLabError,
    ConfigError,
    DomainError,
    FaddeevaOverflowError,
    MomentConsistencyError,
    NoBeatingError,
    RootFindingError,
    SolverConvergenceError,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_BLOW_UP = 4


def exit_code_for(error: BaseException) -> int:
    """Maps an error to the command-line exit code contract."""
    if isinstance(error, (ConfigError, DomainError)):
        return EXIT_CONFIG
    if isinstance(
        error, (RootFindingError, FaddeevaOverflowError, MomentConsistencyError, SolverConvergenceError)
    ):
        return EXIT_NOT_CONVERGED
    return EXIT_FAILURE


@dataclasses.dataclass
class RunOutcome:
    status: str
    exit_code: int
    directory: str
    metadata: Dict[str, Any]

    def summary_row(self, value: Any = None) -> Dict[str, Any]:
        return {
            "value": value,
            "delta_lambda": self.metadata.get("delta_lambda"),
            "period": self.metadata.get("period"),
            "suppression_time": self.metadata.get("suppression_time"),
            "mass_drift": self.metadata.get("mass_drift"),
            "max_inner_iters": self.metadata.get("max_inner_iters"),
            "status": self.status,
        }


def _sweep_worker(job: Tuple[RunConfig, Any]) -> Dict[str, Any]:
    run_config, value = job
    try:
        return ExperimentRunner().run(run_config).summary_row(value)
    except BeatingLabError as error:
        log.error(f"Sweep run {value!r} failed: {error}")
        return {"value": value, "status": f"error {exit_code_for(error)}: {error}"}


class ExperimentRunner:
    """The ExperimentRunner executes spectra, single runs and parameter sweeps and writes their artifacts."""

    CODE_VERSION = "1.0.0"
    SWEEP_AXES = ("sigma", "gamma1", "gamma2", "a", "dt")

    def __init__(self, visualiser: Optional[Visualiser] = None) -> None:
        self.visualiser = visualiser or Visualiser()

    def spectrum(self, run_config: RunConfig) -> Dict[str, Any]:
        """Spectral report of the configured wells: verdict, eigenvalues, coefficients and residuals."""
        cfg = run_config.well
        verdict = spectral.existence_condition(cfg)
        report: Dict[str, Any] = dict(cfg.to_dict(), verdict=verdict.value)
        result = spectral.solve_eigenvalues(cfg)
        scale = spectral.residual_scale(cfg)

        def _state_report(state: BoundState) -> Dict[str, Any]:
            kernel = spectral.gamma_matrix(cfg, state.lam) @ np.array(state.coeffs)
            return dict(
                state.to_dict(),
                det_residual=abs(spectral.det_gamma(cfg, state.lam)) / scale,
                kernel_residual=float(np.max(np.abs(kernel))),
                coefficient_ratio=abs(state.coeff_right / state.coeff_left),
            )

        if isinstance(result, EigenPair):
            ground, excited = spectral.bound_states(cfg, result)
            report.update(result.to_dict())
            report["period"] = beating_period(result)
            report["states"] = [_state_report(ground), _state_report(excited)]
            report["strong_coupling_ratios"] = list(spectral.strong_coupling_ratios(cfg, result))
            if cfg.is_symmetric:
                report["splitting_asymptote"] = spectral.splitting_asymptote(cfg.gamma1, cfg.a)
            else:
                report["splitting_lower_bound"] = spectral.asymmetric_splitting_bound(cfg)
            report["closed_form_coefficients"] = [
                spectral.closed_form_left_coefficient(cfg, result.lambda0),
                spectral.closed_form_right_coefficient(cfg, result.lambda1),
            ]
        elif isinstance(result, BoundState):
            report["lambda0"] = result.lam
            report["period"] = math.inf
            report["states"] = [_state_report(result)]
        log.info(f"Spectrum of {cfg}: {verdict.value}")
        return report

    def run(self, run_config: RunConfig) -> RunOutcome:
        """Runs one experiment and writes its artifacts into run_config.outputs.directory.

        Args:
            run_config (RunConfig): The experiment.

        Returns:
            (RunOutcome): Status, exit code, output directory and the metadata that was written.
        """
        started = time.perf_counter()
        cfg = run_config.well
        directory = run_config.outputs.directory
        exporter = Exporter(directory)
        log.info(f"Run '{run_config.name or run_config.scenario.value}' -> {directory}")

        pair = spectral.solve_eigenvalues(cfg)
        if not isinstance(pair, EigenPair):
            raise DomainError(
                f"The beating experiment needs two bound states, but {cfg} has "
                f"{spectral.existence_condition(cfg).value}."
            )
        ground, excited = spectral.bound_states(cfg, pair)
        period = beating_period(pair)
        log.info(f"lambda0={pair.lambda0!r}, lambda1={pair.lambda1!r}, T_B={period!r}")
        psi0 = InitialState.from_bound_states(ground, excited, run_config.mix_alpha, run_config.mix_beta)
        params = run_config.solver.resolve(period)

        gamma_effective = None
        if run_config.scenario is Scenario.NONLINEAR:
            gamma_effective = effective_gamma(run_config.nonlinearity, psi0, cfg)
            nl = Nonlinearity(gamma=gamma_effective, sigma=run_config.nonlinearity.sigma)
            log.info(f"Effective coupling gamma={gamma_effective!r}")
        else:
            nl = Nonlinearity(gamma=None, sigma=0.0)

        metadata: Dict[str, Any] = {
            "config": run_config.to_dict(),
            "code_version": self.CODE_VERSION,
            "lambda0": pair.lambda0,
            "lambda1": pair.lambda1,
            "delta_lambda": pair.delta_lambda,
            "period": period,
            "gamma_effective": gamma_effective,
            "dt": params.dt,
            "t_final": params.t_final,
            "n_steps": params.n_steps,
        }
        grid = default_grid(cfg.a, params.t_final, psi0.kappa_max)
        phi_f = spectral.eval_state(ground, grid)
        phi_e = spectral.eval_state(excited, grid)
        exporter.write_eigenfunctions(grid, phi_f, phi_e)
        exporter.write_json("spectrum.json", self.spectrum(run_config))

        try:
            traj = solve_charges(cfg, nl, psi0, params)
        except SolverConvergenceError as error:
            if error.trajectory is not None:
                exporter.write_charges(error.trajectory)
            metadata.update(status="not_converged", error=str(error), failed_time=error.time)
            return self._finish(exporter, metadata, EXIT_NOT_CONVERGED, started)

        exporter.write_charges(traj)
        exporter.write_strengths(traj.times, *time_dependent_strengths(traj, nl))
        metadata["max_inner_iters"] = int(np.max(traj.inner_iters))
        metadata["free_term_error"] = max(
            free_evolve_amplitude(psi0, traj.t_final, x).error_estimate for x in (-cfg.a, cfg.a)
        )
        metadata["blow_up_time"] = traj.blow_up_time

        exact_left, exact_right = linear_exact_charges(
            cfg, run_config.mix_alpha, run_config.mix_beta, traj.times, pair=pair
        )
        report = None
        if traj.t_final >= period:
            _, reference = window_exchanges(traj.times, population_imbalance(exact_left, exact_right), period)
            report = suppression_report(traj, pair, run_config.suppression_threshold, reference=reference[0])
            exporter.write_json("suppression.json", report.to_dict())
            metadata["suppression_time"] = report.suppression_time
        else:
            log.warning("The trajectory is shorter than one beating period; no suppression report")
        metadata["measured_period"] = self._measured_period(traj, period)

        snapshots = []
        if run_config.outputs.snapshots:
            snapshots = self._snapshots(traj, nl, psi0, run_config, period, grid)
            for index, gf in enumerate(snapshots):
                exporter.write_snapshot(gf, index)
            snapshot_times = [gf.t for gf in snapshots]
            masses, drift = mass_drift(traj, nl, psi0, snapshot_times)
            metadata["snapshot_times"] = snapshot_times
            metadata["snapshot_masses"] = masses
            metadata["mass_drift"] = drift

        if run_config.outputs.figures:
            self._write_figures(
                exporter, cfg.a, grid, phi_f, phi_e, traj, np.abs(exact_left) ** 2, snapshots, report
            )

        if traj.blew_up:
            metadata["status"] = "blow_up"
            return self._finish(exporter, metadata, EXIT_BLOW_UP, started)
        metadata["status"] = "ok"
        return self._finish(exporter, metadata, EXIT_OK, started)

    @staticmethod
    def _measured_period(traj, period: float) -> Optional[float]:
        """Period of |q1|^2 from its mean crossings, over at least two beating periods."""
        if traj.t_final < 2 * period:
            return None
        try:
            return measured_period(traj.times, np.abs(traj.q1) ** 2)
        except NoBeatingError:
            log.warning("|q1|^2 does not oscillate; no measured period")
            return None

    @staticmethod
    def _snapshots(traj, nl, psi0, run_config, period, grid) -> List:
        indices = []
        for fraction in run_config.outputs.snapshot_periods:
            index = min(int(round(fraction * period / traj.dt)), traj.n_steps)
            if index not in indices:
                indices.append(index)
        return [reconstruct(traj, nl, psi0, float(traj.times[index]), grid) for index in indices]

    def _write_figures(self, exporter, a, grid, phi_f, phi_e, traj, linear_abs2, snapshots, report) -> None:
        figures = {
            "eigenfunctions.png": self.visualiser.plot_eigenfunctions(grid, phi_f, phi_e, a=a),
            "charges.png": self.visualiser.plot_charge_components(traj),
            "beating.png": self.visualiser.plot_beating_comparison(
                traj.times, np.abs(traj.q1) ** 2, linear_abs2
            ),
        }
        if snapshots:
            figures["densities.png"] = self.visualiser.plot_densities(snapshots)
        if report is not None:
            figures["exchange.png"] = self.visualiser.plot_exchange(report)
        for file_name, fig in figures.items():
            self.visualiser.save(fig, exporter.path(file_name))

    def _finish(self, exporter: Exporter, metadata: Dict[str, Any], exit_code: int, started: float) -> RunOutcome:
        metadata["exit_code"] = exit_code
        metadata["wall_time"] = time.perf_counter() - started
        metadata["timestamp"] = datetime.now(timezone.utc).isoformat()
        exporter.write_json("metadata.json", metadata)
        log.info(f"Run finished with status '{metadata['status']}' in {metadata['wall_time']:.2f} s")
        return RunOutcome(
            status=metadata["status"], exit_code=exit_code, directory=exporter.directory, metadata=metadata
        )

    def with_axis_value(self, run_config: RunConfig, axis: str, value: float, directory: str) -> RunConfig:
        """A copy of run_config with one swept parameter replaced and its own output directory."""
        if axis not in self.SWEEP_AXES:
            raise ConfigError(f"Unknown sweep axis '{axis}'; expected one of {', '.join(self.SWEEP_AXES)}", field="axis")
        outputs = dataclasses.replace(run_config.outputs, directory=directory)
        try:
            if axis == "sigma":
                nonlinearity = dataclasses.replace(run_config.nonlinearity, sigma=value)
                return dataclasses.replace(run_config, nonlinearity=nonlinearity, outputs=outputs)
            if axis == "dt":
                solver = dataclasses.replace(run_config.solver, dt=value, dt_per_period=None)
                return dataclasses.replace(run_config, solver=solver, outputs=outputs)
            well = dataclasses.replace(run_config.well, **{axis: value})
            return dataclasses.replace(run_config, well=well, outputs=outputs)
        except DomainError as error:
            raise ConfigError(str(error), field=axis)

    @staticmethod
    def sweep_directory(base_directory: str, position: int, axis: str, value: float) -> str:
        """Sub-directory of one sweep run; the position prefix keeps equal or close values apart."""
        return os.path.join(base_directory, f"{position:03d}_{axis}_{float(value)!r}")

    def sweep(
        self, run_config: RunConfig, axis: str, values: Sequence[float], workers: int = 1
    ) -> List[Dict[str, Any]]:
        """Runs one experiment per value of the swept parameter and writes sweep_summary.csv.

        Note:
            - Runs are isolated in sub-directories named after their position, the axis and the value; a failing
              run is recorded in the summary and the sweep continues.
        """
        base_directory = run_config.outputs.directory
        jobs, rows = [], {}
        for position, value in enumerate(values):
            directory = self.sweep_directory(base_directory, position, axis, value)
            try:
                jobs.append((position, (self.with_axis_value(run_config, axis, value, directory), value)))
            except ConfigError as error:
                rows[position] = {"value": value, "status": f"error {EXIT_CONFIG}: {error}"}

        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(_sweep_worker, [job for _, job in jobs]))
        else:
            results = [_sweep_worker(job) for _, job in jobs]
        for (position, _), row in zip(jobs, results):
            rows[position] = row

        ordered = [rows[position] for position in range(len(values))]
        Exporter(base_directory).write_sweep_summary(ordered)
        log.info(f"Sweep over {axis} finished: {sum(r['status'] == 'ok' for r in ordered)}/{len(ordered)} ok")
        return ordered


def experiment_runner_example() -> None:
    from src.processing.preprocessor import Preprocessor

    preprocessor = Preprocessor.from_presets_file()
    run_config = preprocessor.create_run_config(preset="figure4")
    outcome = ExperimentRunner().run(run_config)
    print(f"* Status {outcome.status}, artifacts in {outcome.directory}")


if __name__ == "__main__":
    experiment_runner_example()
