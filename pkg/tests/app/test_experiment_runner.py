import csv
import json
import math
import os
import tempfile
import unittest

from src.app.experiment_runner import *
from src.processing.preprocessor import Preprocessor
from src.utils.errors import (
    ConfigError,
    DomainError,
    MomentConsistencyError,
    RootFindingError,
    SolverConvergenceError,
)

# Run in terminal to get per test breakdown: python -m unittest -v tests/app/test_experiment_runner.py


class TestExitCodes(unittest.TestCase):
    def test_exit_code_for_each_error_family(self):
        self.assertEqual(exit_code_for(ConfigError("bad")), EXIT_CONFIG)
        self.assertEqual(exit_code_for(DomainError("bad")), EXIT_CONFIG)
        self.assertEqual(exit_code_for(RootFindingError("bad", (0.0, 1.0))), EXIT_NOT_CONVERGED)
        self.assertEqual(exit_code_for(MomentConsistencyError("bad")), EXIT_NOT_CONVERGED)
        self.assertEqual(exit_code_for(SolverConvergenceError("bad", 1.0, 1e-3)), EXIT_NOT_CONVERGED)
        self.assertEqual(exit_code_for(RuntimeError("bad")), EXIT_FAILURE)


class TestExperimentRunner(unittest.TestCase):
    def setUp(self):
        self.temporary = tempfile.TemporaryDirectory()
        self.preprocessor = Preprocessor.from_presets_file()
        self.runner = ExperimentRunner()

    def tearDown(self):
        self.temporary.cleanup()

    def _run_config(self, preset, name, **overrides):
        overrides = dict(overrides)
        overrides["outputs.directory"] = os.path.join(self.temporary.name, name)
        return self.preprocessor.create_run_config(preset=preset, overrides=overrides)

    def test_spectrum_of_two_binding_wells(self):
        report = self.runner.spectrum(self._run_config("figure4", "spectrum"))
        self.assertEqual(report["verdict"], "TwoEigenvalues")
        self.assertTrue(math.isclose(report["lambda0"], 0.085894, rel_tol=1e-4))
        self.assertTrue(math.isclose(report["lambda1"], 0.021228, rel_tol=1e-3))
        self.assertTrue(math.isclose(report["period"], 97.2, rel_tol=1e-2))
        self.assertEqual(len(report["states"]), 2)
        for state in report["states"]:
            self.assertLess(state["det_residual"], 1e-10)
            self.assertLess(state["kernel_residual"], 1e-10)
            self.assertTrue(math.isclose(state["coefficient_ratio"], 1.0, rel_tol=1e-9))
        self.assertIn("splitting_asymptote", report)
        self.assertEqual(len(report["strong_coupling_ratios"]), 2)

    def test_spectrum_of_wells_with_a_single_bound_state(self):
        report = self.runner.spectrum(self._run_config("figure4", "single", **{"well.a": 2.0}))
        self.assertEqual(report["verdict"], "OneEigenvalue")
        self.assertEqual(report["period"], math.inf)
        self.assertEqual(len(report["states"]), 1)

    def test_run_writes_every_artifact(self):
        run_config = self._run_config(
            "figure4",
            "linear",
            **{
                "solver.dt": 1.0,
                "solver.t_final": 120.0,
                "outputs.snapshots": True,
                "outputs.snapshot_periods": (0.0, 0.25),
            },
        )
        outcome = self.runner.run(run_config)
        self.assertEqual(outcome.exit_code, EXIT_OK)
        self.assertEqual(outcome.status, "ok")
        for file_name in (
            "charges.csv",
            "strengths.csv",
            "eigenfunctions.csv",
            "snapshot_0.csv",
            "snapshot_1.csv",
            "spectrum.json",
            "suppression.json",
            "metadata.json",
        ):
            self.assertTrue(os.path.isfile(os.path.join(outcome.directory, file_name)), file_name)

        with open(os.path.join(outcome.directory, "metadata.json")) as file:
            metadata = json.load(file)
        self.assertEqual(metadata["status"], "ok")
        self.assertEqual(metadata["exit_code"], 0)
        self.assertEqual(metadata["n_steps"], 120)
        self.assertEqual(metadata["snapshot_times"][0], 0.0)
        self.assertTrue(math.isfinite(metadata["mass_drift"]))
        self.assertLess(metadata["free_term_error"], 1e-10)
        self.assertIn("measured_period", metadata)
        self.assertIsNone(metadata["gamma_effective"])

        with open(os.path.join(outcome.directory, "charges.csv"), newline="") as file:
            rows = list(csv.reader(file))
        self.assertEqual(len(rows), 122)

    def test_run_when_the_charges_blow_up(self):
        run_config = self._run_config(
            "figure5",
            "blowup",
            **{
                "nonlinearity.sigma": 1.2,
                "solver.dt": 0.5,
                "solver.t_final": 10.0,
                "solver.blowup_threshold": 1e-3,
            },
        )
        outcome = self.runner.run(run_config)
        self.assertEqual(outcome.exit_code, EXIT_BLOW_UP)
        self.assertEqual(outcome.status, "blow_up")
        self.assertEqual(outcome.metadata["blow_up_time"], 0.5)
        self.assertLess(outcome.metadata["gamma_effective"], 0)
        self.assertFalse(os.path.exists(os.path.join(outcome.directory, "suppression.json")))

    def test_run_when_there_is_no_second_bound_state(self):
        with self.assertRaises(DomainError):
            self.runner.run(self._run_config("figure4", "no_pair", **{"well.a": 2.0}))

    def test_with_axis_value(self):
        run_config = self._run_config("figure5", "axis")
        changed = self.runner.with_axis_value(run_config, "sigma", 0.3, "elsewhere")
        self.assertEqual(changed.nonlinearity.sigma, 0.3)
        self.assertEqual(changed.outputs.directory, "elsewhere")
        stepped = self.runner.with_axis_value(run_config, "dt", 0.25, "elsewhere")
        self.assertEqual(stepped.solver.dt, 0.25)
        self.assertIsNone(stepped.solver.dt_per_period)

    def test_with_axis_value_when_the_value_is_invalid(self):
        run_config = self._run_config("figure4", "axis")
        with self.assertRaises(ConfigError):
            self.runner.with_axis_value(run_config, "sigma", 0.5, "elsewhere")
        with self.assertRaises(ConfigError):
            self.runner.with_axis_value(run_config, "a", -1.0, "elsewhere")
        with self.assertRaises(ConfigError):
            self.runner.with_axis_value(run_config, "mass", 1.0, "elsewhere")

    def test_sweep_records_failing_runs_and_continues(self):
        run_config = self._run_config("figure4", "sweep", **{"solver.dt": 1.0, "solver.t_final": 120.0})
        rows = self.runner.sweep(run_config, "a", [3.0, 2.0])
        self.assertEqual([row["value"] for row in rows], [3.0, 2.0])
        self.assertEqual(rows[0]["status"], "ok")
        self.assertTrue(math.isclose(rows[0]["period"], 97.2, rel_tol=1e-2))
        self.assertTrue(rows[1]["status"].startswith("error 2"))

        base = run_config.outputs.directory
        self.assertTrue(os.path.isfile(os.path.join(base, "sweep_summary.csv")))
        self.assertTrue(os.path.isfile(os.path.join(base, "000_a_3.0", "metadata.json")))


    def test_sweep_directory_keeps_close_values_apart(self):
        first = ExperimentRunner.sweep_directory("out", 0, "sigma", 0.3)
        second = ExperimentRunner.sweep_directory("out", 1, "sigma", 0.3000001)
        self.assertNotEqual(first, second)
        self.assertEqual(first, os.path.join("out", "000_sigma_0.3"))
        self.assertEqual(second, os.path.join("out", "001_sigma_0.3000001"))
        self.assertNotEqual(
            ExperimentRunner.sweep_directory("out", 0, "dt", 0.5), ExperimentRunner.sweep_directory("out", 1, "dt", 0.5)
        )


if __name__ == "__main__":
    unittest.main()
