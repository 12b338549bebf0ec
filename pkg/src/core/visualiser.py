import logging
from typing import Optional, Sequence

import matplotlib.figure
import numpy as np
from numpy.typing import NDArray

from src.structures.charge_trajectory import ChargeTrajectory
from src.structures.grid_function import GridFunction, SuppressionReport

log = logging.getLogger(__name__)


class Visualiser:
    """The Visualiser draws static figures of spectra, charges, densities and beating contrast."""

    FIGURE_SIZE = (8, 4.5)
    DPI = 120
    GROUND_COLOUR = "tab:blue"
    EXCITED_COLOUR = "tab:red"
    REFERENCE_STYLE = dict(color="0.4", linestyle="--", linewidth=1.0)

    def _create_figure(self, title: str, x_label: str, y_label: str):
        fig = matplotlib.figure.Figure(figsize=self.FIGURE_SIZE, dpi=self.DPI)
        ax = fig.add_subplot(1, 1, 1)
        ax.set_title(title)
        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
        ax.grid(alpha=0.3)
        return fig, ax

    def plot_eigenfunctions(
        self, grid: NDArray, phi_f: NDArray, phi_e: NDArray, a: Optional[float] = None
    ) -> matplotlib.figure.Figure:
        """Draws the fundamental and excited eigenfunctions.

        Args:
            grid (np.ndarray): Positions.
            phi_f (np.ndarray): Fundamental state on the grid.
            phi_e (np.ndarray): Excited state on the grid.
            a (float or None): Half-separation, to mark the wells.

        Returns:
            (matplotlib.figure.Figure): The figure.
        """
        fig, ax = self._create_figure("Bound states", "x", "phi(x)")
        ax.plot(grid, phi_f, color=self.GROUND_COLOUR, label="fundamental")
        ax.plot(grid, phi_e, color=self.EXCITED_COLOUR, label="excited")
        if a is not None:
            for center in (-a, a):
                ax.axvline(center, **self.REFERENCE_STYLE)
        ax.legend()
        return fig

    def plot_charge_components(self, traj: ChargeTrajectory) -> matplotlib.figure.Figure:
        """Real part, imaginary part and modulus of the left charge q1(t)."""
        fig, ax = self._create_figure("Left charge", "t", "q1(t)")
        ax.plot(traj.times, traj.q1.real, label="Re q1", linewidth=0.8)
        ax.plot(traj.times, traj.q1.imag, label="Im q1", linewidth=0.8)
        ax.plot(traj.times, np.abs(traj.q1), label="|q1|", color="black", linewidth=1.2)
        if traj.blew_up:
            ax.axvline(traj.blow_up_time, color="tab:red", linestyle=":", label="blow-up")
        ax.legend(loc="upper right")
        return fig

    def plot_beating_comparison(
        self,
        times: NDArray,
        nonlinear_abs2: NDArray,
        linear_abs2: Optional[NDArray] = None,
        label: str = "|q1|^2",
    ) -> matplotlib.figure.Figure:
        fig, ax = self._create_figure("Beating of the left charge", "t", "|q1(t)|^2")
        if linear_abs2 is not None:
            ax.plot(times, linear_abs2, label="linear", **self.REFERENCE_STYLE)
        ax.plot(times, nonlinear_abs2, label=label, color=self.GROUND_COLOUR, linewidth=1.0)
        ax.legend(loc="upper right")
        return fig

    def plot_densities(self, snapshots: Sequence[GridFunction]) -> matplotlib.figure.Figure:
        fig, ax = self._create_figure("Probability density", "x", "|psi(t, x)|^2")
        for gf in snapshots:
            ax.plot(gf.grid, gf.density, label=f"t = {gf.t:.4g}", linewidth=1.0)
        if snapshots and snapshots[0].half_separation is not None:
            a = snapshots[0].half_separation
            for center in (-a, a):
                ax.axvline(center, **self.REFERENCE_STYLE)
        ax.legend(loc="upper right")
        return fig

    def plot_exchange(self, report: SuppressionReport) -> matplotlib.figure.Figure:
        fig, ax = self._create_figure("Charge exchange per window", "window center t", "E / E_ref")
        ax.plot(report.window_centers, report.relative_exchanges, color="black", linewidth=1.0)
        ax.axhline(report.threshold, color="tab:red", linestyle="--", linewidth=1.0, label="threshold")
        if report.suppression_time is not None:
            ax.axvline(report.suppression_time, color="tab:green", linestyle=":", label="suppression")
        ax.set_ylim(bottom=0)
        ax.legend(loc="upper right")
        return fig

    @staticmethod
    def save(fig: matplotlib.figure.Figure, path: str) -> str:
        fig.savefig(path, bbox_inches="tight")
        log.info(f"Saved figure {path}")
        return path


def visualiser_example() -> None:
    from src.core import spectral
    from src.structures.well_config import WellConfig

    cfg = WellConfig(a=3.0, gamma1=-0.5, gamma2=-0.5)
    pair = spectral.solve_eigenvalues(cfg)
    ground, excited = spectral.bound_states(cfg, pair)
    grid = np.linspace(-12, 12, 1201)
    fig = Visualiser().plot_eigenfunctions(
        grid, spectral.eval_state(ground, grid), spectral.eval_state(excited, grid), a=cfg.a
    )
    Visualiser.save(fig, "eigenfunctions_example.png")


if __name__ == "__main__":
    visualiser_example()
