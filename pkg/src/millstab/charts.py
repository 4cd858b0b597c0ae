"""Combined stability/surface-error contour charts over a cutting-parameter grid."""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib import colors

from .errors import DomainError, NumericalError
from .lifting import assemble_closed_loop, lift_force, lift_structure
from .scenario import MillingScenario, discrete_model, periodic_coefficients
from .stability import SLDGrid, spectral_radius
from .structural import Hold
from .surface import edge_trajectory, steady_state_vibration, surface_location_error


@dataclass
class ChartModel:
    """Everything the stability/error chart draws.

    ``sle_field`` holds the signed surface error per cell, NaN wherever the
    cell is not stable (no steady state exists there) or failed; exactly the
    cells with finite ``sle_field`` are colored.
    """

    grid: SLDGrid
    sle_field: np.ndarray  # (speeds, depths), meters

    def colored_cells(self) -> np.ndarray:
        return np.isfinite(self.sle_field)


def compute_chart(
    scenario: MillingScenario,
    speed_range: tuple[float, float],
    depth_range: tuple[float, float],
    grid_shape: tuple[int, int],
    steps: int,
    hold: Hold = Hold.IMP,
    margin: float = 0.0,
) -> ChartModel:
    """Spectral radii plus per-stable-cell surface error over one grid.

    Shares the per-speed lifted matrices between the stability test and the
    steady-state solve, so the error field costs little beyond the sweep.
    """
    n_speeds, n_depths = grid_shape
    if n_speeds < 1 or n_depths < 1:
        raise DomainError(f"grid_shape must be at least 1x1, got {grid_shape}")
    speeds = np.linspace(speed_range[0], speed_range[1], n_speeds)
    depths = np.linspace(depth_range[0], depth_range[1], n_depths)
    coeffs = periodic_coefficients(scenario, steps)
    lf = lift_force(coeffs, scenario.conditions.feed)
    radius_field = np.full(grid_shape, np.nan)
    sle_field = np.full(grid_shape, np.nan)
    for i, speed in enumerate(speeds):
        lm = lift_structure(discrete_model(scenario, steps, hold, speed), steps)
        for j, depth in enumerate(depths):
            try:
                loop = assemble_closed_loop(lm, lf, depth)
                radius_field[i, j], _ = spectral_radius(loop.Phi)
                if radius_field[i, j] < 1.0 - margin:
                    vib = steady_state_vibration(lm, lf, depth)
                    traj = edge_trajectory(vib, scenario.tool, scenario.conditions.feed, steps)
                    sle_field[i, j] = surface_location_error(
                        traj, scenario.tool.direction, scenario.tool.diameter
                    ).value
            except (ArithmeticError, NumericalError):
                continue
    with np.errstate(invalid="ignore"):
        stable_mask = radius_field < 1.0 - margin
    stable_mask &= np.isfinite(radius_field)
    grid = SLDGrid(speeds=speeds, depths=depths, radius_field=radius_field, stable_mask=stable_mask)
    return ChartModel(grid=grid, sle_field=sle_field)


def render_chart(model: ChartModel, path, contour_levels: int = 9) -> None:
    """Draw the chart: stable region colored by surface error, chatter blank.

    Written as a static vector image; dashed contour lines mark constant
    surface-error levels inside the stable region, the solid line is the
    stability margin.
    """
    grid = model.grid
    sle_um = model.sle_field * 1e6
    masked = np.ma.masked_invalid(sle_um)
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    lo = float(masked.min()) if masked.count() else -1.0
    hi = float(masked.max()) if masked.count() else 1.0
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    bounds = np.linspace(lo, hi, contour_levels + 2)
    norm = colors.BoundaryNorm(bounds, ncolors=256)
    mesh = ax.pcolormesh(
        grid.speeds / 1e3,
        grid.depths * 1e3,
        masked.T,
        norm=norm,
        cmap="viridis",
        shading="nearest",
    )
    fig.colorbar(mesh, ax=ax, label="surface location error (um)")
    if masked.count() >= 4 and np.isfinite(sle_um).any():
        cs = ax.contour(
            grid.speeds / 1e3,
            grid.depths * 1e3,
            masked.T,
            levels=bounds[1:-1],
            colors="white",
            linestyles="dashed",
            linewidths=0.7,
        )
        ax.clabel(cs, inline=True, fontsize=6, fmt="%.1f")
    with np.errstate(invalid="ignore"):
        ax.contour(
            grid.speeds / 1e3,
            grid.depths * 1e3,
            grid.radius_field.T,
            levels=[1.0],
            colors="black",
            linewidths=1.2,
        )
    ax.set_xlabel("spindle speed (krpm)")
    ax.set_ylabel("axial depth of cut (mm)")
    ax.set_title("stable region colored by surface location error")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
