"""Chatter stability: spectral radius tests, lobe-diagram sweeps, convergence."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, NumericalError
from .lifting import assemble_closed_loop, lift_force, lift_structure
from .scenario import MillingScenario, periodic_coefficients, discrete_model
from .structural import Hold


class Classification(Enum):
    STABLE = "stable"
    MARGINAL = "marginally stable"
    UNSTABLE = "unstable"


@dataclass
class StabilityVerdict:
    spectral_radius: float
    classification: Classification
    dominant_eigenvalue: complex


@dataclass
class SLDGrid:
    """Spectral radii over a (spindle speed, axial depth) grid.

    Cells whose assembly failed hold NaN in ``radius_field`` and False in
    ``stable_mask``.
    """

    speeds: np.ndarray  # rev/min, ascending
    depths: np.ndarray  # m, ascending
    radius_field: np.ndarray  # (len(speeds), len(depths))
    stable_mask: np.ndarray  # bool, same shape

    def __post_init__(self):
        shape = (len(self.speeds), len(self.depths))
        if self.radius_field.shape != shape or self.stable_mask.shape != shape:
            raise DomainError(f"grid fields must have shape {shape}")


@dataclass
class ConvergenceRecord:
    steps: int
    eigenvalue: complex
    relative_error: float


def spectral_radius(M: np.ndarray) -> tuple[float, complex]:
    """Largest eigenvalue modulus of M and one eigenvalue attaining it.

    Ties break toward the largest real part, then the largest imaginary
    part, so conjugate pairs resolve deterministically.
    """
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix entries must be finite")
    try:
        eigs = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((eigs.imag, eigs.real, np.abs(eigs)))
    dominant = eigs[order[-1]]
    return float(np.abs(dominant)), complex(dominant)


def classify(radius: float, margin: float = 0.0) -> Classification:
    """Stable / marginal / unstable against the unit circle with a margin band."""
    if margin < 0.0:
        raise DomainError(f"margin must be >= 0, got {margin}")
    if radius < 1.0 - margin:
        return Classification.STABLE
    if radius > 1.0 + margin:
        return Classification.UNSTABLE
    return Classification.MARGINAL


def verdict(M: np.ndarray, margin: float = 0.0) -> StabilityVerdict:
    radius, dominant = spectral_radius(M)
    return StabilityVerdict(radius, classify(radius, margin), dominant)


def sld_grid(
    scenario: MillingScenario,
    speed_range: tuple[float, float],
    depth_range: tuple[float, float],
    grid_shape: tuple[int, int],
    steps: int,
    hold: Hold = Hold.IMP,
    margin: float = 0.0,
    threads: int = 1,
) -> SLDGrid:
    """Spectral-radius field over a speed x depth grid.

    The periodic force coefficients and, per speed, the lifted structural
    matrices do not depend on the axial depth, so each column reuses them and
    only the closed-loop assembly and eigensolve run per cell. Failed cells
    are recorded as NaN instead of aborting the sweep.
    """
    n_speeds, n_depths = grid_shape
    if n_speeds < 1 or n_depths < 1:
        raise DomainError(f"grid_shape must be at least 1x1, got {grid_shape}")
    if not (speed_range[0] > 0.0 and speed_range[1] >= speed_range[0]):
        raise DomainError(f"invalid speed range {speed_range}")
    if not (depth_range[0] >= 0.0 and depth_range[1] >= depth_range[0]):
        raise DomainError(f"invalid depth range {depth_range}")
    speeds = np.linspace(speed_range[0], speed_range[1], n_speeds)
    depths = np.linspace(depth_range[0], depth_range[1], n_depths)
    coeffs = periodic_coefficients(scenario, steps)
    lf = lift_force(coeffs, scenario.conditions.feed)
    radius_field = np.full((n_speeds, n_depths), np.nan)

    def fill_column(i: int) -> None:
        lm = lift_structure(discrete_model(scenario, steps, hold, speeds[i]), steps)
        for j, depth in enumerate(depths):
            try:
                loop = assemble_closed_loop(lm, lf, depth)
                radius_field[i, j], _ = spectral_radius(loop.Phi)
            except (ArithmeticError, NumericalError):
                pass  # leave NaN, keep sweeping

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill_column, range(n_speeds)))
    else:
        for i in range(n_speeds):
            fill_column(i)

    with np.errstate(invalid="ignore"):
        stable_mask = radius_field < 1.0 - margin
    stable_mask &= np.isfinite(radius_field)
    return SLDGrid(speeds=speeds, depths=depths, radius_field=radius_field, stable_mask=stable_mask)


def stability_boundary(grid: SLDGrid) -> np.ndarray:
    """Critical depth per speed column.

    Takes the deepest grid depth whose entire prefix is stable and refines it
    by one linear interpolation of the spectral radius through 1 against the
    first non-stable cell. A column whose first cell is already non-stable
    reports 0.
    """
    boundary = np.zeros(len(grid.speeds))
    for i in range(len(grid.speeds)):
        stable = grid.stable_mask[i]
        if not stable[0]:
            continue
        k = int(np.argmin(stable)) - 1 if not stable.all() else len(stable) - 1
        alpha = grid.depths[k]
        if k + 1 < len(grid.depths):
            rho0 = grid.radius_field[i, k]
            rho1 = grid.radius_field[i, k + 1]
            if np.isfinite(rho1) and rho1 > rho0:
                alpha = alpha + (1.0 - rho0) / (rho1 - rho0) * (grid.depths[k + 1] - alpha)
        boundary[i] = alpha
    return boundary


def dominant_eigenvalue(
    scenario: MillingScenario,
    steps: int,
    hold: Hold,
) -> complex:
    """Dominant monodromy eigenvalue at the scenario's own cutting conditions."""
    coeffs = periodic_coefficients(scenario, steps)
    lm = lift_structure(discrete_model(scenario, steps, hold), steps)
    lf = lift_force(coeffs, scenario.conditions.feed)
    loop = assemble_closed_loop(lm, lf, scenario.conditions.axial_depth)
    _, dominant = spectral_radius(loop.Phi)
    return dominant


def convergence_curve(
    scenario: MillingScenario,
    steps_list: list[int],
    hold: Hold,
    reference_steps: int,
) -> list[ConvergenceRecord]:
    """Dominant-eigenvalue error against an impulse-hold reference resolution."""
    if reference_steps <= max(steps_list):
        raise DomainError(
            f"reference_steps {reference_steps} must exceed max of steps_list {max(steps_list)}"
        )
    mu0 = dominant_eigenvalue(scenario, reference_steps, Hold.IMP)
    records = []
    for m in steps_list:
        mu = dominant_eigenvalue(scenario, m, hold)
        records.append(ConvergenceRecord(m, mu, abs(mu - mu0) / abs(mu0)))
    return records


def relative_error(reference: np.ndarray, estimate: np.ndarray) -> float:
    """Summed absolute deviation as a percentage of the reference mass."""
    reference = np.asarray(reference, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if reference.shape != estimate.shape:
        raise DomainError(f"length mismatch: {reference.shape} vs {estimate.shape}")
    denom = np.sum(np.abs(reference))
    if denom == 0.0:
        raise DomainError("reference sequence must not be all zero")
    return float(np.sum(np.abs(reference - estimate)) / denom * 100.0)


def normalized_time(candidate_seconds: float, baseline_seconds: float) -> float:
    """Wall-clock ratio of a candidate run against the baseline run."""
    if not baseline_seconds > 0.0:
        raise DomainError(f"baseline_seconds must be positive, got {baseline_seconds}")
    return candidate_seconds / baseline_seconds
