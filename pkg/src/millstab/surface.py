"""Steady-state forced vibration, cutting-edge trajectory, and surface error."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cutting_force import Direction, ToolGeometry
from .errors import DomainError, SingularModelError
from .lifting import (
    LiftedForce,
    LiftedModel,
    _apply_blocks,
    assemble_closed_loop,
    lift_force,
    lift_structure,
)
from .scenario import MillingScenario, discrete_model, periodic_coefficients
from .stability import Classification, classify, spectral_radius
from .structural import Hold

TWO_PI = 2.0 * np.pi


class Sense(Enum):
    UNDERCUT = "undercut"  # positive error: material left standing
    OVERCUT = "overcut"  # negative error: too much material removed
    ZERO = "zero"


@dataclass
class SteadyStateVibration:
    """Periodic steady-state tool/workpiece displacement, one tooth period."""

    samples: np.ndarray  # (m, r), meters

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2:
            raise DomainError("samples must be a (steps, axes) array")
        if not np.all(np.isfinite(self.samples)):
            raise DomainError("steady-state samples must be finite")

    @property
    def steps(self) -> int:
        return self.samples.shape[0]


@dataclass
class EdgeTrajectory:
    """Cutting-edge positions per tooth and sample over one tooth period."""

    x: np.ndarray  # (teeth, m)
    y: np.ndarray  # (teeth, m)


@dataclass
class SLEResult:
    value: float  # signed, meters; > 0 means undercut
    sense: Sense
    extremal_sample: tuple[int, int]  # (tooth j, 1-based; sample index k)


@dataclass
class SLEMap:
    speeds: np.ndarray  # rev/min
    sle_values: np.ndarray  # meters, NaN where invalid
    valid: np.ndarray  # bool; False where unstable or failed
    axial_depth: float
    feed: np.ndarray

    def __post_init__(self):
        if not (len(self.speeds) == len(self.sle_values) == len(self.valid)):
            raise DomainError("sweep arrays must have matching lengths")


def steady_state_vibration(lm: LiftedModel, lf: LiftedForce, axial_depth: float) -> SteadyStateVibration:
    """Forced periodic response of the lifted loop.

    At steady state the regenerative difference cancels, so the force stack
    is the pure feed/edge forcing and only a structural-size linear solve
    remains. Exactly linear in the axial depth.
    """
    forcing = lf.r_bar - _apply_blocks(lf.S_blocks, lf.s_bar)
    lhs = np.eye(lm.state_dim) - lm.A_L
    try:
        p_ss = np.linalg.solve(lhs, lm.B_L @ forcing)
    except np.linalg.LinAlgError as exc:
        raise SingularModelError(
            "period map has a unit eigenvalue; the structural model is undamped or marginal"
        ) from exc
    dz = axial_depth * (lm.C_L @ p_ss + lm.D_L @ forcing)
    return SteadyStateVibration(samples=dz.reshape(lm.steps, lf.axes))


def edge_trajectory(
    vib: SteadyStateVibration,
    tool: ToolGeometry,
    feed: np.ndarray,
    steps: int,
) -> EdgeTrajectory:
    """Cutting-edge path: vibration plus rigid rotation plus feed advance."""
    if vib.steps != steps:
        raise DomainError(f"vibration has {vib.steps} samples, expected {steps}")
    feed = np.asarray(feed, dtype=float)
    m = steps
    n_teeth = tool.teeth_count
    k = np.arange(m)
    dtheta = TWO_PI / n_teeth / m
    j = np.arange(n_teeth)[:, np.newaxis]
    phi = k * dtheta + TWO_PI / n_teeth * j  # (teeth, m)
    radius = tool.diameter / 2.0
    x = vib.samples[:, 0] + radius * np.sin(phi) + k / m * feed[0]
    y = vib.samples[:, 1] + radius * np.cos(phi) + k / m * feed[1]
    return EdgeTrajectory(x=x, y=y)


def surface_location_error(
    trajectory: EdgeTrajectory,
    direction: Direction,
    diameter: float,
) -> SLEResult:
    """Signed distance between commanded and machined surface.

    The machined surface sits at the extreme of the edge path along +y; the
    sign flips between up- and down-milling so that positive always means
    undercut.
    """
    if trajectory.y.size == 0:
        raise DomainError("trajectory must be non-empty")
    flat = int(np.argmax(trajectory.y))
    tooth, index = np.unravel_index(flat, trajectory.y.shape)
    gap = diameter / 2.0 - trajectory.y[tooth, index]
    value = gap if direction is Direction.UP else -gap
    if value > 0.0:
        sense = Sense.UNDERCUT
    elif value < 0.0:
        sense = Sense.OVERCUT
    else:
        sense = Sense.ZERO
    return SLEResult(value=float(value), sense=sense, extremal_sample=(int(tooth) + 1, int(index)))


def scenario_sle(
    scenario: MillingScenario,
    steps: int,
    hold: Hold = Hold.IMP,
    spindle_speed: float | None = None,
) -> SLEResult:
    """Steady-state surface error of a scenario at one spindle speed."""
    lm = lift_structure(discrete_model(scenario, steps, hold, spindle_speed), steps)
    lf = lift_force(periodic_coefficients(scenario, steps), scenario.conditions.feed)
    vib = steady_state_vibration(lm, lf, scenario.conditions.axial_depth)
    traj = edge_trajectory(vib, scenario.tool, scenario.conditions.feed, steps)
    return surface_location_error(traj, scenario.tool.direction, scenario.tool.diameter)


def sle_sweep(
    scenario: MillingScenario,
    speed_range: tuple[float, float],
    grid_count: int,
    steps: int,
    hold: Hold = Hold.IMP,
    margin: float = 0.0,
) -> SLEMap:
    """Surface error across spindle speeds at the scenario's axial depth.

    Speeds where the closed loop is not stable get no surface error (none
    exists under chatter); they are flagged invalid rather than failing the
    sweep.
    """
    if grid_count < 1:
        raise DomainError(f"grid_count must be >= 1, got {grid_count}")
    speeds = np.linspace(speed_range[0], speed_range[1], grid_count)
    coeffs = periodic_coefficients(scenario, steps)
    lf = lift_force(coeffs, scenario.conditions.feed)
    values = np.full(grid_count, np.nan)
    valid = np.zeros(grid_count, dtype=bool)
    depth = scenario.conditions.axial_depth
    for i, speed in enumerate(speeds):
        try:
            lm = lift_structure(discrete_model(scenario, steps, hold, speed), steps)
            loop = assemble_closed_loop(lm, lf, depth)
            radius, _ = spectral_radius(loop.Phi)
            if classify(radius, margin) is not Classification.STABLE:
                continue
            vib = steady_state_vibration(lm, lf, depth)
            traj = edge_trajectory(vib, scenario.tool, scenario.conditions.feed, steps)
            values[i] = surface_location_error(traj, scenario.tool.direction, scenario.tool.diameter).value
            valid[i] = True
        except (ArithmeticError, DomainError):
            continue
    return SLEMap(speeds=speeds, sle_values=values, valid=valid, axial_depth=depth, feed=scenario.conditions.feed)


def sle_critical_speeds(natural_frequency_hz: float, teeth_count: int, k_max: int) -> np.ndarray:
    """Spindle speeds whose tooth-passing harmonics hit a natural frequency."""
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    k = np.arange(1, k_max + 1)
    return 60.0 * natural_frequency_hz / (k * teeth_count)
