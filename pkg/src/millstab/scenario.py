"""The full milling problem instance and the model-building pipeline."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .cutting_force import (
    CuttingCoefficients,
    CuttingConditions,
    ImmersionWindow,
    PeriodicCoefficients,
    ToolGeometry,
    averaged_coefficients,
    immersion_window,
)
from .errors import DomainError
from .lifting import ClosedLoopSystem, LiftedForce, LiftedModel, assemble_closed_loop, lift_force, lift_structure
from .structural import DiscreteModel, Hold, ModalAxis, StateSpaceModel, discretize, realize_modal, to_angle_domain


@dataclass(frozen=True)
class MillingScenario:
    tool: ToolGeometry
    coefficients: CuttingCoefficients
    conditions: CuttingConditions
    x_axis: ModalAxis
    y_axis: ModalAxis

    def __post_init__(self):
        if self.conditions.radial_depth > self.tool.diameter:
            raise DomainError(
                f"radial_depth {self.conditions.radial_depth} exceeds tool diameter {self.tool.diameter}"
            )
        if len(self.x_axis.modes) != len(self.y_axis.modes):
            raise DomainError("x and y axes must carry the same number of modes")

    @property
    def period_angle(self) -> float:
        """Tooth-passing angle, the delay of the regenerative loop."""
        return 2.0 * math.pi / self.tool.teeth_count

    @property
    def modes_per_axis(self) -> int:
        return len(self.x_axis.modes)

    def with_conditions(self, **changes) -> "MillingScenario":
        """Copy with some cutting conditions replaced (speed, depth, ...)."""
        return dataclasses.replace(self, conditions=dataclasses.replace(self.conditions, **changes))


def window_of(scenario: MillingScenario) -> ImmersionWindow:
    return immersion_window(
        scenario.tool.direction, scenario.conditions.radial_depth, scenario.tool.diameter
    )


def periodic_coefficients(scenario: MillingScenario, steps: int, panels_per_interval: int = 32) -> PeriodicCoefficients:
    return averaged_coefficients(
        scenario.coefficients,
        window_of(scenario),
        scenario.tool.teeth_count,
        steps,
        panels_per_interval=panels_per_interval,
    )


def time_domain_model(scenario: MillingScenario) -> StateSpaceModel:
    return realize_modal(scenario.x_axis, scenario.y_axis)


def angle_domain_model(scenario: MillingScenario, spindle_speed: float | None = None) -> StateSpaceModel:
    speed = scenario.conditions.spindle_speed if spindle_speed is None else spindle_speed
    return to_angle_domain(time_domain_model(scenario), speed)


def discrete_model(
    scenario: MillingScenario,
    steps: int,
    hold: Hold,
    spindle_speed: float | None = None,
) -> DiscreteModel:
    model = angle_domain_model(scenario, spindle_speed)
    return discretize(model, scenario.period_angle / steps, hold)


def lifted_pair(
    scenario: MillingScenario,
    steps: int,
    hold: Hold,
    spindle_speed: float | None = None,
) -> tuple[LiftedModel, LiftedForce]:
    lm = lift_structure(discrete_model(scenario, steps, hold, spindle_speed), steps)
    lf = lift_force(periodic_coefficients(scenario, steps), scenario.conditions.feed)
    return lm, lf


def closed_loop(
    scenario: MillingScenario,
    steps: int,
    hold: Hold,
    spindle_speed: float | None = None,
    axial_depth: float | None = None,
) -> ClosedLoopSystem:
    lm, lf = lifted_pair(scenario, steps, hold, spindle_speed)
    depth = scenario.conditions.axial_depth if axial_depth is None else axial_depth
    return assemble_closed_loop(lm, lf, depth)
