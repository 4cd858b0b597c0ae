import numpy as np
import pytest

from millstab import (
    CuttingCoefficients,
    CuttingConditions,
    Direction,
    MillingScenario,
    ModalAxis,
    ToolGeometry,
)

# Two-axis benchmark cutting conditions used throughout the suite:
# 2-tooth 25 mm down-milling cutter, linear force model with edge terms,
# two bending modes per axis.
X_MODES = [(350.0, 0.042, 38.462e6), (540.0, 0.040, 1.681e6)]
Y_MODES = [(284.0, 0.054, 16.129e6), (554.0, 0.190, 6.579e6)]


def make_scenario(
    n_modes: int = 2,
    immersion_ratio: float = 0.5,
    axial_depth: float = 0.5e-3,
    spindle_speed: float = 12500.0,
    feed: tuple[float, float] = (0.2e-3, 0.0),
    direction: Direction = Direction.DOWN,
) -> MillingScenario:
    diameter = 25.0e-3
    return MillingScenario(
        tool=ToolGeometry(teeth_count=2, diameter=diameter, direction=direction),
        coefficients=CuttingCoefficients(
            tangential_cutting=838.7e6,
            normal_cutting=384.6e6,
            tangential_edge=19.59e3,
            normal_edge=21.18e3,
        ),
        conditions=CuttingConditions(
            axial_depth=axial_depth,
            radial_depth=immersion_ratio * diameter,
            spindle_speed=spindle_speed,
            feed_per_tooth=feed,
        ),
        x_axis=ModalAxis.from_hz(X_MODES[:n_modes]),
        y_axis=ModalAxis.from_hz(Y_MODES[:n_modes]),
    )


@pytest.fixture
def benchmark_scenario() -> MillingScenario:
    """Half-immersion two-mode scenario at the stable finishing point."""
    return make_scenario()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def random_stable_discrete(rng: np.random.Generator, dim: int = 6, inputs: int = 2, outputs: int = 2):
    """Random contractive discrete model for lifting tests."""
    from millstab import DiscreteModel, Hold

    A = rng.standard_normal((dim, dim))
    radius = np.max(np.abs(np.linalg.eigvals(A)))
    A *= 0.9 / radius
    return DiscreteModel(
        A_d=A,
        B_d=rng.standard_normal((dim, inputs)),
        C_d=rng.standard_normal((outputs, dim)),
        D_d=rng.standard_normal((outputs, inputs)),
        E_d=np.zeros((dim, inputs)),
        step_angle=0.05,
        hold=Hold.ZOH,
    )
