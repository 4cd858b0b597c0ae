"""Regenerative milling dynamics: chatter stability lobes and surface error.

The pipeline models the cut as an angle-periodic delay system, discretizes
the structure exactly under zero-phase holds, lifts one tooth-passing period
into a shift-invariant system, and reads stability and steady-state surface
error off the resulting minimal period map.
"""

from .cutting_force import (
    CuttingCoefficients,
    CuttingConditions,
    Direction,
    ImmersionWindow,
    PeriodicCoefficients,
    ToolGeometry,
    averaged_coefficients,
    chip_thickness,
    directional_coefficients,
    engagement,
    immersion_window,
    rotation_matrix,
    tooth_angle,
)
from .errors import ConditioningError, ConfigError, DomainError, NumericalError, SingularModelError
from .lifting import ClosedLoopSystem, LiftedForce, LiftedModel, assemble_closed_loop, lift_force, lift_structure
from .oracles import (
    ClassicalMonodromy,
    DDESystem,
    SimulationResult,
    build_dde,
    classical_monodromy,
    classical_sdm,
    classical_steady_state,
    simulate_dde,
    trajectory_to_csv,
)
from .scenario import (
    MillingScenario,
    angle_domain_model,
    closed_loop,
    discrete_model,
    lifted_pair,
    periodic_coefficients,
    time_domain_model,
    window_of,
)
from .stability import (
    Classification,
    ConvergenceRecord,
    SLDGrid,
    StabilityVerdict,
    classify,
    convergence_curve,
    dominant_eigenvalue,
    normalized_time,
    relative_error,
    sld_grid,
    spectral_radius,
    stability_boundary,
    verdict,
)
from .structural import (
    DiscreteModel,
    Hold,
    ModalAxis,
    Mode,
    StateSpaceModel,
    discretize,
    matrix_exponential,
    realize_axes,
    realize_modal,
    to_angle_domain,
)
from .surface import (
    EdgeTrajectory,
    SLEMap,
    SLEResult,
    Sense,
    SteadyStateVibration,
    edge_trajectory,
    scenario_sle,
    sle_critical_speeds,
    sle_sweep,
    steady_state_vibration,
    surface_location_error,
)

__version__ = "0.1.0"
