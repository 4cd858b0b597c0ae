"""Independent brute-force baselines used to validate the lifted pipeline.

Nothing here shares code with the lifted path beyond the continuous
coefficient functions: the simulator integrates the closed-loop delay
equation directly, and the classical period map stacks full states at every
sample the way the conventional discretization methods do, with dimension
r * 2n * (m + 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .cutting_force import (
    CuttingCoefficients,
    ImmersionWindow,
    _coefficient_sums,
    _engaged,
    _switch_angles,
    _tooth_angles,
    directional_coefficients,
)
from .errors import DomainError, SingularModelError
from .scenario import MillingScenario, angle_domain_model, window_of
from .structural import StateSpaceModel

MIN_SUBSTEPS = 500

# cubic Lagrange weights at the midpoint of the central interval
_MID_WEIGHTS = (-0.0625, 0.5625, 0.5625, -0.0625)


@dataclass
class DDESystem:
    """Closed-loop regenerative dynamics in delay form.

    ``q' = (A_p - B_p(theta)) q + B_p(theta) q(theta - delay) + w(theta)``
    with output ``dz = output_matrix @ q``. ``B_p`` and ``w`` are periodic
    with the delay.
    """

    A_p: np.ndarray
    B_p: Callable[[float], np.ndarray]
    w: Callable[[float], np.ndarray]
    delay: float
    output_matrix: np.ndarray


@dataclass
class ClassicalMonodromy:
    """Conventional augmented period map stacking m+1 full state samples."""

    Phi_a: np.ndarray
    sigma_a: np.ndarray
    steps: int
    state_dim: int  # single-sample state size 2nr
    output_matrix: np.ndarray


@dataclass
class SimulationResult:
    theta: np.ndarray  # (samples,)
    states: np.ndarray  # (samples, dim)
    outputs: np.ndarray  # (samples, axes)
    substeps_per_period: int
    periods: int
    diverged_at_period: int | None = None

    def period_samples(self, period: int) -> np.ndarray:
        """Outputs at the sample angles of one period (excluding its end)."""
        start = period * self.substeps_per_period
        return self.outputs[start : start + self.substeps_per_period]


def build_dde(scenario: MillingScenario) -> DDESystem:
    """Closed-loop delay system of a scenario, free of any discretization."""
    model = angle_domain_model(scenario)
    window = window_of(scenario)
    coeffs = scenario.coefficients
    teeth = scenario.tool.teeth_count
    ap = scenario.conditions.axial_depth
    feed = scenario.conditions.feed
    B_omega, C_omega = model.B, model.C

    def B_p(theta: float) -> np.ndarray:
        _, S = directional_coefficients(theta, coeffs, window, teeth)
        return ap * B_omega @ S @ C_omega

    def w(theta: float) -> np.ndarray:
        r, S = directional_coefficients(theta, coeffs, window, teeth)
        return ap * B_omega @ (r - S @ feed)

    return DDESystem(
        A_p=model.A,
        B_p=B_p,
        w=w,
        delay=scenario.period_angle,
        output_matrix=C_omega,
    )


def simulate_dde(
    system: DDESystem,
    initial_history: np.ndarray | None = None,
    horizon_periods: int = 50,
    substeps_per_period: int = 600,
) -> SimulationResult:
    """March the delay system with fixed-step 4th-order integration.

    The delay equals exactly ``substeps_per_period`` steps, so delayed states
    at full steps are stored samples; half-step stage lookups interpolate
    cubically through the four nearest stored samples. ``initial_history``
    covers one delay span inclusive, shape ``(substeps + 1, dim)``; the
    default is zero history with a small displacement impulse at start.
    """
    if substeps_per_period < MIN_SUBSTEPS:
        raise DomainError(f"substeps_per_period must be >= {MIN_SUBSTEPS}, got {substeps_per_period}")
    if horizon_periods < 1:
        raise DomainError("horizon_periods must be >= 1")
    dim = system.A_p.shape[0]
    P = substeps_per_period
    h = system.delay / P
    total = horizon_periods * P
    lead = P + 2  # index of theta = 0; two spare samples for the cubic stencil
    hist = np.zeros((lead + total + 1, dim))
    if initial_history is None:
        impulse = np.zeros(dim)
        impulse[0::2] = 1e-6  # displacement states only
        hist[lead] = impulse
    else:
        initial_history = np.asarray(initial_history, dtype=float)
        if initial_history.shape != (P + 1, dim):
            raise DomainError(f"initial_history must have shape ({P + 1}, {dim})")
        hist[2 : lead + 1] = initial_history

    A = system.A_p
    diverged_at = None

    def rate(q: np.ndarray, q_delayed: np.ndarray, Bp: np.ndarray, wv: np.ndarray) -> np.ndarray:
        return A @ q + Bp @ (q_delayed - q) + wv

    for i in range(total):
        theta = i * h
        j = lead + i
        q = hist[j]
        d0 = hist[i + 2]
        d1 = hist[i + 3]
        dmid = (
            _MID_WEIGHTS[0] * hist[i + 1]
            + _MID_WEIGHTS[1] * hist[i + 2]
            + _MID_WEIGHTS[2] * hist[i + 3]
            + _MID_WEIGHTS[3] * hist[i + 4]
        )
        Bp0 = system.B_p(theta)
        w0 = system.w(theta)
        Bph = system.B_p(theta + 0.5 * h)
        wh = system.w(theta + 0.5 * h)
        Bp1 = system.B_p(theta + h)
        w1 = system.w(theta + h)
        k1 = rate(q, d0, Bp0, w0)
        k2 = rate(q + 0.5 * h * k1, dmid, Bph, wh)
        k3 = rate(q + 0.5 * h * k2, dmid, Bph, wh)
        k4 = rate(q + h * k3, d1, Bp1, w1)
        q_next = q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(q_next)):
            diverged_at = i // P
            hist = hist[: j + 1]
            total = i
            break
        hist[j + 1] = q_next

    states = hist[lead : lead + total + 1]
    theta_axis = np.arange(total + 1) * h
    outputs = states @ system.output_matrix.T
    return SimulationResult(
        theta=theta_axis,
        states=states,
        outputs=outputs,
        substeps_per_period=P,
        periods=horizon_periods,
        diverged_at_period=diverged_at,
    )


def trajectory_to_csv(sim: SimulationResult, path) -> None:
    """Write the simulated relative motion for offline inspection."""
    with open(path, "w", newline="") as fh:
        fh.write("period_index,theta_rad,x_m,y_m\n")
        for i in range(len(sim.theta)):
            period = i // sim.substeps_per_period
            fh.write(
                f"{period},{sim.theta[i]:.12g},{sim.outputs[i, 0]:.12g},{sim.outputs[i, 1]:.12g}\n"
            )


def interval_average_coefficients(
    coeffs: CuttingCoefficients,
    window: ImmersionWindow,
    teeth_count: int,
    lo: float,
    hi: float,
    panels: int = 32,
) -> tuple[np.ndarray, np.ndarray]:
    """Mean of the force coefficients over [lo, hi], breakpoint-aware."""
    bounds = [lo, *_switch_angles(window, teeth_count, lo, hi), hi]
    width_total = hi - lo
    r_acc = np.zeros(2)
    s_acc = np.zeros((2, 2))
    for a, b in zip(bounds[:-1], bounds[1:]):
        width = b - a
        if width <= 1e-15 * width_total:
            continue
        mid_angles = _tooth_angles((a + b) / 2.0, teeth_count)
        mask = _engaged(mid_angles, window)
        if not mask.any():
            continue
        count = max(2, round(panels * width / width_total))
        nodes = np.linspace(a, b, count + 1)
        angles = _tooth_angles(nodes, teeth_count)
        r_nodes, s_nodes = _coefficient_sums(angles, np.broadcast_to(mask, angles.shape), coeffs)
        r_acc += np.trapezoid(r_nodes, nodes, axis=0)
        s_acc += np.trapezoid(s_nodes, nodes, axis=0)
    return r_acc / width_total, s_acc / width_total


def classical_monodromy(
    model: StateSpaceModel,
    edge_avgs: np.ndarray,
    directional_avgs: np.ndarray,
    feed: np.ndarray,
    axial_depth: float,
    period: float,
    steps: int,
) -> ClassicalMonodromy:
    """First-order semi-discretization period map with full-state stacking.

    Per step the current-state matrix is frozen at its interval average and
    the delayed state is linearly interpolated between its two neighbouring
    samples; the one-step integrals come from an augmented matrix
    exponential, so no state-matrix inverse is needed.
    """
    if model.domain != "angle":
        raise DomainError("classical_monodromy expects an angle-domain model")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    if not period > 0.0:
        raise DomainError(f"period must be positive, got {period}")
    m = steps
    d = model.state_dim
    edge_avgs = np.asarray(edge_avgs, dtype=float)
    directional_avgs = np.asarray(directional_avgs, dtype=float)
    feed = np.asarray(feed, dtype=float)
    if edge_avgs.shape[0] != m or directional_avgs.shape[0] != m:
        raise DomainError("need one averaged coefficient set per step")
    h = period / m
    A_w, B_w, C_w = model.A, model.B, model.C

    # blocks[i] tracks the map from the initial stacked state to q_{k-i};
    # only the top block changes per step, the rest shift down
    total = (m + 1) * d
    blocks = [np.zeros((d, total)) for _ in range(m + 1)]
    for i in range(m + 1):
        blocks[i][:, i * d : (i + 1) * d] = np.eye(d)
    forced = [np.zeros(d) for _ in range(m + 1)]

    eye = np.eye(d)
    zeros = np.zeros((d, d))
    for k in range(m):
        Sk = directional_avgs[k]
        rk = edge_avgs[k]
        Bdel = axial_depth * B_w @ Sk @ C_w
        A_k = A_w - Bdel
        w_k = axial_depth * B_w @ (rk - Sk @ feed)
        # one augmented exponential yields P = e^{A h}, the hold integral
        # M0 = int_0^h e^{A(h-s)} ds, and the first moment int e^{A(h-s)} s ds
        aug = np.block(
            [
                [A_k, eye, zeros],
                [zeros, zeros, eye],
                [zeros, zeros, zeros],
            ]
        )
        phi = expm(aug * h)
        P = phi[:d, :d]
        M0 = phi[:d, d : 2 * d]
        M1 = phi[:d, 2 * d :] / h
        R1 = M1 @ Bdel  # weight of q_{k-m+1}
        R0 = (M0 - M1) @ Bdel  # weight of q_{k-m}
        new_top = P @ blocks[0] + R1 @ blocks[m - 1] + R0 @ blocks[m]
        new_forced = P @ forced[0] + R1 @ forced[m - 1] + R0 @ forced[m] + M0 @ w_k
        blocks = [new_top] + blocks[:m]
        forced = [new_forced] + forced[:m]

    Phi_a = np.vstack(blocks)
    sigma_a = np.concatenate(forced)
    return ClassicalMonodromy(Phi_a=Phi_a, sigma_a=sigma_a, steps=m, state_dim=d, output_matrix=C_w)


def classical_sdm(scenario: MillingScenario, steps: int) -> ClassicalMonodromy:
    """Classical first-order semi-discretization of a milling scenario."""
    window = window_of(scenario)
    teeth = scenario.tool.teeth_count
    model = angle_domain_model(scenario)
    period = scenario.period_angle
    dtheta = period / steps
    edge = np.zeros((steps, 2))
    directional = np.zeros((steps, 2, 2))
    for k in range(steps):
        edge[k], directional[k] = interval_average_coefficients(
            scenario.coefficients, window, teeth, k * dtheta, (k + 1) * dtheta
        )
    return classical_monodromy(
        model,
        edge,
        directional,
        scenario.conditions.feed,
        scenario.conditions.axial_depth,
        period,
        steps,
    )


def classical_steady_state(cm: ClassicalMonodromy) -> np.ndarray:
    """Fixed-point vibration samples of the classical period map, (m, r)."""
    total = cm.Phi_a.shape[0]
    try:
        xi = np.linalg.solve(np.eye(total) - cm.Phi_a, cm.sigma_a)
    except np.linalg.LinAlgError as exc:
        raise SingularModelError(
            "classical period map has a unit eigenvalue (marginally stable)"
        ) from exc
    d = cm.state_dim
    m = cm.steps
    samples = np.empty((m, cm.output_matrix.shape[0]))
    for k in range(m):
        q_k = xi[(m - k) * d : (m - k + 1) * d]
        samples[k] = cm.output_matrix @ q_k
    return samples
