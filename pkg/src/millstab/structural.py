"""Modal structural dynamics: realization, angle-domain form, discretization.

The realization keeps one [displacement; velocity] block per mode, so the
state matrix is block-diagonal with 2x2 blocks, matrix exponentials have a
closed form, and the state count stays at the minimal 2 * modes * axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Literal, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, SingularModelError


class Hold(Enum):
    """Zero-phase reconstruction used to feed sampled forces to the structure."""

    IMP = "imp"  # impulse-invariance hold
    ZOH = "zoh"  # half-shifted zero-order hold


@dataclass(frozen=True)
class Mode:
    natural_frequency: float  # rad/s
    damping_ratio: float
    stiffness: float  # N/m

    def __post_init__(self):
        if not self.natural_frequency > 0.0:
            raise DomainError(f"natural_frequency must be positive, got {self.natural_frequency}")
        if not 0.0 < self.damping_ratio < 1.0:
            raise DomainError(f"damping_ratio must lie in (0, 1), got {self.damping_ratio}")
        if not self.stiffness > 0.0:
            raise DomainError(f"stiffness must be positive, got {self.stiffness}")


@dataclass(frozen=True)
class ModalAxis:
    modes: tuple[Mode, ...]

    def __post_init__(self):
        if len(self.modes) < 1:
            raise DomainError("axis needs at least one mode")

    @classmethod
    def from_hz(cls, modes: Sequence[tuple[float, float, float]]) -> "ModalAxis":
        """Build from (natural_frequency_hz, damping_ratio, stiffness) triples."""
        return cls(tuple(Mode(2.0 * math.pi * f, xi, k) for f, xi, k in modes))


@dataclass
class StateSpaceModel:
    """Linear structural model, either in time (per second) or angle (per rad)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    axes_count: int  # r
    modes_per_axis: int  # n
    domain: Literal["time", "angle"] = "time"
    angular_rate: float | None = None  # rad/s when domain == "angle"

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.C = np.asarray(self.C, dtype=float)
        dim = 2 * self.axes_count * self.modes_per_axis
        if self.A.shape != (dim, dim) or self.B.shape != (dim, self.axes_count) or self.C.shape != (self.axes_count, dim):
            raise DomainError(
                f"inconsistent dimensions for r={self.axes_count}, n={self.modes_per_axis}: "
                f"A {self.A.shape}, B {self.B.shape}, C {self.C.shape}"
            )

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]


@dataclass
class DiscreteModel:
    """Exact discrete-angle structural dynamics under a zero-phase hold.

    The state is the shifted ``p_k = q_k - E_d f_k``; iterating
    ``p_{k+1} = A_d p_k + B_d f_k`` with output ``z_k = C_d p_k + D_d f_k``
    reproduces the continuous states at the sample angles.
    """

    A_d: np.ndarray
    B_d: np.ndarray
    C_d: np.ndarray
    D_d: np.ndarray
    E_d: np.ndarray
    step_angle: float
    hold: Hold

    @property
    def state_dim(self) -> int:
        return self.A_d.shape[0]

    @property
    def output_dim(self) -> int:
        return self.C_d.shape[0]


def realize_axes(axes: Sequence[ModalAxis]) -> StateSpaceModel:
    """Realize per-axis modal sums as one block-diagonal state-space model.

    Each mode contributes a 2-state oscillator driven only by its own axis
    force; the output per axis is the sum of that axis's modal displacements.
    All axes must carry the same number of modes.
    """
    if not axes:
        raise DomainError("need at least one axis")
    counts = {len(axis.modes) for axis in axes}
    if len(counts) != 1:
        raise DomainError(f"axes must have equal mode counts, got {sorted(counts)}")
    r = len(axes)
    n = counts.pop()
    dim = 2 * n * r
    A = np.zeros((dim, dim))
    B = np.zeros((dim, r))
    C = np.zeros((r, dim))
    row = 0
    for i, axis in enumerate(axes):
        for mode in axis.modes:
            wn = mode.natural_frequency
            A[row, row + 1] = 1.0
            A[row + 1, row] = -wn * wn
            A[row + 1, row + 1] = -2.0 * mode.damping_ratio * wn
            B[row + 1, i] = wn * wn / mode.stiffness
            C[i, row] = 1.0
            row += 2
    return StateSpaceModel(A=A, B=B, C=C, axes_count=r, modes_per_axis=n, domain="time")


def realize_modal(x_axis: ModalAxis, y_axis: ModalAxis) -> StateSpaceModel:
    """Two-axis (x, y) modal realization."""
    return realize_axes([x_axis, y_axis])


def to_angle_domain(model: StateSpaceModel, spindle_speed: float) -> StateSpaceModel:
    """Rescale the independent variable from time to spindle angle."""
    if model.domain != "time":
        raise DomainError("model is already in the angle domain")
    if not spindle_speed > 0.0:
        raise DomainError(f"spindle_speed must be positive, got {spindle_speed}")
    omega = 2.0 * math.pi * spindle_speed / 60.0
    return replace(
        model,
        A=model.A / omega,
        B=model.B / omega,
        C=model.C.copy(),
        domain="angle",
        angular_rate=omega,
    )


def _expm_2x2(M: np.ndarray) -> np.ndarray:
    """Closed-form exponential of a real 2x2 matrix."""
    mu = 0.5 * (M[0, 0] + M[1, 1])
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    q = mu * mu - det
    # f = sinh(sqrt(q))/sqrt(q), g = cosh(sqrt(q)); series near q = 0
    if abs(q) < 1e-12:
        f = 1.0 + q / 6.0 + q * q / 120.0
        g = 1.0 + q / 2.0 + q * q / 24.0
    elif q > 0.0:
        s = math.sqrt(q)
        f = math.sinh(s) / s
        g = math.cosh(s)
    else:
        s = math.sqrt(-q)
        f = math.sin(s) / s
        g = math.cos(s)
    return math.exp(mu) * (g * np.eye(2) + f * (M - mu * np.eye(2)))


def _block_diagonal_2x2(M: np.ndarray) -> bool:
    dim = M.shape[0]
    if dim % 2 != 0:
        return False
    mask = np.ones_like(M, dtype=bool)
    for i in range(0, dim, 2):
        mask[i : i + 2, i : i + 2] = False
    return not np.any(M[mask])


def matrix_exponential(M: np.ndarray) -> np.ndarray:
    """exp(M) via closed-form 2x2 blocks when block-diagonal, else expm."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DomainError("matrix entries must be finite")
    if _block_diagonal_2x2(M):
        out = np.zeros_like(M)
        for i in range(0, M.shape[0], 2):
            out[i : i + 2, i : i + 2] = _expm_2x2(M[i : i + 2, i : i + 2])
        return out
    return scipy.linalg.expm(M)


def _solve_block_2x2(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A^-1 B with A block-diagonal (2x2), solved block by block."""
    out = np.zeros_like(B)
    for i in range(0, A.shape[0], 2):
        block = A[i : i + 2, i : i + 2]
        det = block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0]
        if det == 0.0 or not np.isfinite(det):
            raise SingularModelError(
                f"state block for mode {i // 2 + 1} is singular; cannot form the hold integral"
            )
        inv = np.array([[block[1, 1], -block[0, 1]], [-block[1, 0], block[0, 0]]]) / det
        out[i : i + 2] = inv @ B[i : i + 2]
    return out


def discretize(model: StateSpaceModel, step_angle: float, hold: Hold) -> DiscreteModel:
    """Exact zero-phase discretization of an angle-domain structural model.

    Impulse-invariance reconstructs the force as area-preserving impulses at
    the sample angles; the zero-order hold holds each sample over the
    half-shifted interval around it. Both leave A_d = exp(A * dtheta) and
    C_d unchanged; they differ in how the force enters.
    """
    if model.domain != "angle":
        raise DomainError("discretize expects an angle-domain model")
    if not step_angle > 0.0:
        raise DomainError(f"step_angle must be positive, got {step_angle}")
    A, B, C = model.A, model.B, model.C
    A_d = matrix_exponential(A * step_angle)
    if hold is Hold.IMP:
        B_d = A_d @ B * step_angle
        D_d = np.zeros((C.shape[0], B.shape[1]))
        E_d = np.zeros_like(B)
    elif hold is Hold.ZOH:
        half = matrix_exponential(A * (step_angle / 2.0))
        if _block_diagonal_2x2(A):
            ainv_b = _solve_block_2x2(A, B)
        else:
            try:
                ainv_b = np.linalg.solve(A, B)
            except np.linalg.LinAlgError as exc:
                raise SingularModelError(f"state matrix is singular: {exc}") from exc
        E_d = (half - np.eye(A.shape[0])) @ ainv_b
        B_d = half @ (A_d - np.eye(A.shape[0])) @ ainv_b
        D_d = C @ E_d
    else:
        raise DomainError(f"unknown hold {hold!r}")
    return DiscreteModel(
        A_d=A_d,
        B_d=B_d,
        C_d=C.copy(),
        D_d=D_d,
        E_d=E_d,
        step_angle=step_angle,
        hold=hold,
    )
